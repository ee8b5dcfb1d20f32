"""Benchmark instance generation and ratings-file ingestion.

Random benchmarks draw n pairwise-distinct permutations of m items per
trial, either unweighted or with random normalized voter weights.  Real
datasets arrive as sparse (voter, item, rating) tables; voters who rated
every item contribute one permutation each, sorted by rating.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .perm import Permutation, VoterProfile

__all__ = [
    "BenchmarkConfig",
    "RatingsTable",
    "bundled_ratings",
    "gen_profile",
    "parse_permutation_lines",
    "parse_ratings_csv",
    "ratings_to_permutations",
    "sample_voters",
    "synthetic_ratings",
    "trial_rng",
    "write_ratings_csv",
]

WEIGHT_MODES = ("uniform", "random")


@dataclass(frozen=True)
class BenchmarkConfig:
    """One random-benchmark setting: profile shape, weighting, and size."""

    m: int
    n: int
    weight_mode: str = "uniform"
    trials: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.m < 2:
            raise ValueError("need at least two items")
        if self.n < 1:
            raise ValueError("need at least one voter")
        if self.trials < 1:
            raise ValueError("need at least one trial")
        if self.weight_mode not in WEIGHT_MODES:
            raise ValueError(f"weight_mode must be one of {WEIGHT_MODES}")


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent, order-free RNG stream for one trial of a run."""
    return np.random.default_rng([seed, trial])


def gen_profile(config: BenchmarkConfig, rng: np.random.Generator) -> VoterProfile:
    """Draw one random profile: n distinct permutations plus weights.

    Distinctness comes from rejection sampling with a total attempt cap
    of 100*n; the cap is only reachable when n approaches m!, which the
    precondition already rejects for small m.
    """
    m, n = config.m, config.n
    if m <= 20 and n > math.factorial(m):
        raise ValueError(f"cannot draw {n} distinct permutations of {m} items")
    rows = np.empty((n, m), dtype=np.int64)
    seen: set[bytes] = set()
    found = 0
    for _ in range(100 * n):
        if found == n:
            break
        draw = rng.permutation(m)
        key = draw.tobytes()
        if key in seen:
            continue
        seen.add(key)
        rows[found] = draw
        found += 1
    if found < n:
        raise RuntimeError(
            f"rejection sampling failed to find {n} distinct permutations"
        )
    if config.weight_mode == "random":
        weights = 1.0 - rng.random(n)  # U(0, 1], never zero
        weights = weights / weights.sum()
    else:
        weights = np.ones(n)
    return VoterProfile.from_arrays(rows, weights)


# ---------------------------------------------------------------------------
# Ratings tables


@dataclass(frozen=True)
class RatingsTable:
    """Sparse ratings: (voter id, item id, rating) rows over m items.

    Voter ids are kept verbatim as strings so that serialization is
    loss-free.  Each (voter, item) pair may appear at most once.
    """

    rows: tuple[tuple[str, int, float], ...]
    m: int

    def __post_init__(self) -> None:
        seen: set[tuple[str, int]] = set()
        for voter, item, rating in self.rows:
            if not 0 <= item < self.m:
                raise ValueError(f"item {item} outside universe of size {self.m}")
            if not math.isfinite(rating):
                raise ValueError(f"non-finite rating for voter {voter!r}")
            key = (voter, item)
            if key in seen:
                raise ValueError(f"duplicate rating for voter {voter!r}, item {item}")
            seen.add(key)

    @classmethod
    def from_rows(
        cls, rows: Sequence[tuple[str, int, float]], m: int | None = None
    ) -> "RatingsTable":
        rows = tuple((str(v), int(i), float(r)) for v, i, r in rows)
        if m is None:
            if not rows:
                raise ValueError("cannot infer item universe from an empty table")
            m = max(item for _, item, _ in rows) + 1
        return cls(rows=rows, m=m)


def parse_ratings_csv(path: str) -> RatingsTable:
    """Read a `voter,item,rating` CSV; malformed rows fail with their line."""
    rows: list[tuple[str, int, float]] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["voter", "item", "rating"]:
            raise ValueError(f"{path}: expected header voter,item,rating")
        for lineno, record in enumerate(reader, start=2):
            if not record:
                continue
            if len(record) != 3:
                raise ValueError(f"{path} line {lineno}: expected 3 fields")
            voter, item_s, rating_s = record
            try:
                item = int(item_s)
                rating = float(rating_s)
            except ValueError as exc:
                raise ValueError(f"{path} line {lineno}: {exc}") from None
            rows.append((voter, item, rating))
    return RatingsTable.from_rows(rows)


def write_ratings_csv(table: RatingsTable, path: str) -> None:
    """Serialize so that :func:`parse_ratings_csv` round-trips exactly."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["voter", "item", "rating"])
        for voter, item, rating in table.rows:
            writer.writerow([voter, item, repr(rating)])


def parse_permutation_lines(text: str, source: str = "<input>") -> list[Permutation]:
    """Parse the one-comma-separated-permutation-per-line text format.

    Blank lines and ``#`` comment lines are skipped; every permutation
    must cover the same item set.
    """
    perms: list[Permutation] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            items = tuple(int(tok) for tok in line.split(","))
            perm = Permutation(items)
        except ValueError as exc:
            raise ValueError(f"{source} line {lineno}: {exc}") from None
        if perms and perm.m != perms[0].m:
            raise ValueError(
                f"{source} line {lineno}: expected {perms[0].m} items, got {perm.m}"
            )
        perms.append(perm)
    if not perms:
        raise ValueError(f"{source}: no permutations found")
    return perms


def ratings_to_permutations(table: RatingsTable) -> list[tuple[str, Permutation]]:
    """One permutation per complete voter, best-rated item first.

    Voters missing any of the m items are dropped.  Ties in rating break
    toward the smaller item id.  Voters appear in first-rating order.
    """
    by_voter: dict[str, dict[int, float]] = {}
    for voter, item, rating in table.rows:
        by_voter.setdefault(voter, {})[item] = rating
    out: list[tuple[str, Permutation]] = []
    for voter, ratings in by_voter.items():
        if len(ratings) != table.m:
            continue
        order = sorted(range(table.m), key=lambda i: (-ratings[i], i))
        out.append((voter, Permutation(tuple(order))))
    return out


def sample_voters(
    perms: Sequence[Permutation], k: int, rng: np.random.Generator
) -> VoterProfile:
    """Profile of k permutations sampled without replacement, weights 1."""
    perms = list(perms)
    if k < 1:
        raise ValueError("need at least one voter")
    if k > len(perms):
        raise ValueError(f"cannot sample {k} voters from {len(perms)}")
    idx = rng.choice(len(perms), size=k, replace=False)
    return VoterProfile([perms[int(i)] for i in idx], np.ones(k))


# ---------------------------------------------------------------------------
# Bundled fixture


def bundled_ratings() -> RatingsTable:
    """The ratings table shipped with the package for offline runs."""
    from importlib.resources import as_file, files

    ref = files(__package__) / "data" / "synthetic_ratings.csv"
    with as_file(ref) as path:
        return parse_ratings_csv(str(path))


def synthetic_ratings(
    num_voters: int = 200, m: int = 10, seed: int = 20240311
) -> RatingsTable:
    """Deterministic synthetic ratings table used as the CI stand-in.

    Ratings land on a half-point scale so ties occur, and a handful of
    voters skip one item so that completeness filtering is exercised.
    """
    rng = np.random.default_rng(seed)
    rows: list[tuple[str, int, float]] = []
    for v in range(num_voters):
        ratings = rng.integers(2, 11, size=m) / 2.0  # 1.0 .. 5.0 by halves
        items = list(range(m))
        if rng.random() < 0.05:
            items.remove(int(rng.integers(m)))
        for i in items:
            rows.append((str(v), i, float(ratings[i])))
    return RatingsTable.from_rows(rows, m=m)
