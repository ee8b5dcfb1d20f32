"""Permutation primitives shared by every aggregator and metric.

A permutation over ``m`` items is the arrangement ``items`` where
``items[k]`` is the item id shown at position ``k`` (position 0 is the
front of the list).  Item ids are exactly ``0..m-1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Permutation",
    "VoterProfile",
    "identity_permutation",
    "inverse",
    "kendall_tau",
    "kendall_tau_pair_count",
    "discordant_pairs",
    "ktd_matrix",
    "cantor_encode",
    "cantor_decode",
    "lehmer_code",
    "lehmer_decode",
    "parse_permutation",
    "format_permutation",
    "random_permutation",
]

_CODE_MAX_M = 20  # largest m whose factorial fits in a signed 64-bit code


@dataclass(frozen=True)
class Permutation:
    """Immutable arrangement of the items ``0..m-1``."""

    items: tuple[int, ...]

    def __post_init__(self) -> None:
        items = tuple(int(v) for v in self.items)
        object.__setattr__(self, "items", items)
        m = len(items)
        if m == 0:
            raise ValueError("permutation must contain at least one item")
        if len(set(items)) != m or min(items) != 0 or max(items) != m - 1:
            raise ValueError(f"not a permutation of 0..{m - 1}: {items}")

    @property
    def m(self) -> int:
        return len(self.items)

    def positions(self) -> tuple[int, ...]:
        """Position of each item: positions()[v] is where item v sits."""
        pos = [0] * len(self.items)
        for k, v in enumerate(self.items):
            pos[v] = k
        return tuple(pos)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"Permutation({format_permutation(self)})"


def identity_permutation(m: int) -> Permutation:
    if m < 1:
        raise ValueError("m must be >= 1")
    return Permutation(tuple(range(m)))


def inverse(p: Permutation) -> Permutation:
    """Group inverse: maps each item id to its position in ``p``."""
    return Permutation(p.positions())


class VoterProfile:
    """A weighted collection of voter permutations over a shared item set.

    Weights are kept exactly as given (aggregators that need normalized
    weights call :meth:`normalized_weights`).  Instances are treated as
    immutable; the cached position matrix is shared freely.
    """

    __slots__ = ("_perms", "weights", "items", "positions")

    def __init__(
        self,
        permutations: Sequence[Permutation],
        weights: Iterable[float] | None = None,
    ) -> None:
        perms = tuple(permutations)
        if not perms:
            raise ValueError("profile needs at least one voter")
        m = perms[0].m
        for p in perms:
            if p.m != m:
                raise ValueError("all voters must rank the same item set")
        if weights is None:
            w = np.ones(len(perms))
        else:
            w = np.asarray(list(weights), dtype=float)
        if w.shape != (len(perms),):
            raise ValueError("one weight per voter required")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValueError("weights must be finite and non-negative")
        if not np.any(w > 0):
            raise ValueError("at least one weight must be positive")
        items = np.array([p.items for p in perms], dtype=np.int64)
        positions = np.empty_like(items)
        rows = np.arange(len(perms))[:, None]
        positions[rows, items] = np.arange(m)[None, :]
        object.__setattr__(self, "_perms", perms)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "items", items)
        object.__setattr__(self, "positions", positions)

    @classmethod
    def from_arrays(cls, items: np.ndarray, weights: np.ndarray) -> "VoterProfile":
        """Trusted fast path: rows of ``items`` must already be permutations."""
        self = object.__new__(cls)
        items = np.asarray(items, dtype=np.int64)
        n, m = items.shape
        positions = np.empty_like(items)
        positions[np.arange(n)[:, None], items] = np.arange(m)[None, :]
        object.__setattr__(self, "_perms", None)
        object.__setattr__(self, "weights", np.asarray(weights, dtype=float))
        object.__setattr__(self, "items", items)
        object.__setattr__(self, "positions", positions)
        return self

    @property
    def permutations(self) -> tuple[Permutation, ...]:
        if self._perms is None:
            perms = tuple(
                Permutation(tuple(int(v) for v in row)) for row in self.items
            )
            object.__setattr__(self, "_perms", perms)
        return self._perms

    @property
    def n(self) -> int:
        return self.items.shape[0]

    @property
    def m(self) -> int:
        return self.items.shape[1]

    def voter(self, i: int) -> Permutation:
        if self._perms is not None:
            return self._perms[i]
        return Permutation(tuple(int(v) for v in self.items[i]))

    def normalized_weights(self) -> np.ndarray:
        return self.weights / self.weights.sum()

    def __setattr__(self, name, value):  # noqa: ANN001
        raise AttributeError("VoterProfile is immutable")


# ---------------------------------------------------------------------------
# Kendall tau distance


def _check_pair(p: Permutation, q: Permutation) -> int:
    if p.m != q.m:
        raise ValueError(f"size mismatch: {p.m} vs {q.m}")
    return p.m


def _relative_sequence(p: Permutation, q: Permutation) -> list[int]:
    """p's items rewritten as their positions in q.

    The pair (p, q) disagrees on an item pair exactly when the rewritten
    sequence has an inversion, so distance computations reduce to
    inversion counting on this sequence.
    """
    qpos = q.positions()
    return [qpos[v] for v in p.items]


def _merge_count(seq: list[int]) -> int:
    """Inversions via merge sort, O(m log m)."""
    n = len(seq)
    if n < 2:
        return 0
    buf = list(seq)
    tmp = [0] * n
    count = 0
    width = 1
    while width < n:
        for lo in range(0, n, 2 * width):
            mid = min(lo + width, n)
            hi = min(lo + 2 * width, n)
            if mid >= hi:
                continue
            i, j, k = lo, mid, lo
            while i < mid and j < hi:
                if buf[i] <= buf[j]:
                    tmp[k] = buf[i]
                    i += 1
                else:
                    tmp[k] = buf[j]
                    count += mid - i
                    j += 1
                k += 1
            tmp[k:hi] = buf[i:mid] if i < mid else buf[j:hi]
            buf[lo:hi] = tmp[lo:hi]
        width *= 2
    return count


def discordant_pairs(p: Permutation, q: Permutation) -> int:
    """Number of item pairs ordered oppositely by p and q."""
    _check_pair(p, q)
    return _merge_count(_relative_sequence(p, q))


def kendall_tau(p: Permutation, q: Permutation) -> float:
    """Normalized Kendall tau distance in [0, 1].

    Defined as the fraction of the m(m-1)/2 item pairs on which the two
    permutations disagree.  A single item (no pairs) gives distance 0.
    """
    m = _check_pair(p, q)
    if m == 1:
        return 0.0
    return 2.0 * discordant_pairs(p, q) / (m * (m - 1))


def kendall_tau_pair_count(p: Permutation, q: Permutation) -> float:
    """Reference route: direct O(m^2) scan over all item pairs."""
    m = _check_pair(p, q)
    if m == 1:
        return 0.0
    ppos = p.positions()
    qpos = q.positions()
    count = 0
    for u in range(m):
        for v in range(u + 1, m):
            if (ppos[u] - ppos[v]) * (qpos[u] - qpos[v]) < 0:
                count += 1
    return 2.0 * count / (m * (m - 1))


def ktd_matrix(outputs: np.ndarray, positions: np.ndarray) -> np.ndarray:
    """Normalized KTD between each output row and each position row.

    ``outputs`` is (k, m) of item ids; ``positions`` is (n, m) giving each
    voter's item->position map.  Returns a (k, n) float array.
    """
    outputs = np.asarray(outputs, dtype=np.int64)
    if outputs.ndim == 1:
        outputs = outputs[None, :]
    m = outputs.shape[1]
    if positions.shape[1] != m:
        raise ValueError("size mismatch between outputs and positions")
    if m == 1:
        return np.zeros((outputs.shape[0], positions.shape[0]))
    # mapped[v, o, t] = voter v's position of the item shown at slot t by o
    mapped = positions[:, outputs]
    iu, ju = np.triu_indices(m, 1)
    disc = (mapped[:, :, iu] > mapped[:, :, ju]).sum(axis=2)
    return (2.0 / (m * (m - 1))) * disc.T


# ---------------------------------------------------------------------------
# Lehmer digits and the Cantor (lexicographic rank) code


def lehmer_code(p: Permutation) -> tuple[int, ...]:
    """Digit t counts later items smaller than the item at position t."""
    items = p.items
    m = len(items)
    digits = []
    for t in range(m):
        v = items[t]
        digits.append(sum(1 for s in range(t + 1, m) if items[s] < v))
    return tuple(digits)


def lehmer_decode(digits: Sequence[int]) -> Permutation:
    m = len(digits)
    if m == 0:
        raise ValueError("empty digit sequence")
    remaining = list(range(m))
    items = []
    for t, d in enumerate(digits):
        if not 0 <= d <= m - 1 - t:
            raise ValueError(f"digit {d} out of range at position {t}")
        items.append(remaining.pop(d))
    return Permutation(tuple(items))


def cantor_encode(p: Permutation) -> int:
    """Lexicographic rank of p among all permutations of its size (0-based)."""
    m = p.m
    if m > _CODE_MAX_M:
        raise ValueError(f"codes support m <= {_CODE_MAX_M}, got {m}")
    code = 0
    for t, d in enumerate(lehmer_code(p)):
        code += d * math.factorial(m - 1 - t)
    return code


def cantor_decode(code: int, m: int) -> Permutation:
    if not 1 <= m <= _CODE_MAX_M:
        raise ValueError(f"m must be in 1..{_CODE_MAX_M}, got {m}")
    if not 0 <= code < math.factorial(m):
        raise ValueError(f"code {code} out of range for m={m}")
    digits = []
    for t in range(m):
        f = math.factorial(m - 1 - t)
        digits.append(code // f)
        code %= f
    return lehmer_decode(digits)


# ---------------------------------------------------------------------------
# Text form and sampling


def format_permutation(p: Permutation) -> str:
    return ",".join(str(v) for v in p.items)


def parse_permutation(text: str) -> Permutation:
    parts = text.strip().split(",")
    try:
        items = tuple(int(part) for part in parts)
    except ValueError as exc:
        raise ValueError(f"invalid permutation text: {text!r}") from exc
    return Permutation(items)


def random_permutation(m: int, rng: np.random.Generator) -> Permutation:
    if m < 1:
        raise ValueError("m must be >= 1")
    return Permutation(tuple(int(v) for v in rng.permutation(m)))
