"""Experiment harnesses shared by the command-line interface and tests.

Four offline experiment loops over the aggregators:

* random-profile benchmark — mean efficiency and worst trial-averaged
  per-voter distance (fairness) over independent trials,
* weak-Pareto experiment — precision/recall/diversity of each
  aggregator's outputs across random weight draws on one instance,
* ratings-dataset protocol — the same statistics over sampled voter
  subsets of a real or synthetic permutation list,
* simplex sweep — the barycentric weight lattice mapped to output codes
  for three fixed rankings.

All but the sweep serialize to one flat CSV schema so results from
different experiments stack; absent metrics are empty fields.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .baselines import AGGREGATORS
from .benchgen import BenchmarkConfig, gen_profile, sample_voters, trial_rng
from .metrics import (
    Aggregator,
    build_candidate_pool,
    ktd_vector,
    precision,
    recall,
    sample_weight_vectors,
    weak_po,
)
from .perm import Permutation, VoterProfile, cantor_encode

__all__ = [
    "METRICS_HEADER",
    "MetricsRow",
    "format_metrics_csv",
    "resolve_aggregators",
    "run_bench",
    "run_dataset",
    "run_weakpo",
    "simplex_sweep",
]

METRICS_HEADER = (
    "aggregator,n,m,weight_mode,efficiency_mean,fairness_mean,"
    "diversity,precision,recall,samples,seed"
)


@dataclass(frozen=True)
class MetricsRow:
    """One aggregator's results in one experiment setting."""

    aggregator: str
    n: int
    m: int
    weight_mode: str
    efficiency_mean: float | None
    fairness_mean: float | None
    diversity: float | None
    precision: float | None
    recall: float | None
    samples: int
    seed: int

    def csv(self) -> str:
        def fmt(v: float | None) -> str:
            return "" if v is None else f"{v:.6f}"

        return ",".join(
            [
                self.aggregator,
                str(self.n),
                str(self.m),
                self.weight_mode,
                fmt(self.efficiency_mean),
                fmt(self.fairness_mean),
                fmt(self.diversity),
                fmt(self.precision),
                fmt(self.recall),
                str(self.samples),
                str(self.seed),
            ]
        )


def format_metrics_csv(rows: Iterable[MetricsRow]) -> str:
    return "\n".join([METRICS_HEADER, *(r.csv() for r in rows)]) + "\n"


def resolve_aggregators(names: Sequence[str] | None) -> dict[str, Aggregator]:
    """Name -> callable map in request order; all of them by default."""
    if not names:
        return dict(AGGREGATORS)
    out: dict[str, Aggregator] = {}
    for name in names:
        if name not in AGGREGATORS:
            raise ValueError(
                f"unknown aggregator {name!r}; known: {', '.join(sorted(AGGREGATORS))}"
            )
        out[name] = AGGREGATORS[name]
    return out


# ---------------------------------------------------------------------------
# Efficiency / fairness over random trials


def _trial_stats(
    named: dict[str, Aggregator], profile: VoterProfile
) -> tuple[np.ndarray, np.ndarray]:
    """Per-aggregator (mean distance, weighted per-voter distances)."""
    w_hat = profile.normalized_weights()
    eff = np.empty(len(named))
    fair = np.empty((len(named), profile.n))
    for j, agg in enumerate(named.values()):
        d = ktd_vector(profile, agg(profile))
        eff[j] = d.mean()
        fair[j] = w_hat * d
    return eff, fair


def _reduce_trials(
    named: dict[str, Aggregator],
    make_profile: Callable[[int], VoterProfile],
    trials: int,
    threads: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Trial-averaged statistics, reduced in trial order.

    Trials may be computed on a thread pool, but the floating-point
    reduction always walks them in index order so the result is
    bit-identical regardless of scheduling.
    """

    def one(t: int) -> tuple[np.ndarray, np.ndarray]:
        return _trial_stats(named, make_profile(t))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            pairs: Iterable = pool.map(one, range(trials))
            eff_sum, fair_sum = map(sum, zip(*pairs))
    else:
        eff_sum, fair_sum = map(sum, zip(*map(one, range(trials))))
    return eff_sum / trials, fair_sum / trials


def run_bench(
    config: BenchmarkConfig,
    algos: Sequence[str] | None = None,
    threads: int = 1,
) -> list[MetricsRow]:
    """Efficiency/fairness of each aggregator on random profiles.

    Efficiency is the plain mean distance to the voters (weights enter
    the aggregators, not the metric); fairness is the worst voter's
    trial-averaged normalized-weighted distance.  Each trial draws its
    profile from an independent seed-indexed stream.
    """
    named = resolve_aggregators(algos)
    eff, fair = _reduce_trials(
        named,
        lambda t: gen_profile(config, trial_rng(config.seed, t)),
        config.trials,
        threads,
    )
    return [
        MetricsRow(
            aggregator=name,
            n=config.n,
            m=config.m,
            weight_mode=config.weight_mode,
            efficiency_mean=float(eff[j]),
            fairness_mean=float(fair[j].max()),
            diversity=None,
            precision=None,
            recall=None,
            samples=config.trials,
            seed=config.seed,
        )
        for j, name in enumerate(named)
    ]


def run_dataset(
    perms: Sequence[Permutation],
    voters: int,
    trials: int,
    seed: int,
    algos: Sequence[str] | None = None,
    threads: int = 1,
) -> list[MetricsRow]:
    """Efficiency/fairness over sampled voter subsets of a permutation list.

    Each trial samples ``voters`` permutations without replacement
    (unit weights) and evaluates every aggregator on that profile.
    """
    perms = list(perms)
    named = resolve_aggregators(algos)
    eff, fair = _reduce_trials(
        named,
        lambda t: sample_voters(perms, voters, trial_rng(seed, t)),
        trials,
        threads,
    )
    return [
        MetricsRow(
            aggregator=name,
            n=voters,
            m=perms[0].m,
            weight_mode="uniform",
            efficiency_mean=float(eff[j]),
            fairness_mean=float(fair[j].max()),
            diversity=None,
            precision=None,
            recall=None,
            samples=trials,
            seed=seed,
        )
        for j, name in enumerate(named)
    ]


# ---------------------------------------------------------------------------
# Weak-Pareto experiment


def run_weakpo(
    profile: VoterProfile,
    samples: int,
    seed: int,
    algos: Sequence[str] | None = None,
    pool_extra: int | None = None,
) -> list[MetricsRow]:
    """Precision/recall/diversity of each aggregator on one instance.

    Every aggregator sees the same ``samples`` random weight vectors.
    The candidate pool is every permutation when the item count allows,
    otherwise the union of all aggregators' outputs, the inputs, and
    ``pool_extra`` uniformly random permutations (default 10x samples).
    Diversity is reported as distinct outputs over the pool size.
    """
    if samples < 1:
        raise ValueError("need at least one weight sample")
    named = resolve_aggregators(algos)
    inputs = [profile.voter(i) for i in range(profile.n)]
    if pool_extra is None:
        pool_extra = 10 * samples
    weights = sample_weight_vectors(profile.n, samples, trial_rng(seed, 0))
    outputs: dict[str, list[Permutation]] = {name: [] for name in named}
    for i in range(samples):
        prof = VoterProfile.from_arrays(profile.items, weights[i])
        for name, agg in named.items():
            outputs[name].append(agg(prof))
    pool = build_candidate_pool(
        inputs,
        (p for outs in outputs.values() for p in outs),
        trial_rng(seed, 1),
        pool_extra,
    )
    front = set(weak_po(inputs, pool).members)
    rows = []
    for name in named:
        distinct = set(outputs[name])
        rows.append(
            MetricsRow(
                aggregator=name,
                n=profile.n,
                m=profile.m,
                weight_mode="random",
                efficiency_mean=None,
                fairness_mean=None,
                diversity=len(distinct) / len(pool),
                precision=precision(distinct, front),
                recall=recall(distinct, front),
                samples=samples,
                seed=seed,
            )
        )
    return rows


# ---------------------------------------------------------------------------
# Simplex sweep


def simplex_sweep(
    targets: Sequence[Permutation],
    grid: int,
    algo: str = "tournament_greedy",
) -> list[tuple[float, float, float, int]]:
    """Map the barycentric weight lattice to output codes.

    Rows are (x, y, z, code) over the lattice x+y+z = 1 with step
    1/grid, x descending then y descending; the code is the output
    permutation's lexicographic index, so equal codes mean equal
    outputs.
    """
    targets = list(targets)
    if len(targets) != 3:
        raise ValueError("simplex sweep needs exactly three rankings")
    if grid < 1:
        raise ValueError("grid must be at least 1")
    agg = resolve_aggregators([algo])[algo]
    rows = []
    for i in range(grid, -1, -1):
        for j in range(grid - i, -1, -1):
            k = grid - i - j
            prof = VoterProfile(targets, np.array([i, j, k]) / grid)
            rows.append((i / grid, j / grid, k / grid, cantor_encode(agg(prof))))
    return rows
