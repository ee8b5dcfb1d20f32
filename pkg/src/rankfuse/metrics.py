"""Quality metrics for aggregated rankings.

All metrics are built on the per-voter Kendall tau distances of a
candidate permutation:

* efficiency  — weighted mean distance (lower is better),
* fairness    — worst normalized-weight-scaled distance,
* weak Pareto optimality — survival against coordinate-wise domination
  of the distance vector within a candidate pool,
* diversity   — number of distinct outputs an aggregator reaches across
  random weight draws.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .perm import Permutation, VoterProfile, ktd_matrix

__all__ = [
    "ktd_vector",
    "efficiency",
    "fairness",
    "dominates",
    "pareto_front",
    "WeakPoResult",
    "weak_po",
    "precision",
    "recall",
    "sample_weight_vectors",
    "sample_outputs",
    "diversity",
    "build_candidate_pool",
]

Aggregator = Callable[[VoterProfile], Permutation]


def ktd_vector(profile: VoterProfile, p: Permutation) -> np.ndarray:
    """Normalized distance from p to each voter, in voter order."""
    if p.m != profile.m:
        raise ValueError("permutation size does not match profile")
    return ktd_matrix(np.array(p.items), profile.positions)[0]


def efficiency(profile: VoterProfile, p: Permutation) -> float:
    """(1/n) * sum_i w_i * d(p, p_i), using the stored weights as-is."""
    d = ktd_vector(profile, p)
    return float(np.dot(profile.weights, d) / profile.n)


def fairness(profile: VoterProfile, p: Permutation) -> float:
    """Worst-case normalized-weighted distance max_i w_hat_i * d(p, p_i)."""
    d = ktd_vector(profile, p)
    return float(np.max(profile.normalized_weights() * d))


# ---------------------------------------------------------------------------
# Pareto machinery


def dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    """True when a is <= b everywhere and strictly smaller somewhere."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return bool(np.all(a <= b) and np.any(a < b))


def pareto_front(points: np.ndarray) -> np.ndarray:
    """Boolean mask of rows not strictly dominated by any other row.

    A dominator always sorts lexicographically before its victim, so a
    single sweep in lex order only has to test each point against the
    front collected so far.
    """
    points = np.asarray(points, dtype=float)
    n, dim = points.shape
    order = np.lexsort(points.T[::-1])
    front = np.empty((64, dim))
    size = 0
    mask = np.zeros(n, dtype=bool)
    for idx in order:
        p = points[idx]
        view = front[:size]
        if size and bool(
            np.any(np.all(view <= p, axis=1) & np.any(view < p, axis=1))
        ):
            continue
        mask[idx] = True
        if size == front.shape[0]:
            front = np.concatenate([front, np.empty_like(front)])
        front[size] = p
        size += 1
    return mask


@dataclass(frozen=True)
class WeakPoResult:
    """Weak Pareto-optimal subset of a candidate pool."""

    members: frozenset[Permutation]
    vectors: dict[Permutation, tuple[float, ...]]


def weak_po(
    inputs: Sequence[Permutation], pool: Iterable[Permutation]
) -> WeakPoResult:
    """Pool members whose distance vector to ``inputs`` is undominated.

    Domination is coordinate-wise: another pool member must be at least
    as close to every input and strictly closer to one.  Inputs
    themselves are never dominated (their own coordinate is 0 and only
    an identical permutation could match it), so any input present in
    the pool is always a member.
    """
    inputs = list(inputs)
    if not inputs:
        raise ValueError("need at least one input permutation")
    m = inputs[0].m
    pool = list(dict.fromkeys(pool))
    if not pool:
        raise ValueError("candidate pool is empty")
    for p in itertools.chain(inputs, pool):
        if p.m != m:
            raise ValueError("mixed permutation sizes")
    positions = np.array([p.positions() for p in inputs])
    vecs = ktd_matrix(np.array([p.items for p in pool]), positions)
    mask = pareto_front(vecs)
    vectors = {p: tuple(vecs[i]) for i, p in enumerate(pool)}
    members = frozenset(p for i, p in enumerate(pool) if mask[i])
    return WeakPoResult(members=members, vectors=vectors)


def precision(outputs: set[Permutation], pareto: set[Permutation]) -> float | None:
    """Share of distinct outputs that are Pareto members; None if no outputs."""
    if not outputs:
        return None
    return len(outputs & pareto) / len(outputs)


def recall(outputs: set[Permutation], pareto: set[Permutation]) -> float | None:
    """Share of Pareto members reached by the outputs; None if P is empty."""
    if not pareto:
        return None
    return len(outputs & pareto) / len(pareto)


# ---------------------------------------------------------------------------
# Output sampling across random weight draws


def sample_weight_vectors(n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """k weight vectors, each uniform on [0,1]^n then normalized to sum 1."""
    w = rng.random((k, n))
    sums = w.sum(axis=1, keepdims=True)
    # an all-zero draw has probability zero; guard against it anyway
    bad = sums[:, 0] == 0.0
    if np.any(bad):
        w[bad] = 1.0
        sums = w.sum(axis=1, keepdims=True)
    return w / sums


def sample_outputs(
    aggregator: Aggregator,
    perms: Sequence[Permutation],
    num_samples: int,
    rng: np.random.Generator,
) -> list[Permutation]:
    """Aggregator outputs across ``num_samples`` random weight vectors."""
    perms = list(perms)
    items = np.array([p.items for p in perms])
    weights = sample_weight_vectors(len(perms), num_samples, rng)
    outs = []
    for i in range(num_samples):
        prof = VoterProfile.from_arrays(items, weights[i])
        outs.append(aggregator(prof))
    return outs


def diversity(
    aggregator: Aggregator,
    perms: Sequence[Permutation],
    num_samples: int,
    rng: np.random.Generator,
    pool_size: int | None = None,
) -> tuple[int, float]:
    """Distinct outputs over random weight draws: (count, count/denominator).

    The ratio denominator is ``num_samples`` unless the size of a
    candidate pool is supplied.
    """
    outs = sample_outputs(aggregator, perms, num_samples, rng)
    count = len(set(outs))
    return count, count / (pool_size if pool_size is not None else num_samples)


def build_candidate_pool(
    inputs: Sequence[Permutation],
    sampled_outputs: Iterable[Permutation],
    rng: np.random.Generator,
    n_random: int,
) -> set[Permutation]:
    """Candidate pool for weak-PO evaluation.

    For m <= 7 the pool is simply every permutation.  For larger m it is
    the union of all sampled aggregator outputs, the inputs themselves,
    and ``n_random`` uniformly random permutations.
    """
    m = inputs[0].m
    if m <= 7:
        return {
            Permutation(items) for items in itertools.permutations(range(m))
        }
    pool = set(inputs)
    pool.update(sampled_outputs)
    for _ in range(n_random):
        pool.add(Permutation(tuple(int(v) for v in rng.permutation(m))))
    return pool
