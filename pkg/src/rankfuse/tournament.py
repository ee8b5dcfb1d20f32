"""Greedy consensus ranking built on a weighted pairwise tournament.

For a profile of voter permutations with weights w, the tournament margin

    margin[i][j] = sum_k w_k * sign(pos_k(j) - pos_k(i))

is positive exactly when the weighted electorate puts item i before item
j more strongly than the reverse.  The greedy aggregator repeatedly picks
the item whose supporting margins, measured on the still-unplaced items,
give it the largest score, and appends it to the output front to back.
Finding the true minimizer of the weighted mean Kendall tau distance is
NP-hard; this greedy pass is a fast approximation of it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .perm import Permutation, VoterProfile

__all__ = [
    "TournamentGraph",
    "build_tournament",
    "greedy_score",
    "tournament_greedy",
    "tournament_greedy_decayed",
]


@dataclass(frozen=True)
class TournamentGraph:
    """Antisymmetric margin matrix over the full item set."""

    margin: np.ndarray

    @property
    def m(self) -> int:
        return self.margin.shape[0]


def _sign_tensor(profile: VoterProfile) -> np.ndarray:
    """Per-voter pairwise order: sgn[k, i, j] = +1 when voter k puts i first."""
    pos = profile.positions
    return np.sign(pos[:, None, :] - pos[:, :, None]).astype(float)


def build_tournament(profile: VoterProfile) -> TournamentGraph:
    margin = np.tensordot(profile.weights, _sign_tensor(profile), axes=1)
    return TournamentGraph(margin=margin)


def greedy_score(graph: TournamentGraph, alive: Iterable[int], i: int) -> float:
    """Selection score of item i among the still-unplaced items.

    With S the alive items i currently beats (positive margin) and O the
    ones beating i, the score is the win fraction times the net root
    margin:

        (|S| / (|alive| - 1)) * (sum_S sqrt(margin) - sum_O sqrt(-margin))

    Zero margins contribute to neither sum nor to |S|.
    """
    alive = list(dict.fromkeys(int(a) for a in alive))
    if len(alive) < 2:
        raise ValueError("need at least two alive items")
    if i not in alive:
        raise ValueError(f"item {i} is not alive")
    others = np.array([a for a in alive if a != i])
    margins = graph.margin[i, others]
    sup = margins > 0
    opp = margins < 0
    total = np.sqrt(margins[sup]).sum() - np.sqrt(-margins[opp]).sum()
    return float(sup.sum() / (len(alive) - 1) * total)


def _greedy_order(m: int, margin_at: Callable[[int], np.ndarray]) -> Permutation:
    """Front-to-back greedy selection.

    ``margin_at(k)`` supplies the margin matrix in effect while the item
    for 1-based output position k is being chosen.  Ties go to the
    smallest item id (argmax returns the first maximum and ``alive``
    stays sorted).
    """
    alive = np.arange(m)
    out = []
    for k in range(1, m + 1):
        if alive.size == 1:
            out.append(int(alive[0]))
            break
        sub = margin_at(k)[np.ix_(alive, alive)]
        supported = sub > 0
        contrib = np.sqrt(np.where(supported, sub, 0.0))
        contrib -= np.sqrt(np.where(sub < 0, -sub, 0.0))
        totals = contrib.sum(axis=1)
        scores = supported.sum(axis=1) / (alive.size - 1) * totals
        pick = int(np.argmax(scores))
        out.append(int(alive[pick]))
        alive = np.delete(alive, pick)
    return Permutation(tuple(out))


def tournament_greedy(profile: VoterProfile) -> Permutation:
    """Greedy consensus permutation for the weighted profile."""
    margin = build_tournament(profile).margin
    return _greedy_order(profile.m, lambda k: margin)


def tournament_greedy_decayed(
    profile: VoterProfile, decay: Sequence[float]
) -> Permutation:
    """Greedy consensus with per-voter positional decay.

    While filling 1-based output position k, voter i's weight is scaled
    to ``w_i * decay_i**k``, so voters with small decay mostly influence
    the head of the list.  All decay factors equal to 1 reproduce
    :func:`tournament_greedy` exactly.
    """
    gamma = np.asarray(list(decay), dtype=float)
    if gamma.shape != (profile.n,):
        raise ValueError("one decay factor per voter required")
    if np.any(gamma <= 0.0) or np.any(gamma > 1.0):
        raise ValueError("decay factors must lie in (0, 1]")
    sgn = _sign_tensor(profile)

    def margin_at(k: int) -> np.ndarray:
        return np.tensordot(profile.weights * gamma**k, sgn, axes=1)

    return _greedy_order(profile.m, margin_at)
