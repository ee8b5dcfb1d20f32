"""Classic single-pass rank aggregators used as comparison baselines."""

from __future__ import annotations

import math

import numpy as np

from .perm import (
    Permutation,
    VoterProfile,
    cantor_decode,
    cantor_encode,
    inverse,
    lehmer_decode,
)
from .tournament import tournament_greedy

__all__ = [
    "dictator",
    "borda",
    "lehmer_mode",
    "copeland",
    "average_encode",
    "AGGREGATORS",
]


def dictator(profile: VoterProfile) -> Permutation:
    """Copy the heaviest voter (ties go to the lowest voter index)."""
    return profile.voter(int(np.argmax(profile.weights)))


def borda(profile: VoterProfile) -> Permutation:
    """Sort items by weighted mean position, ascending; ties to smaller id."""
    scores = profile.normalized_weights() @ profile.positions
    order = np.argsort(scores, kind="stable")
    return Permutation(tuple(int(v) for v in order))


def lehmer_mode(profile: VoterProfile) -> Permutation:
    """Digit-wise weighted mode of the voters' rank-vector Lehmer codes.

    Each voter is encoded as the Lehmer digits of its rank vector (entry
    v = the position voter k gives item v); digit t counts later entries
    smaller than entry t.  The aggregate takes the weighted mode per
    digit (ties to the smaller digit), decodes the digits back into a
    rank vector, and returns the ordering that realizes those ranks.
    Any digit vector decodes to a valid rank vector, so the output is
    total.
    """
    ranks = profile.positions
    n, m = ranks.shape
    # digits[k, t] = number of entries s > t with a smaller rank value
    later_smaller = (ranks[:, None, :] < ranks[:, :, None]) & np.triu(
        np.ones((m, m), dtype=bool), 1
    )
    digits = later_smaller.sum(axis=2)
    w = profile.weights
    out_digits = []
    for t in range(m):
        acc = np.zeros(m - t)
        np.add.at(acc, digits[:, t], w)
        out_digits.append(int(np.argmax(acc)))
    return inverse(lehmer_decode(out_digits))


def copeland(profile: VoterProfile) -> Permutation:
    """Sort by count of strict weighted-majority pairwise wins.

    Item i beats j when strictly more than half the normalized weight
    puts i before j; an exact split yields no win either way.  Ties in
    the win count go to the smaller item id.
    """
    pos = profile.positions
    w = profile.normalized_weights()
    share = np.tensordot(w, pos[:, :, None] < pos[:, None, :], axes=1)
    wins = (share > 0.5).sum(axis=1)
    order = np.lexsort((np.arange(profile.m), -wins))
    return Permutation(tuple(int(v) for v in order))


def average_encode(profile: VoterProfile) -> Permutation:
    """Decode the rounded weighted mean of the voters' lexicographic codes.

    Halves round toward the lower integer.  Restricted to m <= 20 so the
    codes stay within exact 64-bit range.
    """
    codes = [cantor_encode(profile.voter(i)) for i in range(profile.n)]
    avg = float(np.dot(profile.normalized_weights(), codes))
    code = math.ceil(avg - 0.5)
    code = min(max(code, 0), math.factorial(profile.m) - 1)
    return cantor_decode(code, profile.m)


AGGREGATORS = {
    "dictator": dictator,
    "borda": borda,
    "lehmer": lehmer_mode,
    "copeland": copeland,
    "average_encode": average_encode,
    "tournament_greedy": tournament_greedy,
}
