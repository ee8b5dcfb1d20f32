"""Rank aggregation and learned ensemble weighting for ranked lists."""

__version__ = "0.1.0"

from .perm import (  # noqa: F401
    Permutation,
    VoterProfile,
    kendall_tau,
    cantor_encode,
    cantor_decode,
)
from .tournament import (  # noqa: F401
    build_tournament,
    tournament_greedy,
    tournament_greedy_decayed,
)
from .baselines import AGGREGATORS  # noqa: F401
