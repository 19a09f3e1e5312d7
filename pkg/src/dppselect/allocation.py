"""Budget allocation across views: soft relevance-proportional splitting and
the hard per-timestep winner-view baseline."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceedsFrames, UnsynchronizedStreams
from .scoring import RelevanceVector


@dataclass(frozen=True)
class BudgetSplit:
    """How a total budget of k_total frames is split between the views."""

    k_ego: int
    k_exo: int
    k_total: int

    def __post_init__(self) -> None:
        if self.k_ego < 0 or self.k_exo < 0 or self.k_total < 1:
            raise ValueError("budget components must be non-negative, total >= 1")
        if self.k_ego + self.k_exo != self.k_total:
            raise ValueError("k_ego + k_exo must equal k_total")


def round_half_away_from_zero(x: float) -> int:
    """Nearest-integer rounding with .5 ties going away from zero."""
    return int(math.floor(x + 0.5)) if x >= 0 else -int(math.floor(-x + 0.5))


def _as_scores(r: RelevanceVector | np.ndarray) -> np.ndarray:
    """Accept a RelevanceVector or a bare weight array (e.g. rescaled scores)."""
    if isinstance(r, RelevanceVector):
        return r.scores
    return np.asarray(r, dtype=np.float64)


def soft_allocate(
    r_ego: RelevanceVector | np.ndarray,
    r_exo: RelevanceVector | np.ndarray,
    k: int,
) -> BudgetSplit:
    """Split budget k between views proportionally to summed relevance.

    Scores must be pre-clamped positive. The ego share is rounded to the
    nearest integer (ties away from zero); if one view's share exceeds its
    frame count, the overflow transfers to the other view in a single pass.
    """
    if k < 1:
        raise ValueError("budget k must be >= 1")
    ego, exo = _as_scores(r_ego), _as_scores(r_exo)
    n_ego, n_exo = len(ego), len(exo)
    if k > n_ego + n_exo:
        raise BudgetExceedsFrames(
            f"budget {k} exceeds {n_ego} ego + {n_exo} exo frames"
        )
    sum_ego, sum_exo = float(ego.sum()), float(exo.sum())
    if sum_ego <= 0 or sum_exo <= 0:
        raise ValueError("soft_allocate requires clamped (positive) scores")
    k_ego = round_half_away_from_zero(k * sum_ego / (sum_ego + sum_exo))
    k_ego = min(k_ego, k)
    k_exo = k - k_ego
    if k_ego > n_ego:
        k_ego, k_exo = n_ego, k - n_ego
    elif k_exo > n_exo:
        k_ego, k_exo = k - n_exo, n_exo
    return BudgetSplit(k_ego=k_ego, k_exo=k_exo, k_total=k)


def hard_select(
    r_ego: RelevanceVector | np.ndarray, r_exo: RelevanceVector | np.ndarray
) -> np.ndarray:
    """Per-timestep winner mask for synchronized streams.

    Returns a boolean array where True means the ego frame wins at that
    timestep (ego also wins exact ties). Requires equal-length views.
    """
    ego, exo = _as_scores(r_ego), _as_scores(r_exo)
    if len(ego) != len(exo):
        raise UnsynchronizedStreams(
            f"hard selection needs N_ego == N_exo, got {len(ego)} vs {len(exo)}"
        )
    mask = ego >= exo
    mask.flags.writeable = False
    return mask
