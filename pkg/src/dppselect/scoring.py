"""Per-view query-frame relevance: cosine scores computed independently
per stream, with no cross-view normalization."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import FrameStream, QueryEmbedding, View
from .errors import DimensionMismatch

# Default floor applied before budget allocation and kernel construction.
# Keeps relevance non-negative so the budget ratio and kernel diagonal stay
# meaningful, and keeps kernel diagonals strictly positive.
DEFAULT_SCORE_FLOOR = 1e-6


@dataclass(frozen=True)
class RelevanceVector:
    """Per-frame relevance scores for one view (raw cosine unless clamped)."""

    view: View
    scores: np.ndarray

    def __post_init__(self) -> None:
        s = np.asarray(self.scores, dtype=np.float64)
        if s.ndim != 1:
            raise DimensionMismatch(f"scores must be 1-D, got shape {s.shape}")
        if np.any(s < -1.0 - 1e-9) or np.any(s > 1.0 + 1e-9):
            raise ValueError("relevance scores must lie in [-1, 1]")
        s = s.copy()
        s.flags.writeable = False
        object.__setattr__(self, "scores", s)

    def __len__(self) -> int:
        return self.scores.shape[0]

    @property
    def total(self) -> float:
        return float(self.scores.sum())


def score_view(stream: FrameStream, query: QueryEmbedding) -> RelevanceVector:
    """Cosine similarity of every frame in one stream against the query.

    Both sides are unit-norm, so the dot product is the cosine. The result is
    clipped to [-1, 1]: inputs may carry up to 1e-6 of float32 norm slack,
    which would otherwise push exact matches slightly past 1.
    """
    if stream.dim != query.dim:
        raise DimensionMismatch(
            f"stream dim {stream.dim} != query dim {query.dim}"
        )
    scores = np.clip(stream.embeddings @ query.vector, -1.0, 1.0)
    return RelevanceVector(view=stream.view, scores=scores)


def clamp_scores(relevance: RelevanceVector, floor: float = DEFAULT_SCORE_FLOOR) -> RelevanceVector:
    """Clamp scores to at least `floor` (> 0) for allocation and kernels."""
    if floor <= 0:
        raise ValueError("floor must be positive")
    return RelevanceVector(
        view=relevance.view, scores=np.maximum(relevance.scores, floor)
    )
