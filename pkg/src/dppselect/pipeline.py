"""End-to-end selection: score, allocate, build kernels, sample, merge.

Modes:
  soft     — score each view, split the budget proportionally to summed
             relevance, run one k-DPP per view, merge by timestamp.
  hard     — per-timestep winner view (requires synchronized streams), one
             k-DPP over the winning frames.
  ego/exo  — single-view k-DPP with the whole budget.
  uniform  — evenly spaced frames, budget halved across views.
  topk     — highest-relevance frames across both views, no diversity term.

Every mode returns a Selection of exactly the budgeted size, sorted by
timestamp, with full provenance (scores, split, seed, jitter, sampler).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .allocation import BudgetSplit, hard_select, soft_allocate
from .core import (
    QueryEmbedding,
    Selection,
    SelectionEntry,
    StreamPair,
    View,
    replace_entry_scores,
)
from .dpp import SamplerMode, SubsetSample, sample_with_fallback
from .errors import BudgetExceedsFrames, IndexOutOfRange, InvalidBudget
from .kernel import build_kernel, kernel_from_parts
from .scoring import DEFAULT_SCORE_FLOOR, RelevanceVector, clamp_scores, score_view

RNG_NAME = "pcg64"  # numpy default_rng bit generator; recorded for provenance


class Mode(str, Enum):
    SOFT_ALLOCATION = "soft"
    HARD_SELECTION = "hard"
    EGO_ONLY = "ego"
    EXO_ONLY = "exo"
    UNIFORM = "uniform"
    TOP_K_RELEVANCE = "topk"


DUAL_VIEW_MODES = frozenset(
    {Mode.SOFT_ALLOCATION, Mode.HARD_SELECTION, Mode.UNIFORM, Mode.TOP_K_RELEVANCE}
)


@dataclass(frozen=True)
class SelectConfig:
    """Knobs for one selection run."""

    budget: int = 32
    mode: Mode = Mode.SOFT_ALLOCATION
    sampler: SamplerMode = SamplerMode.EXACT_KDPP
    seed: int = 0
    score_floor: float = DEFAULT_SCORE_FLOOR

    def __post_init__(self) -> None:
        if self.budget < 1:
            raise InvalidBudget("budget must be >= 1")
        if self.mode in DUAL_VIEW_MODES and self.budget < 2:
            raise InvalidBudget(f"mode {self.mode.value} needs a budget of >= 2")
        if self.score_floor <= 0:
            raise ValueError("score_floor must be positive")


def merge_by_timestamp(ego_sel, exo_sel, pair: StreamPair) -> Selection:
    """Merge per-view index sets into one timestamp-sorted Selection.

    Equal timestamps order ego before exo; within a view, by frame index.
    """
    entries: list[SelectionEntry] = []
    for view, stream, indices in (
        (View.EGO, pair.ego, ego_sel),
        (View.EXO, pair.exo, exo_sel),
    ):
        for i in indices:
            i = int(i)
            if not 0 <= i < stream.n:
                raise IndexOutOfRange(
                    f"{view.value} index {i} outside [0, {stream.n})"
                )
            entries.append(
                SelectionEntry(view=view, index=i, timestamp=float(stream.timestamps[i]))
            )
    entries.sort(key=lambda e: (e.timestamp, 0 if e.view is View.EGO else 1, e.index))
    return Selection(entries=tuple(entries), total=len(entries))


def _evenly_spaced(n: int, k: int) -> list[int]:
    return [(i * n) // k for i in range(k)]


def _uniform_split(pair: StreamPair, k: int) -> BudgetSplit:
    k_ego = min(math.ceil(k / 2), pair.ego.n)
    k_exo = k - k_ego
    if k_exo > pair.exo.n:
        k_ego, k_exo = k - pair.exo.n, pair.exo.n
    return BudgetSplit(k_ego=k_ego, k_exo=k_exo, k_total=k)


def _sample_info(sample: SubsetSample) -> dict:
    return {
        "log_det": sample.log_det,
        "fallback_filled": sample.fallback_filled,
    }


def select(pair: StreamPair, query: QueryEmbedding, cfg: SelectConfig) -> Selection:
    """Run one full selection for a query over a stream pair."""
    k = cfg.budget
    n_ego, n_exo = pair.ego.n, pair.exo.n

    raw = {
        View.EGO: score_view(pair.ego, query),
        View.EXO: score_view(pair.exo, query),
    }
    clamped = {v: clamp_scores(r, cfg.score_floor) for v, r in raw.items()}
    rng = np.random.default_rng(cfg.seed)

    provenance: dict = {
        "mode": cfg.mode.value,
        "sampler": cfg.sampler.value,
        "seed": cfg.seed,
        "budget": k,
        "score_floor": cfg.score_floor,
        "rng": RNG_NAME,
        "relevance_sums": {
            "ego": clamped[View.EGO].total,
            "exo": clamped[View.EXO].total,
        },
        "jitter": {},
        "samples": {},
    }

    def run_view_kdpp(view: View, size: int) -> np.ndarray:
        stream = pair.stream(view)
        kern = build_kernel(stream, clamped[view])
        provenance["jitter"][view.value] = kern.jitter_applied
        sample = sample_with_fallback(
            kern, size, cfg.sampler, rng, relevance=clamped[view].scores
        )
        provenance["samples"][view.value] = _sample_info(sample)
        return np.asarray(sample.indices)

    if cfg.mode is Mode.SOFT_ALLOCATION:
        split = soft_allocate(clamped[View.EGO], clamped[View.EXO], k)
        ego_idx = run_view_kdpp(View.EGO, split.k_ego) if split.k_ego else []
        exo_idx = run_view_kdpp(View.EXO, split.k_exo) if split.k_exo else []

    elif cfg.mode is Mode.HARD_SELECTION:
        ego_wins = hard_select(raw[View.EGO], raw[View.EXO])
        n = n_ego
        if k > n:
            raise BudgetExceedsFrames(
                f"budget {k} exceeds the {n} winner frames of hard selection"
            )
        winner_emb = np.where(
            ego_wins[:, None], pair.ego.embeddings, pair.exo.embeddings
        )
        winner_scores = np.where(
            ego_wins, clamped[View.EGO].scores, clamped[View.EXO].scores
        )
        kern = kernel_from_parts(winner_emb, winner_scores, view=None)
        provenance["jitter"]["merged"] = kern.jitter_applied
        sample = sample_with_fallback(
            kern, k, cfg.sampler, rng, relevance=winner_scores
        )
        provenance["samples"]["merged"] = _sample_info(sample)
        chosen = np.asarray(sample.indices)
        ego_idx = chosen[ego_wins[chosen]]
        exo_idx = chosen[~ego_wins[chosen]]
        split = BudgetSplit(k_ego=len(ego_idx), k_exo=len(exo_idx), k_total=k)

    elif cfg.mode in (Mode.EGO_ONLY, Mode.EXO_ONLY):
        view = View.EGO if cfg.mode is Mode.EGO_ONLY else View.EXO
        n = pair.stream(view).n
        if k > n:
            raise BudgetExceedsFrames(
                f"budget {k} exceeds the {n} frames of the {view.value} view"
            )
        chosen = run_view_kdpp(view, k)
        ego_idx = chosen if view is View.EGO else []
        exo_idx = chosen if view is View.EXO else []
        split = BudgetSplit(
            k_ego=k if view is View.EGO else 0,
            k_exo=k if view is View.EXO else 0,
            k_total=k,
        )

    elif cfg.mode is Mode.UNIFORM:
        if k > n_ego + n_exo:
            raise BudgetExceedsFrames(
                f"budget {k} exceeds {n_ego} ego + {n_exo} exo frames"
            )
        split = _uniform_split(pair, k)
        ego_idx = _evenly_spaced(n_ego, split.k_ego)
        exo_idx = _evenly_spaced(n_exo, split.k_exo)

    else:  # TOP_K_RELEVANCE
        if k > n_ego + n_exo:
            raise BudgetExceedsFrames(
                f"budget {k} exceeds {n_ego} ego + {n_exo} exo frames"
            )
        concat = np.concatenate(
            [clamped[View.EGO].scores, clamped[View.EXO].scores]
        )
        top = np.argsort(-concat, kind="stable")[:k]
        ego_idx = sorted(int(i) for i in top if i < n_ego)
        exo_idx = sorted(int(i) - n_ego for i in top if i >= n_ego)
        split = BudgetSplit(k_ego=len(ego_idx), k_exo=len(exo_idx), k_total=k)

    provenance["split"] = {"ego": split.k_ego, "exo": split.k_exo}
    selection = merge_by_timestamp(ego_idx, exo_idx, pair)
    scores = [float(raw[e.view].scores[e.index]) for e in selection.entries]
    selection = Selection(
        entries=selection.entries, total=selection.total, provenance=provenance
    )
    return replace_entry_scores(selection, scores)
