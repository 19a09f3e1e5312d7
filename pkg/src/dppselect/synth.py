"""Deterministic synthetic stream-pair generation for tests and benchmarks.

No embedder needed: unit vectors are drawn by normalizing standard normals,
with optional planted structure (clusters, duplicate runs, a frame equal to
the query). Timestamps are synthesized at the configured FPS.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .core import (
    FrameStream,
    Manifest,
    Query,
    QueryEmbedding,
    StreamPair,
    View,
)
from .errors import InvalidSpec


class Structure(str, Enum):
    RANDOM = "random"
    CLUSTERED = "clustered"
    DUPLICATE_RUN = "duplicate_run"
    PLANTED_RELEVANT = "planted_relevant"


# Pairwise intra-cluster cosine guaranteed by the clustered structure.
CLUSTER_MIN_COSINE = 0.95


@dataclass(frozen=True)
class SynthSpec:
    """Parameters for one synthetic ego/exo pair plus a query."""

    n_ego: int
    n_exo: int
    dim: int
    seed: int
    structure: Structure = Structure.RANDOM
    clusters: int = 3  # clustered only
    run_length: int = 5  # duplicate_run only
    exo_noise: float = 0.05  # planted_relevant: residual exo-query cosine scale
    fps: float = 1.0

    def __post_init__(self) -> None:
        if self.n_ego < 1 or self.n_exo < 1:
            raise InvalidSpec("frame counts must be positive")
        if self.dim < 2:
            raise InvalidSpec("dim must be >= 2")
        if self.fps <= 0:
            raise InvalidSpec("fps must be positive")
        if self.structure is Structure.CLUSTERED and not (
            1 <= self.clusters <= min(self.n_ego, self.n_exo)
        ):
            raise InvalidSpec("cluster count must be in [1, min frame count]")
        if self.structure is Structure.DUPLICATE_RUN and self.run_length < 1:
            raise InvalidSpec("run_length must be >= 1")

    @classmethod
    def from_json(cls, text: str) -> "SynthSpec":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidSpec(f"invalid JSON spec: {exc}") from exc
        if not isinstance(doc, dict):
            raise InvalidSpec("spec must be a JSON object")
        try:
            structure = Structure(doc.get("structure", "random"))
        except ValueError as exc:
            raise InvalidSpec(f"unknown structure {doc.get('structure')!r}") from exc
        known = {
            "n_ego", "n_exo", "dim", "seed", "clusters",
            "run_length", "exo_noise", "fps",
        }
        unknown = set(doc) - known - {"structure"}
        if unknown:
            raise InvalidSpec(f"unknown spec fields: {sorted(unknown)}")
        try:
            return cls(structure=structure, **{k: doc[k] for k in known if k in doc})
        except TypeError as exc:
            raise InvalidSpec(str(exc)) from exc


def _unit(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.normal(size=dim)
    return v / np.linalg.norm(v)


def _unit_rows(rng: np.random.Generator, n: int, dim: int) -> np.ndarray:
    m = rng.normal(size=(n, dim))
    return m / np.linalg.norm(m, axis=1, keepdims=True)


def _orthonormal_to(rng: np.random.Generator, anchor: np.ndarray) -> np.ndarray:
    """A unit vector orthogonal to `anchor` (itself unit)."""
    while True:
        v = rng.normal(size=anchor.shape[0])
        v -= (v @ anchor) * anchor
        norm = np.linalg.norm(v)
        if norm > 1e-9:
            return v / norm


def _clustered_rows(rng: np.random.Generator, n: int, dim: int, clusters: int) -> np.ndarray:
    """Rows grouped round-robin into clusters with pairwise cosine >= 0.95.

    Each member deviates from its cluster center by at most half the angle
    whose cosine is the floor, so any two members of one cluster are within
    the full angle of each other.
    """
    half_angle = 0.5 * math.acos(CLUSTER_MIN_COSINE)
    centers = _unit_rows(rng, clusters, dim)
    rows = np.empty((n, dim))
    for i in range(n):
        center = centers[i % clusters]
        theta = rng.uniform(0.0, half_angle)
        rows[i] = math.cos(theta) * center + math.sin(theta) * _orthonormal_to(rng, center)
    return rows


def _duplicate_run_rows(rng: np.random.Generator, n: int, dim: int, run_length: int) -> np.ndarray:
    n_bases = (n + run_length - 1) // run_length
    bases = _unit_rows(rng, n_bases, dim)
    return bases[np.arange(n) // run_length]


def generate(spec: SynthSpec) -> tuple[StreamPair, QueryEmbedding]:
    """Build a deterministic StreamPair and query for the given spec.

    planted_relevant guarantees exactly one ego frame equal to the query and
    makes every exo frame near-orthogonal to it (cosine on the order of
    exo_noise). Other structures draw the query independently.
    """
    rng = np.random.default_rng(spec.seed)
    query = _unit(rng, spec.dim)

    if spec.structure is Structure.RANDOM:
        ego = _unit_rows(rng, spec.n_ego, spec.dim)
        exo = _unit_rows(rng, spec.n_exo, spec.dim)
    elif spec.structure is Structure.CLUSTERED:
        ego = _clustered_rows(rng, spec.n_ego, spec.dim, spec.clusters)
        exo = _clustered_rows(rng, spec.n_exo, spec.dim, spec.clusters)
    elif spec.structure is Structure.DUPLICATE_RUN:
        ego = _duplicate_run_rows(rng, spec.n_ego, spec.dim, spec.run_length)
        exo = _duplicate_run_rows(rng, spec.n_exo, spec.dim, spec.run_length)
    else:  # PLANTED_RELEVANT
        ego = _unit_rows(rng, spec.n_ego, spec.dim)
        planted = int(rng.integers(spec.n_ego))
        ego[planted] = query
        exo = np.empty((spec.n_exo, spec.dim))
        for j in range(spec.n_exo):
            base = _orthonormal_to(rng, query)
            tilt = spec.exo_noise * rng.normal()
            v = base + tilt * query
            exo[j] = v / np.linalg.norm(v)

    pair = StreamPair(
        ego=FrameStream(view=View.EGO, embeddings=ego, fps=spec.fps),
        exo=FrameStream(view=View.EXO, embeddings=exo, fps=spec.fps),
    )
    return pair, QueryEmbedding(query)


def generate_manifest(spec: SynthSpec) -> Manifest:
    """Wrap generate() output as a single-query Manifest."""
    pair, query = generate(spec)
    text = f"synthetic {spec.structure.value} query (seed {spec.seed})"
    return Manifest(
        pair=pair,
        queries=(Query(id="q0", text=text, embedding=query),),
        fps=spec.fps,
        embedder=f"synth-{spec.structure.value}",
    )
