"""Domain types, embedding-manifest I/O, and validation shared by all modules.

A manifest is a directory holding ``manifest.json`` plus three flat binary
matrices (``ego.f32``, ``exo.f32``, ``queries.f32``), each row-major
little-endian float32 with shape (count, dim). This is the exchange format
between embedding producers and the selection pipeline.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyStream,
    MalformedManifest,
    ZeroVector,
)

logger = logging.getLogger(__name__)

# Embeddings already unit-norm within this tolerance are kept bit-for-bit so
# float32 manifests round-trip exactly; anything further off is renormalized.
UNIT_NORM_TOLERANCE = 1e-6
ZERO_NORM_THRESHOLD = 1e-12

MANIFEST_FILENAME = "manifest.json"
MATRIX_FILES = {"ego": "ego.f32", "exo": "exo.f32", "queries": "queries.f32"}


class View(str, Enum):
    EGO = "ego"
    EXO = "exo"


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


def normalize(values: Sequence[float] | np.ndarray) -> np.ndarray:
    """Scale a vector to unit L2 norm (float64). Raises ZeroVector near zero."""
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1:
        raise DimensionMismatch(f"expected a 1-D vector, got shape {v.shape}")
    norm = float(np.linalg.norm(v))
    if norm < ZERO_NORM_THRESHOLD:
        raise ZeroVector("cannot normalize a vector with norm < 1e-12")
    return _readonly(v / norm)


def validate_embedding(values: Sequence[float] | np.ndarray) -> np.ndarray:
    """Validate one embedding vector: 1-D, dim >= 2, finite, unit norm.

    Vectors whose norm is within UNIT_NORM_TOLERANCE of 1.0 are returned
    unchanged; others are renormalized.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1:
        raise DimensionMismatch(f"expected a 1-D vector, got shape {v.shape}")
    if v.shape[0] < 2:
        raise DimensionMismatch(f"embedding dim must be >= 2, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ZeroVector("embedding contains non-finite entries")
    norm = float(np.linalg.norm(v))
    if abs(norm - 1.0) <= UNIT_NORM_TOLERANCE:
        return _readonly(v.copy())
    return normalize(v)


def _unit_rows(matrix: np.ndarray, label: str) -> tuple[np.ndarray, int]:
    """Validate a (count, dim) matrix row-wise; returns (matrix, n_renormalized)."""
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2:
        raise DimensionMismatch(f"{label}: expected a 2-D matrix, got shape {m.shape}")
    if m.shape[1] < 2:
        raise DimensionMismatch(f"{label}: embedding dim must be >= 2, got {m.shape[1]}")
    if not np.all(np.isfinite(m)):
        raise MalformedManifest(f"{label}: non-finite embedding values")
    norms = np.linalg.norm(m, axis=1)
    if np.any(norms < ZERO_NORM_THRESHOLD):
        raise MalformedManifest(f"{label}: zero-norm embedding row")
    off = np.abs(norms - 1.0) > UNIT_NORM_TOLERANCE
    n_fixed = int(off.sum())
    if n_fixed:
        m = m.copy()
        m[off] /= norms[off, None]
    return _readonly(m), n_fixed


@dataclass(frozen=True)
class FrameRecord:
    """One frame: position in its stream, timestamp (s), unit embedding."""

    index: int
    timestamp: float
    embedding: np.ndarray


@dataclass(frozen=True)
class FrameStream:
    """An ordered single-view frame sequence with a shared embedding dim."""

    view: View
    embeddings: np.ndarray  # (n, dim), rows unit-norm
    timestamps: np.ndarray | None = None  # (n,) seconds; synthesized if omitted
    fps: float = 1.0

    def __post_init__(self) -> None:
        if self.fps <= 0:
            raise ValueError("fps must be positive")
        emb, _ = _unit_rows(self.embeddings, f"{self.view.value} stream")
        if emb.shape[0] == 0:
            raise EmptyStream(f"{self.view.value} stream has no frames")
        object.__setattr__(self, "embeddings", emb)
        if self.timestamps is None:
            ts = np.arange(emb.shape[0], dtype=np.float64) / self.fps
        else:
            ts = np.asarray(self.timestamps, dtype=np.float64)
            if ts.shape != (emb.shape[0],):
                raise ValueError("timestamps length must match frame count")
            if np.any(ts < 0):
                raise ValueError("timestamps must be non-negative")
            if np.any(np.diff(ts) < 0):
                raise ValueError("timestamps must be non-decreasing")
        object.__setattr__(self, "timestamps", _readonly(ts))

    @property
    def n(self) -> int:
        return self.embeddings.shape[0]

    @property
    def dim(self) -> int:
        return self.embeddings.shape[1]

    @property
    def frames(self) -> tuple[FrameRecord, ...]:
        return tuple(
            FrameRecord(i, float(self.timestamps[i]), self.embeddings[i])
            for i in range(self.n)
        )


@dataclass(frozen=True)
class QueryEmbedding:
    """Unit-norm text-embedding vector for one query."""

    vector: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "vector", validate_embedding(self.vector))

    @property
    def dim(self) -> int:
        return self.vector.shape[0]


@dataclass(frozen=True)
class Query:
    """A query with its identifier, source text, and embedding."""

    id: str
    text: str
    embedding: QueryEmbedding


@dataclass(frozen=True)
class StreamPair:
    """One ego stream and one exo stream over the same recording."""

    ego: FrameStream
    exo: FrameStream

    def __post_init__(self) -> None:
        if self.ego.view is not View.EGO or self.exo.view is not View.EXO:
            raise ValueError("StreamPair requires (ego=Ego, exo=Exo) streams")
        if self.ego.dim != self.exo.dim:
            raise DimensionMismatch(
                f"ego dim {self.ego.dim} != exo dim {self.exo.dim}"
            )

    @property
    def dim(self) -> int:
        return self.ego.dim

    @property
    def synchronized(self) -> bool:
        return self.ego.n == self.exo.n

    def stream(self, view: View) -> FrameStream:
        return self.ego if view is View.EGO else self.exo


@dataclass(frozen=True)
class SelectionEntry:
    """One selected frame: its view, original index, timestamp, and score."""

    view: View
    index: int
    timestamp: float
    score: float | None = None


_VIEW_ORDER = {View.EGO: 0, View.EXO: 1}


@dataclass(frozen=True)
class Selection:
    """Final timestamp-ordered merged frame list with provenance.

    Entries are sorted by timestamp; at equal timestamps the ego frame comes
    first. Provenance records whatever the producing pipeline wants audited
    (scores, budget split, seed, jitter, sampler mode).
    """

    entries: tuple[SelectionEntry, ...]
    total: int
    provenance: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if len(self.entries) != self.total:
            raise ValueError(
                f"selection has {len(self.entries)} entries, expected {self.total}"
            )
        if self.total < 1:
            raise ValueError("selection must contain at least one frame")
        seen = set()
        for prev, cur in zip((None,) + self.entries, self.entries):
            key = (cur.view, cur.index)
            if key in seen:
                raise ValueError(f"duplicate selection entry {key}")
            seen.add(key)
            if prev is None:
                continue
            if cur.timestamp < prev.timestamp:
                raise ValueError("selection entries must be timestamp-sorted")
            if cur.timestamp == prev.timestamp and (
                _VIEW_ORDER[cur.view] < _VIEW_ORDER[prev.view]
            ):
                raise ValueError("equal-timestamp entries must order ego before exo")

    def indices(self, view: View) -> tuple[int, ...]:
        return tuple(e.index for e in self.entries if e.view is view)


@dataclass(frozen=True)
class Manifest:
    """Loaded manifest: the stream pair plus all query embeddings."""

    pair: StreamPair
    queries: tuple[Query, ...]
    fps: float = 1.0
    embedder: str | None = None

    @property
    def dim(self) -> int:
        return self.pair.dim


def write_matrix_f32(path: Path | str, matrix: np.ndarray) -> None:
    """Write a (count, dim) matrix as row-major little-endian float32."""
    m = np.ascontiguousarray(np.asarray(matrix, dtype=np.float64), dtype="<f4")
    Path(path).write_bytes(m.tobytes())


def read_matrix_f32(path: Path | str, count: int, dim: int, label: str) -> np.ndarray:
    """Read a float32 matrix written by write_matrix_f32, checking its shape."""
    data = Path(path).read_bytes()
    n_vals = len(data) // 4
    if len(data) % 4 != 0:
        raise MalformedManifest(f"{label}: file size is not a multiple of 4 bytes")
    if n_vals != count * dim:
        if count > 0 and n_vals % count == 0:
            raise DimensionMismatch(
                f"{label}: file implies dim {n_vals // count}, manifest says {dim}"
            )
        raise MalformedManifest(
            f"{label}: expected {count * dim} float32 values, found {n_vals}"
        )
    return np.frombuffer(data, dtype="<f4").astype(np.float64).reshape(count, dim)


def _frame_table(raw: Any, label: str, fps: float) -> np.ndarray | None:
    """Parse one view's frame list; returns timestamps or None when omitted."""
    if not isinstance(raw, list):
        raise MalformedManifest(f"{label}: frame list must be a JSON array")
    timestamps: list[float] = []
    any_ts = False
    for pos, entry in enumerate(raw):
        if not isinstance(entry, dict) or "index" not in entry:
            raise MalformedManifest(f"{label}[{pos}]: frame entries need an index")
        if int(entry["index"]) != pos:
            raise MalformedManifest(
                f"{label}[{pos}]: index {entry['index']} != position {pos}"
            )
        if "timestamp" in entry and entry["timestamp"] is not None:
            any_ts = True
            timestamps.append(float(entry["timestamp"]))
        else:
            timestamps.append(pos / fps)
    if not any_ts:
        return None
    ts = np.asarray(timestamps, dtype=np.float64)
    if np.any(ts < 0) or np.any(np.diff(ts) < 0):
        raise MalformedManifest(f"{label}: timestamps must be non-negative and sorted")
    return ts


def load_manifest(path: Path | str) -> Manifest:
    """Load and validate a manifest directory.

    Raises MalformedManifest for schema violations, DimensionMismatch for
    inconsistent embedding dims, and EmptyStream for a view with no frames.
    """
    root = Path(path)
    doc_path = root / MANIFEST_FILENAME
    if not doc_path.is_file():
        raise MalformedManifest(f"{doc_path} does not exist")
    try:
        doc = json.loads(doc_path.read_text())
    except json.JSONDecodeError as exc:
        raise MalformedManifest(f"{doc_path}: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise MalformedManifest(f"{doc_path}: top level must be a JSON object")
    for key in ("dim", "ego", "exo", "queries"):
        if key not in doc:
            raise MalformedManifest(f"{doc_path}: missing required key '{key}'")

    dim = int(doc["dim"])
    if dim < 2:
        raise MalformedManifest(f"{doc_path}: dim must be >= 2, got {dim}")
    fps = float(doc.get("fps", 1.0))
    if fps <= 0:
        raise MalformedManifest(f"{doc_path}: fps must be positive")

    streams: dict[str, FrameStream] = {}
    n_fixed_total = 0
    for name, view in (("ego", View.EGO), ("exo", View.EXO)):
        entries = doc[name]
        if len(entries) == 0:
            raise EmptyStream(f"manifest declares zero {name} frames")
        ts = _frame_table(entries, name, fps)
        matrix = read_matrix_f32(root / MATRIX_FILES[name], len(entries), dim, name)
        matrix, n_fixed = _unit_rows(matrix, name)
        n_fixed_total += n_fixed
        streams[name] = FrameStream(view=view, embeddings=matrix, timestamps=ts, fps=fps)

    raw_queries = doc["queries"]
    if not isinstance(raw_queries, list):
        raise MalformedManifest("queries must be a JSON array")
    qmat = read_matrix_f32(root / MATRIX_FILES["queries"], len(raw_queries), dim, "queries")
    qmat, n_fixed = _unit_rows(qmat, "queries") if len(raw_queries) else (qmat, 0)
    n_fixed_total += n_fixed
    queries = []
    for pos, q in enumerate(raw_queries):
        if not isinstance(q, dict) or "id" not in q:
            raise MalformedManifest(f"queries[{pos}]: entries need an id")
        queries.append(
            Query(
                id=str(q["id"]),
                text=str(q.get("text", "")),
                embedding=QueryEmbedding(qmat[pos]),
            )
        )
    if len({q.id for q in queries}) != len(queries):
        raise MalformedManifest("query ids must be unique")

    if n_fixed_total:
        logger.warning(
            "manifest %s: renormalized %d non-unit embedding rows", root, n_fixed_total
        )
    return Manifest(
        pair=StreamPair(ego=streams["ego"], exo=streams["exo"]),
        queries=tuple(queries),
        fps=fps,
        embedder=doc.get("embedder"),
    )


def write_manifest(manifest: Manifest, path: Path | str) -> Path:
    """Write a Manifest to a directory in the documented exchange format."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    doc: dict[str, Any] = {
        "dim": manifest.dim,
        "fps": manifest.fps,
        "ego": [
            {"index": i, "timestamp": float(t)}
            for i, t in enumerate(manifest.pair.ego.timestamps)
        ],
        "exo": [
            {"index": i, "timestamp": float(t)}
            for i, t in enumerate(manifest.pair.exo.timestamps)
        ],
        "queries": [{"id": q.id, "text": q.text} for q in manifest.queries],
    }
    if manifest.embedder is not None:
        doc["embedder"] = manifest.embedder
    (root / MANIFEST_FILENAME).write_text(
        json.dumps(doc, indent=2, sort_keys=True) + "\n"
    )
    write_matrix_f32(root / MATRIX_FILES["ego"], manifest.pair.ego.embeddings)
    write_matrix_f32(root / MATRIX_FILES["exo"], manifest.pair.exo.embeddings)
    qrows = [q.embedding.vector for q in manifest.queries]
    qmat = np.vstack(qrows) if qrows else np.zeros((0, manifest.dim))
    write_matrix_f32(root / MATRIX_FILES["queries"], qmat)
    return root


def replace_entry_scores(
    selection: Selection, scores: Iterable[float | None]
) -> Selection:
    """Return a Selection whose entries carry the given per-frame scores."""
    entries = tuple(
        replace(e, score=None if s is None else float(s))
        for e, s in zip(selection.entries, scores, strict=True)
    )
    return Selection(entries=entries, total=selection.total, provenance=selection.provenance)
