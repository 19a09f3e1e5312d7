"""Quality-diversity kernel construction and PSD certification.

The kernel for one view is L = D G D with D = diag(clamped scores) and G the
Gram matrix of the unit-norm frame embeddings, so L_ij = s_i <e_i, e_j> s_j.
Diagonal entries equal s_i^2; L is PSD by congruence with G. Kernels are kept
dense: at 1 FPS on minute-scale videos N stays in the hundreds.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import FrameStream, View, write_matrix_f32
from .errors import DimensionMismatch, NumericalPSDViolation
from .scoring import RelevanceVector

# PSD tolerance and jitter are trace-relative so they are scale-free.
PSD_TOLERANCE_FACTOR = 1e-8


@dataclass(frozen=True)
class PsdReport:
    """Result of certifying a kernel: spectrum floor and any jitter needed."""

    min_eigenvalue: float
    tolerance: float
    jitter: float


@dataclass(frozen=True)
class QualityDiversityKernel:
    """A certified PSD kernel for one view (view=None for merged pseudo-streams)."""

    matrix: np.ndarray
    view: View | None
    jitter_applied: float
    min_eigenvalue: float

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatch(f"kernel must be square, got shape {m.shape}")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def sampling_matrix(self) -> np.ndarray:
        """Kernel with certification jitter on the diagonal, for factorization."""
        if self.jitter_applied == 0.0:
            return self.matrix
        return self.matrix + self.jitter_applied * np.eye(self.n)

    def dump(self, path: Path | str) -> None:
        """Debug dump in the same f32 row-major binary format manifests use."""
        write_matrix_f32(path, self.matrix)


def certify_psd(matrix) -> PsdReport:
    """Certify a symmetric matrix (or kernel) as PSD within tolerance.

    Tolerance is 1e-8 * trace/N. A min eigenvalue below -tolerance raises
    NumericalPSDViolation; one at or below zero records jitter = tolerance to
    be added to the diagonal before factorization.
    """
    if isinstance(matrix, QualityDiversityKernel):
        matrix = matrix.matrix
    m = np.asarray(matrix, dtype=np.float64)
    if not np.allclose(m, m.T, rtol=0.0, atol=1e-9):
        raise NumericalPSDViolation("kernel matrix is not symmetric within 1e-9")
    n = m.shape[0]
    tolerance = PSD_TOLERANCE_FACTOR * float(np.trace(m)) / n
    min_eig = float(np.linalg.eigvalsh(m)[0])
    if min_eig < -tolerance:
        raise NumericalPSDViolation(
            f"min eigenvalue {min_eig:.3e} below -{tolerance:.3e}"
        )
    jitter = tolerance if min_eig <= 0.0 else 0.0
    return PsdReport(min_eigenvalue=min_eig, tolerance=tolerance, jitter=jitter)


def kernel_from_parts(
    embeddings: np.ndarray, scores: np.ndarray, view: View | None
) -> QualityDiversityKernel:
    """Build and certify L = D G D from unit-norm rows and positive scores."""
    emb = np.asarray(embeddings, dtype=np.float64)
    s = np.asarray(scores, dtype=np.float64)
    if emb.shape[0] != s.shape[0]:
        raise DimensionMismatch(
            f"{emb.shape[0]} embeddings vs {s.shape[0]} scores"
        )
    if np.any(s <= 0):
        raise ValueError("kernel construction requires clamped (positive) scores")
    # Rows arrive unit-norm within 1e-6 (float32 storage slack); renormalize
    # to machine precision so the unit Gram diagonal below is consistent and
    # L stays PSD to spectral noise.
    emb = emb / np.linalg.norm(emb, axis=1, keepdims=True)
    gram = emb @ emb.T
    gram = 0.5 * (gram + gram.T)  # force exact symmetry
    np.fill_diagonal(gram, 1.0)
    # outer(s, s) is exactly symmetric, so the elementwise product is too
    matrix = np.outer(s, s) * gram
    report = certify_psd(matrix)
    return QualityDiversityKernel(
        matrix=matrix,
        view=view,
        jitter_applied=report.jitter,
        min_eigenvalue=report.min_eigenvalue,
    )


def build_kernel(stream: FrameStream, scores: RelevanceVector) -> QualityDiversityKernel:
    """Build the certified quality-diversity kernel for one view."""
    if len(scores) != stream.n:
        raise DimensionMismatch(
            f"stream has {stream.n} frames, relevance has {len(scores)}"
        )
    return kernel_from_parts(stream.embeddings, scores.scores, stream.view)


def kernel_from_matrix(matrix: np.ndarray, view: View | None = None) -> QualityDiversityKernel:
    """Wrap an explicit symmetric matrix as a certified kernel (tests, tools)."""
    report = certify_psd(matrix)
    m = np.asarray(matrix, dtype=np.float64)
    return QualityDiversityKernel(
        matrix=0.5 * (m + m.T),
        view=view,
        jitter_applied=report.jitter,
        min_eigenvalue=report.min_eigenvalue,
    )
