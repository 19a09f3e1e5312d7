"""Size-k determinantal point process sampling over a quality-diversity kernel.

Four routes to a size-k subset with P(S) proportional to det(L_S):

* ExactKdppSampler — reference sampler: eigendecompose L, pick k eigenvectors
  with elementary-symmetric-polynomial ratio probabilities, then sample the
  resulting projection DPP by eigenbasis deflation.
* CholeskyKdppSampler — same eigenvector-selection phase, but the subset phase
  does sequential conditional sampling with rank-one Cholesky-style downdates
  of the selected component's marginal kernel: k steps of O(N^2) each.
* greedy_map — deterministic greedy maximizer of the incremental
  log-determinant (Cholesky-update gain).
* enumerate_oracle — brute-force probability table over all C(N, k) subsets,
  computed directly from principal minors; validates the samplers.

Both stochastic samplers draw from the same distribution; they differ in the
numerical route, so agreement between them (and with the oracle) is a strong
correctness check. All draws are deterministic given (kernel, k, seed).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    AllZeroDeterminants,
    InvalidBudget,
    NegativeEigenvalue,
    NumericalPSDViolation,
    RankDeficient,
    TooLarge,
)
from .kernel import QualityDiversityKernel

# Eigenvalues below this fraction of the largest are treated as exact zeros
# for rank counting and sampling.
RANK_EIGENVALUE_RTOL = 1e-10

# Guard for the brute-force oracle.
ORACLE_SUBSET_LIMIT = 200_000


class SamplerMode(str, Enum):
    EXACT_KDPP = "exact"
    CHOLESKY_APPROX = "cholesky"
    GREEDY_MAP = "greedy"


@dataclass(frozen=True)
class SubsetSample:
    """A sampled subset: sorted indices, log det(L_S), and how it was drawn."""

    indices: tuple[int, ...]
    size: int
    log_det: float
    mode: SamplerMode
    fallback_filled: int = 0  # slots filled by relevance when rank < k

    def __post_init__(self) -> None:
        if len(self.indices) != self.size:
            raise ValueError("index count must equal size")
        if list(self.indices) != sorted(set(self.indices)):
            raise ValueError("indices must be sorted and unique")


@dataclass(frozen=True)
class EspTable:
    """Elementary symmetric polynomials: table[n][k] = e_k(lambda_1..lambda_n)."""

    table: np.ndarray  # (N+1, k_max+1)

    def __post_init__(self) -> None:
        t = np.asarray(self.table, dtype=np.float64)
        t = t.copy()
        t.flags.writeable = False
        object.__setattr__(self, "table", t)

    def e(self, n: int, k: int) -> float:
        return float(self.table[n, k])


def esp(eigenvalues: np.ndarray, k_max: int) -> EspTable:
    """Evaluate e_k(lambda_1..lambda_n) for all n <= N, k <= k_max.

    Uses the recurrence e_k(1..n) = e_k(1..n-1) + lambda_n * e_{k-1}(1..n-1).
    Eigenvalues must be non-negative; negatives within -1e-10 * max are
    clamped to zero (spectral noise), anything lower raises.
    """
    w = np.asarray(eigenvalues, dtype=np.float64).ravel()
    n = w.shape[0]
    if not 0 <= k_max <= n:
        raise ValueError(f"k_max must be in [0, {n}], got {k_max}")
    lmax = float(w.max(initial=0.0))
    tol = RANK_EIGENVALUE_RTOL * max(lmax, 0.0)
    if np.any(w < -tol):
        raise NegativeEigenvalue(
            f"eigenvalue {w.min():.3e} below the non-negativity tolerance"
        )
    w = np.clip(w, 0.0, None)
    table = np.zeros((n + 1, k_max + 1))
    table[:, 0] = 1.0
    for i in range(1, n + 1):
        if k_max:
            table[i, 1:] = table[i - 1, 1:] + w[i - 1] * table[i - 1, :-1]
    return EspTable(table=table)


def truncated_spectrum(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition with sub-tolerance eigenvalues forced to exact zero."""
    w, v = np.linalg.eigh(matrix)
    lmax = max(float(w[-1]), 0.0)
    w = np.where(w < RANK_EIGENVALUE_RTOL * lmax, 0.0, np.clip(w, 0.0, None))
    if lmax == 0.0:
        w = np.zeros_like(w)
    return w, v


def numerical_rank(eigenvalues: np.ndarray) -> int:
    """Count eigenvalues above 1e-10 times the largest one."""
    w = np.asarray(eigenvalues, dtype=np.float64)
    lmax = float(w.max(initial=0.0))
    if lmax <= 0.0:
        return 0
    return int((w > RANK_EIGENVALUE_RTOL * lmax).sum())


def subset_log_det(matrix: np.ndarray, indices) -> float:
    """log det of a principal submatrix; -inf when the determinant is <= 0."""
    idx = list(indices)
    if not idx:
        return 0.0
    sign, logdet = np.linalg.slogdet(matrix[np.ix_(idx, idx)])
    return float(logdet) if sign > 0 else float("-inf")


def _pick_from_masses(masses: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Vectorized categorical draw per row of `masses` (unnormalized)."""
    cum = np.cumsum(masses, axis=1)
    u = rng.random(masses.shape[0]) * cum[:, -1]
    return (cum > u[:, None]).argmax(axis=1)


class _KdppSamplerBase:
    """Shared precomputation: spectrum, rank check, and ESP table."""

    def __init__(self, kernel: QualityDiversityKernel, k: int):
        n = kernel.n
        if k < 1 or k > n:
            raise InvalidBudget(f"subset size {k} outside [1, {n}]")
        # Spectrum of the raw kernel: truncation (not jitter) handles the
        # near-null directions, so rank deficiency stays detectable and dead
        # eigenvectors can never be selected.
        w, v = truncated_spectrum(kernel.matrix)
        rank = int((w > 0).sum())
        if k > rank:
            raise RankDeficient(
                f"requested size {k} exceeds numerical rank {rank}"
            )
        self.kernel = kernel
        self.k = k
        self.n = n
        self.eigenvalues = w
        self.eigenvectors = v
        self.esp_table = esp(w, k)

    def _select_eigenvectors(self, rng: np.random.Generator, batch: int) -> np.ndarray:
        """Pick k eigenvector indices per draw with ESP-ratio probabilities.

        Scans eigenvalues from last to first; index n-1 joins with probability
        lambda_n * e_{r-1}(1..n-1) / e_r(1..n) given r still needed. Returns a
        (batch, n) boolean mask with exactly k True entries per row.
        """
        table = self.esp_table.table
        w = self.eigenvalues
        remaining = np.full(batch, self.k, dtype=np.int64)
        mask = np.zeros((batch, self.n), dtype=bool)
        for n in range(self.n, 0, -1):
            r = np.maximum(remaining, 1)
            denom = table[n, r]
            ratio = np.divide(
                w[n - 1] * table[n - 1, r - 1],
                np.where(denom > 0.0, denom, 1.0),
                out=np.zeros(batch),
                where=denom > 0.0,
            )
            # Declining is impossible when the first n-1 eigenvalues cannot
            # supply the r still needed (their ESP is exactly zero).
            ratio[table[n - 1, r] == 0.0] = 1.0
            ratio[remaining == 0] = 0.0
            take = rng.random(batch) < ratio
            mask[take, n - 1] = True
            remaining -= take
        return mask

    def _selected_eigenvector_stacks(self, mask: np.ndarray) -> np.ndarray:
        """Gather selected eigenvectors into a (batch, n, k) stack."""
        cols = np.argsort(~mask, axis=1, kind="stable")[:, : self.k]
        return np.ascontiguousarray(np.moveaxis(self.eigenvectors[:, cols], 1, 0))

    def draw(self, rng: np.random.Generator) -> np.ndarray:
        """One sorted index array of length k."""
        return self.draw_many(rng, 1)[0]

    def draw_many(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError


class ExactKdppSampler(_KdppSamplerBase):
    """Reference sampler: projection-DPP phase via eigenbasis deflation."""

    def draw_many(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw `size` independent subsets; returns a (size, k) sorted array."""
        if size < 1:
            raise ValueError("size must be >= 1")
        mask = self._select_eigenvectors(rng, size)
        v = self._selected_eigenvector_stacks(mask)  # (B, n, k)
        batch = np.arange(size)
        chosen = np.zeros((size, self.k), dtype=np.int64)
        picked = np.zeros((size, self.n), dtype=bool)
        for step in range(self.k):
            norms = np.einsum("bnj,bnj->bn", v, v)
            norms[picked] = 0.0
            np.clip(norms, 0.0, None, out=norms)
            idx = _pick_from_masses(norms, rng)
            chosen[:, step] = idx
            picked[batch, idx] = True
            cols = self.k - step
            if cols == 1:
                break
            rows = v[batch, idx, :]  # (B, cols)
            piv = np.abs(rows).argmax(axis=1)
            pivval = rows[batch, piv]
            coef = rows / pivval[:, None]
            pivcol = np.take_along_axis(v, piv[:, None, None], axis=2)[:, :, 0]
            v = v - pivcol[:, :, None] * coef[:, None, :]
            # Drop the (now zero) pivot column, then restore orthonormality.
            np.put_along_axis(v, piv[:, None, None], v[:, :, -1:], axis=2)
            v, _ = np.linalg.qr(v[:, :, :-1])
        return np.sort(chosen, axis=1)


class CholeskyKdppSampler(_KdppSamplerBase):
    """Subset phase via rank-one downdates of the component's marginal kernel.

    After the eigenvector-selection phase, the selected component is a
    projection DPP with marginal kernel K = V V^T. Items are drawn
    sequentially proportional to the conditional diagonal of K, and K is
    conditioned on each inclusion with a Schur (Cholesky-style) rank-one
    downdate: k steps costing O(N^2) each, O(N^2 K) per draw overall.
    """

    def draw_many(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if size < 1:
            raise ValueError("size must be >= 1")
        mask = self._select_eigenvectors(rng, size)
        v = self._selected_eigenvector_stacks(mask)
        marg = np.einsum("bnj,bmj->bnm", v, v)  # (B, n, n) marginal kernels
        batch = np.arange(size)
        chosen = np.zeros((size, self.k), dtype=np.int64)
        picked = np.zeros((size, self.n), dtype=bool)
        for step in range(self.k):
            diag = np.einsum("bnn->bn", marg).copy()
            diag[picked] = 0.0
            diag[diag < 1e-12] = 0.0  # numerically dead items stay out
            idx = _pick_from_masses(diag, rng)
            chosen[:, step] = idx
            picked[batch, idx] = True
            if step == self.k - 1:
                break
            denom = diag[batch, idx]
            col = marg[batch, :, idx]
            marg = marg - (col[:, :, None] * col[:, None, :]) / denom[:, None, None]
        return np.sort(chosen, axis=1)


def _finish_sample(
    kernel: QualityDiversityKernel,
    indices: np.ndarray,
    k: int,
    mode: SamplerMode,
    fallback_filled: int = 0,
) -> SubsetSample:
    idx = tuple(int(i) for i in indices)
    return SubsetSample(
        indices=idx,
        size=k,
        log_det=subset_log_det(kernel.matrix, idx),
        mode=mode,
        fallback_filled=fallback_filled,
    )


def sample_kdpp_exact(
    kernel: QualityDiversityKernel, k: int, seed
) -> SubsetSample:
    """One exact k-DPP draw: P(S) proportional to det(L_S) over |S| = k."""
    rng = np.random.default_rng(seed)
    sampler = ExactKdppSampler(kernel, k)
    return _finish_sample(kernel, sampler.draw(rng), k, SamplerMode.EXACT_KDPP)


def sample_kdpp_cholesky(
    kernel: QualityDiversityKernel, k: int, seed
) -> SubsetSample:
    """One draw via the sequential Cholesky-downdate route."""
    rng = np.random.default_rng(seed)
    sampler = CholeskyKdppSampler(kernel, k)
    return _finish_sample(kernel, sampler.draw(rng), k, SamplerMode.CHOLESKY_APPROX)


def greedy_map(kernel: QualityDiversityKernel, k: int) -> SubsetSample:
    """Deterministic greedy approximation of the max-determinant subset.

    Each step adds the index with the largest incremental determinant gain
    (the squared Cholesky pivot), ties broken by lowest index. Once every
    remaining gain is numerically zero, remaining slots fill with the lowest
    unselected indices.
    """
    n = kernel.n
    if k < 1 or k > n:
        raise InvalidBudget(f"subset size {k} outside [1, {n}]")
    matrix = kernel.sampling_matrix()
    gains = np.diag(matrix).astype(np.float64).copy()
    eps = float(gains.max(initial=0.0)) * 1e-12
    basis = np.zeros((k, n))
    available = np.ones(n, dtype=bool)
    selected: list[int] = []
    while len(selected) < k:
        cand = np.where(available, gains, -np.inf)
        j = int(np.argmax(cand))
        if not cand[j] > eps:
            break
        t = len(selected)
        selected.append(j)
        available[j] = False
        if t + 1 == k:
            break
        pivot = math.sqrt(gains[j])
        row = (matrix[j, :] - basis[:t, j] @ basis[:t, :]) / pivot
        basis[t, :] = row
        gains -= row**2
    for j in range(n):
        if len(selected) == k:
            break
        if available[j]:
            selected.append(j)
            available[j] = False
    return _finish_sample(kernel, np.sort(selected), k, SamplerMode.GREEDY_MAP)


@dataclass(frozen=True)
class OracleTable:
    """Exact subset probabilities from brute-force principal minors."""

    k: int
    subsets: tuple[tuple[int, ...], ...]
    determinants: np.ndarray
    probabilities: np.ndarray

    def __post_init__(self) -> None:
        for name in ("determinants", "probabilities"):
            arr = np.asarray(getattr(self, name), dtype=np.float64).copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        object.__setattr__(
            self, "_pos", {s: i for i, s in enumerate(self.subsets)}
        )

    def probability_of(self, subset) -> float:
        key = tuple(sorted(int(i) for i in subset))
        pos = self._pos.get(key)
        return float(self.probabilities[pos]) if pos is not None else 0.0

    def empirical_probabilities(self, draws: np.ndarray) -> np.ndarray:
        """Empirical subset frequencies of an (m, k) array of sorted draws."""
        counts = np.zeros(len(self.subsets))
        for row in np.asarray(draws):
            pos = self._pos.get(tuple(int(i) for i in row))
            if pos is None:
                raise ValueError(f"draw {row} is not a size-{self.k} subset")
            counts[pos] += 1
        return counts / counts.sum()

    def tv_distance(self, empirical: np.ndarray) -> float:
        return 0.5 * float(np.abs(self.probabilities - empirical).sum())

    def to_jsonable(self) -> dict:
        return {
            "k": self.k,
            "subsets": [list(s) for s in self.subsets],
            "determinants": [float(d) for d in self.determinants],
            "probabilities": [float(p) for p in self.probabilities],
        }


def enumerate_oracle(kernel: QualityDiversityKernel, k: int) -> OracleTable:
    """Exhaustive size-k subset distribution: P(S) = det(L_S) / sum det(L_T).

    Determinants come from pivoted LU on each principal submatrix. Tiny
    negative determinants clamp to zero; below -1e-10 they signal numerical
    PSD failure. Guarded to C(N, k) <= 200,000 subsets.
    """
    n = kernel.n
    if k < 1 or k > n:
        raise InvalidBudget(f"subset size {k} outside [1, {n}]")
    n_subsets = math.comb(n, k)
    if n_subsets > ORACLE_SUBSET_LIMIT:
        raise TooLarge(f"C({n},{k}) = {n_subsets} exceeds {ORACLE_SUBSET_LIMIT}")
    matrix = kernel.matrix
    subsets = tuple(itertools.combinations(range(n), k))
    dets = np.empty(n_subsets)
    for pos, sub in enumerate(subsets):
        det = float(np.linalg.det(matrix[np.ix_(sub, sub)]))
        if det < -1e-10:
            raise NumericalPSDViolation(
                f"det(L_{list(sub)}) = {det:.3e} is negative beyond tolerance"
            )
        dets[pos] = max(det, 0.0)
    total = float(dets.sum())
    if total <= 0.0:
        raise AllZeroDeterminants(
            f"all {n_subsets} size-{k} principal minors vanish"
        )
    return OracleTable(
        k=k, subsets=subsets, determinants=dets, probabilities=dets / total
    )


def sample_with_fallback(
    kernel: QualityDiversityKernel,
    k: int,
    mode: SamplerMode,
    seed,
    relevance: np.ndarray | None = None,
) -> SubsetSample:
    """Sample k indices, degrading gracefully when rank(L) < k.

    For the stochastic modes: draw rank(L) indices from the rank-limited DPP,
    then fill remaining slots with the highest-relevance unselected frames
    (ties to lowest index). Greedy MAP handles exhaustion internally.
    """
    if mode is SamplerMode.GREEDY_MAP:
        return greedy_map(kernel, k)
    sampler_cls = (
        ExactKdppSampler if mode is SamplerMode.EXACT_KDPP else CholeskyKdppSampler
    )
    one_shot = (
        sample_kdpp_exact if mode is SamplerMode.EXACT_KDPP else sample_kdpp_cholesky
    )
    try:
        return one_shot(kernel, k, seed)
    except RankDeficient:
        if relevance is None:
            raise
        w, _ = truncated_spectrum(kernel.matrix)
        rank = int((w > 0).sum())
        if rank > 0:
            rng = np.random.default_rng(seed)
            core = sampler_cls(kernel, rank).draw(rng)
        else:
            core = np.empty(0, dtype=np.int64)
        chosen = set(int(i) for i in core)
        order = np.argsort(-np.asarray(relevance, dtype=np.float64), kind="stable")
        for j in order:
            if len(chosen) == k:
                break
            chosen.add(int(j))
        return _finish_sample(
            kernel, np.sort(list(chosen)), k, mode, fallback_filled=k - rank
        )
