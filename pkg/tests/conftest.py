import numpy as np
import pytest

from dppselect.core import FrameStream, QueryEmbedding, StreamPair, View
from dppselect.kernel import QualityDiversityKernel, kernel_from_parts
from dppselect.scoring import RelevanceVector


def unit_rows(rng: np.random.Generator, n: int, dim: int) -> np.ndarray:
    m = rng.normal(size=(n, dim))
    return m / np.linalg.norm(m, axis=1, keepdims=True)


def unit_vector(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_psd_kernel(
    rng: np.random.Generator, n: int, dim: int = 12
) -> QualityDiversityKernel:
    """Full-rank kernel from random unit embeddings and positive relevance.

    Scores stay well above the clamp floor; floor-level scores would zero out
    their frames at the samplers' relative rank tolerance.
    """
    emb = unit_rows(rng, n, dim)
    scores = np.abs(emb @ unit_vector(rng, dim)) + 0.05
    return kernel_from_parts(emb, scores, View.EGO)


def make_pair(
    rng: np.random.Generator, n_ego: int, n_exo: int, dim: int
) -> StreamPair:
    return StreamPair(
        ego=FrameStream(view=View.EGO, embeddings=unit_rows(rng, n_ego, dim)),
        exo=FrameStream(view=View.EXO, embeddings=unit_rows(rng, n_exo, dim)),
    )


def relevance(view: View, scores) -> RelevanceVector:
    return RelevanceVector(view=view, scores=np.asarray(scores, dtype=float))


def chi_square_pvalue(observed: np.ndarray, expected: np.ndarray) -> float:
    """Pearson chi-square p-value with low-expectation cells pooled.

    Cells with expected count < 5 are merged (smallest first) into one pooled
    cell so the chi-square approximation stays valid.
    """
    from scipy.stats import chi2

    observed = np.asarray(observed, dtype=float)
    expected = np.asarray(expected, dtype=float)
    order = np.argsort(expected)
    obs, exp = observed[order], expected[order]
    small = exp < 5.0
    if small.any():
        pooled_obs, pooled_exp = obs[small].sum(), exp[small].sum()
        obs, exp = obs[~small], exp[~small]
        if pooled_exp > 0:
            obs = np.append(obs, pooled_obs)
            exp = np.append(exp, pooled_exp)
    if len(exp) < 2:
        raise ValueError("not enough cells for a chi-square test")
    # renormalize the expectation to the observed total (guards drop-offs)
    exp = exp * obs.sum() / exp.sum()
    stat = float(((obs - exp) ** 2 / exp).sum())
    return float(chi2.sf(stat, df=len(exp) - 1))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260810)
