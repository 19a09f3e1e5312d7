import itertools
import math

import numpy as np
import pytest

from dppselect.core import FrameStream, View
from dppselect.errors import DimensionMismatch, NumericalPSDViolation
from dppselect.kernel import (
    build_kernel,
    certify_psd,
    kernel_from_matrix,
    kernel_from_parts,
)
from dppselect.scoring import RelevanceVector

from conftest import random_psd_kernel, unit_rows

SQ = math.sqrt(0.5)

# Three 2-D frames: two orthogonal plus their normalized sum. Kernel with
# unit scores is [[1,0,r],[0,1,r],[r,r,1]] with r = sqrt(1/2); frame 3 is a
# linear combination of the others, so det(L) = 0.
THREE_FRAME_EMBEDDINGS = np.array([[1.0, 0.0], [0.0, 1.0], [SQ, SQ]])
THREE_FRAME_KERNEL = np.array([[1.0, 0.0, SQ], [0.0, 1.0, SQ], [SQ, SQ, 1.0]])


def three_frame_kernel():
    return kernel_from_parts(THREE_FRAME_EMBEDDINGS, np.ones(3), View.EGO)


class TestBuildKernel:
    def test_duplicate_frames_rank_one(self):
        emb = np.array([[1.0, 0.0], [1.0, 0.0]])
        kern = kernel_from_parts(emb, np.ones(2), View.EGO)
        assert np.allclose(kern.matrix, np.ones((2, 2)), atol=1e-12)
        assert abs(np.linalg.det(kern.matrix)) < 1e-12

    def test_orthogonal_frames_diagonal(self):
        emb = np.eye(3)
        scores = np.array([0.3, 0.5, 0.9])
        kern = kernel_from_parts(emb, scores, View.EXO)
        assert np.allclose(kern.matrix, np.diag(scores**2), atol=1e-12)

    def test_three_frame_derived_example(self):
        kern = three_frame_kernel()
        assert np.max(np.abs(kern.matrix - THREE_FRAME_KERNEL)) < 1e-12
        # hand-computed: det = 1*(1 - 1/2) - 0 + r*(0 - r) = 1/2 - 1/2 = 0
        assert abs(np.linalg.det(kern.matrix)) < 1e-12

    def test_exact_symmetry(self, rng):
        for _ in range(10):
            kern = random_psd_kernel(rng, int(rng.integers(3, 30)))
            assert np.array_equal(kern.matrix, kern.matrix.T)

    def test_diagonal_is_squared_scores(self, rng):
        emb = unit_rows(rng, 12, 6)
        scores = rng.uniform(1e-6, 1.0, size=12)
        kern = kernel_from_parts(emb, scores, View.EGO)
        assert np.max(np.abs(np.diag(kern.matrix) - scores**2)) < 1e-9

    def test_stream_interface(self, rng):
        stream = FrameStream(view=View.EGO, embeddings=unit_rows(rng, 5, 4))
        scores = RelevanceVector(view=View.EGO, scores=rng.uniform(0.1, 0.9, 5))
        kern = build_kernel(stream, scores)
        assert kern.view is View.EGO
        assert kern.n == 5

    def test_length_mismatch(self, rng):
        stream = FrameStream(view=View.EGO, embeddings=unit_rows(rng, 5, 4))
        scores = RelevanceVector(view=View.EGO, scores=rng.uniform(0.1, 0.9, 4))
        with pytest.raises(DimensionMismatch):
            build_kernel(stream, scores)

    def test_requires_positive_scores(self, rng):
        with pytest.raises(ValueError):
            kernel_from_parts(unit_rows(rng, 3, 4), np.array([0.5, 0.0, 0.1]), View.EGO)

    def test_score_scaling_covariance(self, rng):
        emb = unit_rows(rng, 6, 5)
        scores = rng.uniform(0.05, 0.9, size=6)
        base = kernel_from_parts(emb, scores, View.EGO).matrix
        scaled = kernel_from_parts(emb, 3.0 * scores, View.EGO).matrix
        assert np.max(np.abs(scaled - 9.0 * base)) < 1e-9
        # determinants of size-|S| submatrices scale by c^(2|S|)
        sub = [0, 2, 5]
        d0 = np.linalg.det(base[np.ix_(sub, sub)])
        d1 = np.linalg.det(scaled[np.ix_(sub, sub)])
        assert d1 == pytest.approx(3.0 ** (2 * len(sub)) * d0, rel=1e-9)

    def test_hadamard_determinant_bound(self, rng):
        for _ in range(5):
            emb = unit_rows(rng, 8, 6)
            scores = rng.uniform(1e-3, 1.0, size=8)
            kern = kernel_from_parts(emb, scores, View.EGO)
            for size in (2, 3):
                for sub in itertools.combinations(range(8), size):
                    det = np.linalg.det(kern.matrix[np.ix_(sub, sub)])
                    bound = np.prod(scores[list(sub)] ** 2)
                    assert det <= bound + 1e-12

    def test_dump_round_trips_as_f32(self, rng, tmp_path):
        kern = random_psd_kernel(rng, 6)
        kern.dump(tmp_path / "L.f32")
        raw = np.frombuffer((tmp_path / "L.f32").read_bytes(), dtype="<f4")
        assert np.allclose(raw.reshape(6, 6), kern.matrix, atol=1e-6)


class TestCertifyPsd:
    def test_identity(self):
        report = certify_psd(np.eye(3))
        assert report.min_eigenvalue == pytest.approx(1.0, abs=1e-12)
        assert report.jitter == 0.0

    def test_all_ones_records_jitter(self):
        report = certify_psd(np.ones((2, 2)))
        assert report.min_eigenvalue == pytest.approx(0.0, abs=1e-12)
        assert report.jitter > 0.0

    def test_negative_eigenvalue_rejected(self):
        matrix = np.diag([1.0, -0.5])
        with pytest.raises(NumericalPSDViolation):
            certify_psd(matrix)

    def test_asymmetric_rejected(self):
        matrix = np.array([[1.0, 0.5], [0.2, 1.0]])
        with pytest.raises(NumericalPSDViolation):
            certify_psd(matrix)

    def test_random_kernels_certify_clean(self, rng):
        for _ in range(20):
            kern = random_psd_kernel(rng, int(rng.integers(3, 20)))
            trace_scale = np.trace(kern.matrix) / kern.n
            assert kern.min_eigenvalue >= -1e-8 * trace_scale
            assert kern.jitter_applied >= 0.0

    def test_kernel_from_matrix_wraps(self):
        kern = kernel_from_matrix(np.eye(4), View.EXO)
        assert kern.n == 4 and kern.jitter_applied == 0.0

    def test_sampling_matrix_adds_jitter(self):
        kern = kernel_from_matrix(np.ones((2, 2)))
        assert kern.jitter_applied > 0
        diff = kern.sampling_matrix() - kern.matrix
        assert np.allclose(diff, kern.jitter_applied * np.eye(2), atol=1e-15)
