import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sqhard import geometry as geo


def naive_hadamard_matrix(d):
    # brute-force oracle: Sylvester construction, orthonormal scaling
    h = np.array([[1.0]])
    while h.shape[0] < d:
        h = np.block([[h, h], [h, -h]])
    return h / math.sqrt(d)


class TestSampleFamily:
    def test_standard_basis_pair(self):
        f1 = np.zeros((4, 1))
        f1[0, 0] = 1.0
        f2 = np.zeros((4, 1))
        f2[1, 0] = 1.0
        assert geo.pairwise_orthogonality(f1, f2) == pytest.approx(0.0, abs=1e-15)

    def test_angle_theta(self):
        theta = math.pi / 3
        f1 = np.array([[1.0], [0.0]])
        f2 = np.array([[math.cos(theta)], [math.sin(theta)]])
        assert geo.pairwise_orthogonality(f1, f2) == pytest.approx(0.5)

    def test_identical_frames(self):
        f = geo._random_frame(np.random.default_rng(0), 6, 2)
        assert geo.pairwise_orthogonality(f, f) == pytest.approx(1.0)

    def test_family_invariants(self):
        fam = geo.sample_family(d=64, k=4, count=16, eps_orth=0.5, seed=1)
        assert len(fam) == 16
        for f in fam.frames:
            assert np.max(np.abs(f.T @ f - np.eye(4))) <= 1e-10
        assert geo.pairwise_orthogonality(fam) <= 0.5
        # regression value: pinned from the first run of this configuration
        assert fam.rejections == 4

    def test_deterministic_given_seed(self):
        a = geo.sample_family(d=16, k=2, count=4, eps_orth=0.6, seed=9)
        b = geo.sample_family(d=16, k=2, count=4, eps_orth=0.6, seed=9)
        for fa, fb in zip(a.frames, b.frames):
            np.testing.assert_array_equal(fa, fb)

    def test_infeasible_reports_best_bound(self):
        # three 1-d subspaces of R^2 cannot all have pairwise cosine < 0.5
        with pytest.raises(geo.InfeasibleFamilyError) as exc:
            geo.sample_family(d=2, k=1, count=3, eps_orth=0.3, seed=0, max_retries=30)
        assert 0 < exc.value.best_bound <= 1.0

    def test_projection_property_random_unit_vectors(self):
        fam = geo.sample_family(d=32, k=3, count=6, eps_orth=0.55, seed=3)
        rng = np.random.default_rng(0)
        for i in range(len(fam)):
            for j in range(len(fam)):
                if i == j:
                    continue
                coeffs = rng.standard_normal((3, 100))
                coeffs /= np.linalg.norm(coeffs, axis=0)
                u = fam.frames[i] @ coeffs  # unit vectors inside U_i
                proj_norms = np.linalg.norm(fam.frames[j].T @ u, axis=0)
                assert np.all(proj_norms <= fam.eps_orth + 1e-10)

    @pytest.mark.parametrize(
        "d,k,count,eps", [(0, 1, 1, 0.5), (4, 5, 1, 0.5), (4, 1, 0, 0.5), (4, 1, 1, 1.5)]
    )
    def test_rejects_bad_arguments(self, d, k, count, eps):
        with pytest.raises(ValueError):
            geo.sample_family(d, k, count, eps, seed=0)


class TestExtendToFullBasis:
    def test_standard_basis_frame(self):
        frame = np.eye(5)[:, :2]
        q = geo.extend_to_full_basis(frame)
        np.testing.assert_array_equal(q[:, :2], frame)
        np.testing.assert_allclose(q.T @ q, np.eye(5), atol=1e-10)

    def test_random_frame(self):
        frame = geo._random_frame(np.random.default_rng(5), 8, 3)
        q = geo.extend_to_full_basis(frame)
        np.testing.assert_array_equal(q[:, :3], frame)
        assert np.max(np.abs(q.T @ q - np.eye(8))) <= 1e-10
        assert abs(abs(np.linalg.det(q)) - 1.0) <= 1e-8
        # completion orthogonal to the frame columns
        assert np.max(np.abs(frame.T @ q[:, 3:])) <= 1e-10

    def test_rejects_non_orthonormal(self):
        with pytest.raises(ValueError):
            geo.extend_to_full_basis(np.ones((4, 2)))


class TestWalshHadamard:
    def test_d2(self):
        np.testing.assert_allclose(
            geo.walsh_hadamard(np.array([1.0, 0.0])), [1 / math.sqrt(2), 1 / math.sqrt(2)]
        )

    def test_constant_vector(self):
        np.testing.assert_allclose(
            geo.walsh_hadamard(np.ones(4.0 == 4.0 and 4)), [2.0, 0.0, 0.0, 0.0]
        )

    def test_matches_naive_matrix(self):
        rng = np.random.default_rng(2)
        x = rng.standard_normal(8)
        np.testing.assert_allclose(
            geo.walsh_hadamard(x), naive_hadamard_matrix(8) @ x, atol=1e-12
        )

    def test_rejects_non_power_of_two(self):
        with pytest.raises(ValueError):
            geo.walsh_hadamard(np.zeros(6))

    @given(
        p=st.integers(min_value=0, max_value=7),
        seed=st.integers(min_value=0, max_value=10**6),
    )
    @settings(max_examples=40, deadline=None)
    def test_involution_and_isometry(self, p, seed):
        d = 2**p
        x = np.random.default_rng(seed).standard_normal(d)
        hx = geo.walsh_hadamard(x)
        assert np.linalg.norm(hx) == pytest.approx(np.linalg.norm(x), abs=1e-10)
        np.testing.assert_allclose(geo.walsh_hadamard(hx), x, atol=1e-10)
        # l-inf / l2 bridge for the orthonormal transform
        assert np.max(np.abs(hx)) >= np.linalg.norm(x) / math.sqrt(max(d, 1)) - 1e-12

    def test_batched_rows(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal((5, 16))
        single = np.stack([geo.walsh_hadamard(r) for r in x])
        np.testing.assert_allclose(geo.walsh_hadamard(x), single, atol=1e-12)


def test_next_power_of_two():
    assert [geo.next_power_of_two(n) for n in (1, 2, 3, 60, 64, 65)] == [1, 2, 4, 64, 64, 128]
