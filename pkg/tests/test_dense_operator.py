from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from src.operators.dense_operator import (
    DenseOperator,
    SpectralFunction,
    check_symmetric,
    solve_spd,
)
from src.utils.errors import (
    DimensionMismatchError,
    NotPositiveDefiniteError,
    NumericalError,
)

from conftest import orthogonal


class TestApply:
    def test_shapes(self, make_operator):
        op = make_operator(5, 3)
        assert op.shape == (5, 3)
        assert op.apply(np.ones(3)).shape == (5,)
        assert op.apply_adjoint(np.ones(5)).shape == (3,)
        assert op.apply(np.ones((3, 4))).shape == (5, 4)

    def test_adjoint_identity(self, make_operator, rng):
        op = make_operator(7, 4)
        x = rng.standard_normal(4)
        y = rng.standard_normal(7)
        np.testing.assert_allclose(
            op.apply(x) @ y,
            x @ op.apply_adjoint(y),
            rtol=1e-12,
        )

    def test_dimension_mismatch(self, make_operator):
        op = make_operator(5, 3)
        with pytest.raises(DimensionMismatchError):
            op.apply(np.ones(5))
        with pytest.raises(DimensionMismatchError):
            op.apply_adjoint(np.ones(3))
        with pytest.raises(DimensionMismatchError):
            op.spectral_apply(lambda lam: lam, np.ones(3))

    def test_entries_are_frozen_copies(self):
        source = np.eye(3)
        op = DenseOperator(source)
        source[0, 0] = 5.0
        assert op.entries[0, 0] == 1.0
        with pytest.raises(ValueError):
            op.entries[0, 0] = 2.0

    def test_non_finite_entries_rejected(self):
        with pytest.raises(NumericalError):
            DenseOperator(np.array([[1.0, np.nan]]))


class TestSvd:
    def test_reconstruction_and_order(self, make_operator):
        op = make_operator(6, 4)
        factors = op.svd()
        np.testing.assert_allclose(
            (factors.U * factors.s) @ factors.Vt,
            op.entries,
            atol=1e-12,
        )
        assert np.all(np.diff(factors.s) <= 0)
        assert op.norm == pytest.approx(np.linalg.norm(op.entries, 2), rel=1e-12)

    def test_identity_and_zero(self):
        assert DenseOperator.identity(4).norm == pytest.approx(1.0)
        assert DenseOperator(np.zeros((3, 3))).norm == 0.0

    def test_norm_bounds_images(self, make_operator, rng):
        op = make_operator(7, 5)
        for x in rng.standard_normal((100, 5)):
            assert np.linalg.norm(op.apply(x)) <= op.norm * np.linalg.norm(x) * (1.0 + 1e-12)

    def test_cached_once_across_threads(self, make_operator):
        op = make_operator(20, 20)
        with ThreadPoolExecutor(max_workers=4) as pool:
            results = list(pool.map(lambda _: op.svd(), range(8)))
        assert all(result is results[0] for result in results)


class TestSpectralCalculus:
    def test_inverse_filter_inverts(self, rng):
        q = orthogonal(rng, 5)
        op = DenseOperator(q @ np.diag([1.0, 1.5, 2.0, 2.5, 3.0]) @ q.T)
        x = rng.standard_normal(5)
        np.testing.assert_allclose(
            op.spectral_apply(lambda lam: 1.0 / lam, op.apply(x)),
            x,
            rtol=1e-10,
        )

    @pytest.mark.parametrize("shape", [(5, 5), (6, 4), (3, 7)])
    def test_constant_filter_is_adjoint(self, make_operator, rng, shape):
        op = make_operator(*shape)
        y = rng.standard_normal(shape[0])
        np.testing.assert_allclose(
            op.spectral_apply(lambda lam: np.ones_like(lam), y),
            op.apply_adjoint(y),
            atol=1e-12,
        )

    def test_scalar_example(self):
        op = DenseOperator(np.array([[2.0]]))
        np.testing.assert_allclose(
            op.spectral_apply(lambda lam: lam, np.array([1.0])),
            [8.0],
        )

    def test_multiple_right_hand_sides(self, make_operator, rng):
        op = make_operator(6, 4)
        Y = rng.standard_normal((6, 3))
        g = SpectralFunction(lambda lam: 1.0 / (1.0 + lam))
        stacked = op.spectral_apply(g, Y)
        for column in range(3):
            np.testing.assert_allclose(
                stacked[:, column],
                op.spectral_apply(g, Y[:, column]),
                rtol=1e-12,
            )

    def test_transform_keeps_null_space(self, make_operator, rng):
        op = make_operator(3, 5)
        u = rng.standard_normal(5)
        np.testing.assert_allclose(
            op.spectral_transform(lambda lam: np.ones_like(lam), u),
            u,
            atol=1e-12,
        )
        null_part = u - op.svd().V @ (op.svd().Vt @ u)
        np.testing.assert_allclose(
            op.spectral_transform(lambda lam: lam + 2.0, null_part),
            2.0 * null_part,
            atol=1e-12,
        )

    def test_scan_rejects_non_finite(self):
        g = SpectralFunction(lambda lam: 1.0 / lam, name="inverse")
        with pytest.raises(NumericalError, match="inverse"):
            g.scan(1.0)


class TestSolveSpd:
    def test_matches_direct_solve(self, rng):
        A = rng.standard_normal((6, 6))
        A = A @ A.T + 6.0 * np.eye(6)
        B = rng.standard_normal((6, 2))
        np.testing.assert_allclose(
            solve_spd(A, B),
            np.linalg.solve(A, B),
            rtol=1e-10,
        )

    def test_indefinite_matrix(self):
        with pytest.raises(NotPositiveDefiniteError) as excinfo:
            solve_spd(np.diag([1.0, -1.0, 2.0]), np.ones(3))
        assert excinfo.value.pivot == 2

    def test_asymmetric_matrix(self):
        with pytest.raises(NumericalError, match="not symmetric"):
            check_symmetric(np.array([[1.0, 0.5], [0.0, 1.0]]))
