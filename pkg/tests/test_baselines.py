import numpy as np
import pytest
from pydantic import ValidationError

from src.operators.dense_operator import DenseOperator
from src.problems.benchmark_problem import make_problem
from src.regularizers.baselines import (
    BaselineConfig,
    BaselineMethod,
    ConjugateGradient,
    Landweber,
    cg_normal,
    default_relaxation,
    landweber,
)
from src.utils.errors import ConfigurationError

from conftest import orthogonal, problem_for


class TestLandweber:
    def test_zero_data(self, make_operator):
        op = make_operator(4, 3)
        sequence = Landweber().iterate(problem_for(op, np.zeros(3)), 5)
        assert sequence.method == "landweber"
        np.testing.assert_array_equal(sequence.iterates, 0.0)

    def test_scalar_iterates(self, scalar_operator):
        problem = problem_for(scalar_operator, np.ones(1))
        sequence = Landweber(relaxation=0.5).iterate(problem, 6)
        np.testing.assert_allclose(
            sequence.iterates[:, 0],
            1.0 - 0.5 ** np.arange(7),
        )

    def test_filter_form(self, make_operator, rng):
        op = make_operator(6, 4)
        y = rng.standard_normal(6)
        relaxation = 0.9 / op.norm**2
        sequence = Landweber(relaxation=relaxation).iterate(problem_for(op, np.zeros(4), y), 12)
        for k in (1, 5, 12):
            np.testing.assert_allclose(
                sequence.iterates[k],
                op.spectral_apply(lambda lam: (1.0 - (1.0 - relaxation * lam) ** k) / lam, y),
                rtol=1e-10,
                atol=1e-12,
            )

    def test_default_relaxation(self):
        problem = problem_for(DenseOperator(np.diag([2.0, 1.0])), np.ones(2))
        assert default_relaxation(problem) == pytest.approx(0.25)
        zero = problem_for(DenseOperator(np.zeros((2, 2))), np.ones(2))
        assert default_relaxation(zero) == 1.0
        assert Landweber().iterate(problem, 3).metadata["relaxation"] == pytest.approx(0.25)

    def test_unstable_relaxation(self, make_operator):
        op = make_operator(3, 3, normalize=True)
        with pytest.raises(ConfigurationError):
            Landweber(relaxation=2.5).iterate(problem_for(op, np.ones(3)), 4)

    def test_converges_on_well_conditioned_problem(self, rng):
        q = orthogonal(rng, 4)
        op = DenseOperator(q @ np.diag([1.0, 0.9, 0.7, 0.5]) @ q.T)
        u = rng.standard_normal(4)
        sequence = Landweber().iterate(problem_for(op, u), 200)
        np.testing.assert_allclose(sequence.final, u, atol=1e-8)


class TestConjugateGradient:
    def test_orthogonal_operator_one_step(self, rng):
        q = orthogonal(rng, 5)
        u = rng.standard_normal(5)
        sequence = ConjugateGradient().iterate(problem_for(DenseOperator(q), u), 5)
        assert sequence.method == "cg"
        assert len(sequence) == 2
        assert sequence.metadata["status"] == "converged"
        np.testing.assert_allclose(sequence.final, u, rtol=1e-12, atol=1e-14)

    def test_finite_termination(self, rng):
        singular_values = np.array([1.0, 1.0, 0.5, 0.5, 0.2, 0.2])
        op = DenseOperator(orthogonal(rng, 6) @ np.diag(singular_values) @ orthogonal(rng, 6))
        u = rng.standard_normal(6)
        sequence = ConjugateGradient().iterate(problem_for(op, u), 6)
        assert len(sequence) >= 4
        for iterate in sequence.iterates[3:]:
            np.testing.assert_allclose(iterate, u, rtol=1e-8, atol=1e-10)

    def test_zero_data(self, make_operator):
        sequence = ConjugateGradient().iterate(problem_for(make_operator(4, 3), np.zeros(3)), 3)
        assert len(sequence) == 1
        assert sequence.metadata["status"] == "converged"

    def test_iteration_cap(self, make_operator):
        problem = problem_for(make_operator(5, 3), np.ones(3))
        with pytest.raises(ConfigurationError):
            cg_normal(problem, BaselineConfig(method="cg", max_iters=4))
        with pytest.raises(ConfigurationError):
            ConjugateGradient(clip_to_cols=False).iterate(problem, 4)
        assert len(ConjugateGradient().iterate(problem, 10)) <= 4

    def test_data_residual_nonincreasing(self):
        problem = make_problem("k1", "u1", 32, 0.01, 5)
        sequence = ConjugateGradient().iterate(problem, 20)
        residuals = sequence.residuals(problem)
        assert np.all(np.diff(residuals) <= 1e-10 * residuals[0])

    def test_breakdown_truncates(self):
        op = DenseOperator(np.diag([1.0, 1e-9]))
        problem = problem_for(op, np.ones(2), np.array([0.0, 1.0]))
        sequence = ConjugateGradient().iterate(problem, 2)
        assert sequence.metadata["status"] == "breakdown"
        assert len(sequence) == 1


class TestBaselineConfig:
    def test_valid(self):
        config = BaselineConfig(method="landweber", max_iters=3, relaxation=0.5)
        assert config.method == BaselineMethod.LANDWEBER
        assert landweber(
            problem_for(DenseOperator(np.array([[1.0]])), np.ones(1)),
            config,
        ).iterates.shape == (4, 1)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"method": "landweber", "max_iters": 0},
            {"method": "landweber", "max_iters": 3, "relaxation": -1.0},
            {"method": "sor", "max_iters": 3},
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValidationError):
            BaselineConfig(**kwargs)

    def test_frozen(self):
        config = BaselineConfig(method="cg", max_iters=2)
        with pytest.raises(ValidationError):
            config.max_iters = 5
