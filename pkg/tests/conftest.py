from typing import Callable, Optional

import numpy as np
import pytest

from src.operators.dense_operator import DenseOperator
from src.problems.benchmark_problem import InverseProblem


def random_operator(
    rng: np.random.Generator,
    rows: int,
    cols: int,
    normalize: bool = False,
) -> DenseOperator:
    entries = rng.standard_normal((rows, cols)) / np.sqrt(max(rows, cols))
    if normalize:
        entries = entries / np.linalg.norm(entries, 2)
    return DenseOperator(entries)


def orthogonal(
    rng: np.random.Generator,
    size: int,
) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((size, size)))
    return q * np.sign(np.diag(r))[None, :]


def problem_for(
    operator: DenseOperator,
    u_exact: np.ndarray,
    y_noisy: Optional[np.ndarray] = None,
) -> InverseProblem:
    y_clean = operator.apply(u_exact)
    y_noisy = y_clean if y_noisy is None else y_noisy
    return InverseProblem(
        operator=operator,
        y_clean=y_clean,
        y_noisy=y_noisy,
        u_exact=u_exact,
        delta=float(np.linalg.norm(y_noisy - y_clean)),
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(42)


@pytest.fixture
def scalar_operator() -> DenseOperator:
    return DenseOperator(np.array([[1.0]]))


@pytest.fixture
def make_operator(
    rng: np.random.Generator,
) -> Callable[..., DenseOperator]:
    def factory(
        rows: int,
        cols: int,
        normalize: bool = False,
    ) -> DenseOperator:
        return random_operator(
            rng,
            rows,
            cols,
            normalize,
        )

    return factory
