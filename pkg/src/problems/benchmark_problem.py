from typing import Callable, Optional, Union
from dataclasses import dataclass
from enum import Enum
import logging

import numpy as np

from ..operators.dense_operator import DenseOperator
from ..utils.errors import ConfigurationError, DimensionMismatchError


logger = logging.getLogger(__name__)


class KernelKind(str, Enum):
    BUMP_C6 = "k1"
    GAUSSIAN = "k2"


class SolutionKind(str, Enum):
    U1 = "u1"
    U2 = "u2"


@dataclass(frozen=True)
class KernelSpec:
    """Convolution kernel k(x, y) of the first-kind benchmark equations.

    k1: (1 - (x-y)^2 / support_width)^exponent for (x-y)^2 <= support_width, else 0.
    k2: prefactor * exp(-gaussian_scale * (x-y)^2), prefactor = 1 / (2 sqrt(gaussian_scale)).
    """

    kind: KernelKind
    support_width: float = 0.1
    exponent: int = 6
    gaussian_scale: float = 20.0

    @classmethod
    def of(
        cls,
        kind: Union["KernelSpec", KernelKind, str],
    ) -> "KernelSpec":
        if isinstance(kind, KernelSpec):
            return kind
        try:
            return cls(kind=KernelKind(kind))
        except ValueError as e:
            raise ConfigurationError(f"Invalid kernel: {kind}") from e

    def __call__(
        self,
        x: np.ndarray,
        y: np.ndarray,
    ) -> np.ndarray:
        squared = (np.asarray(x, dtype=float) - np.asarray(y, dtype=float)) ** 2
        if self.kind == KernelKind.BUMP_C6:
            inside = squared <= self.support_width
            base = np.where(
                inside,
                1.0 - squared / self.support_width,
                0.0,
            )
            return np.where(
                inside,
                base**self.exponent,
                0.0,
            )
        prefactor = 1.0 / (2.0 * np.sqrt(self.gaussian_scale))
        return prefactor * np.exp(-self.gaussian_scale * squared)


Kernel = Union[KernelSpec, Callable[[np.ndarray, np.ndarray], np.ndarray]]


@dataclass(frozen=True)
class InverseProblem:
    operator: DenseOperator
    y_clean: np.ndarray
    y_noisy: np.ndarray
    u_exact: Optional[np.ndarray]
    delta: float
    grid: Optional[np.ndarray] = None

    def residual(
        self,
        u: np.ndarray,
    ) -> np.ndarray:
        return self.operator.apply(u) - self.y_noisy

    def error(
        self,
        u: np.ndarray,
    ) -> float:
        if self.u_exact is None:
            raise ConfigurationError("Problem has no exact solution")
        return float(np.linalg.norm(u - self.u_exact))

    def scaled(
        self,
        factor: float,
    ) -> "InverseProblem":
        """Same solution, operator and data multiplied by ``factor``."""
        return InverseProblem(
            operator=DenseOperator(factor * self.operator.entries),
            y_clean=factor * self.y_clean,
            y_noisy=factor * self.y_noisy,
            u_exact=self.u_exact,
            delta=abs(factor) * self.delta,
            grid=self.grid,
        )

    def normalized(self) -> "InverseProblem":
        """Rescaled so that the operator norm is 1; errors are unchanged."""
        norm = self.operator.norm
        if norm == 0:
            raise ConfigurationError("Cannot normalize a zero operator")
        return self.scaled(1.0 / norm)


def _check_grid_size(
    m: int,
) -> None:
    if int(m) != m or m < 2:
        raise ConfigurationError(f"Invalid grid size m={m}: need an integer m >= 2")


def uniform_grid(
    m: int,
) -> np.ndarray:
    _check_grid_size(m)
    return np.arange(m + 1) / m


def trapezoid_weights(
    m: int,
) -> np.ndarray:
    _check_grid_size(m)
    weights = np.full(
        m + 1,
        1.0 / m,
    )
    weights[0] = weights[-1] = 1.0 / (2 * m)
    return weights


def kernel_matrix(
    kernel: Kernel,
    m: int,
) -> np.ndarray:
    grid = uniform_grid(m)
    return np.asarray(
        kernel(grid[:, None], grid[None, :]),
        dtype=float,
    ) * np.ones((m + 1, m + 1))


def build_operator(
    kernel: Kernel,
    m: int,
) -> DenseOperator:
    """Nodal trapezoidal discretization: F[i, j] = w_j k(x_i, x_j), x_i = i/m."""
    if isinstance(kernel, (str, KernelKind)):
        kernel = KernelSpec.of(kernel)
    matrix = kernel_matrix(
        kernel,
        m,
    ) * trapezoid_weights(m)[None, :]
    return DenseOperator(matrix)


def exact_solution(
    which: Union[SolutionKind, str],
    m: int,
) -> np.ndarray:
    try:
        which = SolutionKind(which)
    except ValueError as e:
        raise ConfigurationError(f"Invalid solution: {which}") from e
    x = uniform_grid(m)
    if which == SolutionKind.U1:
        return x * (1.0 - x) + np.cos(20.0 * x)
    return np.where(
        (x >= 0.3) & (x <= 0.5),
        1.0,
        0.0,
    )


def scaled_noise(
    size: int,
    norm: float,
    seed: int,
) -> np.ndarray:
    """Standard normal draw from ``default_rng(seed)`` rescaled to Euclidean norm ``norm``."""
    if norm < 0:
        raise ConfigurationError(f"Invalid noise norm: {norm}")
    noise = np.random.default_rng(seed).standard_normal(size)
    if norm == 0:
        return np.zeros(size)
    return noise * (norm / np.linalg.norm(noise))


def problem_from_solution(
    operator: DenseOperator,
    u_exact: np.ndarray,
    delta: float,
    seed: int,
    grid: Optional[np.ndarray] = None,
) -> InverseProblem:
    """Exact data F u_exact plus noise of absolute norm ``delta``."""
    u_exact = np.asarray(
        u_exact,
        dtype=float,
    )
    if u_exact.shape != (operator.cols,):
        raise DimensionMismatchError(
            "exact solution",
            (operator.cols,),
            u_exact.shape,
        )
    y_clean = operator.apply(u_exact)
    noise = scaled_noise(
        operator.rows,
        delta,
        seed,
    )
    return InverseProblem(
        operator=operator,
        y_clean=y_clean,
        y_noisy=y_clean + noise,
        u_exact=u_exact,
        delta=float(np.linalg.norm(noise)),
        grid=grid,
    )


def make_problem(
    kernel: Union[KernelSpec, KernelKind, str],
    which: Union[SolutionKind, str],
    m: int,
    noise_fraction: float,
    seed: int,
    normalize: bool = False,
) -> InverseProblem:
    if not 0.0 <= noise_fraction < 1.0:
        raise ConfigurationError(
            f"Invalid noise_fraction: {noise_fraction}, expected a value in [0, 1)"
        )
    kernel = KernelSpec.of(kernel)
    operator = build_operator(
        kernel,
        m,
    )
    u_exact = exact_solution(
        which,
        m,
    )
    y_clean = operator.apply(u_exact)
    problem = problem_from_solution(
        operator=operator,
        u_exact=u_exact,
        delta=noise_fraction * float(np.linalg.norm(y_clean)),
        seed=seed,
        grid=uniform_grid(m),
    )
    if normalize:
        problem = problem.normalized()
    logger.info(
        "Built %s/%s problem: m=%d noise_fraction=%g normalized=%s delta=%.6e",
        kernel.kind.value,
        SolutionKind(which).value,
        m,
        noise_fraction,
        normalize,
        problem.delta,
    )
    return problem


def make_source_element(
    operator: DenseOperator,
    mu: float,
    omega: np.ndarray,
) -> np.ndarray:
    """Return (F*F)^mu omega, a solution of known smoothness."""
    if mu <= 0:
        raise ConfigurationError(f"Invalid source exponent mu={mu}: must be positive")
    return operator.spectral_transform(
        lambda lam: np.power(np.maximum(lam, 0.0), mu),
        omega,
    )


def build_spectral_operator(
    m: int,
    sigma_min: float = 1e-6,
    seed: int = 0,
) -> DenseOperator:
    """(m+1)x(m+1) operator U diag(sigma) V^T, sigma log-spaced in [sigma_min, 1]."""
    _check_grid_size(m)
    if not 0.0 < sigma_min <= 1.0:
        raise ConfigurationError(f"Invalid sigma_min: {sigma_min}")
    rng = np.random.default_rng(seed)
    size = m + 1
    factors = []
    for _ in range(2):
        q, r = np.linalg.qr(rng.standard_normal((size, size)))
        factors.append(q * np.sign(np.diag(r))[None, :])
    sigma = np.logspace(
        0.0,
        np.log10(sigma_min),
        size,
    )
    return DenseOperator((factors[0] * sigma) @ factors[1].T)
