from typing import Union
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import comb

from ..utils.errors import ConfigurationError


ArrayLike = Union[float, np.ndarray]

# Chebyshev values switch from the shifted recurrence to hyperbolic forms above this n * arcosh(x).
CHEBYSHEV_HYPERBOLIC_ARGUMENT = 1.0


class Representation(str, Enum):
    RECURSION = "recursion"
    CHEBYSHEV = "chebyshev"
    COSH = "cosh"
    POLY = "poly"


def _as_lambda(
    lam: ArrayLike,
) -> np.ndarray:
    values = np.asarray(
        lam,
        dtype=float,
    )
    if np.any(values < 0):
        raise ConfigurationError("Spectral variable lambda must be nonnegative")
    return values


def _finish(
    values: np.ndarray,
    lam: ArrayLike,
) -> ArrayLike:
    if np.ndim(lam) == 0:
        return float(values)
    return values


def _check_horizon(
    N: int,
) -> None:
    if int(N) != N or N < 1:
        raise ConfigurationError(f"Invalid step count N={N}: need an integer N >= 1")


def _check_time(
    T: float,
) -> None:
    if not T > 0:
        raise ConfigurationError(f"Invalid final time T={T}: must be positive")


def stable_sech(
    a: ArrayLike,
) -> np.ndarray:
    a = np.abs(np.asarray(a, dtype=float))
    decay = np.exp(-a)
    return 2.0 * decay / (1.0 + decay * decay)


def continuous_filter(
    T: float,
    lam: ArrayLike,
) -> ArrayLike:
    """f(T, lambda) = (1 - 1/cosh(sqrt(lambda) T)) / lambda, f(T, 0) = T^2 / 2."""
    _check_time(T)
    values = _as_lambda(lam)
    a = np.sqrt(values) * T
    safe = np.where(
        a > 0,
        a,
        1.0,
    )
    rise = -np.expm1(-safe)
    result = T * T * rise * rise / (safe * safe * (1.0 + np.exp(-2.0 * safe)))
    result = np.where(
        a > 0,
        result,
        0.5 * T * T,
    )
    return _finish(
        result,
        lam,
    )


def continuous_residual_factor(
    T: float,
    lam: ArrayLike,
) -> ArrayLike:
    """1 - lambda f(T, lambda) = 1/cosh(sqrt(lambda) T)."""
    _check_time(T)
    values = _as_lambda(lam)
    return _finish(
        stable_sech(np.sqrt(values) * T),
        lam,
    )


def trajectory_filter(
    t: float,
    T: float,
    lam: ArrayLike,
) -> ArrayLike:
    """Filter of the flow at intermediate time t."""
    _check_time(T)
    if not 0.0 <= t <= T:
        raise ConfigurationError(f"Invalid time t={t}: need 0 <= t <= T={T}")
    values = _as_lambda(lam)
    root = np.sqrt(values)
    a = root * T
    b = root * (T - t)
    half_sum = 0.5 * (a + b)
    half_gap = 0.5 * (a - b)
    numerator = np.expm1(-2.0 * half_sum) * np.expm1(-2.0 * half_gap)
    safe = np.where(
        values > 0,
        values,
        1.0,
    )
    result = numerator / ((1.0 + np.exp(-2.0 * a)) * safe)
    result = np.where(
        values > 0,
        result,
        0.5 * (T * T - (T - t) ** 2),
    )
    return _finish(
        result,
        lam,
    )


def trajectory_residual_factor(
    t: float,
    T: float,
    lam: ArrayLike,
) -> ArrayLike:
    """cosh(sqrt(lambda)(T - t)) / cosh(sqrt(lambda) T), the weight of u0 at time t."""
    _check_time(T)
    if not 0.0 <= t <= T:
        raise ConfigurationError(f"Invalid time t={t}: need 0 <= t <= T={T}")
    values = _as_lambda(lam)
    root = np.sqrt(values)
    a = root * T
    b = root * (T - t)
    result = np.exp(-(a - b)) * (1.0 + np.exp(-2.0 * b)) / (1.0 + np.exp(-2.0 * a))
    return _finish(
        result,
        lam,
    )


def h_sequence(
    N: int,
    lam: ArrayLike,
) -> np.ndarray:
    """Backward recursion h_k = 2 + lambda - 1/h_{k+1}, h_N = lambda + 1.

    Returns the values ordered h_N, h_{N-1}, ..., h_1 along the first axis.
    """
    _check_horizon(N)
    values = _as_lambda(lam)
    sequence = np.empty((N,) + values.shape)
    current = values + 1.0
    sequence[0] = current
    for index in range(1, N):
        current = 2.0 + values - 1.0 / current
        sequence[index] = current
    return sequence


def f_sequence(
    N: int,
    lam: ArrayLike,
) -> np.ndarray:
    """Spectral values of the cost operators, ordered f_N, ..., f_1."""
    _check_horizon(N)
    values = _as_lambda(lam)
    sequence = np.empty((N,) + values.shape)
    current = np.ones_like(values)
    sequence[0] = current
    for index in range(1, N):
        current = 1.0 + current / (values * current + 1.0)
        sequence[index] = current
    return sequence


def _log_product(
    N: int,
    values: np.ndarray,
) -> np.ndarray:
    return np.sum(
        np.log1p(values * f_sequence(N, values)),
        axis=0,
    )


def p_sequence(
    N: int,
    lam: ArrayLike,
) -> np.ndarray:
    """Three-term recursion p_{i+1} = (2 + lambda) p_i - p_{i-1}, p_{-1} = 1, p_0 = lambda + 1.

    Returns p_{-1}, p_0, ..., p_{N-1}; p_{N-1} equals prod_{j=1}^N h_j.
    """
    _check_horizon(N)
    values = _as_lambda(lam)
    sequence = np.empty((N + 1,) + values.shape)
    sequence[0] = 1.0
    sequence[1] = values + 1.0
    for index in range(2, N + 1):
        sequence[index] = (2.0 + values) * sequence[index - 1] - sequence[index - 2]
    return sequence


def chebyshev_T(
    n: int,
    x: ArrayLike,
) -> ArrayLike:
    if int(n) != n or n < 0:
        raise ConfigurationError(f"Invalid Chebyshev order n={n}")
    points = np.asarray(
        x,
        dtype=float,
    )
    previous = np.ones_like(points)
    current = points.copy()
    if n == 0:
        recurrence = previous
    else:
        for _ in range(1, n):
            previous, current = current, 2.0 * points * current - previous
        recurrence = current
    outside = np.abs(points) > 1.0
    if np.any(outside):
        magnitude = np.where(
            outside,
            np.abs(points),
            1.0,
        )
        hyperbolic = np.cosh(n * np.arccosh(magnitude))
        hyperbolic = np.where(
            points < 0,
            (-1.0) ** n * hyperbolic,
            hyperbolic,
        )
        recurrence = np.where(
            outside,
            hyperbolic,
            recurrence,
        )
    return _finish(
        recurrence,
        x,
    )


def chebyshev_T_derivative(
    n: int,
    x: ArrayLike,
) -> ArrayLike:
    """T_n'(x) from the differentiated recurrence T'_{k+1} = 2 T_k + 2x T'_k - T'_{k-1}."""
    if int(n) != n or n < 0:
        raise ConfigurationError(f"Invalid Chebyshev order n={n}")
    points = np.asarray(
        x,
        dtype=float,
    )
    if n == 0:
        return _finish(
            np.zeros_like(points),
            x,
        )
    t_previous, t_current = np.ones_like(points), points.copy()
    d_previous, d_current = np.zeros_like(points), np.ones_like(points)
    for _ in range(1, n):
        t_next = 2.0 * points * t_current - t_previous
        d_next = 2.0 * t_current + 2.0 * points * d_current - d_previous
        t_previous, t_current = t_current, t_next
        d_previous, d_current = d_current, d_next
    return _finish(
        d_current,
        x,
    )


def chebyshev_T_minus_one(
    n: int,
    lam: ArrayLike,
) -> np.ndarray:
    """T_n(x) - 1 at x = sqrt(lambda/4 + 1), accurate for small lambda."""
    values = _as_lambda(lam)
    y = np.arcsinh(np.sqrt(values) / 2.0)
    hyperbolic_range = n * y > CHEBYSHEV_HYPERBOLIC_ARGUMENT
    bounded = np.where(
        hyperbolic_range,
        0.0,
        values,
    )
    x = np.sqrt(bounded / 4.0 + 1.0)
    d = (bounded / 4.0) / (x + 1.0)
    # D_k = T_k(x) - 1 obeys D_{k+1} = 2x D_k - D_{k-1} + 2(x - 1)
    previous = np.zeros_like(bounded)
    current = d.copy()
    if n == 0:
        current = previous
    for _ in range(1, n):
        previous, current = current, 2.0 * x * current - previous + 2.0 * d
    with np.errstate(over="ignore"):
        hyperbolic = 2.0 * np.sinh(0.5 * n * y) ** 2
    return np.where(
        hyperbolic_range,
        hyperbolic,
        current,
    )


def chebyshev_q(
    N: int,
    lam: ArrayLike,
) -> ArrayLike:
    """q_N(lambda) = T_{2N+1}(x) / x with x = sqrt(lambda/4 + 1); equals p_{N-1}."""
    values = _as_lambda(lam)
    x = np.sqrt(values / 4.0 + 1.0)
    return _finish(
        (1.0 + chebyshev_T_minus_one(2 * N + 1, values)) / x,
        lam,
    )


def discrete_limit_at_zero(
    N: int,
) -> float:
    """g_N(0) = ((2N+1)^2 - 1) / 8 = N (N + 1) / 2."""
    _check_horizon(N)
    return ((2 * N + 1) ** 2 - 1) / 8.0


def _recursion_form(
    N: int,
    values: np.ndarray,
    safe: np.ndarray,
) -> np.ndarray:
    return -np.expm1(-_log_product(N, values)) / safe


def _chebyshev_form(
    N: int,
    values: np.ndarray,
    safe: np.ndarray,
) -> np.ndarray:
    order = 2 * N + 1
    y = np.arcsinh(np.sqrt(values) / 2.0)
    hyperbolic_range = order * y > CHEBYSHEV_HYPERBOLIC_ARGUMENT
    bounded = np.where(
        hyperbolic_range,
        0.0,
        values,
    )
    x = np.sqrt(bounded / 4.0 + 1.0)
    shift = (bounded / 4.0) / (x + 1.0)
    t_minus_one = chebyshev_T_minus_one(order, bounded)
    # 1 - x / T = (T - x) / T with T - x = (T - 1) - (x - 1)
    direct = (t_minus_one - shift) / (safe * (1.0 + t_minus_one))
    # 1 / T_n(x) = sech(n y)
    hyperbolic = (1.0 - np.sqrt(values / 4.0 + 1.0) * stable_sech(order * y)) / safe
    return np.where(
        hyperbolic_range,
        hyperbolic,
        direct,
    )


def _cosh_form(
    N: int,
    values: np.ndarray,
    safe: np.ndarray,
) -> np.ndarray:
    y = np.arcsinh(np.sqrt(values) / 2.0)
    numerator = np.expm1(-2.0 * (N + 1) * y) * np.expm1(-2.0 * N * y)
    return numerator / ((1.0 + np.exp(-2.0 * (2 * N + 1) * y)) * safe)


def _poly_form(
    N: int,
    values: np.ndarray,
    safe: np.ndarray,
) -> np.ndarray:
    a = values / 4.0
    with np.errstate(over="ignore"):
        excess = np.expm1(N * np.log1p(a))
        for index in range(1, N + 1):
            excess = excess + float(comb(2 * N + 1, 2 * index, exact=True)) * (
                (1.0 + a) ** (N - index)
            ) * a**index
    finite = np.isfinite(excess)
    bounded = np.where(
        finite,
        excess,
        0.0,
    )
    # excess / (1 + excess) -> 1 once the binomial sum overflows
    return np.where(
        finite,
        bounded / (1.0 + bounded),
        1.0,
    ) / safe


_FORMS = {
    Representation.RECURSION: _recursion_form,
    Representation.CHEBYSHEV: _chebyshev_form,
    Representation.COSH: _cosh_form,
    Representation.POLY: _poly_form,
}


def discrete_filter(
    N: int,
    lam: ArrayLike,
    representation: Union[Representation, str] = Representation.RECURSION,
) -> ArrayLike:
    """g_N(lambda) = (1 - 1 / prod_{j=1}^N h_j(lambda)) / lambda.

    The poly form sums binomial terms and loses accuracy for large N at moderate lambda.
    """
    _check_horizon(N)
    try:
        form = _FORMS[Representation(representation)]
    except ValueError as e:
        raise ConfigurationError(f"Invalid representation: {representation}") from e
    values = _as_lambda(lam)
    positive = values > 0
    safe = np.where(
        positive,
        values,
        1.0,
    )
    result = np.where(
        positive,
        form(N, values, safe),
        discrete_limit_at_zero(N),
    )
    return _finish(
        result,
        lam,
    )


def discrete_residual_factor(
    N: int,
    lam: ArrayLike,
) -> ArrayLike:
    """1 - lambda g_N(lambda) = 1 / prod_{j=1}^N h_j(lambda)."""
    _check_horizon(N)
    values = _as_lambda(lam)
    return _finish(
        np.exp(-_log_product(N, values)),
        lam,
    )


@dataclass(frozen=True)
class ContinuousFilter:
    T: float

    def __post_init__(self) -> None:
        _check_time(self.T)

    def __call__(
        self,
        lam: ArrayLike,
    ) -> ArrayLike:
        return continuous_filter(
            self.T,
            lam,
        )

    def residual(
        self,
        lam: ArrayLike,
    ) -> ArrayLike:
        return continuous_residual_factor(
            self.T,
            lam,
        )

    @property
    def value_at_zero(self) -> float:
        return 0.5 * self.T * self.T

    @property
    def sup_bound(self) -> float:
        return 0.5 * self.T * self.T

    def qualification_rate(
        self,
        mu: float,
    ) -> float:
        """2 (2 mu)^{2 mu} e^{-2 mu} T^{-2 mu}."""
        return 2.0 * (2.0 * mu) ** (2.0 * mu) * np.exp(-2.0 * mu) * self.T ** (-2.0 * mu)


@dataclass(frozen=True)
class DiscreteFilter:
    N: int
    representation: Representation = Representation.RECURSION

    def __post_init__(self) -> None:
        _check_horizon(self.N)

    def __call__(
        self,
        lam: ArrayLike,
    ) -> ArrayLike:
        return discrete_filter(
            self.N,
            lam,
            self.representation,
        )

    def residual(
        self,
        lam: ArrayLike,
    ) -> ArrayLike:
        return discrete_residual_factor(
            self.N,
            lam,
        )

    @property
    def value_at_zero(self) -> float:
        return discrete_limit_at_zero(self.N)

    @property
    def sup_bound(self) -> float:
        return 2.0 * (self.N + 1) ** 2


Filter = Union[ContinuousFilter, DiscreteFilter]


def scan_grid(
    lambda_max: float,
    num_points: int = 2000,
    decades: float = 16.0,
) -> np.ndarray:
    """lambda = 0 followed by a log-spaced grid ending at lambda_max."""
    if not lambda_max > 0:
        raise ConfigurationError(f"Invalid lambda_max={lambda_max}: must be positive")
    top = np.log10(lambda_max)
    return np.concatenate(
        [
            [0.0],
            np.logspace(
                top - decades,
                top,
                num_points,
            ),
        ]
    )


def qualification_bound(
    filter: Filter,
    mu: float,
    lambda_max: float,
    num_points: int = 2000,
) -> float:
    """Numerical sup over lambda of lambda^mu |1 - lambda filter(lambda)|."""
    if mu < 0:
        raise ConfigurationError(f"Invalid mu={mu}: must be nonnegative")
    grid = scan_grid(
        lambda_max,
        num_points,
    )
    values = np.power(grid, mu) * np.abs(filter.residual(grid))
    return float(np.max(values))


def filter_sup(
    filter: Filter,
    lambda_max: float = 1e4,
    num_points: int = 2000,
) -> float:
    grid = scan_grid(
        lambda_max,
        num_points,
    )
    return float(np.max(np.abs(filter(grid))))
