from typing import Dict, List, Optional, Sequence, Tuple, Union
from dataclasses import dataclass
import logging

import numpy as np
import pandas as pd
from scipy.stats import linregress
from tqdm import tqdm

from ..operators.dense_operator import DenseOperator
from ..problems.benchmark_problem import (
    InverseProblem,
    build_spectral_operator,
    make_source_element,
    problem_from_solution,
)
from ..regularizers.baselines import BaselineConfig, BaselineMethod, cg_normal, landweber
from ..regularizers.dp_continuous import ContinuousRiccatiFlow, flow_forward
from ..regularizers.dp_discrete import run_dp_discrete
from ..utils.errors import ConfigurationError, NumericalError
from .experiment import ErrorTrace, MethodKind
from .parameter_choice import apriori_choice


logger = logging.getLogger(__name__)

MIN_WINDOW_POINTS = 5
# iterations before this index are left out of default slope windows
DEFAULT_WINDOW_START = 5
RATE_COLUMNS = [
    "method",
    "delta",
    "mu",
    "parameter",
    "seed",
    "error",
]


@dataclass(frozen=True)
class RateEstimate:
    slope: float
    intercept: float
    window: Tuple[float, float]
    r_squared: float
    points: int


def fit_power_law(
    x: Sequence[float],
    values: Sequence[float],
) -> RateEstimate:
    """Least-squares fit of log(values) against log(x)."""
    x = np.asarray(
        x,
        dtype=float,
    )
    values = np.asarray(
        values,
        dtype=float,
    )
    if x.size < MIN_WINDOW_POINTS:
        raise ConfigurationError(
            f"Slope window has {x.size} points, need at least {MIN_WINDOW_POINTS}"
        )
    if np.any(values <= 0) or np.any(x <= 0):
        raise NumericalError("Log-log fit needs positive values in the window")
    fit = linregress(
        np.log(x),
        np.log(values),
    )
    return RateEstimate(
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        window=(float(x[0]), float(x[-1])),
        r_squared=float(fit.rvalue**2),
        points=int(x.size),
    )


def estimate_slope(
    trace: Union[ErrorTrace, Tuple[Sequence[float], Sequence[float]]],
    window: Optional[Tuple[int, int]] = None,
) -> RateEstimate:
    """Slope of log(error) over log(iteration) for iterations in [start, stop]."""
    if isinstance(trace, ErrorTrace):
        iterations, errors = trace.iterations, trace.errors
    else:
        iterations, errors = trace
    iterations = np.asarray(
        iterations,
        dtype=float,
    )
    errors = np.asarray(
        errors,
        dtype=float,
    )
    if window is None:
        window = (DEFAULT_WINDOW_START, int(iterations.max()) if iterations.size else 0)
    start, stop = window
    if start < 1 or stop < start:
        raise ConfigurationError(f"Invalid slope window: {window}")
    mask = (iterations >= start) & (iterations <= stop)
    return fit_power_law(
        iterations[mask],
        errors[mask],
    )


@dataclass(frozen=True)
class RateStudy:
    table: pd.DataFrame
    exponents: Dict[str, RateEstimate]


def _reconstruct(
    method: MethodKind,
    problem: InverseProblem,
    parameter: int,
) -> np.ndarray:
    if method == MethodKind.DP_DISCRETE:
        return run_dp_discrete(
            problem,
            parameter,
        ).final
    if method == MethodKind.DP_CONTINUOUS:
        path = ContinuousRiccatiFlow().path(
            problem.operator,
            parameter,
        )
        return flow_forward(
            problem.operator,
            path,
            problem.y_noisy,
        ).final
    if method == MethodKind.LANDWEBER:
        return landweber(
            problem,
            BaselineConfig(
                method=BaselineMethod.LANDWEBER,
                max_iters=parameter,
            ),
        ).final
    return cg_normal(
        problem,
        BaselineConfig(
            method=BaselineMethod.CG,
            max_iters=min(parameter, problem.operator.cols),
        ),
    ).final


def method_parameter(
    method: MethodKind,
    delta: float,
    mu: float,
    scale: float,
) -> int:
    """A-priori parameter; Landweber needs k ~ delta^(-2/(2 mu + 1))."""
    parameter = apriori_choice(
        delta,
        mu,
        scale,
    )
    if method == MethodKind.LANDWEBER:
        return parameter * parameter
    return parameter


def rate_study(
    mu: float,
    deltas: Sequence[float],
    seeds: Sequence[int] = (0, 1, 2),
    methods: Sequence[Union[MethodKind, str]] = (MethodKind.DP_DISCRETE,),
    scale: float = 1.0,
    m: int = 64,
    sigma_min: float = 1e-6,
    operator: Optional[DenseOperator] = None,
    omega: Optional[np.ndarray] = None,
    operator_seed: int = 0,
    progress: bool = False,
) -> RateStudy:
    """Errors of a-priori parameter choices on a source element u = (F*F)^mu omega.

    The noise norm is the absolute level delta. By default omega has equal
    coefficients in the right singular basis. The exponent of each method is
    the log-log slope of the seed-averaged error against delta.
    """
    if len(deltas) < 2:
        raise ConfigurationError("Rate study needs at least two noise levels")
    if operator is None:
        operator = build_spectral_operator(
            m,
            sigma_min=sigma_min,
            seed=operator_seed,
        )
    if omega is None:
        omega = operator.svd().V.sum(axis=1)
    omega = np.asarray(omega, dtype=float) / np.linalg.norm(omega)
    u_exact = make_source_element(
        operator,
        mu,
        omega,
    )
    methods = [MethodKind(method) for method in methods]
    rows: List[Dict[str, object]] = []
    jobs = [
        (method, delta, seed) for method in methods for delta in deltas for seed in seeds
    ]
    for method, delta, seed in tqdm(
        jobs,
        desc="rate study",
        disable=not progress,
    ):
        problem = problem_from_solution(
            operator,
            u_exact,
            delta,
            seed,
        )
        parameter = method_parameter(
            method,
            delta,
            mu,
            scale,
        )
        rows.append(
            {
                "method": method.value,
                "delta": float(delta),
                "mu": float(mu),
                "parameter": parameter,
                "seed": int(seed),
                "error": problem.error(_reconstruct(method, problem, parameter)),
            }
        )
    table = pd.DataFrame(
        rows,
        columns=RATE_COLUMNS,
    )
    exponents = {}
    for method in methods:
        means = (
            table[table["method"] == method.value]
            .groupby("delta")["error"]
            .mean()
            .sort_index()
        )
        exponents[method.value] = _fit_rate(
            means.index.to_numpy(),
            means.to_numpy(),
        )
        logger.info(
            "Rate study %s: mu=%g fitted exponent %.4f (r^2=%.4f)",
            method.value,
            mu,
            exponents[method.value].slope,
            exponents[method.value].r_squared,
        )
    return RateStudy(
        table=table,
        exponents=exponents,
    )


def _fit_rate(
    deltas: np.ndarray,
    errors: np.ndarray,
) -> RateEstimate:
    if np.any(errors <= 0):
        raise NumericalError("Rate fit needs positive errors")
    fit = linregress(
        np.log(deltas),
        np.log(errors),
    )
    return RateEstimate(
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        window=(float(deltas[0]), float(deltas[-1])),
        r_squared=float(fit.rvalue**2),
        points=int(deltas.size),
    )
