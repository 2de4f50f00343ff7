from typing import Dict, List, Sequence, Union
import logging
import time

import numpy as np
import pandas as pd

from ..filters.spectral_filters import (
    ContinuousFilter,
    DiscreteFilter,
    scan_grid,
)
from ..operators.dense_operator import DenseOperator
from ..problems.benchmark_problem import KernelKind, KernelSpec, build_operator
from ..regularizers.dp_continuous import policy_dt, riccati_backward
from ..regularizers.dp_discrete import backward_pass


logger = logging.getLogger(__name__)

FILTER_COLUMNS = [
    "lambda",
    "f_continuous",
    "g_discrete",
    "residual_factor_cont",
    "residual_factor_disc",
]
COMPLEXITY_COLUMNS = [
    "m",
    "method",
    "steps",
    "wall_time_s",
    "per_step_s",
]


def filter_table(
    N: int,
    T: float,
    lambda_max: float,
    num_points: int = 2000,
) -> pd.DataFrame:
    grid = scan_grid(
        lambda_max,
        num_points,
    )
    continuous = ContinuousFilter(T)
    discrete = DiscreteFilter(N)
    return pd.DataFrame(
        {
            "lambda": grid,
            "f_continuous": continuous(grid),
            "g_discrete": discrete(grid),
            "residual_factor_cont": continuous.residual(grid),
            "residual_factor_disc": discrete.residual(grid),
        }
    )[FILTER_COLUMNS]


def _timed_landweber(
    operator: DenseOperator,
    steps: int,
) -> float:
    rng = np.random.default_rng(0)
    y = rng.standard_normal(operator.rows)
    relaxation = 1.0 / max(
        operator.norm**2,
        np.finfo(float).tiny,
    )
    u = np.zeros(operator.cols)
    start = time.perf_counter()
    for _ in range(steps):
        u = u + relaxation * operator.apply_adjoint(y - operator.apply(u))
    return time.perf_counter() - start


def complexity_profile(
    sizes: Sequence[int],
    steps: int = 20,
    kernel: Union[KernelKind, str] = KernelKind.BUMP_C6,
    repeats: int = 1,
) -> pd.DataFrame:
    """Wall time of one backward pass of each DP method and of Landweber sweeps.

    The best of ``repeats`` timings is kept per row.
    """
    rows: List[Dict[str, object]] = []
    for m in sizes:
        operator = build_operator(
            KernelSpec.of(kernel),
            m,
        )
        operator.svd()
        dt = policy_dt(
            operator,
            "stable",
        )
        runners = {
            "dp_discrete": lambda: backward_pass(operator, steps),
            "dp_continuous": lambda: riccati_backward(operator, steps * dt, steps=steps),
        }
        for method, runner in runners.items():
            timings = []
            for _ in range(repeats):
                start = time.perf_counter()
                runner()
                timings.append(time.perf_counter() - start)
            rows.append(
                {
                    "m": int(m),
                    "method": method,
                    "steps": steps,
                    "wall_time_s": min(timings),
                    "per_step_s": min(timings) / steps,
                }
            )
        landweber_time = min(_timed_landweber(operator, steps) for _ in range(repeats))
        rows.append(
            {
                "m": int(m),
                "method": "landweber",
                "steps": steps,
                "wall_time_s": landweber_time,
                "per_step_s": landweber_time / steps,
            }
        )
        logger.info(
            "Complexity m=%d: %s",
            m,
            ", ".join(f"{row['method']}={row['per_step_s']:.3e}s/step" for row in rows[-3:]),
        )
    return pd.DataFrame(
        rows,
        columns=COMPLEXITY_COLUMNS,
    )
