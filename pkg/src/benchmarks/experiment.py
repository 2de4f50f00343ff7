from typing import Any, Dict, List, Optional
from dataclasses import dataclass, field
from enum import Enum
import hashlib
import logging
import os
import time

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from pydantic import BaseModel, ConfigDict, Field, NonNegativeInt, PositiveInt

from ..problems.benchmark_problem import (
    InverseProblem,
    KernelKind,
    SolutionKind,
    make_problem,
)
from ..regularizers.baselines import ConjugateGradient, Landweber
from ..regularizers.dp_continuous import ContinuousRiccatiFlow, DtPolicy
from ..regularizers.dp_discrete import DiscreteDynamicProgramming
from ..utils.errors import NumericalError, RegularizationError


logger = logging.getLogger(__name__)

CSV_COLUMNS = [
    "method",
    "iteration",
    "error",
    "residual",
    "wall_time_s",
    "seed",
    "kernel",
    "solution",
    "m",
    "noise_fraction",
]
FLOAT_FORMAT = "%.17g"


class MethodKind(str, Enum):
    DP_DISCRETE = "dp_discrete"
    DP_CONTINUOUS = "dp_continuous"
    LANDWEBER = "landweber"
    CG = "cg"


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    kernel: KernelKind = KernelKind.BUMP_C6
    solution: SolutionKind = SolutionKind.U1
    m: int = Field(
        default=64,
        ge=2,
    )
    noise_fraction: float = Field(
        default=0.0,
        ge=0.0,
        lt=1.0,
    )
    seed: NonNegativeInt = 2024
    methods: List[MethodKind] = Field(
        default_factory=lambda: list(MethodKind),
        min_length=1,
    )
    max_iters: PositiveInt = 100
    dt_policy: DtPolicy = DtPolicy.MATCHED
    normalize: bool = True
    n_jobs: int = 1
    record_wall_time: bool = False

    def fingerprint(self) -> str:
        payload = self.model_dump_json(
            exclude={"n_jobs", "record_wall_time"},
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class ErrorTrace:
    """Error and residual norms per iteration index of one method run.

    A failed run carries empty series and the failure message.
    """

    method: MethodKind
    iterations: np.ndarray
    errors: np.ndarray
    residuals: np.ndarray
    wall_time: float
    fingerprint: str
    config: ExperimentConfig
    failure: Optional[str] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def failed(self) -> bool:
        return self.failure is not None

    def __len__(self) -> int:
        return len(self.errors)


def build_regularizers(
    config: ExperimentConfig,
) -> Dict[MethodKind, Any]:
    return {
        MethodKind.DP_DISCRETE: DiscreteDynamicProgramming(),
        MethodKind.DP_CONTINUOUS: ContinuousRiccatiFlow(dt_policy=config.dt_policy),
        MethodKind.LANDWEBER: Landweber(),
        MethodKind.CG: ConjugateGradient(),
    }


def _failed_trace(
    method: MethodKind,
    config: ExperimentConfig,
    wall_time: float,
    message: str,
) -> ErrorTrace:
    empty = np.empty(0)
    return ErrorTrace(
        method=method,
        iterations=np.empty(0, dtype=int),
        errors=empty,
        residuals=empty,
        wall_time=wall_time,
        fingerprint=config.fingerprint(),
        config=config,
        failure=message,
    )


def _run_method(
    method: MethodKind,
    regularizer: Any,
    problem: InverseProblem,
    config: ExperimentConfig,
) -> ErrorTrace:
    start = time.perf_counter()
    try:
        sequence = regularizer.iterate(
            problem,
            config.max_iters,
        )
        residuals = sequence.residuals(problem)
        # no exact solution: error column stays NaN
        errors = (
            np.full(len(sequence), np.nan)
            if problem.u_exact is None
            else sequence.errors(problem)
        )
        if not np.all(np.isfinite(residuals)) or (
            problem.u_exact is not None and not np.all(np.isfinite(errors))
        ):
            raise NumericalError(f"Non-finite error trace for {method.value}")
    except (RegularizationError, np.linalg.LinAlgError) as e:
        wall_time = time.perf_counter() - start
        logger.warning(
            "Method %s failed: %s",
            method.value,
            e,
        )
        return _failed_trace(
            method,
            config,
            wall_time,
            f"{type(e).__name__}: {e}",
        )
    wall_time = time.perf_counter() - start
    logger.info(
        "Method %s: %d iterates, final error %.6e, %.3fs",
        method.value,
        len(errors),
        errors[-1],
        wall_time,
    )
    return ErrorTrace(
        method=method,
        iterations=np.arange(len(errors)),
        errors=errors,
        residuals=residuals,
        wall_time=wall_time,
        fingerprint=config.fingerprint(),
        config=config,
        metadata=dict(sequence.metadata),
    )


def run_experiment(
    config: ExperimentConfig,
    regularizers: Optional[Dict[MethodKind, Any]] = None,
    problem: Optional[InverseProblem] = None,
) -> List[ErrorTrace]:
    """One trace per configured method, all on the same problem instance."""
    if problem is None:
        problem = make_problem(
            config.kernel,
            config.solution,
            config.m,
            config.noise_fraction,
            config.seed,
            normalize=config.normalize,
        )
    if regularizers is None:
        regularizers = build_regularizers(config)
    # SVD is cached on the shared operator before threads start
    problem.operator.svd()
    return Parallel(
        n_jobs=config.n_jobs,
        prefer="threads",
    )(
        delayed(_run_method)(
            method,
            regularizers[method],
            problem,
            config,
        )
        for method in config.methods
    )


def traces_frame(
    traces: List[ErrorTrace],
    record_wall_time: bool = False,
) -> pd.DataFrame:
    frames = []
    for trace in traces:
        if trace.failed:
            continue
        size = len(trace)
        frames.append(
            pd.DataFrame(
                {
                    "method": [trace.method.value] * size,
                    "iteration": trace.iterations,
                    "error": trace.errors,
                    "residual": trace.residuals,
                    "wall_time_s": [
                        trace.wall_time if record_wall_time else 0.0
                    ]
                    * size,
                    "seed": [trace.config.seed] * size,
                    "kernel": [trace.config.kernel.value] * size,
                    "solution": [trace.config.solution.value] * size,
                    "m": [trace.config.m] * size,
                    "noise_fraction": [float(trace.config.noise_fraction)] * size,
                }
            )
        )
    if not frames:
        return pd.DataFrame(columns=CSV_COLUMNS)
    return pd.concat(
        frames,
        ignore_index=True,
    )[CSV_COLUMNS]


def write_frame(
    frame: pd.DataFrame,
    path: str,
) -> None:
    directory = os.path.dirname(path)
    try:
        if directory:
            os.makedirs(
                directory,
                exist_ok=True,
            )
        frame.to_csv(
            path,
            index=False,
            float_format=FLOAT_FORMAT,
            lineterminator="\n",
        )
    except OSError as e:
        raise OSError(f"Could not write CSV to {path}: {e}") from e


def emit_csv(
    traces: List[ErrorTrace],
    path: str,
    record_wall_time: bool = False,
) -> None:
    """Rows in method order, iterations ascending; wall time is written as 0
    unless ``record_wall_time``, which keeps repeated runs byte-identical.
    """
    write_frame(
        traces_frame(
            traces,
            record_wall_time=record_wall_time,
        ),
        path,
    )
