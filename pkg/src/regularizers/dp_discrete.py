from typing import List, Optional, Union
from dataclasses import dataclass
import logging

import numpy as np
from tqdm import tqdm

from ..operators.dense_operator import (
    DenseOperator,
    check_symmetric,
    solve_spd,
)
from ..problems.benchmark_problem import InverseProblem
from ..utils.errors import (
    ConfigurationError,
    DimensionMismatchError,
    NotPositiveDefiniteError,
)
from .iterate_sequence import IterateSequence


logger = logging.getLogger(__name__)

PSD_TOLERANCE = 1e-12


@dataclass(frozen=True)
class DpSchedule:
    """Gains K_0..K_{N-1} (N, cols, rows) and costs S_0..S_N (N+1, rows, rows)."""

    gains: np.ndarray
    costs: np.ndarray
    endpoint_weight: np.ndarray

    @property
    def N(self) -> int:
        return self.gains.shape[0]

    def horizon(
        self,
        n: int,
    ) -> "DpSchedule":
        """Schedule of horizon n <= N with the same endpoint weight.

        The recursion only depends on the distance to the final index, so it
        is the tail of this schedule.
        """
        if int(n) != n or not 0 <= n <= self.N:
            raise ConfigurationError(f"Invalid horizon n={n}: need 0 <= n <= {self.N}")
        start = self.N - n
        return DpSchedule(
            gains=self.gains[start:],
            costs=self.costs[start:],
            endpoint_weight=self.endpoint_weight,
        )


@dataclass(frozen=True)
class DpRun:
    iterates: np.ndarray
    residuals: np.ndarray
    controls: np.ndarray
    optimal_cost: Union[float, np.ndarray]

    @property
    def final(self) -> np.ndarray:
        return self.iterates[-1]


def _check_steps(
    N: int,
) -> None:
    if int(N) != N or N < 1:
        raise ConfigurationError(f"Invalid step count N={N}: need an integer N >= 1")


def _endpoint(
    op: DenseOperator,
    endpoint_weight: Optional[np.ndarray],
) -> np.ndarray:
    if endpoint_weight is None:
        return np.eye(op.rows)
    weight = check_symmetric(endpoint_weight)
    if weight.shape != (op.rows, op.rows):
        raise DimensionMismatchError(
            "endpoint weight",
            (op.rows, op.rows),
            weight.shape,
        )
    smallest = float(np.min(np.linalg.eigvalsh(weight))) if weight.size else 0.0
    if smallest < -PSD_TOLERANCE * max(1.0, float(np.max(np.abs(weight)))):
        raise ConfigurationError(
            f"Endpoint weight must be positive semidefinite, smallest eigenvalue {smallest:.3e}"
        )
    return 0.5 * (weight + weight.T)


def backward_pass(
    op: DenseOperator,
    N: int,
    endpoint_weight: Optional[np.ndarray] = None,
    progress: bool = False,
) -> DpSchedule:
    _check_steps(N)
    F = op.entries
    identity_rows = np.eye(op.rows)
    identity_cols = np.eye(op.cols)
    weight = _endpoint(
        op,
        endpoint_weight,
    )
    gains = np.empty((N, op.cols, op.rows))
    costs = np.empty((N + 1, op.rows, op.rows))
    costs[N] = weight
    cost = weight
    # K_k = (F* S F + I)^{-1} F* S, S_k = (I - F K)* S (I - F K) + K* K + I
    for k in tqdm(
        range(N - 1, -1, -1),
        desc="backward pass",
        disable=not progress,
    ):
        weighted = F.T @ cost
        try:
            gain = solve_spd(
                weighted @ F + identity_cols,
                weighted,
            )
        except NotPositiveDefiniteError as e:
            raise NotPositiveDefiniteError(
                pivot=e.pivot,
                step=k,
            ) from e
        closed_loop = identity_rows - F @ gain
        cost = closed_loop.T @ cost @ closed_loop + gain.T @ gain + identity_rows
        cost = 0.5 * (cost + cost.T)
        gains[k] = gain
        costs[k] = cost
    for array in (gains, costs, weight):
        array.setflags(write=False)
    logger.debug(
        "Backward pass for %r: N=%d trace(S_0)=%.6e",
        op,
        N,
        float(np.trace(costs[0])),
    )
    return DpSchedule(
        gains=gains,
        costs=costs,
        endpoint_weight=weight,
    )


def forward_pass(
    op: DenseOperator,
    schedule: DpSchedule,
    y: np.ndarray,
    u0: Optional[np.ndarray] = None,
) -> DpRun:
    """Optimal process for data y (vector, or one right-hand side per column)."""
    if schedule.gains.shape[1:] != (op.cols, op.rows):
        raise DimensionMismatchError(
            "schedule gain",
            (op.cols, op.rows),
            schedule.gains.shape[1:],
        )
    y = np.asarray(
        y,
        dtype=float,
    )
    if y.ndim == 0 or y.shape[0] != op.rows:
        raise DimensionMismatchError(
            "data vector",
            op.rows,
            y.shape,
        )
    if u0 is None:
        u0 = np.zeros((op.cols,) + y.shape[1:])
    u = np.array(
        u0,
        dtype=float,
    )
    residual = op.apply(u) - y
    if residual.shape != y.shape:
        raise DimensionMismatchError(
            "start vector",
            (op.cols,) + y.shape[1:],
            u.shape,
        )
    optimal_cost = 0.5 * np.sum(
        residual * (schedule.costs[0] @ residual),
        axis=0,
    )
    iterates = [u]
    residuals = [residual]
    controls = []
    for gain in schedule.gains:
        control = -gain @ residual
        u = u + control
        residual = residual + op.apply(control)
        controls.append(control)
        iterates.append(u)
        residuals.append(residual)
    return DpRun(
        iterates=np.stack(iterates),
        residuals=np.stack(residuals),
        controls=(
            np.stack(controls) if controls else np.empty((0,) + u.shape)
        ),
        optimal_cost=optimal_cost if np.ndim(optimal_cost) else float(optimal_cost),
    )


def run_dp_discrete(
    problem: InverseProblem,
    N: int,
) -> DpRun:
    _check_steps(N)
    schedule = backward_pass(
        problem.operator,
        N,
    )
    return forward_pass(
        problem.operator,
        schedule,
        problem.y_noisy,
    )


def dp_functional(
    op: DenseOperator,
    iterates: np.ndarray,
    y: np.ndarray,
    endpoint_weight: Optional[np.ndarray] = None,
) -> float:
    """J = 1/2 sum_{k<N} (|F u_k - y|^2 + |u_{k+1} - u_k|^2) + 1/2 <eps_N, S eps_N>."""
    iterates = np.asarray(
        iterates,
        dtype=float,
    )
    if iterates.ndim != 2 or iterates.shape[1] != op.cols:
        raise DimensionMismatchError(
            "iterate sequence",
            f"(N+1, {op.cols})",
            iterates.shape,
        )
    weight = _endpoint(
        op,
        endpoint_weight,
    )
    residuals = iterates @ op.entries.T - np.asarray(y, dtype=float)[None, :]
    controls = np.diff(
        iterates,
        axis=0,
    )
    running = np.sum(residuals[:-1] ** 2) + np.sum(controls**2)
    terminal = residuals[-1] @ weight @ residuals[-1]
    return float(0.5 * (running + terminal))


def horizon_iterates(
    op: DenseOperator,
    schedule: DpSchedule,
    y: np.ndarray,
    u0: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Final iterates u_N of every horizon N = 0..schedule.N, from one backward pass."""
    if u0 is None:
        u0 = np.zeros(op.cols)
    finals: List[np.ndarray] = [np.array(u0, dtype=float)]
    for n in range(1, schedule.N + 1):
        run = forward_pass(
            op,
            schedule.horizon(n),
            y,
            u0,
        )
        finals.append(run.final)
    return np.stack(finals)


class DiscreteDynamicProgramming:
    def __init__(
        self,
        endpoint_weight: Optional[np.ndarray] = None,
        progress: bool = False,
    ) -> None:
        self.endpoint_weight = endpoint_weight
        self.progress = progress

    def schedule(
        self,
        op: DenseOperator,
        N: int,
    ) -> DpSchedule:
        return backward_pass(
            op,
            N,
            endpoint_weight=self.endpoint_weight,
            progress=self.progress,
        )

    def solve(
        self,
        problem: InverseProblem,
        N: int,
    ) -> DpRun:
        return forward_pass(
            problem.operator,
            self.schedule(problem.operator, N),
            problem.y_noisy,
        )

    def iterate(
        self,
        problem: InverseProblem,
        max_iters: int,
    ) -> IterateSequence:
        schedule = self.schedule(
            problem.operator,
            max_iters,
        )
        return IterateSequence(
            method="dp_discrete",
            iterates=horizon_iterates(
                problem.operator,
                schedule,
                problem.y_noisy,
            ),
            metadata={"N_max": max_iters},
        )
