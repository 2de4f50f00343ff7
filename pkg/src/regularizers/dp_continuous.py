from typing import List, Optional, Union
from dataclasses import dataclass
from enum import Enum
import logging
import math

import numpy as np
from tqdm import tqdm

from ..filters.spectral_filters import (
    trajectory_filter,
    trajectory_residual_factor,
)
from ..operators.dense_operator import DenseOperator
from ..problems.benchmark_problem import InverseProblem
from ..utils.errors import (
    ConfigurationError,
    DimensionMismatchError,
    StabilityError,
)
from .iterate_sequence import IterateSequence


logger = logging.getLogger(__name__)

STABILITY_SLACK = 1e-12


class DtPolicy(str, Enum):
    MATCHED = "matched"
    STABLE = "stable"


@dataclass(frozen=True)
class RiccatiPath:
    """Gains B_0..B_steps, shape (steps+1, cols, rows), on the grid t_n = n dt."""

    T: float
    steps: int
    dt: float
    gains: np.ndarray

    def horizon(
        self,
        n: int,
    ) -> "RiccatiPath":
        """Path of final time n dt; the recursion only depends on T - t_n."""
        if int(n) != n or not 0 <= n <= self.steps:
            raise ConfigurationError(
                f"Invalid horizon n={n}: need 0 <= n <= {self.steps}"
            )
        return RiccatiPath(
            T=n * self.dt,
            steps=n,
            dt=self.dt,
            gains=self.gains[self.steps - n :],
        )


@dataclass(frozen=True)
class ContinuousRun:
    trajectory: np.ndarray

    @property
    def final(self) -> np.ndarray:
        return self.trajectory[-1]


def _check_time(
    T: float,
) -> None:
    if not T > 0:
        raise ConfigurationError(f"Invalid final time T={T}: must be positive")


def default_steps(
    op: DenseOperator,
    T: float,
) -> int:
    _check_time(T)
    return max(
        1,
        math.ceil(2.0 * T * op.norm**2),
    )


def policy_dt(
    op: DenseOperator,
    policy: Union[DtPolicy, str],
) -> float:
    """matched: dt = min(1, 1/sigma_max^2); stable: dt = 1/(2 sigma_max^2)."""
    try:
        policy = DtPolicy(policy)
    except ValueError as e:
        raise ConfigurationError(f"Invalid dt_policy: {policy}") from e
    eigenvalue = op.norm**2
    if policy == DtPolicy.MATCHED:
        return 1.0 if eigenvalue <= 1.0 else 1.0 / eigenvalue
    if eigenvalue == 0.0:
        return 0.5
    return 0.5 / eigenvalue


def riccati_backward(
    op: DenseOperator,
    T: float,
    steps: Optional[int] = None,
    progress: bool = False,
) -> RiccatiPath:
    _check_time(T)
    if steps is None:
        steps = default_steps(
            op,
            T,
        )
    if int(steps) != steps or steps < 1:
        raise ConfigurationError(f"Invalid step count steps={steps}")
    eigenvalue = op.norm**2
    dt = T / steps
    if dt * eigenvalue > 1.0 + STABILITY_SLACK:
        required = math.ceil(T * eigenvalue)
        raise StabilityError(
            f"Unstable Riccati step dt={dt:.6e} for |F*F|={eigenvalue:.6e}: "
            f"need at least {required} steps for T={T}",
            required_steps=required,
        )
    F = op.entries
    adjoint = F.T
    identity_rows = np.eye(op.rows)
    gains = np.empty((steps + 1, op.cols, op.rows))
    gain = np.zeros((op.cols, op.rows))
    gains[steps] = gain
    for n in tqdm(
        range(steps - 1, -1, -1),
        desc="riccati backward",
        disable=not progress,
    ):
        gain = gain + dt * (adjoint @ (identity_rows - gain.T @ gain))
        gains[n] = gain
    gains.setflags(write=False)
    logger.debug(
        "Riccati backward for %r: T=%g steps=%d dt=%.6e",
        op,
        T,
        steps,
        dt,
    )
    return RiccatiPath(
        T=float(T),
        steps=int(steps),
        dt=dt,
        gains=gains,
    )


def flow_forward(
    op: DenseOperator,
    path: RiccatiPath,
    y: np.ndarray,
    u0: Optional[np.ndarray] = None,
) -> ContinuousRun:
    if path.gains.shape[1:] != (op.cols, op.rows):
        raise DimensionMismatchError(
            "riccati gain",
            (op.cols, op.rows),
            path.gains.shape[1:],
        )
    y = np.asarray(
        y,
        dtype=float,
    )
    if u0 is None:
        u0 = np.zeros((op.cols,) + y.shape[1:])
    u = np.array(
        u0,
        dtype=float,
    )
    if op.apply(u).shape != y.shape:
        raise DimensionMismatchError(
            "start vector",
            (op.cols,) + y.shape[1:],
            u.shape,
        )
    trajectory = [u]
    for gain in path.gains[:-1]:
        u = u - path.dt * (gain @ (op.apply(u) - y))
        trajectory.append(u)
    return ContinuousRun(trajectory=np.stack(trajectory))


def closed_form_solution(
    op: DenseOperator,
    T: float,
    y: np.ndarray,
    u0: Optional[np.ndarray] = None,
    t: Optional[float] = None,
) -> np.ndarray:
    """State of the exact flow at time t (default T), started from u0 at time 0."""
    _check_time(T)
    t = T if t is None else t
    solution = op.spectral_apply(
        lambda lam: trajectory_filter(t, T, lam),
        y,
    )
    if u0 is None:
        return solution
    return solution + op.spectral_transform(
        lambda lam: trajectory_residual_factor(t, T, lam),
        u0,
    )


def q_profile(
    lam: Union[float, np.ndarray],
    t: float,
    T: float,
) -> Union[float, np.ndarray]:
    """q(t, lambda) = tanh(sqrt(lambda)(T - t)) / sqrt(lambda), q(t, 0) = T - t."""
    if not 0.0 <= t <= T:
        raise ConfigurationError(f"Invalid time t={t}: need 0 <= t <= T={T}")
    values = np.asarray(
        lam,
        dtype=float,
    )
    if np.any(values < 0):
        raise ConfigurationError("Spectral variable lambda must be nonnegative")
    root = np.sqrt(values)
    safe = np.where(
        root > 0,
        root,
        1.0,
    )
    result = np.where(
        root > 0,
        np.tanh(safe * (T - t)) / safe,
        T - t,
    )
    if np.ndim(lam) == 0:
        return float(result)
    return result


def gain_spectrum(
    op: DenseOperator,
    path: RiccatiPath,
) -> np.ndarray:
    # V* B_n U = diag(sigma_i q_n(lambda_i)) on the nonzero singular values
    factors = op.svd()
    rank = int(np.count_nonzero(factors.s > 0))
    diagonal = np.einsum(
        "ij,njk,ki->ni",
        factors.Vt[:rank],
        path.gains,
        factors.U[:, :rank],
    )
    return diagonal / factors.s[:rank][None, :]


def horizon_iterates(
    op: DenseOperator,
    path: RiccatiPath,
    y: np.ndarray,
    u0: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Final states u(T_n) for T_n = n dt, n = 0..steps, from one backward pass."""
    if u0 is None:
        u0 = np.zeros(op.cols)
    finals: List[np.ndarray] = [np.array(u0, dtype=float)]
    for n in range(1, path.steps + 1):
        run = flow_forward(
            op,
            path.horizon(n),
            y,
            u0,
        )
        finals.append(run.final)
    return np.stack(finals)


class ContinuousRiccatiFlow:
    def __init__(
        self,
        dt_policy: Union[DtPolicy, str] = DtPolicy.MATCHED,
        progress: bool = False,
    ) -> None:
        self.dt_policy = DtPolicy(dt_policy)
        self.progress = progress

    def path(
        self,
        op: DenseOperator,
        steps: int,
    ) -> RiccatiPath:
        dt = policy_dt(
            op,
            self.dt_policy,
        )
        return riccati_backward(
            op,
            steps * dt,
            steps=steps,
            progress=self.progress,
        )

    def solve(
        self,
        problem: InverseProblem,
        T: float,
        steps: Optional[int] = None,
    ) -> ContinuousRun:
        return flow_forward(
            problem.operator,
            riccati_backward(
                problem.operator,
                T,
                steps=steps,
                progress=self.progress,
            ),
            problem.y_noisy,
        )

    def iterate(
        self,
        problem: InverseProblem,
        max_iters: int,
    ) -> IterateSequence:
        path = self.path(
            problem.operator,
            max_iters,
        )
        return IterateSequence(
            method="dp_continuous",
            iterates=horizon_iterates(
                problem.operator,
                path,
                problem.y_noisy,
            ),
            metadata={
                "dt": path.dt,
                "T": path.T,
                "dt_policy": self.dt_policy.value,
            },
        )
