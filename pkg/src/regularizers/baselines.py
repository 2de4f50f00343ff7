from typing import Optional
from enum import Enum
import logging

import numpy as np
from pydantic import BaseModel, ConfigDict, PositiveFloat, PositiveInt

from ..problems.benchmark_problem import InverseProblem
from ..utils.errors import ConfigurationError, StabilityError
from .iterate_sequence import IterateSequence


logger = logging.getLogger(__name__)

DIVERGENCE_FACTOR = 10.0
CURVATURE_TOLERANCE = 1e-14
CONVERGENCE_TOLERANCE = 1e-14


class BaselineMethod(str, Enum):
    LANDWEBER = "landweber"
    CG = "cg"


class BaselineConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    method: BaselineMethod
    max_iters: PositiveInt
    relaxation: Optional[PositiveFloat] = None


def default_relaxation(
    problem: InverseProblem,
) -> float:
    """1 / sigma_max^2, or 1 for the zero operator."""
    eigenvalue = problem.operator.norm**2
    return 1.0 if eigenvalue == 0.0 else 1.0 / eigenvalue


def landweber(
    problem: InverseProblem,
    config: BaselineConfig,
) -> IterateSequence:
    """u_{k+1} = u_k + relaxation F*(y - F u_k), u_0 = 0."""
    operator = problem.operator
    relaxation = (
        config.relaxation
        if config.relaxation is not None
        else default_relaxation(problem)
    )
    if relaxation * operator.norm**2 >= 2.0:
        raise ConfigurationError(
            f"Invalid Landweber relaxation {relaxation}: need relaxation*|F|^2 < 2, "
            f"got {relaxation * operator.norm**2:.6e}"
        )
    u = np.zeros(operator.cols)
    residual = problem.y_noisy - operator.apply(u)
    initial = float(np.linalg.norm(residual))
    iterates = [u]
    for k in range(1, config.max_iters + 1):
        u = u + relaxation * operator.apply_adjoint(residual)
        residual = problem.y_noisy - operator.apply(u)
        if float(np.linalg.norm(residual)) > DIVERGENCE_FACTOR * initial:
            raise StabilityError(
                f"Landweber diverged at iteration {k}: residual grew above "
                f"{DIVERGENCE_FACTOR:g}x its initial value {initial:.6e}"
            )
        iterates.append(u)
    return IterateSequence(
        method=BaselineMethod.LANDWEBER.value,
        iterates=np.stack(iterates),
        metadata={"relaxation": relaxation},
    )


def cg_normal(
    problem: InverseProblem,
    config: BaselineConfig,
) -> IterateSequence:
    """CGLS for F*F u = F*y, u_0 = 0; residuals kept in data and solution space.

    The sequence is truncated when the normal residual vanishes ("converged")
    or a search direction has curvature |F d|^2 <= 1e-14 |d|^2 ("breakdown").
    """
    operator = problem.operator
    if config.max_iters > operator.cols:
        raise ConfigurationError(
            f"Invalid max_iters={config.max_iters} for CG: at most cols={operator.cols}"
        )
    u = np.zeros(operator.cols)
    residual = problem.y_noisy.copy()
    normal_residual = operator.apply_adjoint(residual)
    direction = normal_residual.copy()
    gamma = float(normal_residual @ normal_residual)
    initial_gamma = gamma
    iterates = [u]
    status = "max_iters"
    for k in range(1, config.max_iters + 1):
        if gamma <= CONVERGENCE_TOLERANCE**2 * initial_gamma:
            status = "converged"
            break
        image = operator.apply(direction)
        curvature = float(image @ image)
        if curvature <= CURVATURE_TOLERANCE * float(direction @ direction):
            status = "breakdown"
            logger.warning(
                "CG curvature breakdown at iteration %d: truncating sequence",
                k,
            )
            break
        alpha = gamma / curvature
        u = u + alpha * direction
        residual = residual - alpha * image
        normal_residual = operator.apply_adjoint(residual)
        gamma_next = float(normal_residual @ normal_residual)
        direction = normal_residual + (gamma_next / gamma) * direction
        gamma = gamma_next
        iterates.append(u)
    return IterateSequence(
        method=BaselineMethod.CG.value,
        iterates=np.stack(iterates),
        metadata={"status": status},
    )


class Landweber:
    def __init__(
        self,
        relaxation: Optional[float] = None,
    ) -> None:
        self.relaxation = relaxation

    def iterate(
        self,
        problem: InverseProblem,
        max_iters: int,
    ) -> IterateSequence:
        return landweber(
            problem,
            BaselineConfig(
                method=BaselineMethod.LANDWEBER,
                max_iters=max_iters,
                relaxation=self.relaxation,
            ),
        )


class ConjugateGradient:
    def __init__(
        self,
        clip_to_cols: bool = True,
    ) -> None:
        self.clip_to_cols = clip_to_cols

    def iterate(
        self,
        problem: InverseProblem,
        max_iters: int,
    ) -> IterateSequence:
        if self.clip_to_cols:
            max_iters = min(
                max_iters,
                problem.operator.cols,
            )
        return cg_normal(
            problem,
            BaselineConfig(
                method=BaselineMethod.CG,
                max_iters=max_iters,
            ),
        )
