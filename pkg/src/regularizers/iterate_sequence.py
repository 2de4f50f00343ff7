from typing import Any, Dict
from dataclasses import dataclass, field

import numpy as np

from ..problems.benchmark_problem import InverseProblem
from ..utils.errors import ConfigurationError


@dataclass(frozen=True)
class IterateSequence:
    """Iterates u_0, u_1, ... of one regularizer, index 0 being the start vector.

    For the dynamic-programming methods index k is the final iterate of the
    run with parameter k (horizon N = k, or time T = k dt).
    """

    method: str
    iterates: np.ndarray
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return self.iterates.shape[0]

    @property
    def final(self) -> np.ndarray:
        return self.iterates[-1]

    def errors(
        self,
        problem: InverseProblem,
    ) -> np.ndarray:
        if problem.u_exact is None:
            raise ConfigurationError("Problem has no exact solution")
        return np.linalg.norm(
            self.iterates - problem.u_exact[None, :],
            axis=1,
        )

    def residuals(
        self,
        problem: InverseProblem,
    ) -> np.ndarray:
        return np.linalg.norm(
            self.iterates @ problem.operator.entries.T - problem.y_noisy[None, :],
            axis=1,
        )
