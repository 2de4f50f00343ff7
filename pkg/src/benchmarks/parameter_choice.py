from typing import Sequence, Union
import logging
import math

import numpy as np

from ..utils.errors import ConfigurationError
from .experiment import ErrorTrace


logger = logging.getLogger(__name__)

ROUNDING_SLACK = 1e-9


def apriori_choice(
    delta: float,
    mu: float,
    scale: float = 1.0,
    as_integer: bool = True,
) -> Union[int, float]:
    """scale * delta^(-1/(2 mu + 1)), rounded up for a step count N."""
    if not delta > 0:
        raise ConfigurationError(f"Invalid noise level delta={delta}: must be positive")
    if not mu > 0:
        raise ConfigurationError(f"Invalid source exponent mu={mu}: must be positive")
    if not scale > 0:
        raise ConfigurationError(f"Invalid scale={scale}: must be positive")
    value = scale * delta ** (-1.0 / (2.0 * mu + 1.0))
    if not as_integer:
        return value
    return max(
        1,
        math.ceil(value * (1.0 - ROUNDING_SLACK)),
    )


class DiscrepancyPrinciple:
    """Stop at the first index whose residual is at most tau * delta."""

    def __init__(
        self,
        tau: float = 1.5,
    ) -> None:
        if not tau > 1:
            raise ConfigurationError(f"Invalid tau={tau}: must be larger than 1")
        self.tau = tau

    def __repr__(self) -> str:
        return f"DiscrepancyPrinciple(tau={self.tau})"

    def stop_index(
        self,
        residuals: Sequence[float],
        delta: float,
    ) -> int:
        values = np.asarray(
            residuals,
            dtype=float,
        )
        if values.size == 0:
            raise ConfigurationError("Residual series is empty")
        below = np.flatnonzero(values <= self.tau * delta)
        if below.size == 0:
            logger.info(
                "Discrepancy tau*delta=%.6e never reached, stopping at %d",
                self.tau * delta,
                values.size - 1,
            )
            return values.size - 1
        return int(below[0])


def discrepancy_stop(
    trace: Union[ErrorTrace, Sequence[float]],
    delta: float,
    tau: float = 1.5,
) -> int:
    rule = DiscrepancyPrinciple(tau)
    if isinstance(trace, ErrorTrace):
        return int(trace.iterations[rule.stop_index(trace.residuals, delta)])
    return rule.stop_index(
        trace,
        delta,
    )
