from typing import Callable, Union
from dataclasses import dataclass
import logging
import threading

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

from ..utils.errors import (
    DecompositionError,
    DimensionMismatchError,
    NotPositiveDefiniteError,
    NumericalError,
)


logger = logging.getLogger(__name__)

SYMMETRY_TOLERANCE = 1e-10
RECONSTRUCTION_TOLERANCE = 1e-10


@dataclass(frozen=True)
class SvdFactors:
    """Thin SVD ``F = U diag(s) Vt`` with ``s`` sorted descending."""

    U: np.ndarray
    s: np.ndarray
    Vt: np.ndarray

    @property
    def V(self) -> np.ndarray:
        return self.Vt.T

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.s**2


class SpectralFunction:
    """Scalar map g(lambda) applied to the spectrum of F*F."""

    def __init__(
        self,
        evaluator: Callable[[np.ndarray], np.ndarray],
        name: str = "g",
    ) -> None:
        self.evaluator = evaluator
        self.name = name

    def __call__(
        self,
        lam: np.ndarray,
    ) -> np.ndarray:
        return np.asarray(
            self.evaluator(np.asarray(lam, dtype=float)),
            dtype=float,
        )

    def scan(
        self,
        upper: float,
        num_points: int = 2001,
    ) -> np.ndarray:
        grid = np.linspace(
            0.0,
            upper,
            num_points,
        )
        values = self(grid)
        if not np.all(np.isfinite(values)):
            bad = grid[~np.isfinite(values)][0]
            raise NumericalError(
                f"Spectral function {self.name} is not finite at lambda={bad}"
            )
        return values


SpectralLike = Union[SpectralFunction, Callable[[np.ndarray], np.ndarray]]


class DenseOperator:
    """Dense matrix F: R^cols -> R^rows with lazily cached SVD.

    The entries are copied and frozen at construction; the only mutable state
    is the SVD cache, filled once under a lock.
    """

    def __init__(
        self,
        entries: np.ndarray,
    ) -> None:
        matrix = np.array(
            entries,
            dtype=float,
            copy=True,
            ndmin=2,
        )
        if matrix.ndim != 2:
            raise DimensionMismatchError(
                "operator",
                "2-D matrix",
                matrix.shape,
            )
        if not np.all(np.isfinite(matrix)):
            raise NumericalError("Operator entries must be finite")
        matrix.setflags(write=False)
        self._entries = matrix
        self._svd = None
        self._svd_lock = threading.Lock()

    @classmethod
    def identity(
        cls,
        size: int,
    ) -> "DenseOperator":
        return cls(np.eye(size))

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def rows(self) -> int:
        return self._entries.shape[0]

    @property
    def cols(self) -> int:
        return self._entries.shape[1]

    @property
    def shape(self) -> tuple:
        return self._entries.shape

    def __repr__(self) -> str:
        return f"DenseOperator(rows={self.rows}, cols={self.cols})"

    def svd(self) -> SvdFactors:
        if self._svd is None:
            with self._svd_lock:
                if self._svd is None:
                    self._svd = self._decompose()
        return self._svd

    def _decompose(self) -> SvdFactors:
        try:
            U, s, Vt = scipy.linalg.svd(
                self._entries,
                full_matrices=False,
                lapack_driver="gesdd",
            )
        except (np.linalg.LinAlgError, ValueError):
            try:
                U, s, Vt = scipy.linalg.svd(
                    self._entries,
                    full_matrices=False,
                    lapack_driver="gesvd",
                )
            except (np.linalg.LinAlgError, ValueError) as e:
                raise DecompositionError(f"SVD failed for {self!r}") from e
        scale = max(
            np.linalg.norm(self._entries),
            np.finfo(float).tiny,
        )
        error = np.linalg.norm((U * s) @ Vt - self._entries) / scale
        if error > RECONSTRUCTION_TOLERANCE:
            raise DecompositionError(
                f"SVD reconstruction error {error:.3e} exceeds {RECONSTRUCTION_TOLERANCE}"
            )
        for array in (U, s, Vt):
            array.setflags(write=False)
        logger.debug(
            "SVD of %r: sigma_max=%.6e sigma_min=%.6e",
            self,
            s[0] if s.size else 0.0,
            s[-1] if s.size else 0.0,
        )
        return SvdFactors(
            U=U,
            s=s,
            Vt=Vt,
        )

    @property
    def norm(self) -> float:
        factors = self.svd()
        if factors.s.size == 0:
            return 0.0
        return float(factors.s[0])

    def _check_leading(
        self,
        vector: np.ndarray,
        size: int,
        what: str,
    ) -> np.ndarray:
        array = np.asarray(
            vector,
            dtype=float,
        )
        if array.ndim not in (1, 2) or array.shape[0] != size:
            raise DimensionMismatchError(
                what,
                f"({size},) or ({size}, k)",
                array.shape,
            )
        return array

    def apply(
        self,
        x: np.ndarray,
    ) -> np.ndarray:
        x = self._check_leading(
            x,
            self.cols,
            "domain vector",
        )
        return self._entries @ x

    def apply_adjoint(
        self,
        y: np.ndarray,
    ) -> np.ndarray:
        y = self._check_leading(
            y,
            self.rows,
            "data vector",
        )
        return self._entries.T @ y

    def spectral_apply(
        self,
        g: SpectralLike,
        y: np.ndarray,
    ) -> np.ndarray:
        """Return g(F*F) F* y."""
        y = self._check_leading(
            y,
            self.rows,
            "data vector",
        )
        factors = self.svd()
        weights = np.asarray(
            g(factors.eigenvalues),
            dtype=float,
        ) * factors.s
        coefficients = factors.U.T @ y
        if coefficients.ndim == 1:
            return factors.V @ (weights * coefficients)
        return factors.V @ (weights[:, None] * coefficients)

    def spectral_transform(
        self,
        g: SpectralLike,
        u: np.ndarray,
    ) -> np.ndarray:
        """Return g(F*F) u; the null-space component of u is scaled by g(0)."""
        u = self._check_leading(
            u,
            self.cols,
            "domain vector",
        )
        factors = self.svd()
        values = np.asarray(
            g(factors.eigenvalues),
            dtype=float,
        )
        coefficients = factors.Vt @ u
        range_part = factors.V @ coefficients
        null_part = u - range_part
        g_zero = float(np.asarray(g(np.zeros(1)), dtype=float)[0])
        if coefficients.ndim == 1:
            transformed = factors.V @ (values * coefficients)
        else:
            transformed = factors.V @ (values[:, None] * coefficients)
        return transformed + g_zero * null_part


def _as_matrix(
    A: Union[DenseOperator, np.ndarray],
) -> np.ndarray:
    if isinstance(A, DenseOperator):
        return A.entries
    return np.asarray(
        A,
        dtype=float,
    )


def check_symmetric(
    A: Union[DenseOperator, np.ndarray],
    tolerance: float = SYMMETRY_TOLERANCE,
) -> np.ndarray:
    matrix = _as_matrix(A)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DimensionMismatchError(
            "symmetric matrix",
            "square",
            matrix.shape,
        )
    scale = max(
        1.0,
        float(np.max(np.abs(matrix))) if matrix.size else 1.0,
    )
    asymmetry = float(np.max(np.abs(matrix - matrix.T))) if matrix.size else 0.0
    if asymmetry > tolerance * scale:
        raise NumericalError(
            f"Matrix is not symmetric: asymmetry {asymmetry:.3e} exceeds {tolerance * scale:.3e}"
        )
    return matrix


def solve_spd(
    A: Union[DenseOperator, np.ndarray],
    b: np.ndarray,
) -> np.ndarray:
    """Solve A x = b for symmetric positive definite A by Cholesky.

    ``b`` may hold several right-hand sides as columns.
    """
    matrix = check_symmetric(A)
    rhs = np.asarray(
        b,
        dtype=float,
    )
    if rhs.shape[0] != matrix.shape[0]:
        raise DimensionMismatchError(
            "right-hand side",
            f"({matrix.shape[0]}, ...)",
            rhs.shape,
        )
    factor, info = lapack.dpotrf(
        matrix,
        lower=0,
        clean=1,
    )
    if info > 0:
        raise NotPositiveDefiniteError(pivot=int(info))
    if info < 0:
        raise DecompositionError(f"Invalid argument {-info} passed to dpotrf")
    return scipy.linalg.cho_solve(
        (factor, False),
        rhs,
        check_finite=False,
    )
