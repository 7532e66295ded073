"""
Dense linear-algebra contracts shared by every condition: singular spectra,
Schatten norms, PSD tests, circulant spectra and pinching bounds.
"""

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
import scipy.linalg

from .errors import (
    AsymmetricMatrixError,
    ConvergenceError,
    InvalidParameterError,
    NonFiniteInputError,
    PartitionError,
)
from .utils import get_logger

logger = get_logger(__name__)

DEFAULT_SPECTRUM_TOL = 1e-10


@dataclass(frozen=True)
class SpectrumResult:
    """
    values: np.ndarray
        Singular values sorted descending
    residual: float
        max |A - U S V^T| relative to max(1, sigma_max)
    """

    values: np.ndarray
    residual: float


def _finite_matrix(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise InvalidParameterError(f"Expected a 2-d matrix, got an array of shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonFiniteInputError("Matrix has non-finite entries")
    return m


def singular_values(m, tol: float = DEFAULT_SPECTRUM_TOL) -> SpectrumResult:
    m = _finite_matrix(m)
    if m.size == 0:
        return SpectrumResult(values=np.zeros(0), residual=0.0)

    residual = np.inf
    for driver in ("gesdd", "gesvd"):
        u, s, vt = scipy.linalg.svd(m, full_matrices=False, lapack_driver=driver)
        scale = max(1.0, float(s[0]))
        residual = float(np.max(np.abs(m - (u * s) @ vt))) / scale
        if residual <= tol:
            return SpectrumResult(values=s, residual=residual)
        logger.warning(f"SVD residual {residual:.3e} above {tol:.1e} with {driver}, retrying")
    raise ConvergenceError(f"Singular values not resolved to {tol:.1e} (residual {residual:.3e})")


def trace_norm(m) -> float:
    return float(np.sum(singular_values(m).values))


def spectral_norm(m) -> float:
    values = singular_values(m).values
    return float(values[0]) if values.size else 0.0


def frobenius_norm(m) -> float:
    return float(np.linalg.norm(_finite_matrix(m), "fro"))


def frobenius_trace_bound(m) -> float:
    """Upper estimate ||X||_1 <= sqrt(min(rows, cols)) * ||X||_2."""
    m = _finite_matrix(m)
    return float(np.sqrt(min(m.shape))) * frobenius_norm(m)


def inner(a, b) -> float:
    """Frobenius inner product tr(a b^T)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise InvalidParameterError(f"Inner product of shapes {a.shape} and {b.shape}")
    return float(np.sum(a * b))


def min_eigenvalue_symmetric(m, sym_tol: float = DEFAULT_SPECTRUM_TOL) -> float:
    m = _finite_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise InvalidParameterError(f"Expected a square matrix, got shape {m.shape}")
    asymmetry = float(np.max(np.abs(m - m.T))) if m.size else 0.0
    if asymmetry > sym_tol * max(1.0, float(np.max(np.abs(m)))):
        raise AsymmetricMatrixError(f"Matrix asymmetric by {asymmetry:.3e}")
    sym = (m + m.T) / 2
    return float(scipy.linalg.eigvalsh(sym, subset_by_index=[0, 0])[0])


def circulant_eigenvalues(
    coefficients, axis: Literal["row", "column"] = "row"
) -> np.ndarray:
    """
    Eigenvalues of the d x d circulant defined by its first row (default) or
    first column.

    With the eigenvector convention v_j = (1, w_j, ..., w_j^(d-1)) / sqrt(d),
    w_j = exp(2 pi i j / d), the eigenvalue paired with v_j is
    sum_k r_k w_j^k where r is the first row. A first column c defines the
    same matrix with r_k = c_(-k mod d).
    """
    c = np.asarray(coefficients, dtype=complex).ravel()
    d = c.size
    if d == 0:
        raise InvalidParameterError("Circulant of an empty vector")
    if axis == "column":
        c = np.roll(c[::-1], 1)
    elif axis != "row":
        raise InvalidParameterError(f"Unknown circulant axis '{axis}'")
    # sum_k r_k exp(+2 pi i j k / d) is d times the inverse DFT
    return d * np.fft.ifft(c)


def _check_partition(sizes: Sequence[int], total: int, label: str) -> np.ndarray:
    sizes = np.asarray(sizes, dtype=int)
    if sizes.ndim != 1 or sizes.size == 0 or np.any(sizes <= 0):
        raise PartitionError(f"{label} block sizes must be positive integers, got {list(sizes)}")
    if int(sizes.sum()) != total:
        raise PartitionError(f"{label} block sizes {list(sizes)} do not add up to {total}")
    return np.concatenate([[0], np.cumsum(sizes)])


def pinching_lower_bound(m, row_blocks: Sequence[int], col_blocks: Sequence[int]) -> float:
    """
    Sum of the trace norms of the diagonal blocks of `m` under the given
    row/column block sizes. Never exceeds ||m||_1.
    """
    m = _finite_matrix(m)
    if len(row_blocks) != len(col_blocks):
        raise PartitionError(
            f"{len(row_blocks)} row blocks against {len(col_blocks)} column blocks"
        )
    row_cuts = _check_partition(row_blocks, m.shape[0], "Row")
    col_cuts = _check_partition(col_blocks, m.shape[1], "Column")
    return sum(
        trace_norm(m[row_cuts[k] : row_cuts[k + 1], col_cuts[k] : col_cuts[k + 1]])
        for k in range(len(row_blocks))
    )


def isometry_factor(m, tol: float = DEFAULT_SPECTRUM_TOL) -> np.ndarray:
    """
    U_r V_r^T from the reduced SVD m = U S V^T, keeping the singular
    directions above tol * sigma_max. Satisfies <m, G> = ||m||_1 and
    ||G||_inf = 1.
    """
    m = _finite_matrix(m)
    u, s, vt = scipy.linalg.svd(m, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        raise InvalidParameterError("Isometry factor of a zero matrix")
    rank = int(np.sum(s > tol * s[0]))
    if rank < s.size:
        logger.debug(f"Reduced SVD: keeping {rank} of {s.size} singular directions")
    return u[:, :rank] @ vt[:rank, :]
