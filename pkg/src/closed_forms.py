"""
Closed-form spectra of the maximally entangled behaviour P_d and norm
estimates for the PR-box families. These serve as oracles for the numerical
path in numlin.

The input-major matrix of P_d is [[A, B], [C, A]] with circulant blocks. With
the first-row convention of `numlin.circulant_eigenvalues`, the block
eigenvalues are sums

    S_theta(j) = sum_k w_j^k / sin^2(pi (k + theta) / d),   w_j = exp(2 pi i j / d),

scaled by 1 / (2 d^3), with theta = -1/4 for A, +1/4 for B and -3/4 for C.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import InvalidParameterError, PoleError

POLE_GUARD = 1e-6

BLOCK_THETAS = {"a": -0.25, "b": 0.25, "c": -0.75}


@dataclass(frozen=True)
class PdSpectrum:
    """
    d: int
    lambda_a, lambda_b, lambda_c: np.ndarray
        Eigenvalues of the circulant blocks, indexed by j = 0..d-1
    sigma_minus, sigma_plus: np.ndarray
        Singular values |lambda_a -/+ sqrt(lambda_b lambda_c)| with the branch
        of the root fixed so that sigma_minus[j] = 2j/d^2
    """

    d: int
    lambda_a: np.ndarray
    lambda_b: np.ndarray
    lambda_c: np.ndarray
    sigma_minus: np.ndarray
    sigma_plus: np.ndarray

    def multiset(self) -> np.ndarray:
        return np.sort(np.concatenate([self.sigma_minus, self.sigma_plus]))[::-1]


def _check_theta(theta: float):
    if abs(theta - round(theta)) <= POLE_GUARD:
        raise PoleError(f"theta={theta} is within {POLE_GUARD} of an integer")


def _check_d(d: int):
    if d < 2:
        raise InvalidParameterError(f"Dimension must satisfy d >= 2, got {d}")


def s_theta_closed(theta: float, j, d: int):
    """
    -4 d e^(-2 pi i j theta / d) (j + e^(-2 pi i theta) (d - j)) / (1 - e^(-2 pi i theta))^2
    for 0 <= j < d. `j` may be an array.
    """
    _check_theta(theta)
    j = np.asarray(j)
    z = np.exp(-2j * np.pi * theta)
    return -4 * d * np.exp(-2j * np.pi * j * theta / d) * (j + z * (d - j)) / (1 - z) ** 2


def s_theta_direct(theta: float, j, d: int):
    _check_theta(theta)
    j = np.asarray(j)
    k = np.arange(d)
    terms = np.exp(2j * np.pi * np.multiply.outer(j, k) / d) / np.sin(np.pi * (k + theta) / d) ** 2
    return terms.sum(axis=-1)


def pd_block_eigs(d: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Eigenvalues of the blocks A, B, C of P_d from their reduced closed forms."""
    _check_d(d)
    j = np.arange(d)
    half = np.exp(1j * np.pi * j / (2 * d))
    lambda_a = -1j * half * (j + 1j * (d - j)) / d**2
    lambda_b = 1j * np.conj(half) * (j - 1j * (d - j)) / d**2
    lambda_c = 1j * half**3 * (j - 1j * (d - j)) / d**2
    return lambda_a, lambda_b, lambda_c


def pd_block_eigs_from_sums(d: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Same eigenvalues, evaluated through s_theta_closed."""
    _check_d(d)
    j = np.arange(d)
    scale = 1.0 / (2 * d**3)
    return tuple(scale * s_theta_closed(BLOCK_THETAS[block], j, d) for block in ("a", "b", "c"))


def pd_singular_values(d: int) -> PdSpectrum:
    """
    P_d is normal and its blocks share the Fourier eigenvectors, so its
    singular values are |lambda_a(j) +/- sqrt(lambda_b(j) lambda_c(j))|.
    """
    lambda_a, lambda_b, lambda_c = pd_block_eigs(d)
    j = np.arange(d)
    root = np.sqrt(lambda_b * lambda_c)
    # analytic branch of the root: lambda_b(j) e^(i pi j / d)
    analytic = lambda_b * np.exp(1j * np.pi * j / d)
    root = np.where(np.abs(root - analytic) <= np.abs(root + analytic), root, -root)
    return PdSpectrum(
        d=d,
        lambda_a=lambda_a,
        lambda_b=lambda_b,
        lambda_c=lambda_c,
        sigma_minus=np.abs(lambda_a - root),
        sigma_plus=np.abs(lambda_a + root),
    )


def pd_trace_norm_closed(d: int) -> float:
    """Sum of the closed-form singular values sigma_j^- and sigma_j^+, which is 2."""
    return float(pd_singular_values(d).multiset().sum())


def pr2d_frobenius_closed(d: int) -> float:
    """||P_PR(2,d)||_2 = 2 / sqrt(d)."""
    _check_d(d)
    return 2.0 / np.sqrt(d)


def pr2d_trace_norm_bounds(d: int) -> Tuple[float, float]:
    """(sqrt(5), 2 sqrt(2)) bracket ||P_PR(2,d)||_1 for every d >= 2."""
    _check_d(d)
    return float(np.sqrt(5)), float(2 * np.sqrt(2))


def mm22_lift_lower_bound(m: int) -> float:
    """Pinching bound ||P_PR(2,2)||_1 + (m - 2) for the lifted (mm22) boxes."""
    if m < 2:
        raise InvalidParameterError(f"Lifted PR box needs m >= 2, got {m}")
    return m + np.sqrt(2) - 1


def nondeterministic_mm22_upper_bound(m: int) -> float:
    """
    m sqrt(m): Frobenius estimate of the trace norm of a (mm22) box whose
    blocks are all nondeterministic.
    """
    if m < 1:
        raise InvalidParameterError(f"Number of inputs must be positive, got {m}")
    return float(m * np.sqrt(m))
