"""
Necessary conditions for quantum behaviours and the dual certificates that
prove the Bell-expression bounds without solving a semidefinite program.

Every check returns a ConditionReport with margin = bound - measured; a
condition is satisfied when the margin is at least -tol.
"""

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, List, Optional, Tuple, Union

import numpy as np

from .behaviour import Behaviour, Scenario, correlators, marginals, matrix_m, matrix_p
from .errors import CertificateMismatchError, ShapeMismatchError, UnsupportedScenarioError
from .numlin import inner, min_eigenvalue_symmetric, spectral_norm, trace_norm
from .utils import ConditionId, get_logger

if TYPE_CHECKING:
    from .bell import BellExpression

logger = get_logger(__name__)

DEFAULT_CONDITION_TOL = 1e-9

# conditions that need a Bell expression (or correlator weights) as input
EXPRESSION_CONDITIONS = (
    ConditionId.INEQ2,
    ConditionId.INEQ4,
    ConditionId.CORR_EPPING,
    ConditionId.INEQ15,
)
CORRELATOR_CONDITIONS = (
    ConditionId.CORR_NORM,
    ConditionId.CORR_EPPING,
    ConditionId.THM8,
    ConditionId.INEQ15,
)

ExpressionLike = Union["BellExpression", np.ndarray]


@dataclass(frozen=True)
class ConditionReport:
    condition_id: ConditionId
    measured: float
    bound: float
    tol: float = DEFAULT_CONDITION_TOL

    @property
    def margin(self) -> float:
        return self.bound - self.measured

    @property
    def satisfied(self) -> bool:
        return self.margin >= -self.tol

    def to_dict(self) -> dict:
        return {
            "condition": self.condition_id.value,
            "measured": self.measured,
            "bound": self.bound,
            "margin": self.margin,
            "satisfied": self.satisfied,
        }


@dataclass(frozen=True)
class DualCertificate:
    """
    Feasible point of the dual of the level-1 relaxation.

    x: np.ndarray
        Dual vector, one entry per row of the moment matrix
    min_eig: float
        Smallest eigenvalue of diag(x) - W/2
    objective: float
        Dual objective, an upper bound on the Bell functional
    """

    x: np.ndarray
    min_eig: float
    objective: float

    def feasible(self, tol: float = DEFAULT_CONDITION_TOL) -> bool:
        return self.min_eig >= -tol

    def to_dict(self) -> dict:
        return {
            "min_eig": self.min_eig,
            "objective": self.objective,
            "feasible": self.feasible(),
        }


def _as_matrix(G: ExpressionLike, shape: Optional[Tuple[int, int]] = None) -> np.ndarray:
    g = np.asarray(getattr(G, "g", G), dtype=float)
    if g.ndim != 2:
        raise ShapeMismatchError(f"Bell expression must be a matrix, got shape {g.shape}")
    if shape is not None and g.shape != tuple(shape):
        raise ShapeMismatchError(f"Bell expression of shape {g.shape} where {shape} is expected")
    return g


def _inputs_of(G: ExpressionLike, g: np.ndarray) -> Tuple[int, int]:
    """Input counts (m_a, m_b) of an expression in the input-major layout."""
    scenario = getattr(G, "scenario", None)
    if scenario is None:
        raise ShapeMismatchError(
            f"A bare {g.shape} matrix does not fix the number of inputs; pass a BellExpression"
        )
    return scenario.m_a, scenario.m_b


def _sqrt_inputs(s: Scenario) -> float:
    return float(np.sqrt(s.m_a * s.m_b))


def _require_two_outcome(s: Scenario):
    if not s.is_two_outcome:
        raise UnsupportedScenarioError(f"Correlator conditions need a two-outcome scenario, got {s}")


def _marginal_bound(g_norm: float, m_a: int, m_b: int, sq_a: float, sq_b: float) -> float:
    """
    ||G|| sqrt(m_a m_b) - (||G||/2) sqrt(m_b/m_a) sq_a - (||G||/2) sqrt(m_a/m_b) sq_b,
    the marginal-corrected right-hand side shared by the centered bounds.
    """
    return g_norm * (
        np.sqrt(m_a * m_b) - 0.5 * np.sqrt(m_b / m_a) * sq_a - 0.5 * np.sqrt(m_a / m_b) * sq_b
    )


def check_thm1(b: Behaviour, tol: float = DEFAULT_CONDITION_TOL) -> ConditionReport:
    """||P||_1 <= sqrt(m_a m_b) for every quantum behaviour."""
    return ConditionReport(
        ConditionId.THM1, trace_norm(matrix_p(b).data), _sqrt_inputs(b.scenario), tol
    )


def check_thm2(b: Behaviour, tol: float = DEFAULT_CONDITION_TOL) -> ConditionReport:
    s = b.scenario
    marg = marginals(b)
    bound = _sqrt_inputs(s) * (
        1.0 - np.sum(marg.p_a**2) / (2 * s.m_a) - np.sum(marg.p_b**2) / (2 * s.m_b)
    )
    return ConditionReport(ConditionId.THM2, trace_norm(matrix_m(b).data), float(bound), tol)


def bound_ineq2(G: ExpressionLike) -> float:
    """Quantum upper bound ||G||_inf sqrt(m_a m_b) on <P, G>."""
    g = _as_matrix(G)
    m_a, m_b = _inputs_of(G, g)
    return spectral_norm(g) * float(np.sqrt(m_a * m_b))


def check_ineq2(
    b: Behaviour, G: ExpressionLike, tol: float = DEFAULT_CONDITION_TOL
) -> ConditionReport:
    p = matrix_p(b).data
    g = _as_matrix(G, p.shape)
    bound = spectral_norm(g) * _sqrt_inputs(b.scenario)
    return ConditionReport(ConditionId.INEQ2, inner(p, g), bound, tol)


def bound_ineq4(
    b: Behaviour, G: ExpressionLike, tol: float = DEFAULT_CONDITION_TOL
) -> ConditionReport:
    """<M, G> against the marginal-corrected bound."""
    s = b.scenario
    m = matrix_m(b).data
    g = _as_matrix(G, m.shape)
    marg = marginals(b)
    bound = _marginal_bound(
        spectral_norm(g), s.m_a, s.m_b, float(np.sum(marg.p_a**2)), float(np.sum(marg.p_b**2))
    )
    return ConditionReport(ConditionId.INEQ4, inner(m, g), float(bound), tol)


def check_corr_norm(b: Behaviour, tol: float = DEFAULT_CONDITION_TOL) -> ConditionReport:
    _require_two_outcome(b.scenario)
    c = correlators(b).c
    return ConditionReport(ConditionId.CORR_NORM, trace_norm(c), _sqrt_inputs(b.scenario), tol)


def bound_corr_epping(G) -> float:
    """||G||_inf sqrt(m_a m_b) for an m_a x m_b correlator expression."""
    g = _as_matrix(G)
    return spectral_norm(g) * float(np.sqrt(g.shape[0] * g.shape[1]))


def check_corr_epping(
    b: Behaviour, G, tol: float = DEFAULT_CONDITION_TOL
) -> ConditionReport:
    s = b.scenario
    _require_two_outcome(s)
    g = _as_matrix(G, (s.m_a, s.m_b))
    return ConditionReport(
        ConditionId.CORR_EPPING, inner(correlators(b).c, g), bound_corr_epping(g), tol
    )


def check_thm8(b: Behaviour, tol: float = DEFAULT_CONDITION_TOL) -> ConditionReport:
    s = b.scenario
    _require_two_outcome(s)
    summary = correlators(b)
    bound = _sqrt_inputs(s) * (
        1.0
        - np.sum(summary.a_mean**2) / (2 * s.m_a)
        - np.sum(summary.b_mean**2) / (2 * s.m_b)
    )
    return ConditionReport(ConditionId.THM8, trace_norm(summary.c_centered), float(bound), tol)


def bound_ineq15(b: Behaviour, G, tol: float = DEFAULT_CONDITION_TOL) -> ConditionReport:
    """sum_xy G_xy (<A_x B_y> - <A_x><B_y>) against the marginal-corrected bound."""
    s = b.scenario
    _require_two_outcome(s)
    g = _as_matrix(G, (s.m_a, s.m_b))
    summary = correlators(b)
    bound = _marginal_bound(
        spectral_norm(g),
        s.m_a,
        s.m_b,
        float(np.sum(summary.a_mean**2)),
        float(np.sum(summary.b_mean**2)),
    )
    return ConditionReport(ConditionId.INEQ15, inner(summary.c_centered, g), float(bound), tol)


def prop7_witness(b: Behaviour) -> Tuple[float, float]:
    """
    Returns (||P||_1, (sqrt(m_a m_b) + ||C||_1) / 2). For no-signaling
    behaviours the first is never below the second, so a correlator matrix
    with ||C||_1 > sqrt(m_a m_b) forces a violation of the trace-norm bound.
    """
    _require_two_outcome(b.scenario)
    lhs = trace_norm(matrix_p(b).data)
    rhs = (_sqrt_inputs(b.scenario) + trace_norm(correlators(b).c)) / 2
    return lhs, rhs


def quantum_gap(b: Behaviour) -> float:
    """
    max(0, ||P||_1 - sqrt(m_a m_b)); a lower bound on ||P - R||_1 over all
    quantum behaviours R.
    """
    return max(0.0, -check_thm1(b).margin)


def _canonical_dual(g_norm: float, m_a: int, m_b: int, n_a: int, n_b: int) -> np.ndarray:
    return (g_norm / 2) * np.concatenate(
        [np.full(n_a, np.sqrt(m_b / m_a)), np.full(n_b, np.sqrt(m_a / m_b))]
    )


def _certificate(g: np.ndarray, x: np.ndarray, diagonal: np.ndarray, bound: float) -> DualCertificate:
    n_a, n_b = g.shape
    w = np.zeros((n_a + n_b, n_a + n_b))
    w[:n_a, n_a:] = g
    w[n_a:, :n_a] = g.T
    min_eig = min_eigenvalue_symmetric(np.diag(x) - w / 2)
    objective = float(x @ diagonal)
    if abs(objective - bound) > 1e-9 * max(1.0, abs(bound)):
        raise CertificateMismatchError(
            f"Certificate objective {objective:.17g} differs from the analytic bound {bound:.17g}"
        )
    logger.debug(f"Certificate for a {n_a}x{n_b} expression: min_eig={min_eig:.3e}")
    return DualCertificate(x=x, min_eig=min_eig, objective=objective)


def _uniform_marginals(s: Scenario) -> Tuple[np.ndarray, np.ndarray]:
    return np.full(s.n_a, 1.0 / s.d_a), np.full(s.n_b, 1.0 / s.d_b)


def dual_certificate_ineq2(G: ExpressionLike, b: Optional[Behaviour] = None) -> DualCertificate:
    """
    Certificate for <P, G> <= ||G||_inf sqrt(m_a m_b). The objective
    x^T (P_A; P_B) is the same for every normalized marginal vector, so the
    behaviour only selects which marginals are reported.
    """
    scenario = b.scenario if b is not None else getattr(G, "scenario", None)
    if scenario is None:
        raise ShapeMismatchError("A bare matrix does not fix the scenario; pass a BellExpression")
    g = _as_matrix(G, scenario.matrix_shape)
    if b is not None:
        marg = marginals(b)
        p_a, p_b = marg.p_a, marg.p_b
    else:
        p_a, p_b = _uniform_marginals(scenario)
    g_norm = spectral_norm(g)
    x = _canonical_dual(g_norm, scenario.m_a, scenario.m_b, scenario.n_a, scenario.n_b)
    return _certificate(g, x, np.concatenate([p_a, p_b]), g_norm * _sqrt_inputs(scenario))


def dual_certificate_ineq4(b: Behaviour, G: ExpressionLike) -> DualCertificate:
    """Same dual point, objective x^T (P_A - P_A^2; P_B - P_B^2)."""
    s = b.scenario
    g = _as_matrix(G, s.matrix_shape)
    marg = marginals(b)
    g_norm = spectral_norm(g)
    x = _canonical_dual(g_norm, s.m_a, s.m_b, s.n_a, s.n_b)
    diagonal = np.concatenate([marg.p_a - marg.p_a**2, marg.p_b - marg.p_b**2])
    bound = _marginal_bound(
        g_norm, s.m_a, s.m_b, float(np.sum(marg.p_a**2)), float(np.sum(marg.p_b**2))
    )
    return _certificate(g, x, diagonal, float(bound))


def dual_certificate_correlator(
    G, b: Optional[Behaviour] = None, centered: bool = False
) -> DualCertificate:
    """
    Certificate on the correlator moment matrix (diagonal of ones, or of
    1 - <A_x>^2 and 1 - <B_y>^2 when centered). G is m_a x m_b.
    """
    g = _as_matrix(G)
    m_a, m_b = g.shape
    if b is not None:
        _require_two_outcome(b.scenario)
        g = _as_matrix(G, (b.scenario.m_a, b.scenario.m_b))
    if centered and b is None:
        raise UnsupportedScenarioError("The centered correlator certificate needs a behaviour")
    g_norm = spectral_norm(g)
    x = _canonical_dual(g_norm, m_a, m_b, m_a, m_b)
    if centered:
        summary = correlators(b)
        diagonal = np.concatenate([1.0 - summary.a_mean**2, 1.0 - summary.b_mean**2])
        bound = _marginal_bound(
            g_norm, m_a, m_b, float(np.sum(summary.a_mean**2)), float(np.sum(summary.b_mean**2))
        )
    else:
        diagonal = np.ones(m_a + m_b)
        bound = g_norm * float(np.sqrt(m_a * m_b))
    return _certificate(g, x, diagonal, float(bound))


def run_checks(
    b: Behaviour,
    conditions: Iterable[ConditionId],
    tol: float = DEFAULT_CONDITION_TOL,
    expression: Optional[ExpressionLike] = None,
    correlator_weights: Optional[np.ndarray] = None,
) -> List[ConditionReport]:
    """
    Evaluate several conditions on one behaviour. Correlator conditions are
    skipped outside two-outcome scenarios and expression conditions are
    skipped when no expression (or correlator weights) is supplied.
    """
    reports = []
    for cid in conditions:
        if cid in CORRELATOR_CONDITIONS and not b.scenario.is_two_outcome:
            logger.info(f"Skipping {cid.value}: scenario {b.scenario} is not two-outcome")
            continue
        if cid in (ConditionId.INEQ2, ConditionId.INEQ4) and expression is None:
            logger.info(f"Skipping {cid.value}: no Bell expression given")
            continue
        if cid in (ConditionId.CORR_EPPING, ConditionId.INEQ15) and correlator_weights is None:
            logger.info(f"Skipping {cid.value}: no correlator weights given")
            continue

        if cid == ConditionId.THM1:
            reports.append(check_thm1(b, tol))
        elif cid == ConditionId.THM2:
            reports.append(check_thm2(b, tol))
        elif cid == ConditionId.INEQ2:
            reports.append(check_ineq2(b, expression, tol))
        elif cid == ConditionId.INEQ4:
            reports.append(bound_ineq4(b, expression, tol))
        elif cid == ConditionId.CORR_NORM:
            reports.append(check_corr_norm(b, tol))
        elif cid == ConditionId.CORR_EPPING:
            reports.append(check_corr_epping(b, correlator_weights, tol))
        elif cid == ConditionId.THM8:
            reports.append(check_thm8(b, tol))
        elif cid == ConditionId.INEQ15:
            reports.append(bound_ineq15(b, correlator_weights, tol))
    return reports
