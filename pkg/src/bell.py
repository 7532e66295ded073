"""
Bell expressions: evaluation, local bounds by vertex enumeration, quantum
bounds from the spectral norm and its affine reparameterizations, and the
SVD construction of expressions maximally violated by a given behaviour.
"""

import itertools
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import minimize_scalar

from .behaviour import Behaviour, BehaviourMatrix, Scenario, matrix_p
from .conditions import bound_ineq2
from .errors import EnumerationLimitError, InvalidParameterError, ShapeMismatchError
from .generators import LdbAssignment
from .numlin import inner, isometry_factor, spectral_norm
from .utils import MatrixKind, get_logger

logger = get_logger(__name__)

MAX_LDB_VERTICES = 10_000_000
# strategies of one party scored per vectorized batch
STRATEGY_BATCH = 1 << 15

DEFAULT_OFFSETS = (-1.0, -0.5, 0.0, 0.5, 1.0)
DEFAULT_SCALE_BOUNDS = (1e-3, 1e3)


@dataclass(frozen=True)
class BellExpression:
    """
    Linear functional <P, G> on behaviours of `scenario`, with g laid out like
    the input-major behaviour matrix.
    """

    scenario: Scenario
    g: np.ndarray
    name: Optional[str] = None

    def __post_init__(self):
        g = np.array(self.g, dtype=float)
        if g.shape != self.scenario.matrix_shape:
            raise ShapeMismatchError(
                f"Expression of shape {g.shape} does not match scenario {self.scenario} "
                f"(expected {self.scenario.matrix_shape})"
            )
        g.setflags(write=False)
        object.__setattr__(self, "g", g)

    @classmethod
    def from_blocks(cls, blocks, name: Optional[str] = None) -> "BellExpression":
        """Build from an m_a x m_b grid of d_a x d_b blocks G_xy."""
        blocks = np.asarray(blocks, dtype=float)
        m_a, m_b, d_a, d_b = blocks.shape
        g = blocks.transpose(0, 2, 1, 3).reshape(m_a * d_a, m_b * d_b)
        return cls(Scenario(m_a, m_b, d_a, d_b), g, name)

    def tensor(self) -> np.ndarray:
        """Coefficients as G[x, a, y, b]."""
        s = self.scenario
        return self.g.reshape(s.m_a, s.d_a, s.m_b, s.d_b)


@dataclass(frozen=True)
class AffineForm:
    """
    G -> c (x) J + s G: every input block (x, y) is shifted by c_xy times the
    all-ones block and the whole expression is scaled by s > 0. On normalized
    behaviours <P, G'> = sum(c) + s <P, G>.
    """

    block_offsets: np.ndarray
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "block_offsets", np.array(self.block_offsets, dtype=float))
        if not self.scale > 0:
            raise InvalidParameterError(f"Affine scale must be positive, got {self.scale}")

    @classmethod
    def identity(cls, s: Scenario) -> "AffineForm":
        return cls(np.zeros((s.m_a, s.m_b)), 1.0)


@dataclass(frozen=True)
class TsirelsonSearchResult:
    bound: float
    form: AffineForm
    identity_bound: float
    evaluations: int


def evaluate(G: BellExpression, b: Behaviour) -> float:
    if G.scenario != b.scenario:
        raise ShapeMismatchError(
            f"Expression for {G.scenario} evaluated on a behaviour of {b.scenario}"
        )
    return inner(matrix_p(b).data, G.g)


def _strategy_table(start: int, stop: int, d: int, m: int) -> np.ndarray:
    """Deterministic strategies start..stop-1 as rows of outputs, first input most significant."""
    index = np.arange(start, stop)[:, None]
    powers = d ** np.arange(m - 1, -1, -1)
    return (index // powers) % d


def local_optimum(
    G: BellExpression, max_vertices: int = MAX_LDB_VERTICES
) -> Tuple[float, LdbAssignment]:
    """
    Maximum of <D, G> over the local deterministic boxes and a maximizing
    assignment. Alice's strategies are enumerated; for each of them Bob's
    best answer is picked input by input.
    """
    s = G.scenario
    n_vertices = s.d_a**s.m_a * s.d_b**s.m_b
    if n_vertices > max_vertices:
        raise EnumerationLimitError(
            f"Scenario {s} has {n_vertices} deterministic boxes, above the limit {max_vertices}"
        )
    t = G.tensor()  # [x, a, y, b]
    n_alice = s.d_a**s.m_a
    best_value, best_f = -np.inf, None
    for start in range(0, n_alice, STRATEGY_BATCH):
        f = _strategy_table(start, min(start + STRATEGY_BATCH, n_alice), s.d_a, s.m_a)
        # scores[k, y, b] = sum_x G[x, f_k(x), y, b]
        scores = sum(t[x, f[:, x]] for x in range(s.m_a))
        values = scores.max(axis=2).sum(axis=1)
        k = int(np.argmax(values))
        if values[k] > best_value:
            best_value, best_f = float(values[k]), f[k]
    scores = sum(t[x, best_f[x]] for x in range(s.m_a))
    g = tuple(int(i) for i in scores.argmax(axis=1))
    logger.debug(f"Local optimum {best_value:.12g} over {n_vertices} boxes of {s}")
    return best_value, LdbAssignment(f=tuple(int(i) for i in best_f), g=g)


def local_bound(G: BellExpression, max_vertices: int = MAX_LDB_VERTICES) -> float:
    return local_optimum(G, max_vertices)[0]


def affine_apply(G: BellExpression, form: AffineForm) -> BellExpression:
    s = G.scenario
    if form.block_offsets.shape != (s.m_a, s.m_b):
        raise ShapeMismatchError(
            f"Block offsets of shape {form.block_offsets.shape} for scenario {s}"
        )
    offsets = np.kron(form.block_offsets, np.ones((s.d_a, s.d_b)))
    name = f"{G.name}'" if G.name else None
    return BellExpression(s, offsets + form.scale * G.g, name)


def tsirelson_bound_via(form: AffineForm, G: BellExpression) -> float:
    """(||G'||_inf sqrt(m_a m_b) - sum(c)) / s, a quantum upper bound on <P, G>."""
    shifted = affine_apply(G, form)
    return (bound_ineq2(shifted) - float(form.block_offsets.sum())) / form.scale


def _quotient(G: BellExpression, c: np.ndarray, offsets: np.ndarray, log_s: float) -> float:
    s = np.exp(log_s)
    sqrt_inputs = np.sqrt(G.scenario.m_a * G.scenario.m_b)
    return (spectral_norm(offsets + s * G.g) * sqrt_inputs - c.sum()) / s


def _scan_scales(
    G: BellExpression, c: np.ndarray, log_grid: np.ndarray
) -> Tuple[float, int, np.ndarray]:
    s = G.scenario
    offsets = np.kron(c, np.ones((s.d_a, s.d_b)))
    values = np.array([_quotient(G, c, offsets, ls) for ls in log_grid])
    k = int(np.argmin(values))
    return float(values[k]), k, offsets


def _refine_scale(
    G: BellExpression, c: np.ndarray, log_grid: np.ndarray, k: int
) -> Tuple[float, float]:
    s = G.scenario
    offsets = np.kron(c, np.ones((s.d_a, s.d_b)))
    lo = log_grid[max(k - 1, 0)]
    hi = log_grid[min(k + 1, len(log_grid) - 1)]
    grid_value = _quotient(G, c, offsets, log_grid[k])
    if hi <= lo:
        return grid_value, float(np.exp(log_grid[k]))
    res = minimize_scalar(
        lambda ls: _quotient(G, c, offsets, ls),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-12},
    )
    if res.fun < grid_value:
        return float(res.fun), float(np.exp(res.x))
    return grid_value, float(np.exp(log_grid[k]))


def tsirelson_bound_search(
    G: BellExpression,
    offsets: Sequence[float] = DEFAULT_OFFSETS,
    scale_bounds: Tuple[float, float] = DEFAULT_SCALE_BOUNDS,
    scale_points: int = 25,
    max_grid_cells: int = 4096,
    sweeps: int = 4,
    refine_top: int = 8,
) -> TsirelsonSearchResult:
    """
    Minimize tsirelson_bound_via over block-constant offsets drawn from
    `offsets` and scales in `scale_bounds`. Small offset grids are searched
    exhaustively; larger ones by coordinate descent over the offset entries.
    For each offset matrix the scale is scanned on a log grid and the best
    candidates are refined with a bounded scalar minimization. The identity
    form is always part of the search, so the result never exceeds
    ||G||_inf sqrt(m_a m_b).
    """
    s = G.scenario
    offsets = sorted(set(float(o) for o in offsets))
    if not offsets or scale_points < 1:
        raise InvalidParameterError("Tsirelson search needs at least one offset and one scale")
    lo, hi = scale_bounds
    if not 0 < lo <= hi:
        raise InvalidParameterError(f"Scale bounds must satisfy 0 < lo <= hi, got {scale_bounds}")
    log_grid = np.unique(np.append(np.linspace(np.log(lo), np.log(hi), scale_points), 0.0))
    log_grid = log_grid[(log_grid >= np.log(lo)) & (log_grid <= np.log(hi))]
    if log_grid.size == 0:
        log_grid = np.array([np.log(lo)])

    identity = AffineForm.identity(s)
    identity_bound = tsirelson_bound_via(identity, G)
    scored: Dict[bytes, Tuple[float, int, np.ndarray]] = {}

    def score(c: np.ndarray) -> float:
        key = c.tobytes()
        if key not in scored:
            value, k, _ = _scan_scales(G, c, log_grid)
            scored[key] = (value, k, c.copy())
        return scored[key][0]

    n_entries = s.m_a * s.m_b
    n_cells = len(offsets) ** n_entries
    if n_cells <= max_grid_cells:
        logger.debug(f"Exhaustive offset search over {n_cells} cells")
        for values in itertools.product(offsets, repeat=n_entries):
            score(np.array(values).reshape(s.m_a, s.m_b))
    else:
        logger.debug(f"{n_cells} offset cells exceed {max_grid_cells}, using coordinate descent")
        c = np.zeros((s.m_a, s.m_b))
        best = score(c)
        for sweep in range(sweeps):
            improved = False
            for x, y in itertools.product(range(s.m_a), range(s.m_b)):
                for value in offsets:
                    trial = c.copy()
                    trial[x, y] = value
                    v = score(trial)
                    if v < best - 1e-15:
                        best, c, improved = v, trial, True
            if not improved:
                logger.debug(f"Coordinate descent converged after {sweep + 1} sweep(s)")
                break

    best_bound, best_form = identity_bound, identity
    ranked = sorted(scored.values(), key=lambda item: item[0])[:refine_top]
    for _, k, c in ranked:
        value, scale = _refine_scale(G, c, log_grid, k)
        if value < best_bound:
            best_bound, best_form = value, AffineForm(c, scale)

    logger.info(
        f"Tsirelson search for {G.name or 'expression'}: {best_bound:.12g} "
        f"(identity form {identity_bound:.12g}, {len(scored)} offset cells)"
    )
    return TsirelsonSearchResult(
        bound=float(best_bound),
        form=best_form,
        identity_bound=float(identity_bound),
        evaluations=len(scored),
    )


def extremal_bell_from(
    P: Union[BehaviourMatrix, np.ndarray],
    scenario: Optional[Scenario] = None,
    name: Optional[str] = None,
) -> BellExpression:
    """
    G = U_r V_r^T from the reduced SVD P = U S V^T, so that <P, G> = ||P||_1
    and ||G||_inf = 1. An output-major matrix gives back the expression in the
    input-major layout. A bare matrix without a scenario is read as a
    scenario with one output per input.
    """
    if isinstance(P, BehaviourMatrix):
        data, s = P.data, P.scenario
    else:
        data = np.asarray(P, dtype=float)
        s = scenario or Scenario(data.shape[0], data.shape[1], 1, 1)
    g = isometry_factor(data)
    if isinstance(P, BehaviourMatrix) and P.kind == MatrixKind.OUTPUT_MAJOR_PPRIME:
        g = (
            g.reshape(s.d_a, s.m_a, s.d_b, s.m_b)
            .transpose(1, 0, 3, 2)
            .reshape(s.n_a, s.n_b)
        )
    return BellExpression(s, g, name)


def gap_witness(b: Behaviour) -> Tuple[BellExpression, float]:
    """
    Expression maximally violated by b and the amount <P, G> - ||G||_inf sqrt(m_a m_b),
    which equals ||P||_1 - sqrt(m_a m_b).
    """
    G = extremal_bell_from(matrix_p(b), name="gap_witness")
    return G, evaluate(G, b) - bound_ineq2(G)


def _g_chsh() -> BellExpression:
    plus = np.array([[1.0, -1.0], [-1.0, 1.0]])
    return BellExpression.from_blocks([[plus, plus], [plus, -plus]], name="g_chsh")


def _g_chsh_shifted() -> BellExpression:
    form = AffineForm(np.diag([0.5, 0.5]), 1 / (2 * np.sqrt(2)))
    shifted = affine_apply(_g_chsh(), form)
    return BellExpression(shifted.scenario, shifted.g, "g_chsh_shifted")


def _g_phi3() -> BellExpression:
    """
    Expression maximized in the quantum set by the two-qutrit maximally
    entangled behaviour, value 2. The printed coefficient table lists Bob's
    inputs in the opposite order to the behaviour's phase convention, so the
    two column blocks are exchanged here.
    """
    p = (2 + np.sqrt(3)) / 6
    q = (2 - np.sqrt(3)) / 6
    r = -1 / 6
    printed = np.array(
        [
            [p, q, r, p, r, q],
            [r, p, q, q, p, r],
            [q, r, p, r, q, p],
            [p, r, q, r, p, q],
            [q, p, r, q, r, p],
            [r, q, p, p, q, r],
        ]
    )
    g = np.hstack([printed[:, 3:], printed[:, :3]])
    return BellExpression(Scenario(2, 2, 3, 3), g, "g_phi3")


CATALOG_BUILDERS = {
    "g_chsh": _g_chsh,
    "g_chsh_shifted": _g_chsh_shifted,
    "g_phi3": _g_phi3,
}


def catalog() -> Dict[str, BellExpression]:
    return {name: build() for name, build in CATALOG_BUILDERS.items()}
