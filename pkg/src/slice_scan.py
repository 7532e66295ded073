"""
Two-parameter slices P = q P1 + p P2 + (1 - p - q) base through behaviour
space, scanned against a condition, plus one-parameter boundary searches.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import brentq
from tqdm import tqdm

from .behaviour import Behaviour, validate
from .bell import BellExpression, evaluate
from .conditions import (
    DEFAULT_CONDITION_TOL,
    EXPRESSION_CONDITIONS,
    check_corr_norm,
    check_thm1,
    check_thm2,
    check_thm8,
)
from .errors import InvalidParameterError, ShapeMismatchError
from .generators import fully_mixed, mix
from .utils import ConditionId, get_logger

logger = get_logger(__name__)

BEHAVIOUR_CHECKS = {
    ConditionId.THM1: check_thm1,
    ConditionId.THM2: check_thm2,
    ConditionId.CORR_NORM: check_corr_norm,
    ConditionId.THM8: check_thm8,
}


@dataclass(frozen=True)
class ExpressionThreshold:
    """Condition <P, G> <= threshold."""

    expression: BellExpression
    threshold: float


SliceCondition = Union[ConditionId, ExpressionThreshold]


def measure(
    b: Behaviour, condition: SliceCondition, tol: float = DEFAULT_CONDITION_TOL
) -> Tuple[float, float]:
    """(measured, bound) of `condition` at `b`."""
    if isinstance(condition, ExpressionThreshold):
        return evaluate(condition.expression, b), float(condition.threshold)
    if condition in EXPRESSION_CONDITIONS:
        raise InvalidParameterError(
            f"Condition {condition.value} needs an expression; use ExpressionThreshold"
        )
    report = BEHAVIOUR_CHECKS[condition](b, tol)
    return report.measured, report.bound


def condition_label(condition: SliceCondition) -> str:
    if isinstance(condition, ExpressionThreshold):
        return f"{condition.expression.name or 'expression'}<={condition.threshold:g}"
    return condition.value


@dataclass(frozen=True)
class SliceSpec:
    """
    p1, p2, base: Behaviour
        Spanning behaviours, all in the same scenario
    condition: SliceCondition
    resolution: int or (n_q, n_p)
        Grid points per axis, at least 2
    q_range, p_range: (float, float)
        Rectangle scanned in the (q, p) plane
    """

    p1: Behaviour
    p2: Behaviour
    base: Behaviour
    condition: SliceCondition = ConditionId.THM1
    resolution: Union[int, Tuple[int, int]] = 200
    q_range: Tuple[float, float] = (0.0, 1.0)
    p_range: Tuple[float, float] = (0.0, 1.0)
    tol: float = DEFAULT_CONDITION_TOL
    validation_tol: float = 1e-9

    def __post_init__(self):
        s = self.p1.scenario
        for name in ("p2", "base"):
            if getattr(self, name).scenario != s:
                raise ShapeMismatchError(
                    f"Slice behaviour {name} is in {getattr(self, name).scenario}, p1 in {s}"
                )
        if min(self.grid_shape) < 2:
            raise InvalidParameterError(f"Slice resolution must be at least 2, got {self.resolution}")

    @property
    def grid_shape(self) -> Tuple[int, int]:
        """(n_q, n_p)"""
        if isinstance(self.resolution, (tuple, list)):
            return int(self.resolution[0]), int(self.resolution[1])
        return int(self.resolution), int(self.resolution)

    def axes(self) -> Tuple[np.ndarray, np.ndarray]:
        n_q, n_p = self.grid_shape
        return np.linspace(*self.q_range, n_q), np.linspace(*self.p_range, n_p)

    def behaviour_at(self, q: float, p: float) -> Behaviour:
        return mix([q, p, 1.0 - p - q], [self.p1, self.p2, self.base], allow_signed=True)


@dataclass
class SliceResult:
    """Grids are indexed [i_p, i_q]."""

    q: np.ndarray
    p: np.ndarray
    measured: np.ndarray
    bound: np.ndarray
    valid: np.ndarray
    tol: float
    boundary: List[np.ndarray] = field(default_factory=list)

    @property
    def margin(self) -> np.ndarray:
        return self.bound - self.measured

    @property
    def satisfied(self) -> np.ndarray:
        return self.margin >= -self.tol

    @property
    def evaluations(self) -> int:
        return self.measured.size

    def rows(self):
        """(q, p, measured, bound, margin, satisfied, valid) in row-major order of p then q."""
        margin, satisfied = self.margin, self.satisfied
        for i, p in enumerate(self.p):
            for k, q in enumerate(self.q):
                yield (
                    float(q),
                    float(p),
                    float(self.measured[i, k]),
                    float(self.bound[i, k]),
                    float(margin[i, k]),
                    bool(satisfied[i, k]),
                    bool(self.valid[i, k]),
                )


def _scan_row(spec: SliceSpec, q_axis: np.ndarray, p: float):
    measured = np.empty(q_axis.size)
    bound = np.empty(q_axis.size)
    valid = np.empty(q_axis.size, dtype=bool)
    for k, q in enumerate(q_axis):
        b = spec.behaviour_at(q, p)
        measured[k], bound[k] = measure(b, spec.condition, spec.tol)
        valid[k] = validate(b, spec.validation_tol).ok
    return measured, bound, valid


def scan_slice(spec: SliceSpec, workers: int = 4, progress: bool = True) -> SliceResult:
    q_axis, p_axis = spec.axes()
    logger.info(
        f"Scanning {condition_label(spec.condition)} on a {q_axis.size}x{p_axis.size} grid "
        f"in {spec.p1.scenario}"
    )
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        # map keeps row order whatever the completion order
        rows = list(
            tqdm(
                pool.map(lambda p: _scan_row(spec, q_axis, p), p_axis),
                total=p_axis.size,
                desc="slice rows",
                disable=not progress,
            )
        )
    measured = np.stack([r[0] for r in rows])
    bound = np.stack([r[1] for r in rows])
    valid = np.stack([r[2] for r in rows])
    if not valid.all():
        logger.warning(f"{int((~valid).sum())} grid point(s) lie outside the no-signaling polytope")

    result = SliceResult(q_axis, p_axis, measured, bound, valid, spec.tol)
    result.boundary = extract_boundary(q_axis, p_axis, result.margin, spec.tol)
    logger.info(f"Slice done: {len(result.boundary)} boundary polyline(s)")
    return result


def _crossing(m0: float, m1: float, tol: float) -> float:
    """Fraction along an edge where the margin reaches -tol."""
    if not (np.isfinite(m0) and np.isfinite(m1)) or m0 == m1:
        return 0.5
    return float(np.clip((m0 + tol) / (m0 - m1), 0.0, 1.0))


def _cell_segments(q, p, margin, inside, i, k, tol):
    corners = {
        "00": (i, k),
        "10": (i, k + 1),
        "01": (i + 1, k),
        "11": (i + 1, k + 1),
    }
    state = {name: inside[idx] for name, idx in corners.items()}
    # edges in cyclic order: bottom, right, top, left
    edges = {
        "bottom": ("00", "10"),
        "right": ("10", "11"),
        "top": ("01", "11"),
        "left": ("00", "01"),
    }
    points = {}
    for edge, (c0, c1) in edges.items():
        if state[c0] == state[c1]:
            continue
        (i0, k0), (i1, k1) = corners[c0], corners[c1]
        t = _crossing(margin[i0, k0], margin[i1, k1], tol)
        points[edge] = (
            q[k0] + t * (q[k1] - q[k0]),
            p[i0] + t * (p[i1] - p[i0]),
        )
    if len(points) == 2:
        a, b = points.values()
        return [(a, b)]
    if len(points) == 4:
        center = np.mean([margin[idx] for idx in corners.values()])
        if (center >= -tol) == state["00"]:
            pairs = (("bottom", "right"), ("top", "left"))
        else:
            pairs = (("left", "bottom"), ("right", "top"))
        return [(points[e0], points[e1]) for e0, e1 in pairs]
    return []


def _chain(segments: Sequence[Tuple[tuple, tuple]]) -> List[np.ndarray]:
    def key(point):
        return (round(point[0], 12), round(point[1], 12))

    ends: Dict[tuple, List[int]] = {}
    for n, (a, b) in enumerate(segments):
        ends.setdefault(key(a), []).append(n)
        ends.setdefault(key(b), []).append(n)

    used = [False] * len(segments)

    def walk(point, polyline):
        while True:
            nxt = [n for n in ends.get(key(point), []) if not used[n]]
            if not nxt:
                return
            n = nxt[0]
            used[n] = True
            a, b = segments[n]
            point = b if key(a) == key(point) else a
            polyline.append(point)

    polylines = []
    for n in range(len(segments)):
        if used[n]:
            continue
        used[n] = True
        a, b = segments[n]
        polyline = [a, b]
        walk(b, polyline)
        polyline.reverse()
        walk(polyline[-1], polyline)
        polylines.append(np.array(polyline))
    return polylines


def extract_boundary(
    q: np.ndarray, p: np.ndarray, margin: np.ndarray, tol: float = DEFAULT_CONDITION_TOL
) -> List[np.ndarray]:
    """
    Polylines in the (q, p) plane separating satisfied from violated grid
    points, found cell by cell with the crossing on each edge placed by
    linear interpolation of the margin.
    """
    inside = margin >= -tol
    segments = []
    for i in range(p.size - 1):
        for k in range(q.size - 1):
            segments.extend(_cell_segments(q, p, margin, inside, i, k, tol))
    return _chain(segments)


def find_boundary(
    path: Callable[[float], Behaviour],
    condition: SliceCondition,
    lo: float,
    hi: float,
    xtol: float = 1e-12,
    tol: float = DEFAULT_CONDITION_TOL,
) -> float:
    """Parameter t in [lo, hi] where the margin of `condition` on path(t) vanishes."""

    def margin(t: float) -> float:
        measured, bound = measure(path(t), condition, tol)
        return bound - measured

    m_lo, m_hi = margin(lo), margin(hi)
    if np.sign(m_lo) == np.sign(m_hi):
        raise InvalidParameterError(
            f"Margin does not change sign on [{lo}, {hi}] (margins {m_lo:.6g}, {m_hi:.6g})"
        )
    t = brentq(margin, lo, hi, xtol=xtol)
    logger.debug(f"Boundary of {condition_label(condition)} at t={t:.15g}")
    return float(t)


def isotropic_threshold(
    box: Behaviour,
    condition: SliceCondition = ConditionId.THM1,
    lo: float = 0.0,
    hi: float = 1.0,
    xtol: float = 1e-12,
) -> float:
    """Visibility v where v box + (1 - v) P_n crosses the condition boundary."""
    noise = fully_mixed(box.scenario)
    return find_boundary(
        lambda v: mix([v, 1.0 - v], [box, noise], allow_signed=True), condition, lo, hi, xtol
    )
