"""
Bipartite Bell scenarios, behaviours P(ab|xy) and their matrix arrangements.

Indices are 0-based internally; documentation and file formats count from 1.
Rows of the input-major matrix are ordered lexicographically by (x, a), columns
by (y, b).
"""

from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from .errors import ShapeMismatchError, StructuralError, UnsupportedScenarioError
from .utils import MatrixKind, ViolationKind, get_logger

logger = get_logger(__name__)

DEFAULT_VALIDATION_TOL = 1e-9

# two-outcome sign convention: outcome 1 -> +1, outcome 2 -> -1
OUTCOME_SIGNS = np.array([1.0, -1.0])


@dataclass(frozen=True)
class Scenario:
    """
    The (m_A m_B d_A d_B) Bell scenario.

    m_a, m_b: int
        Number of inputs of Alice and Bob
    d_a, d_b: int
        Number of outputs of Alice and Bob
    """

    m_a: int
    m_b: int
    d_a: int
    d_b: int

    def __post_init__(self):
        for name in ("m_a", "m_b", "d_a", "d_b"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
                raise StructuralError(
                    f"Scenario sizes must be positive integers, got {name}={value!r}", field=name
                )
            object.__setattr__(self, name, int(value))

    @property
    def n_a(self) -> int:
        return self.m_a * self.d_a

    @property
    def n_b(self) -> int:
        return self.m_b * self.d_b

    @property
    def shape(self) -> Tuple[int, int, int, int]:
        return (self.m_a, self.m_b, self.d_a, self.d_b)

    @property
    def matrix_shape(self) -> Tuple[int, int]:
        return (self.n_a, self.n_b)

    @property
    def is_two_outcome(self) -> bool:
        return self.d_a == 2 and self.d_b == 2

    @property
    def is_symmetric(self) -> bool:
        return self.m_a == self.m_b and self.d_a == self.d_b

    def swapped(self) -> "Scenario":
        return Scenario(self.m_b, self.m_a, self.d_b, self.d_a)

    def __str__(self):
        return f"({self.m_a}{self.m_b}{self.d_a}{self.d_b})"


@dataclass(frozen=True, eq=False)
class Behaviour:
    """
    Conditional distribution p[x, y, a, b] = P(ab|xy).

    The array is copied and frozen on construction. Behaviours that violate
    the probability or no-signaling constraints can still be built, so that
    affine scans may leave the polytope; use `validate` to inspect them.
    """

    scenario: Scenario
    p: np.ndarray

    def __post_init__(self):
        p = np.array(self.p, dtype=float)
        if p.shape != self.scenario.shape:
            raise ShapeMismatchError(
                f"Behaviour array of shape {p.shape} does not match scenario {self.scenario} "
                f"(expected {self.scenario.shape})",
                field="p",
            )
        if not np.all(np.isfinite(p)):
            raise StructuralError("Probability table has non-finite entries", field="p")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    def allclose(self, other: "Behaviour", atol: float = 1e-12) -> bool:
        return self.scenario == other.scenario and bool(np.allclose(self.p, other.p, atol=atol))


@dataclass(frozen=True)
class Violation:
    """
    kind: ViolationKind
    index: tuple
        0-based indices locating the violated constraint:
        (x, y, a, b) for negativity, (x, y) for normalization,
        (a, x) for Alice signaling and (b, y) for Bob signaling
    magnitude: float
        Size of the violation (always positive)
    """

    kind: ViolationKind
    index: Tuple[int, ...]
    magnitude: float

    def to_dict(self) -> dict:
        return {
            "constraint": self.kind.value,
            "index": [i + 1 for i in self.index],
            "magnitude": self.magnitude,
        }


@dataclass(frozen=True)
class ValidationReport:
    tol: float
    violations: List[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def of_kind(self, kind: ViolationKind) -> List[Violation]:
        return [v for v in self.violations if v.kind == kind]


@dataclass(frozen=True)
class BehaviourMatrix:
    kind: MatrixKind
    data: np.ndarray
    scenario: Scenario

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.shape != self.scenario.matrix_shape:
            raise ShapeMismatchError(
                f"{self.kind.value} matrix of shape {data.shape} does not match scenario "
                f"{self.scenario} (expected {self.scenario.matrix_shape})"
            )
        object.__setattr__(self, "data", data)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.data.shape


@dataclass(frozen=True)
class MarginalVectors:
    """
    p_a: np.ndarray
        P(a|x) in lexicographic (x, a) order, length m_a * d_a
    p_b: np.ndarray
        P(b|y) in lexicographic (y, b) order, length m_b * d_b
    """

    p_a: np.ndarray
    p_b: np.ndarray


@dataclass(frozen=True)
class CorrelatorSummary:
    """
    Correlator form of a two-outcome behaviour, outcomes relabeled
    1 -> +1 and 2 -> -1.

    c: np.ndarray
        C[x, y] = <A_x B_y>
    a_mean, b_mean: np.ndarray
        <A_x> and <B_y>
    c_centered: np.ndarray
        C'[x, y] = <A_x B_y> - <A_x><B_y>
    """

    c: np.ndarray
    a_mean: np.ndarray
    b_mean: np.ndarray
    c_centered: np.ndarray


def validate(b: Behaviour, tol: float = DEFAULT_VALIDATION_TOL) -> ValidationReport:
    """
    Check nonnegativity, normalization and no-signaling within `tol`.
    Array dimensions are enforced when the Behaviour is built.
    """
    p = b.p
    violations = []

    for index in zip(*np.nonzero(p < -tol)):
        index = tuple(int(i) for i in index)
        violations.append(Violation(ViolationKind.NEGATIVITY, index, float(-p[index])))

    norm_error = p.sum(axis=(2, 3)) - 1.0
    for x, y in zip(*np.nonzero(np.abs(norm_error) > tol)):
        violations.append(
            Violation(ViolationKind.NORMALIZATION, (int(x), int(y)), float(abs(norm_error[x, y])))
        )

    # Alice: sum_b P(ab|xy) must not depend on y
    alice = p.sum(axis=3)  # [x, y, a]
    spread_a = alice.max(axis=1) - alice.min(axis=1)  # [x, a]
    for x, a in zip(*np.nonzero(spread_a > tol)):
        violations.append(
            Violation(ViolationKind.SIGNALING_A, (int(a), int(x)), float(spread_a[x, a]))
        )

    bob = p.sum(axis=2)  # [x, y, b]
    spread_b = bob.max(axis=0) - bob.min(axis=0)  # [y, b]
    for y, bb in zip(*np.nonzero(spread_b > tol)):
        violations.append(
            Violation(ViolationKind.SIGNALING_B, (int(bb), int(y)), float(spread_b[y, bb]))
        )

    if violations:
        logger.debug(f"Behaviour in {b.scenario} violates {len(violations)} constraint(s)")
    return ValidationReport(tol=tol, violations=violations)


def matrix_p(b: Behaviour) -> BehaviourMatrix:
    """Input-major arrangement: entry ((x, a), (y, b)) = P(ab|xy)."""
    s = b.scenario
    data = b.p.transpose(0, 2, 1, 3).reshape(s.n_a, s.n_b)
    return BehaviourMatrix(MatrixKind.INPUT_MAJOR_P, data, s)


def matrix_p_prime(b: Behaviour) -> BehaviourMatrix:
    """Output-major arrangement: entry ((a, x), (b, y)) = P(ab|xy)."""
    s = b.scenario
    data = b.p.transpose(2, 0, 3, 1).reshape(s.d_a * s.m_a, s.d_b * s.m_b)
    return BehaviourMatrix(MatrixKind.OUTPUT_MAJOR_PPRIME, data, s)


def marginals(b: Behaviour) -> MarginalVectors:
    """
    Single-party marginals. For signaling behaviours the marginal of one
    party is averaged over the inputs of the other.
    """
    p_a = b.p.sum(axis=3).mean(axis=1)  # [x, a]
    p_b = b.p.sum(axis=2).mean(axis=0)  # [y, b]
    return MarginalVectors(p_a=p_a.ravel(), p_b=p_b.ravel())


def matrix_m(b: Behaviour) -> BehaviourMatrix:
    """Centered arrangement M(ab|xy) = P(ab|xy) - P(a|x) P(b|y), input-major."""
    s = b.scenario
    marg = marginals(b)
    p_a = marg.p_a.reshape(s.m_a, s.d_a)
    p_b = marg.p_b.reshape(s.m_b, s.d_b)
    centered = b.p - np.einsum("xa,yb->xyab", p_a, p_b)
    data = centered.transpose(0, 2, 1, 3).reshape(s.n_a, s.n_b)
    return BehaviourMatrix(MatrixKind.CENTERED_M, data, s)


def behaviour_matrix(b: Behaviour, kind: MatrixKind) -> BehaviourMatrix:
    builders = {
        MatrixKind.INPUT_MAJOR_P: matrix_p,
        MatrixKind.OUTPUT_MAJOR_PPRIME: matrix_p_prime,
        MatrixKind.CENTERED_M: matrix_m,
    }
    return builders[kind](b)


def _require_two_outcome(scenario: Scenario):
    if not scenario.is_two_outcome:
        raise UnsupportedScenarioError(
            f"Correlators need two outcomes per party, scenario is {scenario}"
        )


def correlators(b: Behaviour) -> CorrelatorSummary:
    _require_two_outcome(b.scenario)
    c = np.einsum("xyab,a,b->xy", b.p, OUTCOME_SIGNS, OUTCOME_SIGNS)
    marg = marginals(b)
    a_mean = marg.p_a.reshape(b.scenario.m_a, 2) @ OUTCOME_SIGNS
    b_mean = marg.p_b.reshape(b.scenario.m_b, 2) @ OUTCOME_SIGNS
    return CorrelatorSummary(
        c=c, a_mean=a_mean, b_mean=b_mean, c_centered=c - np.outer(a_mean, b_mean)
    )


def reconstruct_from_correlators(summary: CorrelatorSummary, scenario: Scenario) -> Behaviour:
    """P(ab|xy) = (1 + a<A_x> + b<B_y> + ab<A_xB_y>) / 4."""
    _require_two_outcome(scenario)
    s = OUTCOME_SIGNS
    p = (
        1.0
        + np.einsum("x,a->xa", summary.a_mean, s)[:, None, :, None]
        + np.einsum("y,b->yb", summary.b_mean, s)[None, :, None, :]
        + np.einsum("xy,a,b->xyab", summary.c, s, s)
    ) / 4.0
    return Behaviour(scenario, p)


def output_block_combinations(b: Behaviour) -> Tuple[np.ndarray, np.ndarray]:
    """
    For a two-outcome behaviour, the output-major blocks P'_ab (m_a x m_b)
    combined as (sum_ab P'_ab, P'_11 - P'_12 - P'_21 + P'_22). For
    no-signaling behaviours these are the all-ones matrix and C.
    """
    _require_two_outcome(b.scenario)
    blocks = b.p.transpose(2, 3, 0, 1)  # [a, b, x, y]
    total = blocks.sum(axis=(0, 1))
    signed = np.einsum("abxy,a,b->xy", blocks, OUTCOME_SIGNS, OUTCOME_SIGNS)
    return total, signed
