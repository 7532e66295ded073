"""
Behaviour families: local deterministic boxes, PR boxes, maximally entangled
behaviours, mixtures and relabelings.
"""

import itertools
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Tuple

import numpy as np

from .behaviour import Behaviour, Scenario
from .errors import InvalidParameterError, ShapeMismatchError, UnsupportedScenarioError
from .utils import get_logger

logger = get_logger(__name__)

WEIGHT_SUM_TOL = 1e-12

# input-dependent phases of the maximally entangled behaviour
MAX_ENT_ALPHA = np.array([0.0, 0.5])
MAX_ENT_BETA = np.array([0.25, -0.25])


@dataclass(frozen=True)
class LdbAssignment:
    """
    Deterministic strategy of both parties, 0-based.

    f: Tuple[int, ...]
        Alice's output f[x] for every input x
    g: Tuple[int, ...]
        Bob's output g[y] for every input y
    """

    f: Tuple[int, ...]
    g: Tuple[int, ...]

    def check(self, s: Scenario):
        for name, outputs, m, d in (("f", self.f, s.m_a, s.d_a), ("g", self.g, s.m_b, s.d_b)):
            if len(outputs) != m:
                raise InvalidParameterError(
                    f"Assignment {name} has {len(outputs)} entries, scenario {s} needs {m}"
                )
            if any(not 0 <= o < d for o in outputs):
                raise InvalidParameterError(
                    f"Assignment {name}={tuple(outputs)} outside the output range 0..{d - 1}"
                )


@dataclass(frozen=True)
class Relabeling:
    """
    perm_x, perm_y: Tuple[int, ...]
        Input permutations, new input = perm[old input]
    perm_a: Tuple[Tuple[int, ...], ...]
        Alice output permutation for each (old) input x
    perm_b: Tuple[Tuple[int, ...], ...]
        Bob output permutation for each (old) input y
    swap_parties: bool
        Exchange Alice and Bob after relabeling; symmetric scenarios only
    """

    perm_x: Tuple[int, ...]
    perm_y: Tuple[int, ...]
    perm_a: Tuple[Tuple[int, ...], ...]
    perm_b: Tuple[Tuple[int, ...], ...]
    swap_parties: bool = False

    @classmethod
    def identity(cls, s: Scenario) -> "Relabeling":
        return cls(
            perm_x=tuple(range(s.m_a)),
            perm_y=tuple(range(s.m_b)),
            perm_a=tuple(tuple(range(s.d_a)) for _ in range(s.m_a)),
            perm_b=tuple(tuple(range(s.d_b)) for _ in range(s.m_b)),
        )

    @classmethod
    def random(
        cls, s: Scenario, rng: np.random.Generator, swap_parties: bool = False
    ) -> "Relabeling":
        return cls(
            perm_x=tuple(int(i) for i in rng.permutation(s.m_a)),
            perm_y=tuple(int(i) for i in rng.permutation(s.m_b)),
            perm_a=tuple(tuple(int(i) for i in rng.permutation(s.d_a)) for _ in range(s.m_a)),
            perm_b=tuple(tuple(int(i) for i in rng.permutation(s.d_b)) for _ in range(s.m_b)),
            swap_parties=swap_parties,
        )

    def check(self, s: Scenario):
        _check_permutation(self.perm_x, s.m_a, "perm_x")
        _check_permutation(self.perm_y, s.m_b, "perm_y")
        if len(self.perm_a) != s.m_a or len(self.perm_b) != s.m_b:
            raise InvalidParameterError(
                f"Output permutations must be given per input ({s.m_a} for Alice, {s.m_b} for Bob)"
            )
        for x, perm in enumerate(self.perm_a):
            _check_permutation(perm, s.d_a, f"perm_a[{x}]")
        for y, perm in enumerate(self.perm_b):
            _check_permutation(perm, s.d_b, f"perm_b[{y}]")
        if self.swap_parties and not s.is_symmetric:
            raise UnsupportedScenarioError(f"Cannot swap parties in asymmetric scenario {s}")


def _check_permutation(perm: Sequence[int], n: int, name: str):
    if sorted(perm) != list(range(n)):
        raise InvalidParameterError(f"{name}={tuple(perm)} is not a permutation of 0..{n - 1}")


def ldb(s: Scenario, asg: LdbAssignment) -> Behaviour:
    """D(ab|xy) = delta(a, f(x)) delta(b, g(y))."""
    asg.check(s)
    p_a = np.eye(s.d_a)[list(asg.f)]  # [x, a]
    p_b = np.eye(s.d_b)[list(asg.g)]  # [y, b]
    return Behaviour(s, np.einsum("xa,yb->xyab", p_a, p_b))


class LdbFamily:
    """
    The d_a^m_a * d_b^m_b local deterministic boxes of a scenario, in
    lexicographic order of (f, g). Iteration restarts on every `iter()` and
    `assignment(index)` gives random access, so index ranges can be split
    between workers.
    """

    def __init__(self, s: Scenario):
        self.scenario = s
        self.n_alice = s.d_a**s.m_a
        self.n_bob = s.d_b**s.m_b

    def __len__(self) -> int:
        return self.n_alice * self.n_bob

    def assignment(self, index: int) -> LdbAssignment:
        if not 0 <= index < len(self):
            raise IndexError(f"LDB index {index} out of range for {len(self)} boxes")
        i_a, i_b = divmod(index, self.n_bob)
        return LdbAssignment(
            f=_digits(i_a, self.scenario.d_a, self.scenario.m_a),
            g=_digits(i_b, self.scenario.d_b, self.scenario.m_b),
        )

    def __getitem__(self, index: int) -> Behaviour:
        return ldb(self.scenario, self.assignment(index))

    def assignments(self) -> Iterator[LdbAssignment]:
        s = self.scenario
        for f in itertools.product(range(s.d_a), repeat=s.m_a):
            for g in itertools.product(range(s.d_b), repeat=s.m_b):
                yield LdbAssignment(f=f, g=g)

    def __iter__(self) -> Iterator[Behaviour]:
        return (ldb(self.scenario, asg) for asg in self.assignments())


def _digits(index: int, base: int, length: int) -> Tuple[int, ...]:
    out = []
    for _ in range(length):
        index, r = divmod(index, base)
        out.append(r)
    return tuple(reversed(out))


def enumerate_ldbs(s: Scenario) -> LdbFamily:
    return LdbFamily(s)


def cycle_matrix(d: int) -> np.ndarray:
    """A_d: entry (a, b) = 1 iff a = b + 1 mod d (0-based)."""
    return np.roll(np.eye(d), 1, axis=0)


def pr_box_2d(d: int, s: Optional[Scenario] = None) -> Behaviour:
    """
    P_PR(2,d) = (1/d) [[1_d, 1_d], [1_d, A_d]], zero-padded when the scenario
    has more than d outputs. Defaults to the (22dd) scenario.
    """
    if s is None:
        s = Scenario(2, 2, max(d, 1), max(d, 1))
    if s.m_a != 2 or s.m_b != 2:
        raise UnsupportedScenarioError(f"PR(2,d) boxes need two inputs per party, got {s}")
    if not 2 <= d <= min(s.d_a, s.d_b):
        raise InvalidParameterError(f"PR box size d={d} must satisfy 2 <= d <= {min(s.d_a, s.d_b)}")
    p = np.zeros((2, 2, d, d))
    p[0, 0] = p[0, 1] = p[1, 0] = np.eye(d) / d
    p[1, 1] = cycle_matrix(d) / d
    return pad_outputs(Behaviour(Scenario(2, 2, d, d), p), s.d_a, s.d_b)


def pr_box_mm22_lift(m: int) -> Behaviour:
    """
    Lift of P_PR(2,2) to (mm22): inputs 1 and 2 of both parties realize the PR
    box and every further input answers outcome 1 deterministically.
    """
    if m < 2:
        raise InvalidParameterError(f"Lifted PR box needs m >= 2, got {m}")
    s = Scenario(m, m, 2, 2)
    local = np.zeros((m, 2))
    local[:2] = 0.5
    local[2:, 0] = 1.0
    p = np.einsum("xa,yb->xyab", local, local)
    p[:2, :2] = pr_box_2d(2).p
    return Behaviour(s, p)


def max_ent_behaviour(d: int) -> Behaviour:
    """
    (22dd) behaviour of the maximally entangled two-qudit state under the
    optimal CGLMP measurements:
    P(ab|xy) = 1 / (2 d^3 sin^2(pi (a - b + alpha_x + beta_y) / d)).
    """
    if d < 2:
        raise InvalidParameterError(f"Maximally entangled behaviour needs d >= 2, got {d}")
    x, y, a, b = np.indices((2, 2, d, d))
    phase = np.pi * (a - b + MAX_ENT_ALPHA[x] + MAX_ENT_BETA[y]) / d
    return Behaviour(Scenario(2, 2, d, d), 1.0 / (2 * d**3 * np.sin(phase) ** 2))


def fully_mixed(s: Scenario) -> Behaviour:
    return Behaviour(s, np.full(s.shape, 1.0 / (s.d_a * s.d_b)))


def mix(
    weights: Sequence[float], behaviours: Sequence[Behaviour], allow_signed: bool = False
) -> Behaviour:
    """
    Entrywise combination sum_i w_i P_i. Weights must add up to 1; negative
    weights (affine combinations leaving the polytope) need `allow_signed`.
    """
    weights = np.asarray(weights, dtype=float)
    if len(behaviours) == 0 or weights.shape != (len(behaviours),):
        raise InvalidParameterError(
            f"Need one weight per behaviour, got {weights.size} weights for {len(behaviours)}"
        )
    if not np.all(np.isfinite(weights)):
        raise InvalidParameterError(f"Weights must be finite, got {weights.tolist()}")
    if abs(weights.sum() - 1.0) > WEIGHT_SUM_TOL:
        raise InvalidParameterError(f"Weights add up to {weights.sum():.17g}, not 1")
    if not allow_signed and np.any(weights < 0):
        raise InvalidParameterError(f"Negative weights {weights.tolist()} need allow_signed")
    s = behaviours[0].scenario
    for other in behaviours[1:]:
        if other.scenario != s:
            raise ShapeMismatchError(f"Cannot mix behaviours of {s} and {other.scenario}")
    return Behaviour(s, np.tensordot(weights, np.stack([b.p for b in behaviours]), axes=1))


def isotropic(box: Behaviour, v: float, allow_signed: bool = False) -> Behaviour:
    """v * box + (1 - v) * fully mixed."""
    return mix([v, 1.0 - v], [box, fully_mixed(box.scenario)], allow_signed=allow_signed)


def swap_parties(b: Behaviour) -> Behaviour:
    """Exchange Alice and Bob; the input-major matrix is transposed."""
    return Behaviour(b.scenario.swapped(), b.p.transpose(1, 0, 3, 2))


def relabel(b: Behaviour, r: Relabeling) -> Behaviour:
    s = b.scenario
    r.check(s)
    p = np.empty_like(b.p)
    for x, y in itertools.product(range(s.m_a), range(s.m_b)):
        block = np.empty((s.d_a, s.d_b))
        block[np.ix_(r.perm_a[x], r.perm_b[y])] = b.p[x, y]
        p[r.perm_x[x], r.perm_y[y]] = block
    out = Behaviour(s, p)
    return swap_parties(out) if r.swap_parties else out


def pad_outputs(b: Behaviour, new_d_a: int, new_d_b: int) -> Behaviour:
    """Append never-occurring outputs after the existing ones."""
    s = b.scenario
    if new_d_a < s.d_a or new_d_b < s.d_b:
        raise InvalidParameterError(
            f"Cannot pad {s} down to d_A={new_d_a}, d_B={new_d_b}"
        )
    padded = Scenario(s.m_a, s.m_b, new_d_a, new_d_b)
    p = np.zeros(padded.shape)
    p[:, :, : s.d_a, : s.d_b] = b.p
    return Behaviour(padded, p)


def enumerate_pr_boxes_2222() -> Iterator[Behaviour]:
    """
    The eight PR boxes of (2222): P(ab|xy) = 1/2 iff
    a + b = xy + alpha x + beta y + gamma (mod 2).
    """
    s = Scenario(2, 2, 2, 2)
    x, y, a, b = np.indices(s.shape)
    for alpha, beta, gamma in itertools.product(range(2), repeat=3):
        hit = (a + b) % 2 == (x * y + alpha * x + beta * y + gamma) % 2
        yield Behaviour(s, np.where(hit, 0.5, 0.0))


def random_ns_mixture(m: int, rng: np.random.Generator, n_terms: int = 4) -> Behaviour:
    """
    Random convex mixture in (mm22) of local deterministic boxes and randomly
    relabeled lifted PR boxes. No-signaling by construction.
    """
    if n_terms < 1:
        raise InvalidParameterError(f"n_terms must be positive, got {n_terms}")
    s = Scenario(m, m, 2, 2)
    family = enumerate_ldbs(s)
    lifted = pr_box_mm22_lift(m)
    terms = []
    for _ in range(n_terms):
        if rng.random() < 0.5:
            terms.append(family[int(rng.integers(len(family)))])
        else:
            terms.append(relabel(lifted, Relabeling.random(s, rng, bool(rng.integers(2)))))
    weights = rng.dirichlet(np.ones(n_terms))
    # dirichlet draws add up to 1 only up to rounding
    weights[-1] = 1.0 - weights[:-1].sum()
    return mix(np.clip(weights, 0.0, None), terms)
