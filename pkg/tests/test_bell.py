import numpy as np
import pytest

from src.behaviour import Scenario, matrix_p, matrix_p_prime
from src.bell import (
    AffineForm,
    BellExpression,
    affine_apply,
    catalog,
    evaluate,
    extremal_bell_from,
    gap_witness,
    local_bound,
    local_optimum,
    tsirelson_bound_search,
    tsirelson_bound_via,
)
from src.conditions import bound_ineq2
from src.errors import EnumerationLimitError, InvalidParameterError, ShapeMismatchError
from src.generators import (
    enumerate_ldbs,
    ldb,
    max_ent_behaviour,
    pr_box_2d,
    random_ns_mixture,
    swap_parties,
)
from src.numlin import inner, spectral_norm, trace_norm

SQRT2 = np.sqrt(2)
SHIFTED_CHSH_FORM = AffineForm(np.diag([0.5, 0.5]), 1 / (2 * SQRT2))


@pytest.fixture
def expressions():
    return catalog()


def test_catalog_norms(expressions):
    assert spectral_norm(expressions["g_chsh"].g) == pytest.approx(2 * SQRT2, abs=1e-10)
    assert spectral_norm(expressions["g_chsh_shifted"].g) == pytest.approx(1.0, abs=1e-10)
    assert spectral_norm(expressions["g_phi3"].g) == pytest.approx(1.0, abs=1e-10)


def test_evaluate_chsh(expressions, pr_box, tsirelson_box, mixed_2222):
    G = expressions["g_chsh"]
    assert evaluate(G, pr_box) == pytest.approx(4.0)
    assert evaluate(G, tsirelson_box) == pytest.approx(2 * SQRT2, abs=1e-9)
    assert evaluate(G, mixed_2222) == pytest.approx(G.g.sum() / 4)


def test_evaluate_checks_scenario(expressions):
    with pytest.raises(ShapeMismatchError):
        evaluate(expressions["g_chsh"], pr_box_2d(3))


def test_expression_shape_is_checked():
    with pytest.raises(ShapeMismatchError):
        BellExpression(Scenario(2, 2, 2, 2), np.zeros((4, 5)))


def test_local_bound_chsh(expressions):
    assert local_bound(expressions["g_chsh"]) == 2.0


def test_g_phi3(expressions):
    G = expressions["g_phi3"]
    assert evaluate(G, max_ent_behaviour(3)) == pytest.approx(2.0, abs=1e-9)
    assert local_bound(G) == pytest.approx((3 * np.sqrt(3) + 5) / 6, abs=1e-9)
    assert bound_ineq2(G) == pytest.approx(2.0, abs=1e-9)


@pytest.mark.parametrize("sizes", [(3, 3, 2, 2), (2, 2, 3, 3), (2, 3, 3, 2)])
def test_local_optimum_matches_brute_force(sizes, rng):
    s = Scenario(*sizes)
    G = BellExpression(s, rng.normal(size=s.matrix_shape))
    value, assignment = local_optimum(G)
    brute = max(evaluate(G, b) for b in enumerate_ldbs(s))
    assert value == pytest.approx(brute, abs=1e-12)
    assert evaluate(G, ldb(s, assignment)) == pytest.approx(value, abs=1e-12)


def test_local_bound_of_constant_expression():
    s = Scenario(2, 3, 2, 2)
    G = BellExpression(s, np.full(s.matrix_shape, 0.5))
    assert local_bound(G) == pytest.approx(evaluate(G, enumerate_ldbs(s)[7]))


def test_local_bound_enumeration_guard(expressions):
    with pytest.raises(EnumerationLimitError):
        local_bound(expressions["g_chsh"], max_vertices=15)


def test_affine_identity(rng):
    for _ in range(100):
        m = int(rng.integers(2, 4))
        b = random_ns_mixture(m, rng)
        G = BellExpression(b.scenario, rng.normal(size=b.scenario.matrix_shape))
        form = AffineForm(rng.normal(size=(m, m)), float(rng.uniform(0.1, 3.0)))
        shifted = affine_apply(G, form)
        expected = form.block_offsets.sum() + form.scale * evaluate(G, b)
        assert evaluate(shifted, b) == pytest.approx(expected, abs=1e-10)


def test_shifted_chsh_matches_catalog(expressions):
    shifted = affine_apply(expressions["g_chsh"], SHIFTED_CHSH_FORM)
    np.testing.assert_allclose(shifted.g, expressions["g_chsh_shifted"].g)


def test_tsirelson_bound_via(expressions):
    G = expressions["g_chsh"]
    assert tsirelson_bound_via(SHIFTED_CHSH_FORM, G) == pytest.approx(2 * SQRT2, abs=1e-9)
    identity = AffineForm.identity(G.scenario)
    assert tsirelson_bound_via(identity, G) == pytest.approx(4 * SQRT2, abs=1e-9)
    doubled = AffineForm(np.zeros((2, 2)), 2.0)
    assert tsirelson_bound_via(doubled, G) == pytest.approx(4 * SQRT2, abs=1e-9)


@pytest.mark.parametrize("scale", [0.0, -1.0])
def test_affine_form_needs_positive_scale(scale):
    with pytest.raises(InvalidParameterError):
        AffineForm(np.zeros((2, 2)), scale)


def test_affine_apply_checks_offsets(expressions):
    with pytest.raises(ShapeMismatchError):
        affine_apply(expressions["g_chsh"], AffineForm(np.zeros((3, 2)), 1.0))


def test_tsirelson_search_chsh(expressions):
    result = tsirelson_bound_search(expressions["g_chsh"])
    assert result.bound <= 2 * SQRT2 + 1e-6
    assert result.bound >= 2 * SQRT2 - 1e-9
    assert result.identity_bound == pytest.approx(4 * SQRT2, abs=1e-9)
    assert tsirelson_bound_via(result.form, expressions["g_chsh"]) == pytest.approx(
        result.bound, abs=1e-12
    )


def test_tsirelson_search_zero_expression():
    G = BellExpression(Scenario(2, 2, 2, 2), np.zeros((4, 4)))
    assert tsirelson_bound_search(G).bound == 0.0


def test_tsirelson_search_phi3(expressions):
    G = expressions["g_phi3"]
    result = tsirelson_bound_search(G)
    assert result.identity_bound == pytest.approx(2.0, abs=1e-9)
    assert result.bound <= 2.0 + 1e-9
    assert result.bound >= local_bound(G) - 1e-9


def test_tsirelson_search_by_coordinate_descent(rng):
    s = Scenario(3, 3, 2, 2)
    G = BellExpression(s, rng.normal(size=s.matrix_shape))
    result = tsirelson_bound_search(G, max_grid_cells=10, scale_points=9)
    assert result.bound <= result.identity_bound + 1e-12
    assert local_bound(G) <= result.bound + 1e-9


def test_tsirelson_search_rejects_empty_grid(expressions):
    with pytest.raises(InvalidParameterError):
        tsirelson_bound_search(expressions["g_chsh"], offsets=[])


def test_extremal_bell_on_random_matrices(rng):
    for _ in range(100):
        shape = tuple(rng.integers(1, 7, size=2))
        m = rng.normal(size=shape)
        G = extremal_bell_from(m)
        assert inner(m, G.g) == pytest.approx(trace_norm(m), abs=1e-9)
        assert spectral_norm(G.g) <= 1 + 1e-10


@pytest.mark.parametrize("d", range(2, 11))
def test_extremal_bell_on_max_ent(d):
    b = max_ent_behaviour(d)
    G = extremal_bell_from(matrix_p(b))
    assert evaluate(G, b) == pytest.approx(2.0, abs=1e-9)
    assert spectral_norm(G.g) <= 1 + 1e-10
    assert bound_ineq2(G) == pytest.approx(2.0, abs=1e-9)


def test_extremal_bell_of_identity():
    G = extremal_bell_from(np.eye(3))
    np.testing.assert_allclose(G.g, np.eye(3), atol=1e-12)


def test_extremal_bell_of_pr_box(pr_box):
    G = extremal_bell_from(matrix_p(pr_box))
    assert evaluate(G, pr_box) == pytest.approx(1 + SQRT2, abs=1e-9)
    assert bound_ineq2(G) == pytest.approx(2.0, abs=1e-9)


def test_extremal_bell_from_output_major_layout():
    b = pr_box_2d(3)
    G = extremal_bell_from(matrix_p_prime(b))
    assert G.scenario == b.scenario
    assert evaluate(G, b) == pytest.approx(trace_norm(matrix_p(b).data), abs=1e-9)


def test_extremal_bell_of_zero_matrix():
    with pytest.raises(InvalidParameterError):
        extremal_bell_from(np.zeros((2, 2)))


def test_gap_witness(pr_box, tsirelson_box):
    G, gap = gap_witness(pr_box)
    assert gap == pytest.approx(SQRT2 - 1, abs=1e-9)
    _, gap = gap_witness(tsirelson_box)
    assert gap == pytest.approx(0.0, abs=1e-9)


def test_bound_ineq2_under_party_swap(rng):
    b = random_ns_mixture(3, rng)
    G = BellExpression(b.scenario, rng.normal(size=b.scenario.matrix_shape))
    swapped = BellExpression(b.scenario.swapped(), G.g.T)
    assert bound_ineq2(swapped) == pytest.approx(bound_ineq2(G), abs=1e-12)
    assert evaluate(swapped, swap_parties(b)) == pytest.approx(evaluate(G, b), abs=1e-12)
