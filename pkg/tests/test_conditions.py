import numpy as np
import pytest

from src.behaviour import Scenario, matrix_m
from src.bell import BellExpression, catalog, extremal_bell_from
from src.conditions import (
    bound_corr_epping,
    bound_ineq15,
    bound_ineq2,
    bound_ineq4,
    check_corr_epping,
    check_corr_norm,
    check_ineq2,
    check_thm1,
    check_thm2,
    check_thm8,
    dual_certificate_correlator,
    dual_certificate_ineq2,
    dual_certificate_ineq4,
    prop7_witness,
    quantum_gap,
    run_checks,
)
from src.errors import ShapeMismatchError, UnsupportedScenarioError
from src.generators import (
    LdbAssignment,
    enumerate_ldbs,
    fully_mixed,
    isotropic,
    ldb,
    max_ent_behaviour,
    mix,
    pr_box_2d,
    pr_box_mm22_lift,
    random_ns_mixture,
)
from src.utils import ConditionId

SQRT2 = np.sqrt(2)
CHSH_CORRELATOR = np.array([[1.0, 1.0], [1.0, -1.0]])


def test_thm1_is_tight_on_ldbs():
    for b in enumerate_ldbs(Scenario(3, 2, 2, 2)):
        report = check_thm1(b)
        assert report.margin == pytest.approx(0.0, abs=1e-10)
        assert report.satisfied


def test_thm1_on_pr_box(pr_box):
    report = check_thm1(pr_box)
    assert report.measured == pytest.approx(1 + SQRT2, abs=1e-9)
    assert report.bound == pytest.approx(2.0)
    assert not report.satisfied
    assert report.to_dict()["condition"] == "thm1"


def test_thm1_on_max_ent():
    report = check_thm1(max_ent_behaviour(5))
    assert report.measured == pytest.approx(2.0, abs=1e-9)
    assert report.satisfied


def test_thm2_on_fully_mixed(mixed_2222):
    report = check_thm2(mixed_2222)
    assert report.measured == pytest.approx(0.0, abs=1e-12)
    assert report.bound == pytest.approx(1.0)
    assert report.satisfied


def test_thm2_on_pr_box(pr_box):
    report = check_thm2(pr_box)
    assert report.measured == pytest.approx(SQRT2, abs=1e-9)
    assert report.bound == pytest.approx(1.0)
    assert not report.satisfied


def test_thm2_on_ldb(chsh_scenario):
    report = check_thm2(ldb(chsh_scenario, LdbAssignment(f=(0, 1), g=(1, 1))))
    assert report.measured == pytest.approx(0.0, abs=1e-12)
    assert report.bound == pytest.approx(0.0, abs=1e-12)
    assert report.satisfied


def test_bound_ineq2_catalog():
    expressions = catalog()
    assert bound_ineq2(expressions["g_chsh"]) == pytest.approx(4 * SQRT2, abs=1e-9)
    assert bound_ineq2(expressions["g_chsh_shifted"]) == pytest.approx(2.0)
    zero = BellExpression(Scenario(2, 2, 2, 2), np.zeros((4, 4)))
    assert bound_ineq2(zero) == 0.0


def test_bound_ineq2_needs_scenario():
    with pytest.raises(ShapeMismatchError):
        bound_ineq2(np.ones((4, 4)))


def test_check_ineq2_at_tsirelson_box(tsirelson_box):
    report = check_ineq2(tsirelson_box, catalog()["g_chsh"])
    assert report.measured == pytest.approx(2 * SQRT2, abs=1e-9)
    assert report.bound == pytest.approx(4 * SQRT2, abs=1e-9)
    assert report.satisfied


def test_ineq4_with_zero_expression(pr_box):
    report = bound_ineq4(pr_box, np.zeros((4, 4)))
    assert report.measured == 0.0
    assert report.bound == 0.0
    assert report.margin == 0.0


def test_ineq4_on_fully_mixed(mixed_2222, rng):
    report = bound_ineq4(mixed_2222, rng.normal(size=(4, 4)))
    assert report.measured == pytest.approx(0.0, abs=1e-12)
    assert report.satisfied


def test_ineq4_with_extremal_expression_matches_thm2(pr_box):
    G = extremal_bell_from(matrix_m(pr_box))
    report = bound_ineq4(pr_box, G)
    thm2 = check_thm2(pr_box)
    assert report.measured == pytest.approx(thm2.measured, abs=1e-9)
    assert report.bound == pytest.approx(thm2.bound, abs=1e-9)


def test_ineq4_checks_shape(pr_box):
    with pytest.raises(ShapeMismatchError):
        bound_ineq4(pr_box, np.zeros((4, 6)))


def test_correlator_norm(pr_box, tsirelson_box):
    violated = check_corr_norm(pr_box)
    assert violated.measured == pytest.approx(2 * SQRT2, abs=1e-9)
    assert not violated.satisfied
    tight = check_corr_norm(tsirelson_box)
    assert tight.measured == pytest.approx(2.0, abs=1e-9)
    assert tight.satisfied


def test_correlator_expression(tsirelson_box):
    assert bound_corr_epping(CHSH_CORRELATOR) == pytest.approx(2 * SQRT2)
    report = check_corr_epping(tsirelson_box, CHSH_CORRELATOR)
    assert report.measured == pytest.approx(2 * SQRT2, abs=1e-9)
    assert report.satisfied


def test_thm8_and_ineq15_on_ldb(chsh_scenario):
    b = ldb(chsh_scenario, LdbAssignment(f=(1, 0), g=(0, 1)))
    thm8 = check_thm8(b)
    assert thm8.measured == pytest.approx(0.0, abs=1e-12)
    assert thm8.bound == pytest.approx(0.0, abs=1e-12)
    assert thm8.satisfied
    ineq15 = bound_ineq15(b, np.eye(2))
    assert ineq15.margin == pytest.approx(0.0, abs=1e-12)


def test_correlator_conditions_need_two_outcomes():
    b = pr_box_2d(3)
    for check in (check_corr_norm, check_thm8):
        with pytest.raises(UnsupportedScenarioError):
            check(b)


def test_prop7_witness(pr_box, mixed_2222):
    lhs, rhs = prop7_witness(pr_box)
    assert lhs == pytest.approx(1 + SQRT2, abs=1e-9)
    assert rhs == pytest.approx(1 + SQRT2, abs=1e-9)
    lhs, rhs = prop7_witness(mixed_2222)
    assert lhs == pytest.approx(1.0, abs=1e-12)
    assert rhs == pytest.approx(1.0, abs=1e-12)


def test_prop7_on_random_mixtures(rng):
    for n in range(1000):
        b = random_ns_mixture(2 + n % 2, rng)
        lhs, rhs = prop7_witness(b)
        assert lhs >= rhs - 1e-9
        if not check_corr_norm(b).satisfied:
            assert not check_thm1(b).satisfied


@pytest.mark.parametrize("m", [2, 3, 4])
def test_correlator_violation_implies_trace_norm_violation(m):
    b = pr_box_mm22_lift(m)
    lhs, rhs = prop7_witness(b)
    assert lhs >= rhs - 1e-9
    if not check_corr_norm(b).satisfied:
        assert not check_thm1(b).satisfied


def test_certificate_for_shifted_chsh():
    cert = dual_certificate_ineq2(catalog()["g_chsh_shifted"])
    assert cert.min_eig >= -1e-10
    assert cert.objective == pytest.approx(2.0, abs=1e-9)
    assert cert.feasible()


def test_certificate_for_zero_expression():
    cert = dual_certificate_ineq2(BellExpression(Scenario(2, 3, 2, 2), np.zeros((4, 6))))
    assert cert.objective == 0.0
    assert cert.feasible()


def test_certificates_for_random_expressions(rng):
    for _ in range(200):
        s = Scenario(*rng.integers(1, 4, size=4))
        G = BellExpression(s, rng.normal(size=s.matrix_shape))
        family = enumerate_ldbs(s)
        b = mix(
            rng.dirichlet(np.ones(3)),
            [family[int(i)] for i in rng.integers(len(family), size=3)],
        )
        cert = dual_certificate_ineq2(G, b)
        assert cert.min_eig >= -1e-9
        assert cert.objective == pytest.approx(bound_ineq2(G), abs=1e-9)
        centered = dual_certificate_ineq4(b, G)
        assert centered.min_eig >= -1e-9
        assert centered.objective == pytest.approx(bound_ineq4(b, G).bound, abs=1e-9)


def test_correlator_certificates(tsirelson_box, chsh_scenario):
    plain = dual_certificate_correlator(CHSH_CORRELATOR)
    assert plain.feasible()
    assert plain.objective == pytest.approx(2 * SQRT2, abs=1e-9)
    b = ldb(chsh_scenario, LdbAssignment(f=(0, 1), g=(0, 0)))
    centered = dual_certificate_correlator(CHSH_CORRELATOR, b, centered=True)
    assert centered.feasible()
    assert centered.objective == pytest.approx(bound_ineq15(b, CHSH_CORRELATOR).bound, abs=1e-9)
    isotropic_centered = dual_certificate_correlator(CHSH_CORRELATOR, tsirelson_box, centered=True)
    assert isotropic_centered.objective == pytest.approx(2 * SQRT2, abs=1e-9)


def test_quantum_gap(pr_box):
    assert quantum_gap(pr_box) == pytest.approx(SQRT2 - 1, abs=1e-9)
    assert quantum_gap(max_ent_behaviour(4)) == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("d", range(2, 11))
def test_max_ent_satisfies_every_condition(d):
    conditions = [ConditionId.THM1, ConditionId.THM2, ConditionId.CORR_NORM, ConditionId.THM8]
    reports = run_checks(max_ent_behaviour(d), conditions)
    assert len(reports) == (4 if d == 2 else 2)
    assert all(r.satisfied for r in reports)


@pytest.mark.parametrize("v", [0.0, 0.3, 1 / SQRT2])
def test_isotropic_quantum_boxes_satisfy_every_condition(pr_box, v):
    conditions = [ConditionId.THM1, ConditionId.THM2, ConditionId.CORR_NORM, ConditionId.THM8]
    reports = run_checks(isotropic(pr_box, v), conditions)
    assert [r.condition_id for r in reports] == conditions
    assert all(r.satisfied for r in reports)


def test_run_checks_skips_expression_conditions_without_input(pr_box):
    reports = run_checks(pr_box, list(ConditionId))
    assert {r.condition_id for r in reports} == {
        ConditionId.THM1,
        ConditionId.THM2,
        ConditionId.CORR_NORM,
        ConditionId.THM8,
    }
    reports = run_checks(
        pr_box,
        list(ConditionId),
        expression=catalog()["g_chsh"],
        correlator_weights=CHSH_CORRELATOR,
    )
    assert len(reports) == len(ConditionId)


def test_fully_mixed_in_larger_scenario_passes():
    b = fully_mixed(Scenario(3, 3, 3, 3))
    assert all(r.satisfied for r in run_checks(b, [ConditionId.THM1, ConditionId.THM2]))
