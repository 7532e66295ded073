import numpy as np
import pytest

from src.bell import catalog
from src.errors import InvalidParameterError, ShapeMismatchError
from src.generators import enumerate_ldbs, fully_mixed, max_ent_behaviour, mix
from src.slice_scan import (
    ExpressionThreshold,
    SliceSpec,
    extract_boundary,
    find_boundary,
    isotropic_threshold,
    measure,
    scan_slice,
)
from src.utils import ConditionId

SQRT2 = np.sqrt(2)


@pytest.fixture
def pr_ldb_slice(pr_box, mixed_2222, chsh_scenario):
    return SliceSpec(
        p1=pr_box,
        p2=enumerate_ldbs(chsh_scenario)[0],
        base=mixed_2222,
        resolution=(200, 3),
        p_range=(0.0, 0.05),
    )


def test_isotropic_threshold_of_pr_box(pr_box):
    assert isotropic_threshold(pr_box) == pytest.approx(1 / SQRT2, abs=1e-6)


def test_isotropic_threshold_for_correlator_norm(pr_box):
    v = isotropic_threshold(pr_box, ConditionId.CORR_NORM)
    assert v == pytest.approx(1 / SQRT2, abs=1e-6)


def test_find_boundary_needs_sign_change(mixed_2222):
    with pytest.raises(InvalidParameterError):
        find_boundary(lambda t: mixed_2222, ConditionId.THM1, 0.0, 1.0)


def test_measure_rejects_expression_condition_without_threshold(pr_box):
    with pytest.raises(InvalidParameterError):
        measure(pr_box, ConditionId.INEQ2)


def test_measure_with_expression_threshold(tsirelson_box):
    condition = ExpressionThreshold(catalog()["g_chsh"], 2.0)
    measured, bound = measure(tsirelson_box, condition)
    assert measured == pytest.approx(2 * SQRT2, abs=1e-9)
    assert bound == 2.0


def test_slice_boundary_meets_isotropic_threshold(pr_ldb_slice):
    result = scan_slice(pr_ldb_slice, workers=2, progress=False)
    assert result.measured.shape == (3, 200)
    assert result.boundary
    on_axis = [point for line in result.boundary for point in line if point[1] == 0.0]
    assert on_axis
    assert min(abs(q - 1 / SQRT2) for q, _ in on_axis) <= 1 / 199


def test_slice_rows_follow_grid_order(pr_ldb_slice):
    result = scan_slice(pr_ldb_slice, workers=1, progress=False)
    rows = list(result.rows())
    assert len(rows) == result.evaluations == 600
    q, p, measured, bound, margin, satisfied, valid = rows[1]
    assert (q, p) == (result.q[1], 0.0)
    assert margin == pytest.approx(bound - measured)
    assert satisfied and valid


def test_slice_with_infinite_threshold_has_no_boundary(pr_box, mixed_2222, chsh_scenario):
    spec = SliceSpec(
        p1=pr_box,
        p2=enumerate_ldbs(chsh_scenario)[5],
        base=mixed_2222,
        condition=ExpressionThreshold(catalog()["g_chsh"], np.inf),
        resolution=5,
    )
    result = scan_slice(spec, progress=False)
    assert result.satisfied.all()
    assert result.boundary == []


def test_smallest_grid(pr_box, mixed_2222):
    spec = SliceSpec(pr_box, mixed_2222, mixed_2222, resolution=2)
    result = scan_slice(spec, workers=1, progress=False)
    assert result.evaluations == 4


def test_slice_checks_scenarios_and_resolution(pr_box, mixed_2222):
    with pytest.raises(ShapeMismatchError):
        SliceSpec(pr_box, max_ent_behaviour(3), mixed_2222)
    with pytest.raises(InvalidParameterError):
        SliceSpec(pr_box, mixed_2222, mixed_2222, resolution=1)
    with pytest.raises(InvalidParameterError):
        SliceSpec(pr_box, mixed_2222, mixed_2222, resolution=(10, 1))


def test_scan_is_independent_of_worker_count(pr_box, chsh_scenario):
    spec = SliceSpec(
        p1=pr_box,
        p2=enumerate_ldbs(chsh_scenario)[9],
        base=fully_mixed(chsh_scenario),
        resolution=(7, 5),
    )
    serial = scan_slice(spec, workers=1, progress=False)
    parallel = scan_slice(spec, workers=4, progress=False)
    np.testing.assert_array_equal(serial.measured, parallel.measured)
    assert len(serial.boundary) == len(parallel.boundary)


def test_behaviour_at_is_the_affine_combination(pr_ldb_slice):
    b = pr_ldb_slice.behaviour_at(0.25, 0.5)
    expected = mix([0.25, 0.5, 0.25], [pr_ldb_slice.p1, pr_ldb_slice.p2, pr_ldb_slice.base])
    assert b.allclose(expected)


def test_extract_boundary_of_half_plane():
    q = np.linspace(0.0, 1.0, 5)
    p = np.linspace(0.0, 1.0, 4)
    margin = np.tile(0.5 - q, (p.size, 1))
    lines = extract_boundary(q, p, margin, tol=0.0)
    assert len(lines) == 1
    np.testing.assert_allclose(lines[0][:, 0], 0.5)
    assert sorted(lines[0][:, 1]) == pytest.approx(list(p))
