import math

import numpy as np
import pytest

from spiderspace.cells import build_complex, euler_characteristic, genus_formula
from spiderspace.morse import (
    Kind,
    closed_form_hessian,
    critical_sites,
    enumerate_critical_points,
    finite_difference_hessian,
    morse_counts,
    morse_euler,
    morse_index,
    stretched_angle_margin,
    tangent_gradient_norm,
)
from spiderspace.model import ArmIndex, RegimeError, SpiderParams

from . import oracles


def small(n):
    return SpiderParams(n, 0.5 * SpiderParams(n, 1).R_n)


def large(n):
    return SpiderParams(n, 0.5 * (SpiderParams(n, 1).R_n + 2))


def test_count_examples():
    assert morse_counts(SpiderParams(6, 1.5)) == (16, 64, 16)
    assert morse_counts(SpiderParams(2, 1.5)) == (1, 0, 1)
    assert morse_counts(SpiderParams(6, 0.5))[1] == 4 * 16 + 6 * 64
    assert morse_counts(SpiderParams(2, 0.5)) == (1, 8, 1)
    assert morse_counts(SpiderParams(3, 0.5)) == (4, 30, 4)


def test_euler_examples():
    assert morse_euler(SpiderParams(2, 1.5)) == 2
    assert morse_euler(SpiderParams(2, 0.5)) == -6
    assert morse_euler(SpiderParams(3, 0.5)) == -22


@pytest.mark.parametrize("n", [n for n in range(2, 13) if n % 4])
@pytest.mark.parametrize("regime", [small, large])
def test_counts_match_closed_form_rows_without_axis_anchors(n, regime):
    p = regime(n)
    assert morse_counts(p) == oracles.morse_rows(n, regime is small)


@pytest.mark.parametrize("n", [4, 8, 12])
@pytest.mark.parametrize("regime", [small, large])
def test_axis_anchors_move_the_extrema_to_stretched_vertical_arms(n, regime):
    # an anchor on the y axis puts the bottom of its reach circle inside D for every R:
    # those points become the global extrema and every domain vertex becomes a saddle
    p = regime(n)
    sites = critical_sites(p)
    iii = [s for s in sites if s.kind is Kind.III]
    assert sorted(s.morse_index for s in iii) == [0, 2]
    assert {s.morse_index for s in sites if s.kind is Kind.I} == {1}
    extra = n * 2 ** n if regime is small else 0
    assert morse_counts(p) == (2 ** (n - 1), n * 2 ** (n - 2) + extra, 2 ** (n - 1))


@pytest.mark.parametrize("n", range(2, 13))
@pytest.mark.parametrize("regime", [small, large])
def test_morse_euler_equals_cell_euler(n, regime):
    p = regime(n)
    chi = morse_euler(p)
    assert chi == euler_characteristic(build_complex(p))
    assert chi == 2 - 2 * genus_formula(p)


@pytest.mark.parametrize("n", range(2, 8))
@pytest.mark.parametrize("regime", [small, large])
def test_enumeration_is_complete_and_duplicate_free(n, regime):
    p = regime(n)
    cps = enumerate_critical_points(p)
    assert len(cps) == sum(morse_counts(p))
    keys = {(cp.kind, cp.site.tag, cp.body, str(cp.signs)) for cp in cps}
    assert len(keys) == len(cps)


@pytest.mark.parametrize("n", range(2, 7))
@pytest.mark.parametrize("regime", [small, large])
def test_first_order_condition_and_feasibility(n, regime):
    for cp in enumerate_critical_points(regime(n)):
        assert cp.config.max_residual() < 1e-12
        assert tangent_gradient_norm(cp.config) < 1e-8


@pytest.mark.parametrize("n", range(2, 9))
@pytest.mark.parametrize("regime", [small, large])
def test_kind_i_bodies_are_brute_force_corners(n, regime):
    p = regime(n)
    corners = np.array(oracles.domain_corners(p.n, p.R))
    for s in critical_sites(p):
        if s.kind is Kind.I:
            assert np.min(np.hypot(*(corners - s.body).T)) < 1e-12
            cp = enumerate_critical_points(p)[0]
            assert cp.config.joints is not None
            assert stretched_angle_margin(s) > 1e-9


@pytest.mark.parametrize("n", range(2, 9))
@pytest.mark.parametrize("regime", [small, large])
def test_critical_values_are_symmetric(n, regime):
    psi = sorted(cp.psi for cp in enumerate_critical_points(regime(n)))
    np.testing.assert_allclose(psi, sorted(-v for v in psi), atol=1e-12)


def test_hessian_determinants_of_vertical_arm_kinds():
    for n in range(2, 8):
        for s in critical_sites(small(n)):
            if s.kind is Kind.II:
                assert np.linalg.det(s.hessian) == pytest.approx(-1.0, abs=1e-12)
                assert s.morse_index == 1
            if s.kind is Kind.III:
                assert np.linalg.det(s.hessian) == pytest.approx(1.0, abs=1e-12)


def test_two_arm_lower_vertex_is_a_minimum():
    p = SpiderParams(2, 1.5)
    lower = next(s for s in critical_sites(p) if s.kind is Kind.I and s.body[1] < 0)
    H = closed_form_hessian(lower)
    assert np.linalg.det(H) > 0 and np.trace(H) > 0
    assert morse_index(lower) == 0
    np.testing.assert_allclose(finite_difference_hessian(lower), H, atol=1e-6)


def test_six_arm_all_up_at_lowest_vertex_is_a_minimum():
    p = SpiderParams(6, 1.5)
    cps = [cp for cp in enumerate_critical_points(p)
           if cp.kind is Kind.I and all(e in (ArmIndex.PLUS, ArmIndex.ZERO) for e in cp.signs)]
    low = min(cps, key=lambda cp: cp.psi)
    assert morse_index(low) == 0
    assert np.all(np.linalg.eigvalsh(finite_difference_hessian(low)) > 0)


@pytest.mark.parametrize("n", [3, 5, 7])
def test_odd_small_vertices_are_saddles(n):
    assert {s.morse_index for s in critical_sites(small(n)) if s.kind is Kind.I} == {1}


@pytest.mark.parametrize("n", range(2, 7))
@pytest.mark.parametrize("regime", [small, large])
def test_finite_difference_hessian_matches_closed_form(n, regime):
    for s in critical_sites(regime(n)):
        H = closed_form_hessian(s)
        F = finite_difference_hessian(s)
        assert np.max(np.abs(F - H)) < 1e-5
        assert abs(F[0, 1] - F[1, 0]) < 1e-8
        if s.kind is Kind.I:
            assert abs(F[0, 1]) < 1e-6


def test_plain_central_differences_lose_accuracy_on_steep_vertices():
    # the Richardson step is what brings the worst kind-i entries under 1e-5
    p = SpiderParams(8, 0.5 * (SpiderParams(8, 1).R_n + 2))
    worst_plain = worst_rich = 0.0
    for s in critical_sites(p):
        H = closed_form_hessian(s)
        worst_plain = max(worst_plain, np.max(np.abs(finite_difference_hessian(s, richardson=False) - H)))
        worst_rich = max(worst_rich, np.max(np.abs(finite_difference_hessian(s) - H)))
    assert worst_rich < 1e-5
    assert worst_rich < worst_plain


def test_singular_regimes_rejected():
    with pytest.raises(RegimeError):
        enumerate_critical_points(SpiderParams(4, 1.0))
    with pytest.raises(RegimeError):
        morse_counts(SpiderParams(3, 0.0))


def test_local_coordinates_labels():
    sites = critical_sites(SpiderParams(3, 0.5))
    kinds = {}
    for s in sites:
        kinds.setdefault(s.kind, s)
    assert kinds[Kind.I].local_coords == ("p0", "p1")
    assert kinds[Kind.II].local_coords[0] == "x"
    assert math.isclose(kinds[Kind.I].psi, kinds[Kind.I].body[1])
