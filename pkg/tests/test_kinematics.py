import math

import numpy as np
import pytest
from hypothesis import given

from spiderspace.domain import BodyDomain
from spiderspace.kinematics import (
    arm_angle,
    arm_index,
    canonical_configuration,
    folded_configuration,
    jacobian,
    joint_displacement,
    multi_index,
    project,
    relative_smallest_singular_value,
    residual_vector,
    residuals,
    solve_configuration,
    solve_joint,
    solve_joints_batch,
)
from spiderspace.model import (
    ArmIndex,
    ChartMismatchError,
    Configuration,
    FoldedIndeterminateError,
    MultiIndex,
    SpiderParams,
    UnreachableError,
)
from spiderspace.verify import random_configuration

from . import oracles
from .strategies import generic_params, seeds

PLUS, MINUS = ArmIndex.PLUS, ArmIndex.MINUS
S3 = math.sqrt(3) / 2



def test_residual_slice_arithmetic():
    # one arm, body and joint at the origin, anchor at (1, 0)
    p = SpiderParams(2, 1.0)
    f = residual_vector(p, [0, 0, 0, 0, 0, 0])
    assert f[0] == -1.0 and f[1] == 0.0


def test_solve_joint_branches():
    np.testing.assert_allclose(solve_joint((0, 0), (1, 0), PLUS), [0.5, S3], atol=1e-15)
    np.testing.assert_allclose(solve_joint((0, 0), (1, 0), MINUS), [0.5, -S3], atol=1e-15)
    for e in (PLUS, MINUS):
        np.testing.assert_allclose(solve_joint((2, 0), (0, 0), e), [1, 0], atol=1e-15)


def test_solve_joint_matches_circle_oracle():
    rng = np.random.default_rng(3)
    for _ in range(200):
        B = rng.uniform(-1, 1, 2)
        C = B + rng.uniform(0.05, 1.95) * np.array([math.cos(t := rng.uniform(0, 6.3)), math.sin(t)])
        expected = oracles.circle_intersections(tuple(C), 1, tuple(B), 1)
        got = [solve_joint(C, B, e) for e in (PLUS, MINUS)]
        for J in got:
            assert min(np.hypot(*(J - np.array(x))) for x in expected) < 1e-12
        J = got[0]
        assert (J - B)[0] * (C - J)[1] - (J - B)[1] * (C - J)[0] > 0


def test_solve_joint_errors():
    with pytest.raises(UnreachableError):
        solve_joint((3, 0), (0, 0), PLUS)
    with pytest.raises(FoldedIndeterminateError):
        solve_joint((0, 0), (0, 0), PLUS)


def test_two_arm_chart_examples():
    p = SpiderParams(2, 1.0)
    c = solve_configuration(p, (0, 0), MultiIndex.parse("++"))
    np.testing.assert_allclose(c.joints[0], [0.5, S3], atol=1e-15)
    # the plus joint of the second arm is the half-turn image of the first
    np.testing.assert_allclose(c.joints[1], [-0.5, -S3], atol=1e-15)
    c = solve_configuration(p, (0, 0), MultiIndex.parse("+-"))
    np.testing.assert_allclose(c.joints[1], [-0.5, S3], atol=1e-15)
    assert arm_angle(c, 0) == pytest.approx(2 * math.pi / 3, abs=1e-15)


def test_stretched_chart_at_a_domain_vertex():
    p = SpiderParams(4, 1.5)
    v = BodyDomain(p).vertex(0)
    c = solve_configuration(p, v, MultiIndex.parse("00++"))
    assert c.max_residual() < 1e-9
    assert multi_index(c) == MultiIndex.parse("00++")


def test_chart_mismatch_on_stretched_entry_off_the_edge():
    with pytest.raises(ChartMismatchError):
        solve_configuration(SpiderParams(4, 1.5), (0, 0), MultiIndex.parse("0+++"))


@given(generic_params(), seeds)
def test_solved_configurations_are_exact(params, seed):
    c = random_configuration(params, np.random.default_rng(seed))
    assert np.max(np.abs(residuals(c))) < 1e-12
    assert c.on_manifold()


@given(generic_params(), seeds)
def test_jacobian_matches_finite_differences(params, seed):
    c = random_configuration(params, np.random.default_rng(seed))
    num = oracles.numeric_jacobian(params.n, params.R, c.vector())
    assert np.max(np.abs(jacobian(c) - num)) < 1e-6


@given(generic_params(), seeds)
def test_jacobian_sparsity(params, seed):
    c = random_configuration(params, np.random.default_rng(seed))
    # each arm contributes 2 + 2 entries to its first row and 2 to its second
    assert np.count_nonzero(jacobian(c)) <= 6 * params.n
    pattern = np.zeros((2 * params.n, 2 * params.n + 2), dtype=bool)
    for k in range(params.n):
        pattern[2 * k, [0, 1, 2 + 2 * k, 3 + 2 * k]] = True
        pattern[2 * k + 1, [2 + 2 * k, 3 + 2 * k]] = True
    assert not np.any(jacobian(c)[~pattern])


def test_jacobian_full_rank_two_arm_example():
    p = SpiderParams(2, 1.5)
    c = solve_configuration(p, (0.1, 0.2), MultiIndex.parse("+-"))
    assert relative_smallest_singular_value(jacobian(c)) > 1e-8


def test_arm_angles_of_folded_and_stretched_arms():
    p = SpiderParams(2, 1.0)
    c = folded_configuration(p, 0, math.pi, MultiIndex.parse("∞0"))
    assert arm_angle(c, 0) == pytest.approx(math.pi)
    assert arm_index(c, 0) is ArmIndex.INF
    assert arm_angle(c, 1) == pytest.approx(0.0, abs=1e-15)
    assert arm_index(c, 1) is ArmIndex.ZERO


@given(generic_params(), seeds)
def test_multi_index_recovers_the_chart(params, seed):
    rng = np.random.default_rng(seed)
    c = random_configuration(params, rng)
    again = solve_configuration(params, c.body, multi_index(c))
    assert joint_displacement(c, again) < 1e-12


def test_project_fixes_exact_configuration():
    p = SpiderParams(5, 0.7)
    c = random_configuration(p, np.random.default_rng(1))
    assert joint_displacement(project(p, c), c) < 1e-15


@given(generic_params(), seeds)
def test_project_absorbs_small_joint_noise(params, seed):
    rng = np.random.default_rng(seed)
    c = random_configuration(params, rng)
    d = np.hypot(*(c.body - params.anchors).T)
    if d.min() < 0.05 or d.max() > 1.95:
        return
    noisy = Configuration(params, c.body, c.joints + rng.normal(scale=1e-6, size=c.joints.shape))
    fixed = project(params, noisy)
    assert fixed.max_residual() < 1e-12
    assert joint_displacement(fixed, c) < 1e-5


def test_project_moves_stretched_chart_off_edge_to_nearest_branch():
    p = SpiderParams(4, 1.5)
    v = BodyDomain(p).vertex(0)
    c = solve_configuration(p, v, MultiIndex.parse("00++"))
    moved = Configuration(p, 0.99 * v, c.joints)
    fixed, flags = project(p, moved, return_flags=True)
    assert fixed.max_residual() < 1e-12
    assert multi_index(fixed)[2:] == MultiIndex.parse("++").entries
    assert set(flags) <= {0, 1}


def test_project_rejects_unreachable_body():
    p = SpiderParams(3, 1.5)
    c = canonical_configuration(p)
    with pytest.raises(UnreachableError):
        project(p, Configuration(p, (5.0, 0.0), c.joints))


def test_batch_solver_agrees_with_scalar_solver():
    rng = np.random.default_rng(7)
    B = np.array([0.3, -0.2])
    bodies = B + rng.uniform(-1.3, 1.3, (100, 2))
    bodies = bodies[np.hypot(*(bodies - B).T) > 0.01]
    for e in (PLUS, MINUS):
        batch = solve_joints_batch(bodies, B, e)
        single = np.array([solve_joint(C, B, e) for C in bodies])
        np.testing.assert_allclose(batch, single, atol=1e-14)


def test_canonical_configuration_is_all_plus_at_origin():
    c = canonical_configuration(SpiderParams(5, 1.2))
    assert np.all(c.body == 0)
    assert multi_index(c) == MultiIndex.all_plus(5)
