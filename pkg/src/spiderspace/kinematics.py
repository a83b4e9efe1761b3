"""Constraint map, its Jacobian, and exact circle-intersection solving.

Every on-manifold configuration is produced here by intersecting unit
circles, so residuals sit at roundoff level rather than solver tolerance.
"""

from __future__ import annotations

import math

import numpy as np

from .model import (
    DIST_TOL,
    ArmIndex,
    ChartMismatchError,
    Configuration,
    FoldedIndeterminateError,
    InvalidParameterError,
    MultiIndex,
    SpiderParams,
    UnreachableError,
    arm_index_from_angle,
)

# relative threshold on sigma_min / sigma_max below which the Jacobian is rank deficient
RANK_TOL = 1e-8


def cross(u, v) -> float:
    return float(u[0] * v[1] - u[1] * v[0])


def anchors(params: SpiderParams) -> np.ndarray:
    return params.anchors


def residual_vector(params: SpiderParams, x) -> np.ndarray:
    """``(f_1, ..., f_2n)`` at a flat state vector."""
    x = np.asarray(x, dtype=float)
    C = x[:2]
    J = x[2:].reshape(params.n, 2)
    out = np.empty(2 * params.n)
    out[0::2] = np.sum((C - J) ** 2, axis=1) - 1.0
    out[1::2] = np.sum((J - params.anchors) ** 2, axis=1) - 1.0
    return out


def residuals(config: Configuration) -> np.ndarray:
    return residual_vector(config.params, config.vector())


def jacobian(config: Configuration) -> np.ndarray:
    """Analytic ``dF``: shape ``(2n, 2n + 2)``, columns ordered as ``vector()``."""
    n = config.params.n
    a, b = config.a, config.b
    out = np.zeros((2 * n, 2 * n + 2))
    for k in range(n):
        col = 2 + 2 * k
        out[2 * k, 0:2] = 2.0 * a[k]
        out[2 * k, col:col + 2] = -2.0 * a[k]
        out[2 * k + 1, col:col + 2] = 2.0 * b[k]
    return out


def relative_smallest_singular_value(matrix: np.ndarray) -> float:
    s = np.linalg.svd(matrix, compute_uv=False)
    return float(s[-1] / s[0]) if s[0] > 0 else 0.0


def jacobian_rank(config: Configuration, tol: float = RANK_TOL) -> int:
    s = np.linalg.svd(jacobian(config), compute_uv=False)
    return int(np.sum(s > tol * s[0]))


def _branch_points(C: np.ndarray, B: np.ndarray, d: float):
    mid = 0.5 * (C + B)
    h = math.sqrt(max(0.0, 1.0 - 0.25 * d * d))
    u = (C - B) / d
    normal = np.array([-u[1], u[0]])
    # cross(b, a) = -s*h*d for J = mid + s*h*normal, so PLUS takes s = -1
    return mid - h * normal, mid + h * normal


def solve_joint(C, B, branch: ArmIndex) -> np.ndarray:
    """Joint at unit distance from both ``C`` and ``B`` on the given branch.

    ``PLUS`` is the joint with ``cross(J - B, C - J) > 0``.  When
    ``|C - B|`` is within ``DIST_TOL`` of 2 the two branches coincide and the
    midpoint is returned for either.
    """
    C = np.asarray(C, dtype=float)
    B = np.asarray(B, dtype=float)
    d = math.hypot(C[0] - B[0], C[1] - B[1])
    if d > 2.0 + DIST_TOL:
        raise UnreachableError(f"|C - B| = {d!r} exceeds 2")
    if d < DIST_TOL:
        raise FoldedIndeterminateError("body on anchor: folded joint is not determined")
    if d >= 2.0 - DIST_TOL:
        return 0.5 * (C + B)
    if branch not in (ArmIndex.PLUS, ArmIndex.MINUS):
        raise InvalidParameterError(f"branch must be PLUS or MINUS, got {branch!r}")
    plus, minus = _branch_points(C, B, d)
    return plus if branch is ArmIndex.PLUS else minus


def solve_joints_batch(bodies: np.ndarray, B, branch: ArmIndex) -> np.ndarray:
    """Vectorised :func:`solve_joint` over an ``(m, 2)`` array of bodies."""
    bodies = np.asarray(bodies, dtype=float)
    B = np.asarray(B, dtype=float)
    diff = bodies - B
    d = np.hypot(diff[:, 0], diff[:, 1])
    if np.any(d > 2.0 + DIST_TOL):
        raise UnreachableError("some body is farther than 2 from the anchor")
    if np.any(d < DIST_TOL):
        raise FoldedIndeterminateError("some body sits on the anchor")
    h = np.sqrt(np.clip(1.0 - 0.25 * d * d, 0.0, None))
    h[d >= 2.0 - DIST_TOL] = 0.0
    u = diff / d[:, None]
    normal = np.stack([-u[:, 1], u[:, 0]], axis=1)
    s = -1.0 if branch is ArmIndex.PLUS else 1.0
    return 0.5 * (bodies + B) + s * h[:, None] * normal


def _place(body: np.ndarray, B: np.ndarray, entry: ArmIndex, k: int) -> np.ndarray:
    d = math.hypot(body[0] - B[0], body[1] - B[1])
    if entry is ArmIndex.ZERO:
        if abs(d - 2.0) >= DIST_TOL:
            raise ChartMismatchError(f"arm {k} marked stretched but |C - B_k| = {d!r}")
        return 0.5 * (body + B)
    if entry is ArmIndex.INF:
        raise ChartMismatchError(f"arm {k} is folded; use folded_configuration")
    return solve_joint(body, B, entry)


def solve_configuration(params: SpiderParams, body, signs: MultiIndex) -> Configuration:
    """Configuration in the chart of ``signs`` whose body is at ``body``.

    Bent entries are also accepted on the boundary of their chart, where they
    reduce to the stretched joint.
    """
    if len(signs) != params.n:
        raise InvalidParameterError("sign vector length differs from n")
    body = np.asarray(body, dtype=float)
    B = params.anchors
    joints = [_place(body, B[k], e, k) for k, e in enumerate(signs)]
    return Configuration(params, body, np.array(joints))


def folded_configuration(params: SpiderParams, k: int, theta: float,
                         signs: MultiIndex) -> Configuration:
    """Body at ``B_k`` with arm ``k`` folded and its joint at ``B_k + e^{i theta}``."""
    B = params.anchors
    body = B[k].copy()
    joints = []
    for j, e in enumerate(signs):
        if j == k:
            joints.append(B[k] + np.array([math.cos(theta), math.sin(theta)]))
        else:
            joints.append(_place(body, B[j], e, j))
    return Configuration(params, body, np.array(joints))


def arm_angles(config: Configuration) -> np.ndarray:
    """Signed angle from ``b_k`` to ``a_k`` for every arm, in (-pi, pi]."""
    a, b = config.a, config.b
    cr = b[:, 0] * a[:, 1] - b[:, 1] * a[:, 0]
    dt = np.sum(a * b, axis=1)
    theta = np.arctan2(cr, dt)
    theta[theta <= -np.pi] = np.pi
    return theta


def arm_angle(config: Configuration, k: int) -> float:
    return float(arm_angles(config)[k])


def arm_index(config: Configuration, k: int) -> ArmIndex:
    return arm_index_from_angle(arm_angle(config, k))


def multi_index(config: Configuration) -> MultiIndex:
    return MultiIndex(tuple(arm_index_from_angle(t) for t in arm_angles(config)))


def project(params: SpiderParams, approx: Configuration, return_flags: bool = False):
    """Snap a nearly valid configuration back onto the manifold.

    The body is kept; each joint is re-solved on whichever branch is closer to
    the approximate joint.  Equidistant branches go to ``PLUS`` and their arm
    ids are reported when ``return_flags`` is set.
    """
    body = np.asarray(approx.body, dtype=float)
    B = params.anchors
    joints, ambiguous = [], []
    for k in range(params.n):
        Jk = approx.joints[k]
        d = math.hypot(body[0] - B[k][0], body[1] - B[k][1])
        if d > 2.0 + DIST_TOL:
            raise UnreachableError(f"arm {k}: |C - B_k| = {d!r} exceeds 2")
        if d < DIST_TOL:
            v = Jk - B[k]
            norm = math.hypot(v[0], v[1])
            if norm == 0.0:
                raise FoldedIndeterminateError(f"arm {k}: folded joint direction undefined")
            joints.append(B[k] + v / norm)
            continue
        if d >= 2.0 - DIST_TOL:
            joints.append(0.5 * (body + B[k]))
            continue
        plus, minus = _branch_points(body, B[k], d)
        dp = np.linalg.norm(plus - Jk)
        dm = np.linalg.norm(minus - Jk)
        if abs(dp - dm) <= 1e-12:
            ambiguous.append(k)
        joints.append(plus if dp <= dm else minus)
    config = Configuration(params, body, np.array(joints))
    if return_flags:
        return config, tuple(ambiguous)
    return config


def canonical_configuration(params: SpiderParams) -> Configuration:
    """Body at the origin with every arm positively bent."""
    return solve_configuration(params, (0.0, 0.0), MultiIndex.all_plus(params.n))


def joint_displacement(c1: Configuration, c2: Configuration) -> float:
    """Largest point displacement (body or joint) between two configurations."""
    db = float(np.linalg.norm(c1.body - c2.body))
    dj = float(np.max(np.linalg.norm(c1.joints - c2.joints, axis=1)))
    return max(db, dj)

