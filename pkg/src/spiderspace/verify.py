"""End-to-end checks: Jacobian rank, connectedness by construction, topology reports."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import cells, morse
from .domain import BodyDomain
from .kinematics import (
    RANK_TOL,
    canonical_configuration,
    folded_configuration,
    jacobian,
    joint_displacement,
    multi_index,
    relative_smallest_singular_value,
    solve_configuration,
    solve_joints_batch,
)
from .model import (
    ANGLE_TOL,
    DIST_TOL,
    ArmIndex,
    Configuration,
    ConsistencyError,
    InvalidParameterError,
    MultiIndex,
    RegimeError,
    RegimeTag,
    SpiderParams,
)

PLUS, MINUS, ZERO, INF = ArmIndex.PLUS, ArmIndex.MINUS, ArmIndex.ZERO, ArmIndex.INF

NUDGE = 1e-3
EDGE_BACKOFF = 1e-2
MAX_JOINT_STEP = 0.05
MAX_BISECT_DEPTH = 40


def thread_cap(requested: int | None = None) -> int:
    """Worker count: ``requested`` (default 1) capped by ``SPIDER_THREADS`` if set."""
    n = 1 if requested is None else max(1, int(requested))
    env = os.environ.get("SPIDER_THREADS")
    if env:
        try:
            n = min(n, max(1, int(env)))
        except ValueError:
            raise InvalidParameterError(f"SPIDER_THREADS must be an integer, got {env!r}") from None
    return n


def random_body(params: SpiderParams, rng: np.random.Generator) -> np.ndarray:
    """Uniform point of the body domain by rejection from ``[-2, 2]^2``."""
    dom = BodyDomain(params)
    while True:
        C = rng.uniform(-2.0, 2.0, size=2)
        if dom.inside(C, tol=0.0):
            return C


def random_configuration(params: SpiderParams, rng: np.random.Generator) -> Configuration:
    body = random_body(params, rng)
    signs = MultiIndex(tuple(PLUS if s else MINUS for s in rng.integers(0, 2, size=params.n)))
    return solve_configuration(params, body, signs)


@dataclass(frozen=True)
class RankScanReport:
    samples: int
    min_relative_sigma: float
    violations: tuple[int, ...]
    threshold: float = RANK_TOL

    def to_dict(self) -> dict:
        return {"samples": self.samples, "min_relative_sigma": self.min_relative_sigma,
                "threshold": self.threshold, "violations": len(self.violations),
                "violating_samples": list(self.violations)}


def _scan_one(params: SpiderParams, seed: int, i: int) -> float:
    rng = np.random.default_rng((seed, i))
    return relative_smallest_singular_value(jacobian(random_configuration(params, rng)))


def rank_scan(params: SpiderParams, samples: int = 1000, seed: int = 0,
              threads: int | None = None, threshold: float = RANK_TOL) -> RankScanReport:
    """Relative smallest singular value of the Jacobian at random configurations.

    Sample ``i`` draws from its own generator seeded by ``(seed, i)``, so the
    result does not depend on the number of threads.
    """
    if samples < 1:
        raise InvalidParameterError("samples must be >= 1")
    if not params.regime.generic:
        raise RegimeError(f"rank scans need a generic regime, got {params.regime}")
    workers = thread_cap(threads)
    if workers == 1:
        sig = [_scan_one(params, seed, i) for i in range(samples)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            sig = list(pool.map(lambda i: _scan_one(params, seed, i), range(samples)))
    sig = np.array(sig)
    bad = tuple(int(i) for i in np.flatnonzero(sig < threshold))
    return RankScanReport(samples, float(sig.min()), bad, threshold)


def degenerate_witness(params: SpiderParams) -> Configuration:
    """A configuration where the Jacobian loses rank at ``R = R_n``.

    The body sits on ``B_0`` with arm 0 folded toward the origin.  For even
    ``n`` the opposite arm is stretched along the same line; for odd ``n``
    the two arms farthest from ``B_0`` are stretched.  Other arms bend ``+``.
    """
    if params.regime.tag is not RegimeTag.CRITICAL:
        raise RegimeError(f"a degenerate witness exists only at R = R_n, got {params.regime}")
    n = params.n
    entries = [PLUS] * n
    entries[0] = INF
    if n % 2 == 0:
        entries[n // 2] = ZERO
    else:
        m = (n - 1) // 2
        entries[m] = entries[m + 1] = ZERO
    return folded_configuration(params, 0, math.pi, MultiIndex(tuple(entries)))


def folded_arm_possible(params: SpiderParams, tol: float = DIST_TOL) -> bool:
    """Can the body sit on an anchor, i.e. is every anchor within 2 of all others?"""
    B = params.anchors
    d = np.hypot(*(B[0] - B).T)
    return bool(d.max() <= 2.0 + tol)


@dataclass(frozen=True)
class PathSegment:
    start: tuple[float, float]
    end: tuple[float, float]
    signs: MultiIndex
    event: str | None = None  # what happens at ``end``: "nudge", "flip k" or None
    first: int = 0
    last: int = 0  # waypoint indices covered, inclusive


@dataclass
class PathPlan:
    params: SpiderParams
    segments: list[PathSegment] = field(default_factory=list)
    waypoints: list[Configuration] = field(default_factory=list)

    @property
    def flip_events(self) -> int:
        return sum(1 for s in self.segments if s.event and s.event.startswith("flip"))

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Waypoint bodies ``(W, 2)`` and joints ``(W, n, 2)``."""
        return (np.array([w.body for w in self.waypoints]),
                np.array([w.joints for w in self.waypoints]))

    def max_residual(self) -> float:
        C, J = self.arrays()
        a2 = np.sum((C[:, None, :] - J) ** 2, axis=2) - 1.0
        b2 = np.sum((J - self.params.anchors[None]) ** 2, axis=2) - 1.0
        return float(max(np.abs(a2).max(), np.abs(b2).max()))

    def max_step(self) -> float:
        if len(self.waypoints) < 2:
            return 0.0
        C, J = self.arrays()
        db = np.hypot(*np.diff(C, axis=0).T)
        dj = np.linalg.norm(np.diff(J, axis=0), axis=2).max(axis=1)
        return float(np.maximum(db, dj).max())

    def indices(self) -> np.ndarray:
        """Arm index symbols of every waypoint, shape ``(W, n)``."""
        C, J = self.arrays()
        a = C[:, None, :] - J
        b = J - self.params.anchors[None]
        theta = np.arctan2(b[..., 0] * a[..., 1] - b[..., 1] * a[..., 0], np.sum(a * b, axis=2))
        out = np.where(theta > 0, "+", "-").astype(object)
        out[np.abs(theta) < ANGLE_TOL] = "0"
        out[np.abs(np.abs(theta) - math.pi) < ANGLE_TOL] = "∞"
        return out

    def to_dict(self) -> dict:
        final = self.waypoints[-1]
        return {
            "n": self.params.n,
            "R": self.params.R,
            "flip_events": self.flip_events,
            "waypoints": len(self.waypoints),
            "max_residual": self.max_residual(),
            "max_step": self.max_step(),
            "final_body": [float(v) for v in final.body],
            "final_signs": str(multi_index(final)),
            "segments": [
                {"start": list(s.start), "end": list(s.end), "signs": str(s.signs),
                 "event": s.event, "waypoints": [s.first, s.last]}
                for s in self.segments
            ],
        }


def _refine(params: SpiderParams, a: Configuration, b: Configuration,
            signs: MultiIndex) -> list[Configuration]:
    """Configurations strictly after ``a`` up to ``b``, bisecting the body segment until close."""
    out = []
    stack = [(a, b, 0)]
    while stack:
        x, y, depth = stack.pop()
        if joint_displacement(x, y) <= MAX_JOINT_STEP or depth >= MAX_BISECT_DEPTH:
            out.append(y)
            continue
        mid = solve_configuration(params, 0.5 * (x.body + y.body), signs)
        stack.append((mid, y, depth + 1))
        stack.append((x, mid, depth + 1))
    return out


def _configs_along(params: SpiderParams, bodies: np.ndarray, signs: MultiIndex) -> list[Configuration]:
    """Solve every body sample at once, then bisect wherever neighbours are too far apart."""
    B = params.anchors
    joints = np.stack([solve_joints_batch(bodies, B[k], signs[k]) for k in range(params.n)], axis=1)
    step = np.maximum(np.hypot(*np.diff(bodies, axis=0).T),
                      np.hypot(*np.diff(joints, axis=0).transpose(2, 0, 1)).max(axis=1))
    out = [Configuration(params, bodies[0], joints[0])]
    for i in range(1, len(bodies)):
        nxt = Configuration(params, bodies[i], joints[i])
        if step[i - 1] > MAX_JOINT_STEP:
            out.extend(_refine(params, out[-1], nxt, signs))
        else:
            out.append(nxt)
    return out


def _nudged(params: SpiderParams, config: Configuration) -> tuple[np.ndarray, MultiIndex]:
    signs = multi_index(config)
    body = np.array(config.body)
    folded = signs.positions(INF)
    if folded:
        k = folded[0]
        b = config.joints[k] - params.anchors[k]
        theta = math.atan2(b[1], b[0])
        body = params.anchors[k] + NUDGE * np.array([-math.sin(theta), math.cos(theta)])
    elif signs.positions(ZERO):
        r = float(np.hypot(*body))
        body = body - NUDGE * body / r
    changes = {k: PLUS for k in signs.positions(ZERO) + folded}
    return body, signs.replace(changes)


def connect_path(params: SpiderParams, start: Configuration,
                 backoff: float = EDGE_BACKOFF) -> PathPlan:
    """Deform ``start`` to the all-``+`` configuration with the body at the origin.

    1. Nudge off any stretched or folded state onto the ``+`` branch.
    2. For each ``-`` arm ``k``: drive the body to the edge of D opposite
       ``B_k`` so the arm stretches, then come back with the arm bent ``+``.
    3. Drive the body to the origin.
    """
    if not params.regime.generic:
        raise RegimeError(f"connect_path needs a generic regime, got {params.regime}")
    if start.params != params:
        raise InvalidParameterError("start configuration belongs to different parameters")
    if start.max_residual() > 1e-6:
        raise InvalidParameterError(f"start is off the manifold (residual {start.max_residual():.3g})")
    dom = BodyDomain(params)
    plan = PathPlan(params)
    plan.waypoints.append(start)
    cur = np.array(start.body)
    signs = multi_index(start)

    def drive(target, use_signs, event=None, avoid=True):
        nonlocal cur
        target = np.asarray(target, dtype=float)
        bodies = dom.segment(cur, target, avoid_anchors=avoid)
        configs = _configs_along(params, bodies, use_signs)
        first = len(plan.waypoints) - 1
        plan.waypoints.extend(configs[1:])
        plan.segments.append(PathSegment(tuple(map(float, cur)), tuple(map(float, target)),
                                         use_signs, event, first, len(plan.waypoints) - 1))
        cur = target

    if signs.positions(ZERO) or signs.positions(INF):
        body, new_signs = _nudged(params, start)
        nudged = solve_configuration(params, body, new_signs)
        plan.waypoints.extend(_refine(params, start, nudged, new_signs))
        plan.segments.append(PathSegment(tuple(map(float, cur)), tuple(map(float, body)),
                                         new_signs, "nudge", 0, len(plan.waypoints) - 1))
        cur, signs = body, new_signs

    for k in signs.positions(MINUS):
        W = dom.edge_waypoint(k, backoff)
        E = dom.edge_point(k)
        drive(W, signs)
        drive(E, signs, event=f"flip {k}", avoid=False)
        signs = signs.replace({k: PLUS})
        drive(W, signs, avoid=False)
    drive(np.zeros(2), signs)
    return plan


@dataclass(frozen=True)
class PlanCheck:
    continuous: bool
    on_manifold: bool
    canonical_end: bool
    indices_constant: bool
    max_step: float
    max_residual: float

    def __bool__(self) -> bool:
        return self.continuous and self.on_manifold and self.canonical_end and self.indices_constant


def check_plan(plan: PathPlan, step: float = 0.1, residual: float = 1e-9) -> PlanCheck:
    """Continuity, feasibility, final state, and constancy of indices inside each segment."""
    canon = canonical_configuration(plan.params)
    end = plan.waypoints[-1]
    canonical_end = joint_displacement(end, canon) < 1e-12
    constant = True
    idx = plan.indices()
    for seg in plan.segments:
        if seg.event == "nudge":
            continue
        # the end of a flip segment is the stretched state itself
        stop = seg.last if seg.event else seg.last + 1
        want = np.array([e.value for e in seg.signs], dtype=object)
        if np.any(idx[seg.first + 1:stop] != want):
            constant = False
    ms, mr = plan.max_step(), plan.max_residual()
    return PlanCheck(ms < step, mr < residual, canonical_end, constant, ms, mr)


def singular_counts(params: SpiderParams) -> dict:
    """Structural counts describing a non-surface configuration space."""
    n, tag = params.n, params.regime.tag
    if tag is RegimeTag.COINCIDENT:
        return {"circles": 2 ** (n - 1), "torus_dim": n - 1, "gluing_points": 2 ** (n - 1)}
    if tag is RegimeTag.CRITICAL:
        small = cells.genus_formula(SpiderParams(n, 0.5 * params.R_n))
        large = cells.genus_formula(SpiderParams(n, 0.5 * (params.R_n + 2.0)))
        if n % 2 == 0:
            return {"pinched_handles": n * 2 ** (n - 1), "identified_pairs": n * 2 ** (n - 1),
                    "base_genus_small": small, "base_genus_large": large}
        pairs = n * 2 ** (n - 3)
        return {"stitched_discs": n * 2 ** (n - 2), "base_genus_large": large,
                "joining_arcs": {"S": pairs, "T": pairs, "total": 2 * pairs}}
    if tag is RegimeTag.POINT:
        return {"points": 1}
    if tag is RegimeTag.EMPTY:
        return {"points": 0}
    raise RegimeError(f"{params.regime} is not singular")


def critical_chi_routes(params: SpiderParams) -> dict[str, int]:
    """Euler characteristic at ``R = R_n`` by cell counting and by surgery on the generic surfaces."""
    n = params.n
    F, E, V = 2 ** n, n * 2 ** (n - 1), (2 if n == 2 else n * 2 ** (n - 2))
    chi_small = 2 - 2 * cells.genus_formula(SpiderParams(n, 0.5 * params.R_n))
    chi_large = 2 - 2 * cells.genus_formula(SpiderParams(n, 0.5 * (params.R_n + 2.0)))
    if n % 2 == 0:
        # the folded-arm circles cut every edge opposite an anchor in two and replace no vertex
        return {"cells": F - 2 * E + V,
                "pinch_small": chi_small + n * 2 ** (n - 1),
                "identify_large": chi_large - n * 2 ** (n - 1)}
    # every domain vertex is an anchor: its vertex cells become folded-arm circles (chi 0)
    return {"cells": F - E, "stitch_large": chi_large - n * 2 ** (n - 2)}


def classify_topology(params: SpiderParams) -> cells.TopologyReport:
    tag = params.regime.tag
    base = dict(regime=tag.value, n=params.n, R=params.R)
    if params.regime.generic:
        cx = cells.build_complex(params)
        routes = {
            "formula": cells.genus_formula(params),
            "cells": 1 - cells.euler_characteristic(cx) // 2,
            "morse": 1 - morse.morse_euler(params) // 2,
        }
        chis = {cells.euler_characteristic(cx), morse.morse_euler(params)}
        if len(set(routes.values())) != 1 or len(chis) != 1 or any(c % 2 for c in chis):
            raise ConsistencyError(f"genus routes disagree: {routes}")
        if not cells.orientation_rule_holds(cx):
            raise ConsistencyError("face orientation rule fails on some edge")
        g = routes["formula"]
        return cells.TopologyReport(**base, chi=2 - 2 * g, genus=g, orientable=True,
                                    genus_routes=routes)
    counts = singular_counts(params)
    if tag is RegimeTag.CRITICAL:
        chis = critical_chi_routes(params)
        if len(set(chis.values())) != 1:
            raise ConsistencyError(f"Euler characteristic routes disagree: {chis}")
        counts = dict(counts, chi_routes=chis)
        chi = next(iter(chis.values()))
    elif tag is RegimeTag.COINCIDENT:
        # circle factor times the reduced space
        chi = 0
        counts = dict(counts, reduced_chi=(1 - 2 ** (params.n - 1)) - 2 ** (params.n - 1))
    else:
        chi = counts["points"]
    return cells.TopologyReport(**base, chi=chi, genus=None, orientable=None, singular=counts)

