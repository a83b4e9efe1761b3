"""Closed triangulated surface of the configuration space for ``R_n < R < 2``.

One copy of the triangulated body domain is made per face chart (all-bent
multi-index).  Boundary samples are welded by combinatorial keys: a point
on edge ``k`` is keyed by the chart with entry ``k`` set to 0, and a domain
vertex by the chart with both of its arms set to 0, so the two (or four)
charts meeting there share one mesh vertex without any float snapping.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cells import enumerate_index_set
from .domain import BodyDomain
from .kinematics import solve_joints_batch
from .model import (
    ArmIndex,
    IndexClass,
    InvalidParameterError,
    MultiIndex,
    RegimeError,
    RegimeTag,
    SpiderError,
    SpiderParams,
)


class NonManifoldError(SpiderError):
    def __init__(self, edges):
        self.edges = list(edges)
        super().__init__(f"{len(self.edges)} edges not shared by exactly two triangles: {self.edges[:10]}")


@dataclass
class SurfaceMesh:
    verts: np.ndarray
    tris: np.ndarray
    charts: list[MultiIndex] = field(default_factory=list)
    tri_chart: np.ndarray | None = None
    provenance: list[tuple[MultiIndex, tuple[float, float]]] = field(default_factory=list)
    corner_count: np.ndarray | None = None
    max_weld_gap: float = 0.0

    @property
    def n_verts(self) -> int:
        return len(self.verts)

    @property
    def n_tris(self) -> int:
        return len(self.tris)

    def edges(self) -> np.ndarray:
        e = np.concatenate([self.tris[:, [0, 1]], self.tris[:, [1, 2]], self.tris[:, [2, 0]]])
        return np.unique(np.sort(e, axis=1), axis=0)


def boundary_samples(dom: BodyDomain, resolution: int) -> np.ndarray:
    """``(n, resolution, 2)``: points of edge ``k``, starting at vertex ``k - 1``."""
    n = dom.n
    B = dom.anchors
    out = np.empty((n, resolution, 2))
    for k in range(n):
        start = dom.vertex(k - 1) - B[k]
        end = dom.vertex(k) - B[k]
        a0 = math.atan2(start[1], start[0])
        a1 = math.atan2(end[1], end[0])
        sweep = (a1 - a0) % (2.0 * math.pi)
        ang = a0 + sweep * np.arange(resolution) / resolution
        out[k] = B[k] + 2.0 * np.stack([np.cos(ang), np.sin(ang)], axis=1)
        out[k, 0] = dom.vertex(k - 1)
    return out


def _chart_configs(params: SpiderParams, chart: MultiIndex, bodies: np.ndarray):
    B = params.anchors
    joints = np.stack([solve_joints_batch(bodies, B[k], chart[k]) for k in range(params.n)], axis=1)
    return joints


def _height(params: SpiderParams, bodies: np.ndarray, joints: np.ndarray) -> np.ndarray:
    a = bodies[:, None, :] - joints
    b = joints - params.anchors[None, :, :]
    cr = b[..., 0] * a[..., 1] - b[..., 1] * a[..., 0]
    w = 2.0 ** -np.arange(1, params.n + 1)
    return cr @ w


def build_mesh(params: SpiderParams, resolution: int = 8, orient: bool = True) -> SurfaceMesh:
    """Weld ``2^n`` triangulated copies of the body domain into a closed surface.

    Each copy is a fan around the origin plus ``resolution`` rings scaled from
    the boundary.  With ``orient`` the windings of charts with an odd number
    of minus entries are reversed, which makes the result coherently oriented.
    """
    if params.regime.tag is not RegimeTag.GENERIC_LARGE:
        raise RegimeError(f"meshes are built only for R_n < R < 2, got {params.regime}")
    if resolution < 2:
        raise InvalidParameterError("resolution must be at least 2")
    n, L = params.n, resolution
    dom = BodyDomain(params)
    bnd = boundary_samples(dom, resolution).reshape(-1, 2)
    m = len(bnd)
    scales = np.arange(1, L + 1) / L
    bodies = np.concatenate([np.zeros((1, 2)), (scales[:, None, None] * bnd[None]).reshape(-1, 2)])
    bodies[1 + (L - 1) * m:] = bnd

    # chart-local triangles over local ids: 0 = centre, 1 + j*m + i = ring j sample i
    local = []
    for i in range(m):
        local.append((0, 1 + i, 1 + (i + 1) % m))
    for j in range(L - 1):
        for i in range(m):
            i2 = (i + 1) % m
            a, b = 1 + j * m + i, 1 + j * m + i2
            c, d = 1 + (j + 1) * m + i, 1 + (j + 1) * m + i2
            local.append((a, c, d))
            local.append((a, d, b))
    local = np.array(local)

    charts = enumerate_index_set(n, IndexClass.I2)
    index: dict = {}
    verts, prov, corners, first = [], [], [], []
    tris, tri_chart = [], []
    gap = 0.0
    zero = ArmIndex.ZERO
    for ci, chart in enumerate(charts):
        joints = _chart_configs(params, chart, bodies)
        z = _height(params, bodies, joints)
        state = np.concatenate([bodies, joints.reshape(len(bodies), -1)], axis=1)
        ids = np.empty(len(bodies), dtype=int)
        for li in range(len(bodies)):
            if li == 0:
                key = ("c", chart)
            elif li <= (L - 1) * m:
                key = ("r", chart, li)
            else:
                k, b = divmod(li - 1 - (L - 1) * m, resolution)
                if b == 0:
                    copy = (k - 1) % n if n == 2 else 0
                    key = ("v", chart.replace({k - 1: zero, k: zero}), copy)
                else:
                    key = ("e", chart.replace({k: zero}), b)
            vid = index.get(key)
            if vid is None:
                vid = len(verts)
                index[key] = vid
                verts.append((bodies[li, 0], bodies[li, 1], z[li]))
                prov.append((chart, (float(bodies[li, 0]), float(bodies[li, 1]))))
                corners.append(1)
                first.append(state[li])
            else:
                corners[vid] += 1
                gap = max(gap, float(np.max(np.abs(first[vid] - state[li]))))
            ids[li] = vid
        t = ids[local]
        if orient and chart.minus_count % 2:
            t = t[:, ::-1]
        tris.append(t)
        tri_chart.append(np.full(len(t), ci))
    return SurfaceMesh(np.array(verts), np.concatenate(tris), list(charts),
                       np.concatenate(tri_chart), prov, np.array(corners), gap)


def euler_characteristic(mesh: SurfaceMesh) -> int:
    return int(mesh.n_verts - len(mesh.edges()) + mesh.n_tris)


@dataclass(frozen=True)
class OrientationReport:
    orientable: bool
    consistent: bool
    flips: np.ndarray
    chart_signs: dict[MultiIndex, int]
    matches_rule: bool

    def __bool__(self) -> bool:
        return self.orientable and self.consistent


def _edge_map(tris: np.ndarray) -> dict:
    out: dict = {}
    for t, (a, b, c) in enumerate(tris.tolist()):
        for u, v in ((a, b), (b, c), (c, a)):
            out.setdefault((min(u, v), max(u, v)), []).append((t, u < v))
    return out


def check_orientation(mesh: SurfaceMesh) -> OrientationReport:
    """Propagate a winding across shared edges by BFS.

    ``flips[t]`` is +1 if triangle ``t`` keeps its stored winding in the
    propagated orientation.  Chart signs are the orientation of each chart
    relative to the body plane, and ``matches_rule`` compares them with
    ``(-1)^(number of minus entries)`` up to one global sign.
    """
    edges = _edge_map(mesh.tris)
    bad = [e for e, uses in edges.items() if len(uses) != 2]
    if bad:
        raise NonManifoldError(bad)
    adj: list[list[tuple[int, bool]]] = [[] for _ in range(mesh.n_tris)]
    for (t1, d1), (t2, d2) in edges.values():
        # same direction along the shared edge means one of the two must flip
        adj[t1].append((t2, d1 == d2))
        adj[t2].append((t1, d1 == d2))
    flips = np.zeros(mesh.n_tris, dtype=int)
    orientable = True
    for root in range(mesh.n_tris):
        if flips[root]:
            continue
        flips[root] = 1
        queue = deque([root])
        while queue:
            t = queue.popleft()
            for s, opposite in adj[t]:
                want = -flips[t] if opposite else flips[t]
                if flips[s] == 0:
                    flips[s] = want
                    queue.append(s)
                elif flips[s] != want:
                    orientable = False
    consistent = orientable and bool(np.all(flips == flips[0]))

    chart_signs: dict[MultiIndex, int] = {}
    matches = False
    if mesh.tri_chart is not None and orientable:
        P = mesh.verts[:, :2]
        tri = mesh.tris
        u, v = P[tri[:, 1]] - P[tri[:, 0]], P[tri[:, 2]] - P[tri[:, 0]]
        area = u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]
        signed = np.sign(area) * flips
        for ci, chart in enumerate(mesh.charts):
            s = signed[mesh.tri_chart == ci]
            s = s[s != 0]
            chart_signs[chart] = int(np.sign(s.sum())) if len(s) else 0
        rel = {chart_signs[c] * c.orientation_sign for c in mesh.charts}
        matches = len(rel) == 1 and 0 not in rel
    return OrientationReport(orientable, consistent, flips, chart_signs, matches)


def export_obj(mesh: SurfaceMesh, path) -> Path:
    if mesh.n_tris == 0 or mesh.n_verts == 0:
        raise InvalidParameterError("refusing to export an empty mesh")
    path = Path(path)
    lines = [f"v {x:.12g} {y:.12g} {z:.12g}" for x, y, z in mesh.verts]
    lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in mesh.tris]
    path.write_text("\n".join(lines) + "\n")
    return path


def export_off(mesh: SurfaceMesh, path) -> Path:
    if mesh.n_tris == 0 or mesh.n_verts == 0:
        raise InvalidParameterError("refusing to export an empty mesh")
    path = Path(path)
    lines = ["OFF", f"{mesh.n_verts} {mesh.n_tris} {len(mesh.edges())}"]
    lines += [f"{x:.12g} {y:.12g} {z:.12g}" for x, y, z in mesh.verts]
    lines += [f"3 {a} {b} {c}" for a, b, c in mesh.tris]
    path.write_text("\n".join(lines) + "\n")
    return path


def read_obj(path) -> SurfaceMesh:
    verts, tris = [], []
    for line in Path(path).read_text().splitlines():
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "v":
            verts.append([float(v) for v in parts[1:4]])
        elif parts[0] == "f":
            tris.append([int(p.split("/")[0]) - 1 for p in parts[1:4]])
    return SurfaceMesh(np.array(verts, dtype=float).reshape(-1, 3),
                       np.array(tris, dtype=int).reshape(-1, 3))
