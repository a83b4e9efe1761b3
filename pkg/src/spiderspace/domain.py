"""The body domain: the curved n-gon of feasible body positions.

``D = {C : |C - B_k| <= 2 for all k}`` is an intersection of equal discs, so
it is convex.  Edge ``k`` is the arc of the circle of radius 2 about ``B_k``
that faces away from ``B_k``; vertex ``k`` joins edges ``k`` and ``k + 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .model import (
    DIST_TOL,
    DomainRoutingError,
    InvalidParameterError,
    RegimeError,
    SpiderParams,
)

# a straight segment passing closer than this to an anchor gets an arc detour
DETOUR_TRIGGER = 1e-3
DETOUR_RADIUS = 1e-2
MAX_STEP = 1e-2
ARC_STEP = 0.05


class Location(str, Enum):
    INTERIOR = "Interior"
    ON_EDGE = "OnEdge"
    ON_VERTEX = "OnVertex"
    AT_ANCHOR = "AtAnchor"
    OUTSIDE = "Outside"


@dataclass(frozen=True)
class Membership:
    location: Location
    arms: tuple[int, ...] = ()
    on_boundary: bool = False

    @property
    def inside(self) -> bool:
        return self.location is not Location.OUTSIDE


@dataclass(frozen=True)
class BodyDomain:
    params: SpiderParams
    tol: float = DIST_TOL
    anchors: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "anchors", self.params.anchors)

    @property
    def n(self) -> int:
        return self.params.n

    def distances(self, C) -> np.ndarray:
        C = np.asarray(C, dtype=float)
        return np.hypot(C[0] - self.anchors[:, 0], C[1] - self.anchors[:, 1])

    def contains(self, C) -> Membership:
        d = self.distances(C)
        if np.any(d > 2.0 + self.tol):
            return Membership(Location.OUTSIDE)
        edges = tuple(int(k) for k in np.flatnonzero(np.abs(d - 2.0) < self.tol))
        at = np.flatnonzero(d < self.tol)
        if at.size:
            return Membership(Location.AT_ANCHOR, (int(at[0]),), bool(edges))
        if not edges:
            return Membership(Location.INTERIOR)
        if len(edges) == 1:
            return Membership(Location.ON_EDGE, edges, True)
        return Membership(Location.ON_VERTEX, edges, True)

    def inside(self, C, tol: float | None = None) -> bool:
        tol = self.tol if tol is None else tol
        return bool(np.all(self.distances(C) <= 2.0 + tol))

    def _require_corners(self):
        if not 0.0 < self.params.R <= 2.0:
            raise RegimeError(f"the domain has no corners at R={self.params.R!r}")

    def vertex(self, k: int) -> np.ndarray:
        """Vertex joining edges ``k`` and ``k + 1``.

        It is the intersection of the radius-2 circles about ``B_k`` and
        ``B_{k+1}`` on the side away from them.  For ``n = 2`` the two
        vertices are the two intersection points: ``k = 0`` is the lower one.
        At the critical radius for odd ``n`` the vertices are anchors.
        """
        self._require_corners()
        n, R = self.n, self.params.R
        k %= n
        half = math.pi / n
        phi = 2.0 * math.pi * k / n + half
        s = math.sqrt(4.0 - (R * math.sin(half)) ** 2)
        r = R * math.cos(half) - s
        return np.array([r * math.cos(phi), r * math.sin(phi)])

    def vertices(self) -> np.ndarray:
        return np.array([self.vertex(k) for k in range(self.n)])

    def edge_point(self, k: int) -> np.ndarray:
        """Midpoint of edge ``k``: the point of D diametrically opposite ``B_k``."""
        B = self.anchors[k % self.n]
        R = self.params.R
        if R <= 0.0:
            raise RegimeError("edges are undefined when all anchors coincide")
        return B * (1.0 - 2.0 / R)

    def edge_waypoint(self, k: int, delta: float = 1e-2) -> np.ndarray:
        """Interior point at distance ``2 - delta`` from ``B_k`` on the ray through the origin."""
        if not 0.0 < delta < 0.1:
            raise InvalidParameterError(f"need 0 < delta < 0.1, got {delta!r}")
        R = self.params.R
        if not 0.0 < R < 2.0:
            raise RegimeError(f"edge waypoints need 0 < R < 2, got R={R!r}")
        B = self.anchors[k % self.n]
        direction = -B / R
        t = 2.0 - delta
        C = B + t * direction
        if self.contains(C).location is Location.INTERIOR:
            return C
        lo, hi = 2.0 - 2.0 * delta, t
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            C = B + mid * direction
            if self.contains(C).location is Location.INTERIOR:
                return C
            hi = mid
        raise DomainRoutingError(f"no interior waypoint near edge {k}")

    def segment(self, P, Q, avoid_anchors: bool = True) -> np.ndarray:
        """Sampled path from ``P`` to ``Q`` inside D.

        Straight by convexity.  With ``avoid_anchors`` the path escapes
        radially from any anchor closer than ``DETOUR_RADIUS`` and goes round
        any anchor it would otherwise pass within ``DETOUR_TRIGGER`` of.
        """
        P = np.asarray(P, dtype=float)
        Q = np.asarray(Q, dtype=float)
        for X in (P, Q):
            if not self.inside(X):
                raise DomainRoutingError(f"endpoint {X.tolist()} is outside the body domain")
        if np.array_equal(P, Q):
            return P[None, :].copy()
        if not avoid_anchors:
            return self._sample_line(P, Q)

        head, P0 = self._escape(P)
        tail, Q0 = self._escape(Q)
        pieces = [head] if head is not None else []
        pieces.extend(self._route(P0, Q0))
        if tail is not None:
            pieces.append(tail[::-1])
        path = np.concatenate(pieces)
        keep = np.ones(len(path), dtype=bool)
        keep[1:] = np.any(path[1:] != path[:-1], axis=1)
        return path[keep]

    def _nearest_anchor_distance(self, X) -> float:
        return float(self.distances(X).min())

    def _escape(self, X):
        """Radial path from ``X`` out to the detour circle of a nearby anchor."""
        d = self.distances(X)
        k = int(np.argmin(d))
        if d[k] >= DETOUR_RADIUS:
            return None, X
        if d[k] == 0.0:
            raise DomainRoutingError(f"cannot route from anchor {k}: direction undefined")
        B = self.anchors[k]
        out = B + DETOUR_RADIUS * (X - B) / d[k]
        return self._sample_line(X, out), out

    def _route(self, P, Q) -> list[np.ndarray]:
        v = Q - P
        L2 = float(v @ v)
        if L2 == 0.0:
            return [P[None, :].copy()]
        hits = []
        for k, B in enumerate(self.anchors):
            t = float((B - P) @ v) / L2
            if 0.0 < t < 1.0:
                foot = P + t * v
                if np.hypot(*(foot - B)) < DETOUR_TRIGGER:
                    hits.append((t, k, foot))
        hits.sort()
        pieces, cur = [], P
        L = math.sqrt(L2)
        u = v / L
        for t, k, foot in hits:
            B = self.anchors[k]
            off = foot - B
            h = math.hypot(*off)
            half = math.sqrt(max(DETOUR_RADIUS ** 2 - h * h, 0.0))
            enter = foot - half * u
            leave = foot + half * u
            side = off / h if h > 0.0 else np.array([-u[1], u[0]])
            pieces.append(self._sample_line(cur, enter))
            pieces.append(self._sample_arc(B, enter, leave, side))
            cur = leave
        pieces.append(self._sample_line(cur, Q))
        return pieces

    def _sample_line(self, P, Q) -> np.ndarray:
        out = [P]
        v = Q - P
        L = math.hypot(*v)
        s = 0.0
        while True:
            X = P + (s / L) * v if L > 0.0 else P
            step = max(min(MAX_STEP, 0.05 * self._nearest_anchor_distance(X)), 1e-9)
            s += step
            if s >= L * (1.0 - 1e-12):
                break
            out.append(P + (s / L) * v)
        if L > 0.0:
            out.append(Q)
        return np.array(out)

    @staticmethod
    def _sample_arc(B, start, end, side) -> np.ndarray:
        a0 = math.atan2(*(start - B)[::-1])
        a1 = math.atan2(*(end - B)[::-1])
        am = math.atan2(side[1], side[0])
        sweep = (a1 - a0) % (2.0 * math.pi)
        # go the way that passes through the side direction
        if (am - a0) % (2.0 * math.pi) > sweep:
            sweep -= 2.0 * math.pi
        m = max(1, math.ceil(abs(sweep) / ARC_STEP))
        ang = a0 + sweep * np.arange(m + 1) / m
        r = math.hypot(*(start - B))
        pts = B + r * np.stack([np.cos(ang), np.sin(ang)], axis=1)
        pts[0], pts[-1] = start, end
        return pts
