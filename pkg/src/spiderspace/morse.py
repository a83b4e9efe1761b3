"""Critical points of the body height ``psi = y`` on the configuration space.

Critical points come in three kinds:

* ``i``   two adjacent arms stretched, body at a vertex of the body domain;
* ``ii``  one folded arm pointing straight up or down, body on its anchor;
* ``iii`` one stretched arm pointing straight up or down, body at the top or
  bottom of that arm's reach circle, strictly inside every other disc.

The Hessian at a critical point does not depend on the bend signs of the
free arms, so it is computed once per *site* and shared by the ``2^free``
sign assignments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np

from .cells import fill_signs
from .domain import BodyDomain
from .kinematics import folded_configuration, jacobian, solve_configuration
from .model import (
    ArmIndex,
    Configuration,
    DegenerateError,
    MultiIndex,
    RegimeError,
    RegimeTag,
    SpiderParams,
)

DET_TOL = 1e-10
ANGLE_EPS = 1e-12
FD_STEP = 1e-4
FD_RETRY_STEP = 1e-5


class Kind(str, Enum):
    I = "i"
    II = "ii"
    III = "iii"


@dataclass(frozen=True)
class CriticalSite:
    """Body position and special arms of a family of critical points."""

    params: SpiderParams
    kind: Kind
    body: tuple[float, float]
    arms: tuple[int, ...]
    # +1 if the special arm points up from its anchor (kinds ii, iii), vertex id for kind i
    tag: int

    @property
    def fixed(self) -> dict[int, ArmIndex]:
        value = ArmIndex.INF if self.kind is Kind.II else ArmIndex.ZERO
        return {k: value for k in self.arms}

    @property
    def multiplicity(self) -> int:
        return 2 ** (self.params.n - len(self.arms))

    @property
    def local_coords(self) -> tuple[str, str]:
        if self.kind is Kind.I:
            k, j = self.arms
            return (f"p{k}", f"p{j}")
        return ("x", f"p{self.arms[0]}")

    @cached_property
    def theta(self) -> tuple[float, float] | None:
        """Directions of ``a_k`` and ``a_{k+1}`` (kind i): the angles of the stretched arms."""
        if self.kind is not Kind.I:
            return None
        C = np.array(self.body)
        B = self.params.anchors
        out = []
        for k in self.arms:
            v = C - B[k]
            out.append(math.atan2(v[1], v[0]))
        return tuple(out)

    @cached_property
    def hessian(self) -> np.ndarray:
        return closed_form_hessian(self)

    @cached_property
    def morse_index(self) -> int:
        return _index_of(self.hessian)

    @property
    def psi(self) -> float:
        return self.body[1]


@dataclass(frozen=True)
class CriticalPoint:
    site: CriticalSite
    signs: MultiIndex

    @property
    def kind(self) -> Kind:
        return self.site.kind

    @property
    def body(self) -> tuple[float, float]:
        return self.site.body

    @property
    def psi(self) -> float:
        return self.site.psi

    @property
    def morse_index(self) -> int:
        return self.site.morse_index

    @property
    def hessian_closed(self) -> np.ndarray:
        return self.site.hessian

    @property
    def theta(self):
        return self.site.theta

    @property
    def local_coords(self):
        return self.site.local_coords

    @cached_property
    def config(self) -> Configuration:
        params = self.site.params
        if self.kind is Kind.II:
            k = self.site.arms[0]
            return folded_configuration(params, k, self.site.tag * math.pi / 2, self.signs)
        return solve_configuration(params, self.site.body, self.signs)


def _require_generic(params: SpiderParams):
    if not params.regime.generic:
        raise RegimeError(f"critical points need a generic regime, got {params.regime}")


def critical_sites(params: SpiderParams, tol: float = 1e-9) -> list[CriticalSite]:
    _require_generic(params)
    n = params.n
    B = params.anchors
    dom = BodyDomain(params)
    sites = []
    for k in range(n):
        v = dom.vertex(k)
        sites.append(CriticalSite(params, Kind.I, (float(v[0]), float(v[1])),
                                  (k, (k + 1) % n), k))
    if params.regime.tag is RegimeTag.GENERIC_SMALL:
        for k in range(n):
            for s in (-1, 1):
                sites.append(CriticalSite(params, Kind.II, (float(B[k, 0]), float(B[k, 1])), (k,), s))
    for k in range(n):
        for s in (-1, 1):
            C = B[k] + np.array([0.0, 2.0 * s])
            others = np.delete(np.hypot(*(C - B).T), k)
            if np.all(others < 2.0 - tol):
                sites.append(CriticalSite(params, Kind.III, (float(C[0]), float(C[1])), (k,), s))
    return sites


def enumerate_critical_points(params: SpiderParams) -> list[CriticalPoint]:
    """Every critical point of ``psi``: each site times each sign choice of its free arms."""
    out = []
    for site in critical_sites(params):
        for signs in fill_signs(params.n, site.fixed):
            out.append(CriticalPoint(site, signs))
    return out


def morse_counts(params: SpiderParams) -> tuple[int, int, int]:
    counts = [0, 0, 0]
    for site in critical_sites(params):
        counts[site.morse_index] += site.multiplicity
    return tuple(counts)


def morse_euler(params: SpiderParams) -> int:
    c0, c1, c2 = morse_counts(params)
    return c0 - c1 + c2


def _site(cp) -> CriticalSite:
    return cp.site if isinstance(cp, CriticalPoint) else cp


def closed_form_hessian(cp) -> np.ndarray:
    """Hessian of ``y`` in the site's local coordinates.

    Kind i uses ``(p_k, p_{k+1})``; kinds ii and iii use ``(x, p_k)``.
    """
    site = _site(cp)
    if site.kind is Kind.I:
        t, tp = site.theta
        st, stp, sd = math.sin(t), math.sin(tp), math.sin(tp - t)
        if min(abs(st), abs(stp), abs(sd)) < ANGLE_EPS:
            raise DegenerateError(f"stretched arms at an excluded angle: {t!r}, {tp!r}")
        return np.array([[2.0 * math.cos(tp) / (sd * st * st), 0.0],
                         [0.0, -2.0 * math.cos(t) / (sd * stp * stp)]])
    k = site.arms[0]
    v = site.params.anchors[k, 1]
    q = v + site.tag
    y = site.body[1]
    s1 = y - q
    s2 = q - v
    return np.array([[-1.0 / s1, 1.0 / s1],
                     [1.0 / s1, -1.0 / s1 - 1.0 / s2 ** 3]])


def _index_of(H: np.ndarray) -> int:
    if abs(np.linalg.det(H)) < DET_TOL:
        raise DegenerateError(f"degenerate Hessian {H.tolist()}")
    return int(np.sum(np.linalg.eigvalsh(H) < 0.0))


def morse_index(cp) -> int:
    return _index_of(closed_form_hessian(cp))


def stretched_angle_margin(cp) -> float:
    """Smallest of ``|sin|``, ``|cos|`` of both stretched-arm angles and ``|sin(t' - t)|``."""
    t, tp = _site(cp).theta
    return min(abs(math.sin(t)), abs(math.cos(t)), abs(math.sin(tp)), abs(math.cos(tp)),
               abs(math.sin(tp - t)))


class _Infeasible(Exception):
    pass


def _root(v: float) -> float:
    if v < 0.0:
        raise _Infeasible
    return math.sqrt(v)


def _height_function(site: CriticalSite):
    """``y`` as a function of the two local coordinates, re-solving the chart exactly."""
    B = site.params.anchors
    C0 = np.array(site.body)
    if site.kind is Kind.I:
        k, j = site.arms
        J0 = 0.5 * (C0[None, :] + B[[k, j]])
        sig = np.sign(J0[:, 1] - B[[k, j], 1])

        def height(d1, d2):
            p = J0[:, 0] + (d1, d2)
            u = B[[k, j], 0]
            v = B[[k, j], 1]
            q = v + sig * np.array([_root(1.0 - (p[0] - u[0]) ** 2), _root(1.0 - (p[1] - u[1]) ** 2)])
            P, Q = np.array([p[0], q[0]]), np.array([p[1], q[1]])
            d = math.hypot(*(Q - P))
            if d == 0.0 or d > 2.0:
                raise _Infeasible
            mid = 0.5 * (P + Q)
            h = _root(1.0 - 0.25 * d * d)
            nrm = np.array([-(Q - P)[1], (Q - P)[0]]) / d
            c1, c2 = mid + h * nrm, mid - h * nrm
            C = c1 if np.linalg.norm(c1 - C0) <= np.linalg.norm(c2 - C0) else c2
            return float(C[1])
        return height

    k = site.arms[0]
    u, v = B[k]
    s2 = float(site.tag)
    s1 = float(np.sign(site.body[1] - (v + s2)))
    x0, p0 = site.body[0], u

    def height(d1, d2):
        x, p = x0 + d1, p0 + d2
        q = v + s2 * _root(1.0 - (p - u) ** 2)
        return q + s1 * _root(1.0 - (x - p) ** 2)
    return height


def _central_hessian(f, h: float) -> np.ndarray:
    f0 = f(0.0, 0.0)
    hxx = (f(h, 0.0) - 2.0 * f0 + f(-h, 0.0)) / (h * h)
    hyy = (f(0.0, h) - 2.0 * f0 + f(0.0, -h)) / (h * h)
    hxy = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4.0 * h * h)
    return np.array([[hxx, hxy], [hxy, hyy]])


def _extrapolated(f, h: float, richardson: bool) -> np.ndarray:
    coarse = _central_hessian(f, h)
    if not richardson:
        return coarse
    fine = _central_hessian(f, 0.5 * h)
    return fine + (fine - coarse) / 3.0


def finite_difference_hessian(cp, h: float = FD_STEP, richardson: bool = True) -> np.ndarray:
    """Central second differences of ``y`` in the same local coordinates as the closed form.

    Kind-i Hessians reach a few hundred when the two stretched arms are nearly
    parallel, so by default steps ``h`` and ``h/2`` are combined to cancel the
    ``O(h^2)`` truncation term.
    """
    f = _height_function(_site(cp))
    for step in (h, FD_RETRY_STEP):
        try:
            return _extrapolated(f, step, richardson)
        except _Infeasible:
            continue
    raise DegenerateError("finite-difference probe left the feasible chart")


def tangent_gradient_norm(config: Configuration) -> float:
    """Norm of the gradient of ``y`` projected onto the tangent plane of the manifold."""
    Jm = jacobian(config)
    _, s, vt = np.linalg.svd(Jm)
    rank = int(np.sum(s > 1e-12 * s[0]))
    null = vt[rank:]
    g = np.zeros(Jm.shape[1])
    g[1] = 1.0
    return float(np.linalg.norm(null @ g))
