"""Multi-index cells of the configuration space and their combinatorics.

In a generic regime every configuration is recorded by its body position
and its multi-index.  Faces are the all-bent indices, edges have one
stretched arm, vertices two adjacent stretched arms, and for small ``R``
circle cells have one folded arm.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

from .model import (
    ArmIndex,
    IndexClass,
    InvalidParameterError,
    MultiIndex,
    RegimeError,
    RegimeTag,
    SpiderParams,
)

PLUS, MINUS, ZERO, INF = ArmIndex.PLUS, ArmIndex.MINUS, ArmIndex.ZERO, ArmIndex.INF


def _arm_count(n_or_params) -> int:
    if isinstance(n_or_params, SpiderParams):
        return n_or_params.n
    return SpiderParams(n_or_params, 0.0).n


def fill_signs(n: int, fixed: dict[int, ArmIndex]) -> list[MultiIndex]:
    free = [k for k in range(n) if k not in fixed]
    out = []
    for signs in itertools.product((PLUS, MINUS), repeat=len(free)):
        entries = dict(fixed)
        entries.update(zip(free, signs))
        out.append(MultiIndex(tuple(entries[k] for k in range(n))))
    return out


def enumerate_index_set(n_or_params, cls: IndexClass | str) -> list[MultiIndex]:
    """All multi-indices of one class, duplicate free, in lexicographic order."""
    n = _arm_count(n_or_params)
    cls = IndexClass(cls)
    patterns: list[dict[int, ArmIndex]]
    if cls is IndexClass.I2:
        patterns = [{}]
    elif cls is IndexClass.I1:
        patterns = [{k: ZERO} for k in range(n)]
    elif cls is IndexClass.I0:
        patterns = [{k: ZERO, (k + 1) % n: ZERO} for k in range(n)]
    elif cls is IndexClass.IS1:
        patterns = [{k: INF} for k in range(n)]
    elif cls is IndexClass.ISE:
        if n % 2:
            raise InvalidParameterError("ISE indices exist only for even n")
        patterns = [{k: INF, (k + n // 2) % n: ZERO} for k in range(n)]
    elif cls is IndexClass.ISO:
        if n % 2 == 0:
            raise InvalidParameterError("ISO indices exist only for odd n")
        m = (n - 1) // 2
        patterns = [{k: INF, (k + m) % n: ZERO, (k + m + 1) % n: ZERO} for k in range(n)]
    else:
        raise InvalidParameterError(f"cannot enumerate class {cls}")
    found = {mi for p in patterns for mi in fill_signs(n, p)}
    return sorted(found, key=MultiIndex.sort_key)


VertexKey = tuple[MultiIndex, int]


@dataclass(frozen=True)
class FaceClosure:
    edges: tuple[MultiIndex, ...]
    vertices: tuple[VertexKey, ...]
    circles: tuple[MultiIndex, ...]


def face_closure(face: MultiIndex, with_circles: bool) -> FaceClosure:
    """Boundary cells of a face: edge ``k`` zeroes entry ``k``, vertex ``k`` zeroes ``k`` and ``k+1``.

    For ``n = 2`` both vertices carry the index ``00``; the copy id is the
    vertex number, 0 for the lower intersection point and 1 for the upper.
    """
    n = face.n
    edges = tuple(face.replace({k: ZERO}) for k in range(n))
    vertices = tuple((face.replace({k: ZERO, k + 1: ZERO}), k if n == 2 else 0) for k in range(n))
    circles = tuple(face.replace({k: INF}) for k in range(n)) if with_circles else ()
    return FaceClosure(edges, vertices, circles)


@dataclass(frozen=True)
class CellComplex:
    params: SpiderParams
    faces: tuple[MultiIndex, ...]
    edges: tuple[MultiIndex, ...]
    vertices: tuple[VertexKey, ...]
    circles: tuple[MultiIndex, ...]
    closure: dict[MultiIndex, FaceClosure] = field(repr=False)

    @property
    def small(self) -> bool:
        return self.params.regime.tag is RegimeTag.GENERIC_SMALL

    def counts(self) -> dict[str, int]:
        return {"faces": len(self.faces), "edges": len(self.edges),
                "vertices": len(self.vertices), "circles": len(self.circles)}

    def incidence(self, kind: str) -> dict:
        """How many face closures contain each edge, vertex or circle."""
        out: dict = {}
        for fc in self.closure.values():
            for cell in getattr(fc, kind):
                out[cell] = out.get(cell, 0) + 1
        return out


def build_complex(params: SpiderParams) -> CellComplex:
    tag = params.regime.tag
    if not params.regime.generic:
        raise RegimeError(f"{tag.value} is singular; use verify.classify_topology")
    n = params.n
    small = tag is RegimeTag.GENERIC_SMALL
    faces = tuple(enumerate_index_set(n, IndexClass.I2))
    edges = tuple(enumerate_index_set(n, IndexClass.I1))
    i0 = enumerate_index_set(n, IndexClass.I0)
    vertices = tuple((v, c) for v in i0 for c in ((0, 1) if n == 2 else (0,)))
    circles = tuple(enumerate_index_set(n, IndexClass.IS1)) if small else ()
    closure = {f: face_closure(f, small) for f in faces}
    return CellComplex(params, faces, edges, vertices, circles, closure)


def euler_characteristic(cx: CellComplex) -> int:
    """Alternating sum, with the small-R handle accounting.

    For small ``R`` each face closure meets ``n`` circle cells.  Every
    incidence is a removed open disc (chi -1); the boundary circles are then
    glued in pairs, which leaves chi unchanged.
    """
    chi = len(cx.vertices) - len(cx.edges) + len(cx.faces)
    if cx.small:
        chi -= sum(len(fc.circles) for fc in cx.closure.values())
    return chi


def genus_formula(params: SpiderParams) -> int:
    if not params.regime.generic:
        raise RegimeError(f"genus is undefined for regime {params.regime}")
    n = params.n
    coef = 5 * n - 4 if params.regime.tag is RegimeTag.GENERIC_SMALL else n - 4
    g = 1 + coef * Fraction(2 ** n, 8)
    if g.denominator != 1:
        raise ArithmeticError(f"non-integral genus {g}")
    return int(g)


def adjacency(cx: CellComplex, face: MultiIndex) -> list[tuple[MultiIndex, MultiIndex]]:
    """Faces sharing an edge with ``face``, paired with that edge."""
    if face.kind is not IndexClass.I2:
        raise InvalidParameterError(f"{face} is not a face index")
    flip = {PLUS: MINUS, MINUS: PLUS}
    return [(face.replace({k: flip[face[k]]}), face.replace({k: ZERO})) for k in range(face.n)]


def face_distance(cx: CellComplex, start: MultiIndex, goal: MultiIndex) -> int:
    """Number of edges crossed on a shortest route between two faces (BFS)."""
    seen = {start: 0}
    queue = deque([start])
    while queue:
        f = queue.popleft()
        if f == goal:
            return seen[f]
        for g, _ in adjacency(cx, f):
            if g not in seen:
                seen[g] = seen[f] + 1
                queue.append(g)
    raise ValueError(f"{goal} unreachable from {start}")


def edge_faces(cx: CellComplex) -> dict[MultiIndex, list[MultiIndex]]:
    out: dict[MultiIndex, list[MultiIndex]] = {}
    for f, fc in cx.closure.items():
        for e in fc.edges:
            out.setdefault(e, []).append(f)
    return out


def orientation_rule_holds(cx: CellComplex) -> bool:
    """Faces signed by ``(-1)^(number of minus entries)`` disagree across every edge."""
    return all(len(fs) == 2 and fs[0].orientation_sign == -fs[1].orientation_sign
               for fs in edge_faces(cx).values())


@dataclass(frozen=True)
class TopologyReport:
    regime: str
    n: int
    R: float
    chi: int | None
    genus: int | None
    orientable: bool | None
    genus_routes: dict[str, int] | None = None
    singular: dict | None = None

    def to_dict(self) -> dict:
        out = {"regime": self.regime, "n": self.n, "R": self.R, "chi": self.chi,
               "genus": self.genus, "orientable": self.orientable}
        if self.genus_routes is not None:
            out["genus_routes"] = dict(self.genus_routes)
        if self.singular is not None:
            out["singular"] = dict(self.singular)
        return out
