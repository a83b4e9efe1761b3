"""Core value types for symmetric spider linkages.

A spider has ``n`` arms.  Arm ``k`` (0-based here) is anchored at
``B_k = R * exp(2 pi i k / n)``, has a middle joint ``J_k`` and reaches the
common body ``C``; both links have unit length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

EPS_REGIME = 1e-12
ANGLE_TOL = 1e-9
DIST_TOL = 1e-9
CONSTRAINT_TOL = 1e-9


class SpiderError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameterError(SpiderError, ValueError):
    pass


class UnreachableError(SpiderError):
    """A body position is farther than 2 from some anchor."""


class FoldedIndeterminateError(SpiderError):
    """Body sits on an anchor, so the folded joint is a free circle."""


class ChartMismatchError(SpiderError):
    """Sign vector is incompatible with the body position."""


class RegimeError(SpiderError):
    """Operation is undefined for the regime of the given radius."""


class DegenerateError(SpiderError):
    pass


class DomainRoutingError(SpiderError):
    pass


class ConsistencyError(SpiderError):
    """Two independent computations of the same quantity disagree."""


def max_root_distance(n: int) -> float:
    """Largest distance between two n-th roots of unity."""
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n < 2:
        raise InvalidParameterError(f"need an integer n >= 2, got {n!r}")
    if n % 2 == 0:
        return 2.0
    m = (n - 1) // 2
    return math.sqrt(2.0 - 2.0 * math.cos(2.0 * m * math.pi / n))


def critical_radius(n: int) -> float:
    return 2.0 / max_root_distance(n)


class RegimeTag(str, Enum):
    COINCIDENT = "Coincident"
    GENERIC_SMALL = "GenericSmall"
    CRITICAL = "CriticalRn"
    GENERIC_LARGE = "GenericLarge"
    POINT = "Point"
    EMPTY = "Empty"


@dataclass(frozen=True)
class Regime:
    tag: RegimeTag
    parity: str

    @property
    def generic(self) -> bool:
        return self.tag in (RegimeTag.GENERIC_SMALL, RegimeTag.GENERIC_LARGE)

    def __str__(self) -> str:
        return self.tag.value


@dataclass(frozen=True)
class SpiderParams:
    n: int
    R: float

    def __post_init__(self):
        max_root_distance(self.n)  # validates n
        R = float(self.R)
        if not math.isfinite(R) or R < 0:
            raise InvalidParameterError(f"R must be finite and >= 0, got {self.R!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "R", R)

    @property
    def d_n(self) -> float:
        return max_root_distance(self.n)

    @property
    def R_n(self) -> float:
        return critical_radius(self.n)

    @property
    def parity(self) -> str:
        return "even" if self.n % 2 == 0 else "odd"

    @cached_property
    def regime(self) -> Regime:
        return classify_regime(self)

    @cached_property
    def anchors(self) -> np.ndarray:
        k = np.arange(self.n)
        phi = 2.0 * np.pi * k / self.n
        out = self.R * np.stack([np.cos(phi), np.sin(phi)], axis=1)
        out.setflags(write=False)
        return out


def classify_regime(params: SpiderParams, eps: float = EPS_REGIME) -> Regime:
    """Which of the six topological regimes ``params.R`` falls into.

    Equality with 0, ``R_n`` and 2 is decided with an absolute tolerance
    ``eps``, so a radius typed in near a singular value lands on it.
    """
    R, Rn = params.R, params.R_n
    if R < eps:
        tag = RegimeTag.COINCIDENT
    elif abs(R - Rn) < eps:
        tag = RegimeTag.CRITICAL
    elif abs(R - 2.0) < eps:
        tag = RegimeTag.POINT
    elif R > 2.0:
        tag = RegimeTag.EMPTY
    elif R < Rn:
        tag = RegimeTag.GENERIC_SMALL
    else:
        tag = RegimeTag.GENERIC_LARGE
    return Regime(tag, params.parity)


class ArmIndex(str, Enum):
    PLUS = "+"
    MINUS = "-"
    ZERO = "0"
    INF = "∞"

    @property
    def bent(self) -> bool:
        return self in (ArmIndex.PLUS, ArmIndex.MINUS)

    @classmethod
    def parse(cls, ch: str) -> "ArmIndex":
        if ch in ("i", "inf", "I"):
            return cls.INF
        return cls(ch)


_ORDER = {ArmIndex.PLUS: 0, ArmIndex.MINUS: 1, ArmIndex.ZERO: 2, ArmIndex.INF: 3}


def arm_index_from_angle(theta: float, tol: float = ANGLE_TOL) -> ArmIndex:
    """Index of an arm from its joint angle in (-pi, pi]."""
    if abs(theta) < tol:
        return ArmIndex.ZERO
    if abs(abs(theta) - math.pi) < tol:
        return ArmIndex.INF
    return ArmIndex.PLUS if theta > 0 else ArmIndex.MINUS


class IndexClass(str, Enum):
    I2 = "I2"
    I1 = "I1"
    I0 = "I0"
    IS1 = "IS1"
    ISE = "ISE"
    ISO = "ISO"
    INVALID = "Invalid"


def _adjacent(i: int, j: int, n: int) -> bool:
    return (j - i) % n in (1, n - 1)


def classify_entries(entries: Sequence[ArmIndex]) -> IndexClass:
    n = len(entries)
    zeros = [k for k, e in enumerate(entries) if e is ArmIndex.ZERO]
    infs = [k for k, e in enumerate(entries) if e is ArmIndex.INF]
    if not infs:
        if not zeros:
            return IndexClass.I2
        if len(zeros) == 1:
            return IndexClass.I1
        if len(zeros) == 2 and _adjacent(zeros[0], zeros[1], n):
            return IndexClass.I0
        return IndexClass.INVALID
    if len(infs) != 1:
        return IndexClass.INVALID
    k = infs[0]
    if not zeros:
        return IndexClass.IS1
    if n % 2 == 0 and zeros == [(k + n // 2) % n]:
        return IndexClass.ISE
    if n % 2 == 1:
        m = (n - 1) // 2
        if sorted(zeros) == sorted([(k + m) % n, (k + m + 1) % n]):
            return IndexClass.ISO
    return IndexClass.INVALID


@dataclass(frozen=True, order=False)
class MultiIndex:
    """Vector of arm indices, e.g. ``MultiIndex.parse("+-0")``."""

    entries: tuple[ArmIndex, ...]

    def __post_init__(self):
        entries = tuple(e if isinstance(e, ArmIndex) else ArmIndex.parse(e) for e in self.entries)
        object.__setattr__(self, "entries", entries)

    @classmethod
    def parse(cls, text: str) -> "MultiIndex":
        return cls(tuple(ArmIndex.parse(ch) for ch in text))

    @classmethod
    def all_plus(cls, n: int) -> "MultiIndex":
        return cls((ArmIndex.PLUS,) * n)

    @property
    def n(self) -> int:
        return len(self.entries)

    @cached_property
    def kind(self) -> IndexClass:
        return classify_entries(self.entries)

    @property
    def minus_count(self) -> int:
        return sum(e is ArmIndex.MINUS for e in self.entries)

    @property
    def orientation_sign(self) -> int:
        return -1 if self.minus_count % 2 else 1

    def positions(self, value: ArmIndex) -> list[int]:
        return [k for k, e in enumerate(self.entries) if e is value]

    def replace(self, changes: dict[int, ArmIndex] | Iterable[tuple[int, ArmIndex]]) -> "MultiIndex":
        entries = list(self.entries)
        items = changes.items() if isinstance(changes, dict) else changes
        for k, v in items:
            entries[k % self.n] = v
        return MultiIndex(tuple(entries))

    def sort_key(self) -> tuple[int, ...]:
        return tuple(_ORDER[e] for e in self.entries)

    def __lt__(self, other: "MultiIndex") -> bool:
        return self.sort_key() < other.sort_key()

    def __getitem__(self, k: int) -> ArmIndex:
        return self.entries[k]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __str__(self) -> str:
        return "".join(e.value for e in self.entries)

    def __repr__(self) -> str:
        return f"MultiIndex('{self}')"


def _frozen_array(a, shape) -> np.ndarray:
    arr = np.array(a, dtype=float)
    if arr.shape != shape:
        raise InvalidParameterError(f"expected shape {shape}, got {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Configuration:
    """Body and joint positions; may be off the constraint manifold."""

    params: SpiderParams
    body: np.ndarray
    joints: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "body", _frozen_array(self.body, (2,)))
        object.__setattr__(self, "joints", _frozen_array(self.joints, (self.params.n, 2)))

    @classmethod
    def from_vector(cls, params: SpiderParams, x) -> "Configuration":
        x = np.asarray(x, dtype=float)
        return cls(params, x[:2], x[2:].reshape(params.n, 2))

    def vector(self) -> np.ndarray:
        """Flat ``(x, y, p_1, q_1, ..., p_n, q_n)``."""
        return np.concatenate([self.body, self.joints.ravel()])

    @property
    def anchors(self) -> np.ndarray:
        return self.params.anchors

    @property
    def a(self) -> np.ndarray:
        """Rows ``a_k = C - J_k``."""
        return self.body[None, :] - self.joints

    @property
    def b(self) -> np.ndarray:
        """Rows ``b_k = J_k - B_k``."""
        return self.joints - self.params.anchors

    def max_residual(self) -> float:
        a2 = np.sum(self.a ** 2, axis=1) - 1.0
        b2 = np.sum(self.b ** 2, axis=1) - 1.0
        return float(max(np.abs(a2).max(), np.abs(b2).max()))

    def on_manifold(self, tol: float = CONSTRAINT_TOL) -> bool:
        return self.max_residual() < tol

    def __eq__(self, other):
        if not isinstance(other, Configuration):
            return NotImplemented
        return (self.params == other.params and np.array_equal(self.body, other.body)
                and np.array_equal(self.joints, other.joints))

    __hash__ = None
