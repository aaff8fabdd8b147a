"""Foundational types: truncated series in h, cavity geometry, mode bases and trajectories.

Units follow hbar = c = 1. Lengths and proper times are measured in the same
units as the cavity width ``delta``; ``h`` is the dimensionless product of the
width and the proper acceleration at the cavity centre.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

MAX_ORDER = 2
ZERO_TOL = 1e-14

SCALAR = "scalar_massless"
DIRAC = "dirac_massless"
INERTIAL = "inertial"
ACCELERATED = "accelerated"


class DomainError(ValueError):
    """Raised when a parameter lies outside the domain of a formula."""


@dataclass(frozen=True, slots=True)
class OrderSeries:
    """Complex amplitude ``c0 + c1*h + c2*h**2``; terms of degree >= 3 are dropped.

    Arithmetic with plain numbers treats them as constant (degree 0) series.
    """

    c0: complex = 0j
    c1: complex = 0j
    c2: complex = 0j

    @classmethod
    def const(cls, value) -> "OrderSeries":
        return cls(complex(value), 0j, 0j)

    @classmethod
    def coerce(cls, value) -> "OrderSeries":
        if isinstance(value, OrderSeries):
            return value
        return cls(complex(value), 0j, 0j)

    @property
    def coeffs(self) -> tuple[complex, complex, complex]:
        return (self.c0, self.c1, self.c2)

    def __add__(self, other):
        o = OrderSeries.coerce(other)
        return OrderSeries(self.c0 + o.c0, self.c1 + o.c1, self.c2 + o.c2)

    __radd__ = __add__

    def __sub__(self, other):
        o = OrderSeries.coerce(other)
        return OrderSeries(self.c0 - o.c0, self.c1 - o.c1, self.c2 - o.c2)

    def __rsub__(self, other):
        return OrderSeries.coerce(other) - self

    def __neg__(self):
        return OrderSeries(-self.c0, -self.c1, -self.c2)

    def __mul__(self, other):
        if not isinstance(other, OrderSeries):
            k = complex(other)
            return OrderSeries(self.c0 * k, self.c1 * k, self.c2 * k)
        a, b = self, other
        return OrderSeries(
            a.c0 * b.c0,
            a.c0 * b.c1 + a.c1 * b.c0,
            a.c0 * b.c2 + a.c1 * b.c1 + a.c2 * b.c0,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, OrderSeries):
            return self * other.reciprocal()
        return self * (1.0 / complex(other))

    def reciprocal(self) -> "OrderSeries":
        if abs(self.c0) <= ZERO_TOL:
            raise ZeroDivisionError("series with vanishing constant term has no inverse")
        r0 = 1.0 / self.c0
        r1 = -self.c1 * r0 * r0
        r2 = (self.c1 * self.c1 * r0 - self.c2) * r0 * r0
        return OrderSeries(r0, r1, r2)

    def conj(self) -> "OrderSeries":
        return OrderSeries(self.c0.conjugate(), self.c1.conjugate(), self.c2.conjugate())

    def abs2(self) -> "OrderSeries":
        """|x|^2 as a series (real coefficients)."""
        return self * self.conj()

    def __abs__(self) -> "OrderSeries":
        # branch for h > 0; the leading nonzero coefficient fixes the expansion point
        x0, x1, x2 = self.coeffs
        if abs(x0) > ZERO_TOL:
            m = abs(x0)
            a = 2.0 * (x0.conjugate() * x1).real / m**2
            b = (abs(x1) ** 2 + 2.0 * (x0.conjugate() * x2).real) / m**2
            return OrderSeries(m, m * a / 2.0, m * (b / 2.0 - a * a / 8.0))
        if abs(x1) > ZERO_TOL:
            return OrderSeries(0.0, abs(x1), (x1.conjugate() * x2).real / abs(x1))
        return OrderSeries(0.0, 0.0, abs(x2))

    def sqrt(self) -> "OrderSeries":
        """Square root of a real, non-negative series.

        Expanded around ``c0 > 0``. For ``c0 == c1 == 0`` the result is
        ``sqrt(c2) * h``; its h**2 coefficient would need the (untracked) h**3
        term of the argument and is returned as NaN unless ``c2 == 0``.
        """
        x0, x1, x2 = self.c0.real, self.c1.real, self.c2.real
        if x0 > ZERO_TOL:
            r0 = math.sqrt(x0)
            r1 = x1 / (2.0 * r0)
            r2 = (x2 - r1 * r1) / (2.0 * r0)
            return OrderSeries(r0, r1, r2)
        if x0 < -ZERO_TOL:
            raise DomainError(f"square root of a series with negative constant term {x0!r}")
        if abs(x1) > ZERO_TOL:
            raise DomainError("square root would have fractional order (c0 = 0, c1 != 0)")
        if x2 < -ZERO_TOL:
            raise DomainError(f"square root of a series with negative leading term {x2!r}")
        if abs(x2) <= ZERO_TOL:
            return OrderSeries()
        return OrderSeries(0.0, math.sqrt(x2), complex("nan"))

    def truncate(self, order: int) -> "OrderSeries":
        c = list(self.coeffs)
        for i in range(order + 1, MAX_ORDER + 1):
            c[i] = 0j
        return OrderSeries(*c)

    def __call__(self, h: float) -> complex:
        return self.c0 + self.c1 * h + self.c2 * h * h

    evaluate = __call__

    def leading_order(self, tol: float = ZERO_TOL) -> int | None:
        for i, c in enumerate(self.coeffs):
            if cmath.isnan(c) or abs(c) > tol:
                return i
        return None

    def is_close(self, other, tol: float = 1e-12) -> bool:
        o = OrderSeries.coerce(other)
        return all(abs(a - b) <= tol for a, b in zip(self.coeffs, o.coeffs))

    def __repr__(self) -> str:
        return f"OrderSeries({self.c0!r}, {self.c1!r}, {self.c2!r})"


def series_mul(a: OrderSeries, b: OrderSeries) -> OrderSeries:
    return OrderSeries.coerce(a) * OrderSeries.coerce(b)


# -- geometry -----------------------------------------------------------------


@dataclass(frozen=True)
class CavityConfig:
    delta: float = 1.0
    field_kind: str = SCALAR
    n_max: int = 12

    def __post_init__(self):
        if not self.delta > 0:
            raise DomainError("cavity width delta must be positive")
        if self.field_kind not in (SCALAR, DIRAC):
            raise DomainError(f"unknown field kind {self.field_kind!r}")
        if int(self.n_max) != self.n_max or self.n_max < 3:
            raise DomainError("n_max must be an integer >= 3")

    @property
    def is_fermionic(self) -> bool:
        return self.field_kind == DIRAC

    def basis(self) -> "ModeBasis":
        return ModeBasis.for_config(self)

    def interior(self, label: int) -> bool:
        """Mode labels usable by scenario evaluations (away from the truncation edge)."""
        limit = self.n_max - 2
        if self.is_fermionic:
            return abs(label) <= limit
        return 1 <= label <= limit


@dataclass(frozen=True)
class ModeBasis:
    indices: tuple[int, ...]
    frequencies: np.ndarray = field(compare=False, repr=False)

    @classmethod
    def for_config(cls, cfg: CavityConfig) -> "ModeBasis":
        if cfg.is_fermionic:
            # particles 0..n_max, then antiparticles -1..-n_max
            idx = tuple(range(0, cfg.n_max + 1)) + tuple(range(-1, -cfg.n_max - 1, -1))
        else:
            idx = tuple(range(1, cfg.n_max + 1))
        freqs = np.array(idx, dtype=float) * math.pi / cfg.delta
        return cls(idx, freqs)

    def __len__(self):
        return len(self.indices)

    def position(self, label: int) -> int:
        try:
            return self.indices.index(label)
        except ValueError:
            raise KeyError(f"mode {label} not in basis") from None


# -- trajectories ---------------------------------------------------------------


@dataclass(frozen=True)
class Segment:
    kind: str
    duration: float
    h: float | None = None

    def __post_init__(self):
        if self.kind not in (INERTIAL, ACCELERATED):
            raise DomainError(f"unknown segment kind {self.kind!r}")
        if not self.duration > 0:
            raise DomainError("segment duration must be positive")
        if self.kind == ACCELERATED:
            if self.h is None:
                raise DomainError("accelerated segment needs h")
            check_h(self.h)
        elif self.h is not None:
            raise DomainError("inertial segment carries no h")

    @classmethod
    def inertial(cls, duration: float) -> "Segment":
        return cls(INERTIAL, float(duration))

    @classmethod
    def accelerated(cls, h: float, duration: float) -> "Segment":
        return cls(ACCELERATED, float(duration), float(h))

    @property
    def frame(self) -> tuple[str, float | None]:
        return (self.kind, self.h)


@dataclass(frozen=True)
class Trajectory:
    segments: tuple[Segment, ...] = ()

    def __init__(self, segments: Iterable[Segment] = ()):
        object.__setattr__(self, "segments", tuple(segments))

    def __len__(self):
        return len(self.segments)

    def __iter__(self):
        return iter(self.segments)

    def merged(self) -> "Trajectory":
        out: list[Segment] = []
        for seg in self.segments:
            if out and out[-1].frame == seg.frame:
                prev = out.pop()
                seg = Segment(seg.kind, prev.duration + seg.duration, seg.h)
            out.append(seg)
        return Trajectory(out)

    @property
    def n_accelerated(self) -> int:
        """Number of distinct uniformly accelerated stretches."""
        return sum(1 for s in self.merged() if s.kind == ACCELERATED)

    @property
    def max_h(self) -> float:
        return max((s.h for s in self.segments if s.kind == ACCELERATED), default=0.0)

    @classmethod
    def blocks(cls, h: float, tau: float, n_blocks: int, trailing_inertial: bool = False) -> "Trajectory":
        """``n_blocks`` accelerated stretches of duration tau/2 separated by inertial
        coasting of the same duration."""
        segs: list[Segment] = []
        for j in range(n_blocks):
            segs.append(Segment.accelerated(h, tau / 2))
            if j < n_blocks - 1 or trailing_inertial:
                segs.append(Segment.inertial(tau / 2))
        return cls(segs)


def check_h(h: float) -> float:
    if not (0.0 < h < 2.0):
        raise DomainError(f"h must lie in (0, 2), got {h!r}")
    return h


def block_u(h: float, tau: float, delta: float) -> float:
    """Rescaled block time ``h*tau / (4*delta*atanh(h/2))``.

    Tends to ``tau / (2*delta)`` as h -> 0.
    """
    check_h(h)
    if not tau > 0 or not delta > 0:
        raise DomainError("tau and delta must be positive")
    return h * tau / (4.0 * delta * math.atanh(h / 2.0))


def tau_from_u(h: float, u: float, delta: float) -> float:
    """Inverse of :func:`block_u` in tau."""
    check_h(h)
    return 4.0 * delta * math.atanh(h / 2.0) * u / h


def accelerated_frequency_factor(h: float) -> float:
    """Ratio of Rindler-mode frequency (per centre proper time) to the inertial one."""
    return h / (2.0 * math.atanh(h / 2.0))


def as_series_list(values: Sequence) -> list[OrderSeries]:
    return [OrderSeries.coerce(v) for v in values]
