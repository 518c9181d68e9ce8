"""Planar geometry in a local North-East frame.

Angles are compass-style: measured clockwise from North, so a unit vector at
angle ``t`` is ``(north, east) = (cos t, sin t)``.  Headings, bearings and the
polar angles of the samplers all use this convention.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InfeasibleGeometryError

TWO_PI = 2.0 * math.pi

# Angular slack when deciding that a course change is exactly zero or a
# full reversal.
_ANGLE_EPS = 1e-12


@dataclass(frozen=True)
class Point:
    north: float
    east: float

    def __post_init__(self):
        if not (math.isfinite(self.north) and math.isfinite(self.east)):
            raise ValueError(f"point components must be finite, got {self!r}")

    def __sub__(self, other: "Point") -> tuple[float, float]:
        return (self.north - other.north, self.east - other.east)

    def offset(self, dn: float, de: float) -> "Point":
        return Point(self.north + dn, self.east + de)

    def distance_to(self, other: "Point") -> float:
        return math.hypot(self.north - other.north, self.east - other.east)

    def bearing_to(self, other: "Point") -> float:
        """Compass bearing of ``other`` as seen from this point."""
        return normalize_angle(math.atan2(other.east - self.east, other.north - self.north))

    def as_tuple(self) -> tuple[float, float]:
        return (self.north, self.east)


def normalize_angle(raw: float) -> float:
    """Map ``raw`` radians onto [0, 2*pi)."""
    if not math.isfinite(raw):
        raise ValueError(f"angle must be finite, got {raw}")
    out = math.fmod(raw, TWO_PI)
    if out < 0.0:
        out += TWO_PI
    # fmod of a tiny negative number plus 2*pi can round up to 2*pi exactly.
    if out >= TWO_PI:
        out = 0.0
    return out


def signed_angle(raw: float) -> float:
    """Map ``raw`` radians onto (-pi, pi]."""
    out = normalize_angle(raw)
    if out > math.pi:
        out -= TWO_PI
    return out


def unit_vector(angle: float) -> tuple[float, float]:
    return (math.cos(angle), math.sin(angle))


def polar_ellipse_radius(a: float, b: float, theta: float) -> float:
    """Distance from an ellipse's centre to its boundary at polar angle ``theta``.

    ``a`` lies along ``theta = 0`` and ``b`` along ``theta = pi/2``; both are
    semi-axes.
    """
    if not (a > 0.0 and b > 0.0):
        raise ValueError(f"ellipse axes must be positive, got a={a}, b={b}")
    return a * b / math.hypot(b * math.cos(theta), a * math.sin(theta))


def required_turning_radius(radius_of_acceptance: float, leg_in: float, leg_out: float) -> float:
    """Turning radius needed to fillet the corner between two legs.

    ``leg_in`` and ``leg_out`` are the compass courses of the incoming and
    outgoing legs.  The corner angle is ``phi = (leg_in - leg_out + pi) mod 2pi``
    and the fillet radius ``|R * tan(phi / 2)|``.  A straight continuation
    returns ``math.inf``; a full reversal raises :class:`InfeasibleGeometryError`.
    """
    if not radius_of_acceptance > 0.0:
        raise ValueError(f"radius of acceptance must be positive, got {radius_of_acceptance}")
    phi = normalize_angle(leg_in - leg_out + math.pi)
    if abs(phi - math.pi) <= _ANGLE_EPS:
        return math.inf
    if phi <= _ANGLE_EPS or phi >= TWO_PI - _ANGLE_EPS:
        raise InfeasibleGeometryError("legs reverse direction; required turning radius is zero")
    return abs(radius_of_acceptance * math.tan(0.5 * phi))


@dataclass(frozen=True)
class Arc:
    """Closed angular interval swept clockwise from ``start`` through ``width``."""

    start: float
    width: float

    def __post_init__(self):
        if not (0.0 < self.width <= TWO_PI):
            raise ValueError(f"arc width must lie in (0, 2*pi], got {self.width}")
        object.__setattr__(self, "start", normalize_angle(self.start))

    @classmethod
    def full(cls) -> "Arc":
        return cls(0.0, TWO_PI)

    @property
    def is_full(self) -> bool:
        return self.width >= TWO_PI

    @property
    def mid(self) -> float:
        return normalize_angle(self.start + 0.5 * self.width)

    def contains(self, angle: float, tol: float = 1e-9) -> bool:
        if self.is_full:
            return True
        offset = normalize_angle(angle - self.start)
        return offset <= self.width + tol or offset >= TWO_PI - tol
