"""Random variates over the COLREGs-compliant sampling subsets.

Two radial laws are available.  ``PAPER_FAITHFUL`` uses the linear density
``f(x) = c_i + 2 c_o x`` on the normalised radius ``x``; it is exact only when
the inner radius is zero.  ``EXACT_AREA_UNIFORM`` draws ``r`` with density
proportional to ``r`` and is uniform in area for any inner radius.

Polar angles follow the compass convention of :mod:`colregs_rrt.geom`:
a point at radius ``r`` and angle ``theta`` from the centre is offset by
``(r cos theta, r sin theta)`` in (north, east).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import RegionTooSmallError
from .geom import Arc, Point, TWO_PI

HALF_PI = 0.5 * math.pi
QUADRANT_U_MAX = 0.25

DEFAULT_NEWTON_TOL = 1e-10
DEFAULT_NEWTON_MAX_ITER = 50
DEFAULT_REJECTION_CAP = 10**6


class SamplingMode(enum.Enum):
    PAPER_FAITHFUL = "paper"
    EXACT_AREA_UNIFORM = "exact"


DEFAULT_MODE = SamplingMode.EXACT_AREA_UNIFORM


class SampleSpace(enum.Enum):
    HALF_ANNULUS = "half_annulus"
    ELLIPTICAL_HALF_ANNULUS = "elliptical_half_annulus"


@dataclass(frozen=True)
class AnnulusSpec:
    center: Point
    r_min: float
    r_max: float
    allowed_arc: Arc = field(default_factory=Arc.full)

    def __post_init__(self):
        if not (0.0 <= self.r_min < self.r_max):
            raise ValueError(f"annulus needs 0 <= r_min < r_max, got {self.r_min}, {self.r_max}")

    @property
    def area(self) -> float:
        return 0.5 * self.allowed_arc.width * (self.r_max**2 - self.r_min**2)

    def contains(self, north: float, east: float, tol: float = 1e-6) -> bool:
        dn = north - self.center.north
        de = east - self.center.east
        r = math.hypot(dn, de)
        if r < self.r_min - tol or r > self.r_max + tol:
            return False
        if self.allowed_arc.is_full or r == 0.0:
            return True
        return self.allowed_arc.contains(math.atan2(de, dn), tol=tol / max(r, 1.0))


@dataclass(frozen=True)
class EllipticalAnnulusSpec:
    """Ellipse (semi-axes ``a`` >= ``b``) minus a concentric circle of radius ``r_min``.

    ``orientation`` is the compass direction of the major axis.
    ``allowed_half`` keeps the side of the major axis lying to starboard
    (+1) or port (-1) of ``orientation``; 0 keeps both sides.
    """

    center: Point
    a: float
    b: float
    r_min: float
    orientation: float
    allowed_half: int = 0

    def __post_init__(self):
        if not (self.a >= self.b > self.r_min >= 0.0):
            raise ValueError(
                f"elliptical annulus needs a >= b > r_min >= 0, got a={self.a}, b={self.b}, r_min={self.r_min}"
            )
        if self.allowed_half not in (-1, 0, 1):
            raise ValueError(f"allowed_half must be -1, 0 or 1, got {self.allowed_half}")

    @classmethod
    def informed(
        cls, start: Point, goal: Point, c_best: float, r_min: float = 0.0, allowed_half: int = 0
    ) -> "EllipticalAnnulusSpec":
        """The prolate set of points whose start+goal distance is below ``c_best``."""
        c_min = start.distance_to(goal)
        if c_best < c_min:
            raise ValueError(f"c_best={c_best} is below the straight-line distance {c_min}")
        center = Point(0.5 * (start.north + goal.north), 0.5 * (start.east + goal.east))
        return cls(
            center=center,
            a=0.5 * c_best,
            b=0.5 * math.sqrt(c_best * c_best - c_min * c_min),
            r_min=r_min,
            orientation=start.bearing_to(goal),
            allowed_half=allowed_half,
        )

    @property
    def area(self) -> float:
        full = math.pi * (self.a * self.b - self.r_min**2)
        return full if self.allowed_half == 0 else 0.5 * full

    def to_local(self, north: float, east: float) -> tuple[float, float]:
        dn = north - self.center.north
        de = east - self.center.east
        c, s = math.cos(self.orientation), math.sin(self.orientation)
        return dn * c + de * s, -dn * s + de * c

    def contains(self, north: float, east: float, tol: float = 1e-6) -> bool:
        x, y = self.to_local(north, east)
        if math.hypot(x, y) < self.r_min - tol:
            return False
        if math.hypot(x / self.a, y / self.b) > 1.0 + tol / self.b:
            return False
        return self.allowed_half * y >= -tol


# Radial law ----------------------------------------------------------------


def radial_cdf(x: float, r_min: float, r_max: float) -> float:
    """CDF ``c_i x + c_o x^2`` of the linear radial density on [0, 1]."""
    c_i = (r_min / r_max) ** 2
    c_o = 1.0 - c_i
    return c_i * x + c_o * x * x


def inverse_cdf_radial(u: float, r_min: float, r_max: float, mode: SamplingMode = DEFAULT_MODE) -> float:
    """Normalised radius ``x`` in [0, 1] such that ``r = r_min + x (r_max - r_min)``."""
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"u must lie in [0, 1], got {u}")
    if not 0.0 <= r_min < r_max:
        raise ValueError(f"need 0 <= r_min < r_max, got {r_min}, {r_max}")
    return float(_inverse_radial(u, r_min, r_max, mode))


def _inverse_radial(u, r_min, r_max, mode):
    # Shared by scalar and array callers; no validation.
    span2 = r_max * r_max - r_min * r_min
    if mode is SamplingMode.PAPER_FAITHFUL:
        half_ratio = r_min * r_min / (2.0 * span2)
        scaled = r_max * r_max / span2 * u
        # -h + sqrt(h^2 + s) written without the cancellation; 0/0 only at u = r_min = 0.
        den = half_ratio + np.sqrt(half_ratio * half_ratio + scaled)
        return np.where(den > 0.0, scaled / np.where(den > 0.0, den, 1.0), 0.0)
    r = np.sqrt(r_min * r_min + u * span2)
    return np.minimum((r - r_min) / (r_max - r_min), 1.0)


def _radius(u, r_min, r_max, mode):
    if isinstance(u, float) and mode is SamplingMode.EXACT_AREA_UNIFORM:
        return math.sqrt(r_min * r_min + u * (r_max * r_max - r_min * r_min))
    if mode is SamplingMode.PAPER_FAITHFUL:
        return r_min + _inverse_radial(u, r_min, r_max, mode) * (r_max - r_min)
    return np.sqrt(r_min * r_min + u * (r_max * r_max - r_min * r_min))


# Half-annulus ----------------------------------------------------------------


def _draw_half_annulus(spec: AnnulusSpec, rng: np.random.Generator, mode: SamplingMode) -> tuple[float, float]:
    theta = spec.allowed_arc.start + spec.allowed_arc.width * rng.random()
    r = float(_radius(float(rng.random()), spec.r_min, spec.r_max, mode))
    return spec.center.north + r * math.cos(theta), spec.center.east + r * math.sin(theta)


def sample_half_annulus(
    spec: AnnulusSpec,
    rng: np.random.Generator,
    mode: SamplingMode = DEFAULT_MODE,
    size: int | None = None,
):
    """Draw from the (half-)annulus: angle uniform over the arc, radius by inversion.

    Returns a :class:`Point`, or an ``(size, 2)`` array of (north, east) rows
    when ``size`` is given.
    """
    if size is None:
        return Point(*_draw_half_annulus(spec, rng, mode))
    theta = spec.allowed_arc.start + spec.allowed_arc.width * rng.random(size)
    r = _radius(rng.random(size), spec.r_min, spec.r_max, mode)
    return np.column_stack(
        (spec.center.north + r * np.cos(theta), spec.center.east + r * np.sin(theta))
    )


# Elliptical annulus ------------------------------------------------------------


def _theta_cdf(theta, a, b, r_min):
    # atan2 form equals atan(a tan(theta) / b) on [0, pi/2] and has no pole.
    area = math.pi * (a * b - r_min * r_min)
    return (a * b * np.arctan2(a * np.sin(theta), b * np.cos(theta)) - theta * r_min * r_min) / (2.0 * area)


def _theta_pdf(theta, a, b, r_min):
    area = math.pi * (a * b - r_min * r_min)
    rc = b * np.cos(theta)
    rs = a * np.sin(theta)
    return ((a * b) ** 2 / (rc * rc + rs * rs) - r_min * r_min) / (2.0 * area)


def elliptical_theta_cdf(theta: float, a: float, b: float, r_min: float) -> float:
    """CDF of the polar angle over one quadrant of the elliptical annulus.

    Reaches 1/4 as ``theta`` approaches pi/2; ``theta`` must lie in [0, pi/2).
    """
    if not 0.0 <= theta < HALF_PI:
        raise ValueError(f"theta must lie in [0, pi/2), got {theta}")
    _check_ellipse(a, b, r_min)
    return (a * b * math.atan(a * math.tan(theta) / b) - theta * r_min * r_min) / (
        2.0 * math.pi * (a * b - r_min * r_min)
    )


def _check_ellipse(a, b, r_min):
    if not (a >= b > r_min >= 0.0):
        raise ValueError(f"need a >= b > r_min >= 0, got a={a}, b={b}, r_min={r_min}")


class ThetaInversion(NamedTuple):
    theta: float
    method: str  # "newton" or "bisection"
    iterations: int


def invert_theta_cdf(
    u: float,
    a: float,
    b: float,
    r_min: float,
    tol: float = DEFAULT_NEWTON_TOL,
    max_iter: int = DEFAULT_NEWTON_MAX_ITER,
) -> ThetaInversion:
    """Solve ``F(theta) = u`` on one quadrant by safeguarded Newton-Raphson.

    Steps are ``theta - f / f'``; any step leaving the current bracket is
    replaced by bisection, and if Newton has not met ``tol`` after
    ``max_iter`` steps plain bisection finishes the job.
    """
    if not 0.0 <= u < QUADRANT_U_MAX:
        raise ValueError(f"u must lie in [0, 0.25), got {u}")
    _check_ellipse(a, b, r_min)
    theta, method, iterations = _invert_theta(u, a, b, r_min, tol, max_iter)
    return ThetaInversion(theta, method, iterations)


def _invert_theta(u, a, b, r_min, tol=DEFAULT_NEWTON_TOL, max_iter=DEFAULT_NEWTON_MAX_ITER):
    ab = a * b
    r2 = r_min * r_min
    two_area = 2.0 * math.pi * (ab - r2)
    lo, hi = 0.0, HALF_PI
    # Exact answer when r_min = 0; a close start otherwise.
    phi = TWO_PI * u
    theta = math.atan2(b * math.sin(phi), a * math.cos(phi))
    method = "newton"
    for k in range(1, max_iter + 1):
        f = (ab * math.atan2(a * math.sin(theta), b * math.cos(theta)) - theta * r2) / two_area - u
        if abs(f) < tol:
            return theta, method, k - 1
        if f > 0.0:
            hi = theta
        else:
            lo = theta
        rc = b * math.cos(theta)
        rs = a * math.sin(theta)
        fp = (ab * ab / (rc * rc + rs * rs) - r2) / two_area
        step = theta - f / fp
        if not lo < step < hi:
            step = 0.5 * (lo + hi)
            method = "bisection"
        theta = step
    method = "bisection"
    k = max_iter
    while True:
        k += 1
        f = (ab * math.atan2(a * math.sin(theta), b * math.cos(theta)) - theta * r2) / two_area - u
        if abs(f) < tol or hi - lo <= 4.0 * math.ulp(hi):
            return theta, method, k
        if f > 0.0:
            hi = theta
        else:
            lo = theta
        theta = 0.5 * (lo + hi)


def _invert_theta_array(u, a, b, r_min, tol=DEFAULT_NEWTON_TOL, max_iter=DEFAULT_NEWTON_MAX_ITER):
    """Vectorised twin of :func:`_invert_theta` for bulk draws."""
    u = np.asarray(u, dtype=float)
    lo = np.zeros_like(u)
    hi = np.full_like(u, HALF_PI)
    phi = TWO_PI * u
    theta = np.arctan2(b * np.sin(phi), a * np.cos(phi))
    for _ in range(max_iter + 64):
        f = _theta_cdf(theta, a, b, r_min) - u
        done = np.abs(f) < tol
        if done.all():
            break
        hi = np.where(f > 0.0, theta, hi)
        lo = np.where(f > 0.0, lo, theta)
        step = theta - f / _theta_pdf(theta, a, b, r_min)
        bad = ~((lo < step) & (step < hi))
        step = np.where(bad, 0.5 * (lo + hi), step)
        theta = np.where(done, theta, step)
    return theta


# Quadrant sign pairs (major, minor) for each side selector.
_QUADRANTS = {
    0: ((1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)),
    1: ((1.0, 1.0), (-1.0, 1.0)),
    -1: ((-1.0, -1.0), (1.0, -1.0)),
}


def _ellipse_radius(theta, a, b):
    return a * b / np.hypot(b * np.cos(theta), a * np.sin(theta))


def _to_world(spec: EllipticalAnnulusSpec, x, y):
    c, s = math.cos(spec.orientation), math.sin(spec.orientation)
    return spec.center.north + x * c - y * s, spec.center.east + x * s + y * c


def _draw_elliptical(spec: EllipticalAnnulusSpec, rng: np.random.Generator, mode: SamplingMode) -> tuple[float, float]:
    theta, _, _ = _invert_theta(QUADRANT_U_MAX * rng.random(), spec.a, spec.b, spec.r_min)
    quadrants = _QUADRANTS[spec.allowed_half]
    sx, sy = quadrants[min(int(rng.random() * len(quadrants)), len(quadrants) - 1)]
    r_out = spec.a * spec.b / math.hypot(spec.b * math.cos(theta), spec.a * math.sin(theta))
    r = float(_radius(float(rng.random()), spec.r_min, r_out, mode))
    return _to_world(spec, sx * r * math.cos(theta), sy * r * math.sin(theta))


def sample_elliptical_half_annulus(
    spec: EllipticalAnnulusSpec,
    rng: np.random.Generator,
    mode: SamplingMode = DEFAULT_MODE,
    size: int | None = None,
):
    """Draw from the elliptical (half-)annulus without rejection.

    The quadrant angle comes from inverting the area CDF, is reflected into a
    quadrant picked uniformly among those on the allowed side, and the radius
    is drawn between ``r_min`` and the ellipse boundary at that angle.
    """
    if size is None:
        return Point(*_draw_elliptical(spec, rng, mode))
    theta = _invert_theta_array(QUADRANT_U_MAX * rng.random(size), spec.a, spec.b, spec.r_min)
    signs = np.array(_QUADRANTS[spec.allowed_half])[rng.integers(len(_QUADRANTS[spec.allowed_half]), size=size)]
    r = _radius(rng.random(size), spec.r_min, _ellipse_radius(theta, spec.a, spec.b), mode)
    north, east = _to_world(spec, signs[:, 0] * r * np.cos(theta), signs[:, 1] * r * np.sin(theta))
    return np.column_stack((north, east))


# Rejection baseline --------------------------------------------------------------


@dataclass(frozen=True)
class Rect:
    north_min: float
    north_max: float
    east_min: float
    east_max: float

    def __post_init__(self):
        if not (self.north_min < self.north_max and self.east_min < self.east_max):
            raise ValueError(f"degenerate rectangle {self!r}")

    @classmethod
    def around(cls, center: Point, half_side: float) -> "Rect":
        return cls(center.north - half_side, center.north + half_side, center.east - half_side, center.east + half_side)

    @property
    def area(self) -> float:
        return (self.north_max - self.north_min) * (self.east_max - self.east_min)

    def draw(self, rng: np.random.Generator) -> tuple[float, float]:
        return (
            self.north_min + (self.north_max - self.north_min) * rng.random(),
            self.east_min + (self.east_max - self.east_min) * rng.random(),
        )


class RejectionDraw(NamedTuple):
    point: Point
    rejected: int


def rejection_sample_rect(
    bounds: Rect,
    membership: Callable[[float, float], bool],
    rng: np.random.Generator,
    cap: int = DEFAULT_REJECTION_CAP,
) -> RejectionDraw:
    """Uniform draw over ``membership`` by rejection from ``bounds``."""
    for rejected in range(cap + 1):
        north, east = bounds.draw(rng)
        if membership(north, east):
            return RejectionDraw(Point(north, east), rejected)
    raise RegionTooSmallError(f"no draw accepted in {cap + 1} attempts")


# Area analysis and space switching ----------------------------------------------


def area_gain_annulus(r_min: float, r_max: float, half: bool = False) -> float:
    """Area of the bounding square of side ``2 r_max`` over the annulus area."""
    if not 0.0 <= r_min < r_max:
        raise ValueError(f"need 0 <= r_min < r_max, got {r_min}, {r_max}")
    gain = 4.0 / (math.pi * (1.0 - (r_min / r_max) ** 2))
    return 2.0 * gain if half else gain


def area_gain_elliptical(c_best: float, r_min: float, r_max: float) -> float:
    """Informed-ellipse area over elliptical-annulus area, start and goal ``2 r_max`` apart."""
    if not c_best > 2.0 * r_max:
        raise ValueError(f"need c_best > 2 r_max, got c_best={c_best}, r_max={r_max}")
    k = c_best * math.sqrt(c_best * c_best - 4.0 * r_max * r_max)
    return k / (k - 4.0 * r_min * r_min)


def elliptical_area_ratio(c_best: float, c_min: float, r_min: float) -> float:
    """Same ratio for arbitrary ``c_min``, from the semi-axes ``c_best/2`` and ``sqrt(c_best^2-c_min^2)/2``."""
    a = 0.5 * c_best
    b = 0.5 * math.sqrt(c_best * c_best - c_min * c_min)
    return a * b / (a * b - r_min * r_min)


def switch_threshold(c_min: float, r_max: float) -> float:
    """Solution cost below which the elliptical half-annulus is sampled."""
    if not (c_min >= 0.0 and r_max > 0.0):
        raise ValueError(f"need c_min >= 0 and r_max > 0, got {c_min}, {r_max}")
    h = 0.5 * c_min * c_min
    return math.sqrt(h + math.sqrt(h * h + r_max**4))


def switch_area_ratio(c_best: float, c_min: float, r_max: float) -> float:
    """Half-ellipse to outer-semicircle area ratio compared by the switching rule.

    The rule measures the ellipse with semi-axes ``c_best`` and
    ``sqrt(c_best^2 - c_min^2)``, so this equals one exactly at
    :func:`switch_threshold`.  The informed ellipse actually sampled has half
    those semi-axes, i.e. a quarter of this ratio.
    """
    return c_best * math.sqrt(c_best * c_best - c_min * c_min) / (r_max * r_max)


def select_space(c_best: float | None, c_min: float, r_max: float) -> SampleSpace:
    if c_best is None or not math.isfinite(c_best):
        return SampleSpace.HALF_ANNULUS
    if c_best < switch_threshold(c_min, r_max):
        return SampleSpace.ELLIPTICAL_HALF_ANNULUS
    return SampleSpace.HALF_ANNULUS
