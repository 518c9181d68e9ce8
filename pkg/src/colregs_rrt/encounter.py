"""Vessel kinematics, CPA/TCPA, ship-domain checks and COLREGs classification.

Positions are North-East metres, speeds m/s, headings compass radians.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import DegenerateGeometryError, InfeasibleGeometryError, NoActionRequiredError
from .geom import Arc, Point, normalize_angle, signed_angle
from .sampling import AnnulusSpec

# Relative speeds below this make CPA/TCPA meaningless.
EPS_RELATIVE_SPEED = 1e-6

HEAD_ON_HALF_WIDTH = math.radians(3.5)
STERN_SECTOR_LIMIT = math.radians(112.5)

# Outer radius is grown to this multiple of (start distance + d_act) when
# t_act alone would leave the start outside the search space.
OUTER_RADIUS_MARGIN = 1.2


@dataclass(frozen=True)
class VesselState:
    position: Point
    speed: float
    heading: float
    length: float = 100.0

    def __post_init__(self):
        if not (self.speed >= 0.0 and math.isfinite(self.speed)):
            raise ValueError(f"speed must be finite and non-negative, got {self.speed}")
        if not self.length > 0.0:
            raise ValueError(f"length must be positive, got {self.length}")
        object.__setattr__(self, "heading", normalize_angle(self.heading))

    @property
    def velocity(self) -> tuple[float, float]:
        return (self.speed * math.cos(self.heading), self.speed * math.sin(self.heading))

    def position_at(self, t: float) -> Point:
        vn, ve = self.velocity
        return Point(self.position.north + vn * t, self.position.east + ve * t)


@dataclass(frozen=True)
class ShipDomain:
    """Elliptical comfort zone; ``a_sd`` and ``b_sd`` are full axis lengths."""

    a_sd: float
    b_sd: float

    def __post_init__(self):
        if not (self.a_sd >= self.b_sd > 0.0):
            raise ValueError(f"ship domain needs a_sd >= b_sd > 0, got {self.a_sd}, {self.b_sd}")

    @classmethod
    def from_length(cls, length: float) -> "ShipDomain":
        return cls(8.0 * length, 3.2 * length)


class EncounterKind(enum.Enum):
    HEAD_ON = "head_on"
    CROSSING_GIVE_WAY = "crossing_give_way"
    CROSSING_STAND_ON = "crossing_stand_on"
    OVERTAKING_OWN = "overtaking_own"
    OVERTAKEN_BY_TARGET = "overtaken_by_target"
    NO_RISK = "no_risk"

    @property
    def requires_action(self) -> bool:
        return self in _ACTION_KINDS


_ACTION_KINDS = frozenset(
    {EncounterKind.HEAD_ON, EncounterKind.CROSSING_GIVE_WAY, EncounterKind.OVERTAKING_OWN}
)


@dataclass(frozen=True)
class EncounterAssessment:
    kind: EncounterKind
    cpa: float
    tcpa: float
    # Bearing of own ship as seen from the target vessel, in (-pi, pi].
    relative_bearing: float


@dataclass(frozen=True)
class CompliantRegion:
    center: Point
    r_min: float
    r_max: float
    allowed_arc: Arc
    goal_point: Point
    kind: EncounterKind | None = None

    def __post_init__(self):
        if not (0.0 < self.r_min < self.r_max):
            raise ValueError(f"compliant region needs 0 < r_min < r_max, got {self.r_min}, {self.r_max}")

    def to_annulus(self) -> AnnulusSpec:
        return AnnulusSpec(self.center, self.r_min, self.r_max, self.allowed_arc)

    def contains(self, point: Point, tol: float = 1e-6) -> bool:
        return self.to_annulus().contains(point.north, point.east, tol=tol)


def _relative_motion(os: VesselState, tv: VesselState):
    dpn = tv.position.north - os.position.north
    dpe = tv.position.east - os.position.east
    von, voe = os.velocity
    vtn, vte = tv.velocity
    return dpn, dpe, vtn - von, vte - voe


def tcpa(os: VesselState, tv: VesselState, eps: float = EPS_RELATIVE_SPEED) -> float:
    """Time at which the two vessels are closest, positive when still ahead.

    The textbook form ``-(dp . dv) / |dv|^2`` is used with ``dv`` taken as the
    target's velocity relative to own ship, so approaching vessels get a
    positive value.
    """
    dpn, dpe, dvn, dve = _relative_motion(os, tv)
    dv2 = dvn * dvn + dve * dve
    if math.sqrt(dv2) < eps:
        raise DegenerateGeometryError("vessels share the same velocity; TCPA is undefined")
    return -(dpn * dvn + dpe * dve) / dv2


def cpa(os: VesselState, tv: VesselState, eps: float = EPS_RELATIVE_SPEED) -> float:
    """Separation at the closest point of approach.

    A closest approach in the past is not re-lived: the time is clamped to
    zero so diverging vessels report their current distance.
    """
    t = max(tcpa(os, tv, eps), 0.0)
    dpn, dpe, dvn, dve = _relative_motion(os, tv)
    return math.hypot(dpn + dvn * t, dpe + dve * t)


def domain_violated(os_position: Point, tv: VesselState, domain: ShipDomain) -> bool:
    """True when own ship sits inside (or on) the target's domain ellipse."""
    dn = os_position.north - tv.position.north
    de = os_position.east - tv.position.east
    s, c = math.sin(tv.heading), math.cos(tv.heading)
    along = de * s + dn * c
    across = de * c - dn * s
    half_a = 0.5 * domain.a_sd
    half_b = 0.5 * domain.b_sd
    return (along / half_a) ** 2 + (across / half_b) ** 2 <= 1.0


def relative_bearing(observer: VesselState, observed_position: Point) -> float:
    """Signed angle from the observer's heading to the line of sight.

    Positive to starboard; the result lies in (-pi, pi].
    """
    dn = observed_position.north - observer.position.north
    de = observed_position.east - observer.position.east
    if dn == 0.0 and de == 0.0:
        raise ValueError("observer and observed positions coincide")
    return signed_angle(math.atan2(de, dn) - observer.heading)


def classify_encounter(os: VesselState, tv: VesselState, d_act: float, t_act: float) -> EncounterAssessment:
    """Identify the COLREGs situation from own ship's point of view.

    The sector is read from the bearing of own ship as seen from the target.
    A target coming up from abaft own ship's beam is an overtaking target
    (own ship stands on) whatever its bow sector says.
    """
    if not (d_act > 0.0 and t_act > 0.0):
        raise ValueError(f"d_act and t_act must be positive, got {d_act}, {t_act}")
    t = tcpa(os, tv)
    c = cpa(os, tv)
    beta = relative_bearing(tv, os.position)

    if not (0.0 < t <= t_act and c < d_act):
        kind = EncounterKind.NO_RISK
    elif abs(beta) > STERN_SECTOR_LIMIT:
        kind = EncounterKind.OVERTAKING_OWN if os.speed > tv.speed else EncounterKind.OVERTAKEN_BY_TARGET
    elif abs(relative_bearing(os, tv.position)) > STERN_SECTOR_LIMIT:
        kind = EncounterKind.OVERTAKEN_BY_TARGET
    elif abs(beta) <= HEAD_ON_HALF_WIDTH:
        kind = EncounterKind.HEAD_ON
    elif beta > 0.0:
        kind = EncounterKind.CROSSING_STAND_ON
    else:
        kind = EncounterKind.CROSSING_GIVE_WAY
    return EncounterAssessment(kind, c, t, beta)


def _allowed_arc(kind: EncounterKind, tv_heading: float) -> Arc:
    if kind is EncounterKind.HEAD_ON:
        # Half-plane on the target's port side of its course line.
        return Arc(tv_heading - math.pi, math.pi)
    if kind is EncounterKind.CROSSING_GIVE_WAY:
        # Half-plane astern of the target's beam line.
        return Arc(tv_heading + 0.5 * math.pi, math.pi)
    return Arc.full()


def _ray_circle_exit(start: Point, heading: float, center: Point, radius: float) -> Point:
    dn = start.north - center.north
    de = start.east - center.east
    hn, he = math.cos(heading), math.sin(heading)
    proj = dn * hn + de * he
    disc = proj * proj - (dn * dn + de * de) + radius * radius
    if disc < 0.0:
        raise InfeasibleGeometryError("nominal route never reaches the outer circle")
    t = -proj + math.sqrt(disc)
    return Point(start.north + hn * t, start.east + he * t)


def compliant_region(
    os: VesselState,
    tv: VesselState,
    assessment: EncounterAssessment,
    d_act: float,
    t_act: float,
) -> CompliantRegion:
    """Build the annulus (or half-annulus) in which the deviation is planned.

    The keep-out circle of radius ``d_act`` is centred on the target's
    position at TCPA.  The outer radius is ``V_os * t_act`` grown, if needed,
    so the start sits well inside it.  The goal is where own ship's nominal
    course leaves the outer circle.
    """
    if not assessment.kind.requires_action:
        if assessment.kind is EncounterKind.NO_RISK:
            raise NoActionRequiredError("no risk of collision: no action required")
        raise NoActionRequiredError(f"stand-on: no action required ({assessment.kind.value})")
    center = tv.position_at(max(assessment.tcpa, 0.0))
    start_distance = os.position.distance_to(center)
    if start_distance <= d_act:
        raise InfeasibleGeometryError(
            f"own ship starts {start_distance:.1f} m from the CPA point, inside d_act={d_act} m"
        )
    r_max = max(os.speed * t_act, OUTER_RADIUS_MARGIN * (start_distance + d_act))
    goal = _ray_circle_exit(os.position, os.heading, center, r_max)
    return CompliantRegion(
        center=center,
        r_min=d_act,
        r_max=r_max,
        allowed_arc=_allowed_arc(assessment.kind, tv.heading),
        goal_point=goal,
        kind=assessment.kind,
    )
