"""RRT* over the COLREGs-compliant subset.

Nodes are waypoints; own ship sails the tree edges at constant speed, so a
node's arrival time is its path cost divided by that speed.  An edge is
feasible when the turn at its parent respects the minimum turning radius,
own ship never enters the target's ship domain while sailing it, and it
stays inside the compliant region.
"""
from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .encounter import CompliantRegion, ShipDomain, VesselState
from .geom import Point, TWO_PI, required_turning_radius
from .sampling import (
    DEFAULT_MODE,
    AnnulusSpec,
    EllipticalAnnulusSpec,
    Rect,
    SampleSpace,
    SamplingMode,
    _draw_elliptical,
    _draw_half_annulus,
    _to_world,
    switch_threshold,
)

# Slack on region membership (metres) so points on the boundary count as inside.
REGION_TOL = 1e-6


class Strategy(enum.Enum):
    RECT_REJECTION = "rect"
    INFORMED_RECT_REJECTION = "informed_rect"
    HALF_ANNULUS = "half_annulus"
    ELLIPTICAL_HALF_ANNULUS = "elliptical_half_annulus"


# Integer codes for the per-iteration log.
SPACE_CODES = {
    "rect": 0,
    "informed_rect": 1,
    SampleSpace.HALF_ANNULUS.value: 2,
    SampleSpace.ELLIPTICAL_HALF_ANNULUS.value: 3,
}
SPACE_NAMES = {v: k for k, v in SPACE_CODES.items()}
_RECT = SPACE_CODES["rect"]
_INFORMED = SPACE_CODES["informed_rect"]
_HALF_ANNULUS = SPACE_CODES[SampleSpace.HALF_ANNULUS.value]
_ELLIPTICAL = SPACE_CODES[SampleSpace.ELLIPTICAL_HALF_ANNULUS.value]


@dataclass(frozen=True)
class Waypoint:
    north: float
    east: float
    radius_of_acceptance: float

    def __post_init__(self):
        if not self.radius_of_acceptance > 0.0:
            raise ValueError(f"radius of acceptance must be positive, got {self.radius_of_acceptance}")

    @property
    def point(self) -> Point:
        return Point(self.north, self.east)


@dataclass
class PlannerParams:
    max_iterations: int = 2000
    steer_step: float = 400.0
    # None selects 2 * steer_step * sqrt(region area / pi).
    near_radius_constant: float | None = None
    # None selects default_radius_of_acceptance.
    goal_radius: float | None = None
    min_turning_radius: float = 100.0
    default_radius_of_acceptance: float = 200.0
    # Resolution of path re-simulation; None selects b_sd / (4 * closing speed).
    collision_check_dt: float | None = None
    seed: int = 0
    strategy: Strategy = Strategy.HALF_ANNULUS
    mode: SamplingMode = DEFAULT_MODE

    def __post_init__(self):
        self.strategy = Strategy(self.strategy)
        self.mode = SamplingMode(self.mode)
        for name in ("max_iterations", "steer_step", "min_turning_radius", "default_radius_of_acceptance"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("near_radius_constant", "goal_radius", "collision_check_dt"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ValueError(f"{name} must be positive, got {value}")

    @property
    def max_course_change(self) -> float:
        """Largest course change at a waypoint whose fillet radius is still >= R_min."""
        return 2.0 * math.atan(self.default_radius_of_acceptance / self.min_turning_radius)


@dataclass(frozen=True)
class Scenario:
    """Everything the planner needs: own ship, optional target, region and goal."""

    os: VesselState
    region: AnnulusSpec
    goal: Point
    tv: VesselState | None = None
    domain: ShipDomain | None = None

    def __post_init__(self):
        if self.os.speed <= 0.0:
            raise ValueError("own ship must be under way to plan a timed path")
        if self.tv is not None and self.domain is None:
            object.__setattr__(self, "domain", ShipDomain.from_length(self.tv.length))

    @classmethod
    def from_encounter(
        cls, os: VesselState, tv: VesselState, region: CompliantRegion, domain: ShipDomain | None = None
    ) -> "Scenario":
        return cls(os=os, region=region.to_annulus(), goal=region.goal_point, tv=tv, domain=domain)

    @property
    def start(self) -> Point:
        return self.os.position

    @property
    def c_min(self) -> float:
        return self.start.distance_to(self.goal)

    def collision_check_dt(self) -> float:
        """Time step bounding undetected domain penetration to a quarter of ``b_sd``."""
        if self.tv is None:
            return 1.0
        closing = self.os.speed + self.tv.speed
        return self.domain.b_sd / (4.0 * closing)


class PlanTree:
    """Array-backed RRT* tree.  Node 0 is the root."""

    def __init__(self, root: Point, capacity: int):
        self.capacity = capacity
        self.north = np.empty(capacity)
        self.east = np.empty(capacity)
        self.cost = np.empty(capacity)
        self.parent = np.full(capacity, -1, dtype=np.int64)
        # Compass course of the edge arriving at each node; NaN at the root.
        self.course_in = np.full(capacity, np.nan)
        self.children: list[set[int]] = []
        self.solutions: list[int] = []
        self.n = 0
        self.add(root.north, root.east, -1, 0.0)

    def __len__(self) -> int:
        return self.n

    def add(self, north: float, east: float, parent: int, cost: float) -> int:
        if self.n >= self.capacity:
            self._grow()
        i = self.n
        self.north[i] = north
        self.east[i] = east
        self.cost[i] = cost
        self.parent[i] = parent
        self.children.append(set())
        if parent >= 0:
            self.course_in[i] = math.atan2(east - self.east[parent], north - self.north[parent])
            self.children[parent].add(i)
        self.n += 1
        return i

    def _grow(self):
        extra = max(self.capacity, 16)
        self.north = np.concatenate((self.north, np.empty(extra)))
        self.east = np.concatenate((self.east, np.empty(extra)))
        self.cost = np.concatenate((self.cost, np.empty(extra)))
        self.parent = np.concatenate((self.parent, np.full(extra, -1, dtype=np.int64)))
        self.course_in = np.concatenate((self.course_in, np.full(extra, np.nan)))
        self.capacity += extra

    def position(self, i: int) -> Point:
        return Point(float(self.north[i]), float(self.east[i]))

    def edges(self) -> set[tuple[int, int]]:
        return {(int(self.parent[i]), i) for i in range(1, self.n)}

    def subtree(self, i: int) -> list[int]:
        out = [i]
        k = 0
        while k < len(out):
            out.extend(self.children[out[k]])
            k += 1
        return out

    def path_to(self, i: int) -> list[int]:
        out = [i]
        while self.parent[out[-1]] >= 0:
            out.append(int(self.parent[out[-1]]))
            if len(out) > self.n:
                raise RuntimeError("parent links contain a cycle")
        out.reverse()
        return out

    def recomputed_costs(self) -> np.ndarray:
        """Root-path length of every node, summed leg by leg from scratch."""
        out = np.empty(self.n)
        for i in range(self.n):
            legs = self.path_to(i)
            total = 0.0
            for p, c in zip(legs, legs[1:]):
                total += math.hypot(self.north[c] - self.north[p], self.east[c] - self.east[p])
            out[i] = total
        return out


# Tree queries ------------------------------------------------------------------


def nearest_node(tree: PlanTree, point: Point) -> int:
    """Index of the node closest to ``point``; ties go to the lowest index."""
    n = tree.n
    d2 = (tree.north[:n] - point.north) ** 2 + (tree.east[:n] - point.east) ** 2
    return int(np.argmin(d2))


def near_radius(n_nodes: int, params: PlannerParams, region_area: float) -> float:
    """Shrinking-ball radius ``min(gamma sqrt(log n / n), steer_step)``."""
    if n_nodes < 2:
        return 0.0
    gamma = params.near_radius_constant
    if gamma is None:
        gamma = 2.0 * params.steer_step * math.sqrt(region_area / math.pi)
    return min(gamma * math.sqrt(math.log(n_nodes) / n_nodes), params.steer_step)


def near_nodes(tree: PlanTree, point: Point, radius: float) -> np.ndarray:
    """Indices of nodes within ``radius`` of ``point`` (boundary included)."""
    n = tree.n
    d2 = (tree.north[:n] - point.north) ** 2 + (tree.east[:n] - point.east) ** 2
    return np.flatnonzero(d2 <= radius * radius)


def extend_towards(origin: Point, target: Point, steer_step: float) -> Point:
    """``target`` if within one step, else the point one step along the way."""
    dn = target.north - origin.north
    de = target.east - origin.east
    dist = math.hypot(dn, de)
    if dist == 0.0:
        raise ValueError("cannot steer towards the node's own position")
    if dist <= steer_step:
        return target
    k = steer_step / dist
    return Point(origin.north + k * dn, origin.east + k * de)


# Feasibility ------------------------------------------------------------------------


class _EdgeChecker:
    """Feasibility tests with the scenario constants unpacked for speed."""

    def __init__(self, scenario: Scenario, params: PlannerParams):
        self.speed = scenario.os.speed
        self.max_turn = params.max_course_change
        region = scenario.region
        self.cn = region.center.north
        self.ce = region.center.east
        self.r_in = region.r_min
        self.r_out = region.r_max
        self.arc = region.allowed_arc
        self.tv = scenario.tv
        if scenario.tv is not None:
            tv = scenario.tv
            self.q0n = tv.position.north
            self.q0e = tv.position.east
            self.vn, self.ve = tv.velocity
            self.hn, self.he = math.cos(tv.heading), math.sin(tv.heading)
            self.inv_a2 = 1.0 / (0.5 * scenario.domain.a_sd) ** 2
            self.inv_b2 = 1.0 / (0.5 * scenario.domain.b_sd) ** 2
            self.reach = 0.5 * scenario.domain.a_sd
        self.tree: PlanTree | None = None

    def track_offset(self, n: float, e: float) -> float:
        """Signed distance from the target's (infinite) track line."""
        return -(n - self.q0n) * self.he + (e - self.q0e) * self.hn

    def far_from_track(self, p: int, qn: float, qe: float) -> bool:
        """True if the edge from node ``p`` to (qn, qe) can never meet the target's domain."""
        if self.tv is None:
            return True
        t = self.tree
        d0 = self.track_offset(float(t.north[p]), float(t.east[p]))
        d1 = self.track_offset(qn, qe)
        return (d0 > self.reach and d1 > self.reach) or (d0 < -self.reach and d1 < -self.reach)

    def turn_ok(self, course_in: float, course_out: float) -> bool:
        if course_in != course_in:  # NaN: no incoming leg
            return True
        d = abs(math.remainder(course_out - course_in, TWO_PI))
        return d <= self.max_turn

    def point_in_region(self, n: float, e: float, check_arc: bool = True) -> bool:
        dn = n - self.cn
        de = e - self.ce
        r = math.hypot(dn, de)
        if r > self.r_out + REGION_TOL or r < self.r_in - REGION_TOL:
            return False
        if not check_arc or self.arc.is_full or r == 0.0:
            return True
        return self.arc.contains(math.atan2(de, dn), tol=REGION_TOL / max(r, 1.0))

    def segment_clears_inner(self, pn, pe, qn, qe) -> bool:
        if self.r_in <= 0.0:
            return True
        dn, de = qn - pn, qe - pe
        l2 = dn * dn + de * de
        t = 0.0 if l2 == 0.0 else ((self.cn - pn) * dn + (self.ce - pe) * de) / l2
        t = min(max(t, 0.0), 1.0)
        return math.hypot(pn + t * dn - self.cn, pe + t * de - self.ce) >= self.r_in - REGION_TOL

    def domain_clear(self, pn, pe, qn, qe, t0) -> bool:
        """Exact continuous-time check of one edge against the target's domain."""
        if self.tv is None:
            return True
        dn, de = qn - pn, qe - pe
        length = math.hypot(dn, de)
        if length == 0.0:
            return True
        duration = length / self.speed
        # Relative position at edge start and its rate of change.
        rn = pn - (self.q0n + self.vn * t0)
        re = pe - (self.q0e + self.ve * t0)
        wn = dn / duration - self.vn
        we = de / duration - self.ve
        a0 = rn * self.hn + re * self.he
        a1 = wn * self.hn + we * self.he
        b0 = -rn * self.he + re * self.hn
        b1 = -wn * self.he + we * self.hn
        curv = a1 * a1 * self.inv_a2 + b1 * b1 * self.inv_b2
        s = 0.0
        if curv > 0.0:
            s = -(a0 * a1 * self.inv_a2 + b0 * b1 * self.inv_b2) / curv
            s = min(max(s, 0.0), duration)
        along = a0 + a1 * s
        across = b0 + b1 * s
        return along * along * self.inv_a2 + across * across * self.inv_b2 > 1.0

    def domain_clear_many(self, pn, pe, qn, qe, t0) -> bool:
        """Vectorised :meth:`domain_clear` over arrays of edges; True if all clear."""
        if self.tv is None or len(pn) == 0:
            return True
        dn, de = qn - pn, qe - pe
        length = np.hypot(dn, de)
        duration = np.maximum(length / self.speed, 1e-12)
        rn = pn - (self.q0n + self.vn * t0)
        re = pe - (self.q0e + self.ve * t0)
        wn = dn / duration - self.vn
        we = de / duration - self.ve
        a0 = rn * self.hn + re * self.he
        a1 = wn * self.hn + we * self.he
        b0 = -rn * self.he + re * self.hn
        b1 = -wn * self.he + we * self.hn
        curv = a1 * a1 * self.inv_a2 + b1 * b1 * self.inv_b2
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.where(curv > 0.0, -(a0 * a1 * self.inv_a2 + b0 * b1 * self.inv_b2) / curv, 0.0)
        s = np.clip(s, 0.0, np.where(length > 0.0, duration, 0.0))
        along = a0 + a1 * s
        across = b0 + b1 * s
        return bool(np.all(along * along * self.inv_a2 + across * across * self.inv_b2 > 1.0))

    def edge_ok(self, pn, pe, course_in, cost_p, qn, qe, check_arc_end=True) -> bool:
        if not self.turn_ok(course_in, math.atan2(qe - pe, qn - pn)):
            return False
        if not self.point_in_region(qn, qe, check_arc_end):
            return False
        if not self.segment_clears_inner(pn, pe, qn, qe):
            return False
        return self.domain_clear(pn, pe, qn, qe, cost_p / self.speed)


def feasible_edge(
    tree: PlanTree,
    parent: int,
    candidate: Point,
    scenario: Scenario,
    params: PlannerParams,
) -> bool:
    """Whether own ship may sail from node ``parent`` to ``candidate``.

    The grandparent is read from the tree; at the root there is no turn to
    check.  The root itself is exempt from the arc test since the start
    position is given.
    """
    checker = _EdgeChecker(scenario, params)
    return checker.edge_ok(
        float(tree.north[parent]),
        float(tree.east[parent]),
        float(tree.course_in[parent]),
        float(tree.cost[parent]),
        candidate.north,
        candidate.east,
    )


def turn_feasible(prev: Point, corner: Point, nxt: Point, params: PlannerParams) -> bool:
    """Waypoint-triple check through the fillet radius formula."""
    leg_in = prev.bearing_to(corner)
    leg_out = corner.bearing_to(nxt)
    try:
        radius = required_turning_radius(params.default_radius_of_acceptance, leg_in, leg_out)
    except ValueError:
        return False
    return radius >= params.min_turning_radius * (1.0 - 1e-9)


# Planning ------------------------------------------------------------------------------


@dataclass
class IterationLog:
    c_best: np.ndarray
    elapsed: np.ndarray
    space: np.ndarray
    accepted_sample: np.ndarray

    @property
    def spaces(self) -> list[str]:
        return [SPACE_NAMES[int(c)] for c in self.space]


@dataclass
class PlanResult:
    path: list[Waypoint] | None
    tree: PlanTree
    log: IterationLog
    cost: float | None
    samples_to_first_solution: int | None
    rejected_draws: int
    wall_time: float
    c_min: float
    switch_threshold: float
    scenario: Scenario = field(repr=False)

    @property
    def solved(self) -> bool:
        return self.path is not None


class _Planner:
    def __init__(self, scenario: Scenario, params: PlannerParams):
        self.scenario = scenario
        self.params = params
        self.check = _EdgeChecker(scenario, params)
        region = scenario.region
        self.region = region
        self.rng = np.random.default_rng(params.seed)
        self.tree = PlanTree(scenario.start, params.max_iterations + 1)
        self.check.tree = self.tree
        self.best_cost = math.inf
        self.goal = scenario.goal
        self.goal_radius = params.goal_radius or params.default_radius_of_acceptance
        self.c_min = scenario.c_min
        self.gamma = switch_threshold(self.c_min, region.r_max)
        self.region_area = region.area
        self.rect = Rect.around(region.center, region.r_max)
        self.allowed_half = _ellipse_side(scenario)
        self._ellipse_cache: tuple[float, EllipticalAnnulusSpec] | None = None
        # Distance from each solution node to the goal, by node index.
        self.goal_leg: dict[int, float] = {}
        self._try_solution(0)

    # Sampling ----------------------------------------------------------------

    def _ellipse(self, c_best: float, hole: bool = True) -> EllipticalAnnulusSpec | None:
        key = (c_best, hole)
        if self._ellipse_cache is not None and self._ellipse_cache[0] == key:
            return self._ellipse_cache[1]
        start, goal = self.scenario.start, self.goal
        mid = Point(0.5 * (start.north + goal.north), 0.5 * (start.east + goal.east))
        b = 0.5 * math.sqrt(max(c_best * c_best - self.c_min * self.c_min, 0.0))
        if b <= 0.0:
            return None
        if hole:
            # Largest circle about the ellipse centre that stays inside the keep-out disk.
            r_hole = max(0.0, self.region.r_min - mid.distance_to(self.region.center))
            r_hole = min(r_hole, b * (1.0 - 1e-9))
            spec = EllipticalAnnulusSpec.informed(start, goal, c_best, r_hole, self.allowed_half)
        else:
            spec = EllipticalAnnulusSpec.informed(start, goal, c_best)
        self._ellipse_cache = (key, spec)
        return spec

    def sample(self, c_best: float):
        """One draw from the strategy's space: ((north, east), space code, valid).

        ``valid`` is False for a draw outside the compliant region (or, for the
        informed rectangle, outside the ellipse).  The direct samplers only
        produce those where the ellipse's concentric hole is smaller than the
        keep-out circle.
        """
        strategy = self.params.strategy
        mode = self.params.mode
        rng = self.rng
        solved = math.isfinite(c_best)
        if strategy is Strategy.HALF_ANNULUS:
            point, code = _draw_half_annulus(self.region, rng, mode), _HALF_ANNULUS
        elif strategy is Strategy.ELLIPTICAL_HALF_ANNULUS:
            spec = None
            if solved and c_best < self.gamma:
                spec = self._ellipse(c_best)
            if spec is None:
                point, code = _draw_half_annulus(self.region, rng, mode), _HALF_ANNULUS
            else:
                point, code = _draw_elliptical(spec, rng, mode), _ELLIPTICAL
        else:
            point, code = None, _RECT
            if strategy is Strategy.INFORMED_RECT_REJECTION and solved:
                spec = self._ellipse(c_best, hole=False)
                if spec is not None and 4.0 * spec.a * spec.b < self.rect.area:
                    code = _INFORMED
                    x = spec.a * (2.0 * rng.random() - 1.0)
                    y = spec.b * (2.0 * rng.random() - 1.0)
                    point = _to_world(spec, x, y)
                    if (x / spec.a) ** 2 + (y / spec.b) ** 2 > 1.0:
                        return point, code, False
            if point is None:
                point = self.rect.draw(rng)
        return point, code, self.region.contains(point[0], point[1], tol=REGION_TOL)

    # Tree growth -------------------------------------------------------------------

    def c_best(self) -> float:
        return self.best_cost

    def best_solution(self) -> int | None:
        if not self.tree.solutions:
            return None
        tree = self.tree
        return min(tree.solutions, key=lambda i: (float(tree.cost[i]) + self.goal_leg[i], i))

    def _edge_from(self, p: int, qn: float, qe: float) -> bool:
        t = self.tree
        return self.check.edge_ok(
            float(t.north[p]), float(t.east[p]), float(t.course_in[p]), float(t.cost[p]), qn, qe
        )

    def _goal_leg_ok(self, i: int) -> bool:
        t = self.tree
        pn, pe = float(t.north[i]), float(t.east[i])
        gn, ge = self.goal.north, self.goal.east
        if pn == gn and pe == ge:
            return True
        ck = self.check
        if not ck.turn_ok(float(t.course_in[i]), math.atan2(ge - pe, gn - pn)):
            return False
        if not ck.point_in_region(gn, ge, check_arc=False):
            return False
        if not ck.segment_clears_inner(pn, pe, gn, ge):
            return False
        return ck.domain_clear(pn, pe, gn, ge, float(t.cost[i]) / ck.speed)

    def step(self, point, valid: bool = True) -> bool:
        """Grow the tree towards ``point``; False when the draw was rejected.

        Steering happens before the validity test, so a rejected draw costs a
        nearest-node query just like an accepted one.
        """
        tree = self.tree
        params = self.params
        rn, re = point
        n = tree.n
        d2 = (tree.north[:n] - rn) ** 2 + (tree.east[:n] - re) ** 2
        nearest = int(np.argmin(d2))
        dist = math.sqrt(float(d2[nearest]))
        if dist > params.steer_step:
            k = params.steer_step / dist
            qn = float(tree.north[nearest]) + k * (rn - float(tree.north[nearest]))
            qe = float(tree.east[nearest]) + k * (re - float(tree.east[nearest]))
        else:
            qn, qe = rn, re
        if not valid:
            return False
        if dist == 0.0 or not self._edge_from(nearest, qn, qe):
            return True

        radius = near_radius(n + 1, params, self.region_area)
        dq = np.sqrt((tree.north[:n] - qn) ** 2 + (tree.east[:n] - qe) ** 2)
        near = np.flatnonzero(dq <= radius)

        best = nearest
        best_cost = float(tree.cost[nearest]) + float(dq[nearest])
        if near.size:
            via = tree.cost[near] + dq[near]
            order = np.argsort(via, kind="stable")
            for k in order:
                c = float(via[k])
                if c >= best_cost:
                    break
                z = int(near[k])
                if z != nearest and self._edge_from(z, qn, qe):
                    best, best_cost = z, c
                    break

        new = tree.add(qn, qe, best, best_cost)
        self.rewire(new, near, dq)

        self._try_solution(new)
        return True

    def _try_solution(self, i: int) -> None:
        tree = self.tree
        leg = math.hypot(float(tree.north[i]) - self.goal.north, float(tree.east[i]) - self.goal.east)
        if leg <= self.goal_radius and self._goal_leg_ok(i):
            tree.solutions.append(i)
            self.goal_leg[i] = leg
            self.best_cost = min(self.best_cost, float(tree.cost[i]) + leg)

    def rewire(self, new: int, near: np.ndarray, dist_to_new: np.ndarray) -> int:
        """Re-parent near nodes through ``new`` where that is cheaper and safe."""
        tree = self.tree
        if near.size == 0:
            return 0
        c_new = float(tree.cost[new])
        via = c_new + dist_to_new[near]
        improving = near[via < tree.cost[near]]
        count = 0
        nn, ne = float(tree.north[new]), float(tree.east[new])
        for z in improving:
            z = int(z)
            if z == new or z == tree.parent[new]:
                continue
            zn, ze = float(tree.north[z]), float(tree.east[z])
            new_cost = c_new + math.hypot(zn - nn, ze - ne)
            old_cost = float(tree.cost[z])
            if not new_cost < old_cost:
                continue
            if not self.check.edge_ok(nn, ne, float(tree.course_in[new]), c_new, zn, ze):
                continue
            course = math.atan2(ze - ne, zn - nn)
            if not self._subtree_ok(z, course, new_cost - old_cost):
                continue
            self._reparent(z, new, course, new_cost - old_cost)
            count += 1
        return count

    def _subtree_ok(self, z: int, course: float, shift: float) -> bool:
        tree = self.tree
        ck = self.check
        children = tree.children[z]
        for child in children:
            if not ck.turn_ok(course, float(tree.course_in[child])):
                return False
        goal_leg = self.goal_leg
        gn, ge = self.goal.north, self.goal.east
        if z in goal_leg:
            zn, ze = float(tree.north[z]), float(tree.east[z])
            if not (zn == gn and ze == ge) and not ck.turn_ok(course, math.atan2(ge - ze, gn - zn)):
                return False
        if ck.tv is None or (not children and z not in goal_leg):
            return True
        nodes = tree.subtree(z)
        # Edges (parent, child, end north, end east) whose timing moves with the shift.
        edges = [(int(tree.parent[c]), c, float(tree.north[c]), float(tree.east[c])) for c in nodes[1:]]
        edges += [(i, i, gn, ge) for i in nodes if i in goal_leg]
        near_track = [e for e in edges if not ck.far_from_track(e[0], e[2], e[3])]
        if not near_track:
            return True
        if len(near_track) <= 8:
            for p, _, qn, qe in near_track:
                t0 = (float(tree.cost[p]) + shift) / ck.speed
                if not ck.domain_clear(float(tree.north[p]), float(tree.east[p]), qn, qe, t0):
                    return False
            return True
        par = np.array([e[0] for e in near_track], dtype=np.int64)
        return ck.domain_clear_many(
            tree.north[par],
            tree.east[par],
            np.array([e[2] for e in near_track]),
            np.array([e[3] for e in near_track]),
            (tree.cost[par] + shift) / ck.speed,
        )

    def _reparent(self, z: int, new: int, course: float, shift: float) -> None:
        tree = self.tree
        old = int(tree.parent[z])
        tree.children[old].discard(z)
        tree.children[new].add(z)
        tree.parent[z] = new
        tree.course_in[z] = course
        nodes = tree.subtree(z)
        tree.cost[np.array(nodes, dtype=np.int64)] += shift
        for i in nodes:
            leg = self.goal_leg.get(i)
            if leg is not None:
                self.best_cost = min(self.best_cost, float(tree.cost[i]) + leg)

    def run(self) -> PlanResult:
        params = self.params
        n_iter = params.max_iterations
        c_log = np.empty(n_iter)
        t_log = np.empty(n_iter)
        s_log = np.empty(n_iter, dtype=np.int8)
        accepted = np.zeros(n_iter, dtype=bool)
        rejected = 0
        # A start already inside the goal disk counts as solved by the first sample.
        first = 1 if self.tree.solutions else None
        c_best = math.inf
        t0 = time.perf_counter()
        for it in range(n_iter):
            c_best = self.best_cost
            point, code, valid = self.sample(c_best)
            s_log[it] = code
            if not self.step(point, valid):
                rejected += 1
            else:
                accepted[it] = True
                c_best = self.best_cost
                if first is None and self.tree.solutions:
                    first = it + 1
            c_log[it] = c_best
            t_log[it] = time.perf_counter() - t0
        wall = time.perf_counter() - t0
        log = IterationLog(c_log, t_log, s_log, accepted)
        best = self.best_solution()
        path = None if best is None else self._extract(best)
        return PlanResult(
            path=path,
            tree=self.tree,
            log=log,
            cost=None if best is None else self.c_best(),
            samples_to_first_solution=first,
            rejected_draws=rejected,
            wall_time=wall,
            c_min=self.c_min,
            switch_threshold=self.gamma,
            scenario=self.scenario,
        )

    def _extract(self, best: int) -> list[Waypoint]:
        return _waypoints(self.tree, best, self.goal, self.params.default_radius_of_acceptance)


def _ellipse_side(scenario: Scenario) -> int:
    """Which side of the start-goal line the compliant arc lies on."""
    arc = scenario.region.allowed_arc
    if arc.is_full:
        return 0
    start, goal = scenario.start, scenario.goal
    phi = start.bearing_to(goal)
    mid = arc.mid
    # Minor-axis unit vector points to starboard of the start->goal line.
    side = math.cos(mid) * -math.sin(phi) + math.sin(mid) * math.cos(phi)
    if abs(side) < 1e-3:
        return 0
    return 1 if side > 0.0 else -1


def _waypoints(tree: PlanTree, node: int, goal: Point, radius: float) -> list[Waypoint]:
    out = [Waypoint(float(tree.north[i]), float(tree.east[i]), radius) for i in tree.path_to(node)]
    last = out[-1]
    if (last.north, last.east) != (goal.north, goal.east):
        out.append(Waypoint(goal.north, goal.east, radius))
    return out


def plan(scenario: Scenario, params: PlannerParams) -> PlanResult:
    """Run RRT* for ``params.max_iterations`` sampling iterations.

    Every iteration draws one sample.  With the rejection strategies a draw
    outside the compliant region uses up its iteration without touching the
    tree.  The result carries the tree and log even when no path was found.
    """
    return _Planner(scenario, params).run()


def rewire(
    tree: PlanTree, new_node: int, near_set, scenario: Scenario, params: PlannerParams, goal_leg: dict | None = None
) -> int:
    """Standalone rewiring step on an existing tree; returns the number of re-parented nodes."""
    planner = _Planner.__new__(_Planner)
    planner.scenario = scenario
    planner.params = params
    planner.check = _EdgeChecker(scenario, params)
    planner.tree = tree
    planner.goal = scenario.goal
    planner.check.tree = tree
    planner.goal_leg = goal_leg if goal_leg is not None else {}
    planner.best_cost = math.inf
    near = np.asarray(near_set, dtype=np.int64)
    n = tree.n
    dq = np.hypot(tree.north[:n] - tree.north[new_node], tree.east[:n] - tree.east[new_node])
    return planner.rewire(new_node, near, dq)


def extract_path(result_or_tree, goal: Point | None = None, radius: float | None = None) -> list[Waypoint] | None:
    """Waypoints from the root to the cheapest solution, ending at the goal.

    Accepts a :class:`PlanResult`, or a tree plus goal and radius (the tree's
    solutions are then ranked by cost plus the final leg to the goal).
    Returns ``None`` when there is no solution.
    """
    if isinstance(result_or_tree, PlanResult):
        return result_or_tree.path
    tree = result_or_tree
    if not tree.solutions:
        return None
    best = min(
        tree.solutions,
        key=lambda i: (float(tree.cost[i]) + math.hypot(tree.north[i] - goal.north, tree.east[i] - goal.east), i),
    )
    return _waypoints(tree, best, goal, radius)


def path_length(path: list[Waypoint]) -> float:
    return sum(math.hypot(b.north - a.north, b.east - a.east) for a, b in zip(path, path[1:]))


def resimulate(path: list[Waypoint], speed: float, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Own-ship positions along ``path`` every ``dt`` seconds, endpoints included.

    Returns ``(times, positions)`` with positions as (north, east) rows.
    """
    pts = np.array([(w.north, w.east) for w in path])
    legs = np.hypot(*np.diff(pts, axis=0).T)
    arrive = np.concatenate(([0.0], np.cumsum(legs))) / speed
    times = np.arange(0.0, arrive[-1], dt)
    times = np.append(times, arrive[-1])
    north = np.interp(times, arrive, pts[:, 0])
    east = np.interp(times, arrive, pts[:, 1])
    return times, np.column_stack((north, east))
