"""Scenario files: JSON description of an encounter plus planner settings.

A scenario file looks like::

    {
      "schema_version": 1,
      "name": "crossing",
      "own_ship": {"north": 0, "east": 0, "heading_deg": 0,
                   "speed": 10, "speed_unit": "m/s", "length": 50},
      "target_vessel": {"north": 2000, "east": 1600, "heading_deg": 270,
                        "speed": 8, "speed_unit": "m/s", "length": 50},
      "d_act": 500, "t_act": 300, "R_min": 100,
      "planner": {"steer_step": 500, "goal_radius": 500}
    }

``target_vessel`` may be ``null`` for open-water runs, in which case a
``region`` block (``center``, ``r_min``, ``r_max``, optional ``arc_start_deg``
and ``arc_width_deg``) and a ``goal`` are required.  ``nominal_route`` is an
optional list of ``[north, east]`` points after the start; when present the
goal is where that polyline leaves the outer circle instead of where own
ship's current heading does.
"""
from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass, fields
from pathlib import Path

from .encounter import (
    CompliantRegion,
    EncounterAssessment,
    ShipDomain,
    VesselState,
    classify_encounter,
    compliant_region,
)
from .errors import InfeasibleGeometryError, ScenarioError
from .geom import Arc, Point
from .planner import PlannerParams, Scenario
from .sampling import AnnulusSpec

SCHEMA_VERSION = 1
KNOT = 1852.0 / 3600.0
SPEED_UNITS = {"m/s": 1.0, "kn": KNOT, "knots": KNOT}

# Keys of the "planner" block mapped onto PlannerParams fields.
PLANNER_KEYS = {
    "max_iterations",
    "steer_step",
    "near_radius_constant",
    "goal_radius",
    "default_radius_of_acceptance",
    "collision_check_dt",
    "seed",
    "strategy",
    "mode",
}


@dataclass
class LoadedScenario:
    name: str
    os: VesselState
    tv: VesselState | None
    d_act: float | None
    t_act: float | None
    params: PlannerParams
    sha256: str
    raw: dict
    assessment: EncounterAssessment | None = None
    region: CompliantRegion | None = None
    planning: Scenario | None = None
    source: str | None = None


class _Locator:
    """Best-effort line numbers for dotted field paths in JSON text."""

    def __init__(self, text: str | None):
        self.text = text

    def line(self, path: str) -> int | None:
        if not self.text:
            return None
        pos = 0
        found = None
        for key in path.split("."):
            if key.isdigit():
                continue
            m = re.compile(r'"%s"\s*:' % re.escape(key)).search(self.text, pos)
            if m is None:
                break
            pos = m.start()
            found = pos
        if found is None:
            return None
        return self.text.count("\n", 0, found) + 1


class _Reader:
    def __init__(self, data: dict, locator: _Locator):
        self.data = data
        self.loc = locator

    def fail(self, path: str, message: str):
        raise ScenarioError(message, field=path, line=self.loc.line(path))

    def get(self, obj, path: str, required=True, default=None):
        key = path.rsplit(".", 1)[-1]
        if not isinstance(obj, dict):
            self.fail(path.rsplit(".", 1)[0], "expected a JSON object")
        if key not in obj:
            if required:
                parent = path.rsplit(".", 1)[0] if "." in path else None
                line = self.loc.line(parent) if parent else None
                raise ScenarioError("required field is missing", field=path, line=line)
            return default
        return obj[key]

    def number(self, obj, path, required=True, default=None, positive=False, nonneg=False):
        value = self.get(obj, path, required, default)
        if value is None and not required:
            return default
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            self.fail(path, f"expected a finite number, got {value!r}")
        if positive and not value > 0:
            self.fail(path, f"must be positive, got {value}")
        if nonneg and value < 0:
            self.fail(path, f"must be non-negative, got {value}")
        return float(value)

    def pair(self, obj, path, required=True):
        value = self.get(obj, path, required)
        if value is None:
            return None
        if (
            not isinstance(value, (list, tuple))
            or len(value) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v) for v in value)
        ):
            self.fail(path, f"expected [north, east], got {value!r}")
        return Point(float(value[0]), float(value[1]))

    def vessel(self, path: str) -> VesselState:
        obj = self.get(self.data, path)
        if not isinstance(obj, dict):
            self.fail(path, "expected a JSON object")
        unit = self.get(obj, f"{path}.speed_unit")
        if unit not in SPEED_UNITS:
            self.fail(f"{path}.speed_unit", f"unknown unit {unit!r}; use one of {sorted(SPEED_UNITS)}")
        speed = self.number(obj, f"{path}.speed", nonneg=True) * SPEED_UNITS[unit]
        return VesselState(
            position=Point(self.number(obj, f"{path}.north"), self.number(obj, f"{path}.east")),
            speed=speed,
            heading=math.radians(self.number(obj, f"{path}.heading_deg")),
            length=self.number(obj, f"{path}.length", positive=True),
        )


def scenario_hash(text: str | bytes) -> str:
    if isinstance(text, str):
        text = text.encode("utf-8")
    return hashlib.sha256(text).hexdigest()


def _route_exit(start: Point, route: list[Point], center: Point, radius: float) -> Point | None:
    """First point where the polyline start -> route leaves the circle."""
    prev = start
    for nxt in route:
        dn, de = nxt.north - prev.north, nxt.east - prev.east
        fn, fe = prev.north - center.north, prev.east - center.east
        a = dn * dn + de * de
        if a > 0.0:
            b = fn * dn + fe * de
            c = fn * fn + fe * fe - radius * radius
            disc = b * b - a * c
            if disc >= 0.0:
                t = (-b + math.sqrt(disc)) / a
                if 0.0 <= t <= 1.0 and c <= 0.0:
                    return Point(prev.north + t * dn, prev.east + t * de)
        prev = nxt
    return None


def parse_scenario(data: dict, text: str | None = None, source: str | None = None) -> LoadedScenario:
    """Validate a decoded scenario and build the planning problem.

    Raises :class:`ScenarioError` for malformed input and
    :class:`~colregs_rrt.errors.NoActionRequiredError` when the encounter
    needs no manoeuvre from own ship.
    """
    r = _Reader(data, _Locator(text))
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a JSON object")
    version = r.get(data, "schema_version")
    if version != SCHEMA_VERSION:
        r.fail("schema_version", f"unsupported schema version {version!r}, expected {SCHEMA_VERSION}")
    name = r.get(data, "name", required=False, default=Path(source).stem if source else "scenario")

    os_state = r.vessel("own_ship")
    tv_state = None if r.get(data, "target_vessel") is None else r.vessel("target_vessel")
    if os_state.speed <= 0.0:
        r.fail("own_ship.speed", "own ship must be under way")

    r_min_turn = r.number(data, "R_min", positive=True)
    overrides = r.get(data, "planner", required=False, default={}) or {}
    if not isinstance(overrides, dict):
        r.fail("planner", "expected a JSON object")
    unknown = set(overrides) - PLANNER_KEYS
    if unknown:
        r.fail(f"planner.{sorted(unknown)[0]}", f"unknown planner setting; allowed: {sorted(PLANNER_KEYS)}")
    try:
        params = PlannerParams(min_turning_radius=r_min_turn, **overrides)
    except (TypeError, ValueError) as exc:
        key = next((k for k in overrides if k in str(exc)), None)
        r.fail(f"planner.{key}" if key else "planner", str(exc))

    route = r.get(data, "nominal_route", required=False)
    route_points = None
    if route is not None:
        if not isinstance(route, list) or not route:
            r.fail("nominal_route", "expected a non-empty list of [north, east] points")
        route_points = [r.pair({"p": p}, "nominal_route.p") for p in route]

    d_act = t_act = None
    assessment = region = None
    if tv_state is not None:
        d_act = r.number(data, "d_act", positive=True)
        t_act = r.number(data, "t_act", positive=True)
        try:
            assessment = classify_encounter(os_state, tv_state, d_act, t_act)
        except ValueError as exc:
            r.fail("target_vessel", str(exc))
        try:
            region = compliant_region(os_state, tv_state, assessment, d_act, t_act)
        except InfeasibleGeometryError as exc:
            if "inside d_act" in str(exc):
                r.fail(
                    "own_ship",
                    f"{exc}; move the start further from the target or reduce d_act",
                )
            r.fail("own_ship.heading_deg", str(exc))
        if route_points is not None:
            goal = _route_exit(os_state.position, route_points, region.center, region.r_max)
            if goal is None:
                r.fail("nominal_route", "route never leaves the outer circle of the compliant region")
            region = CompliantRegion(region.center, region.r_min, region.r_max, region.allowed_arc, goal, region.kind)
        planning = Scenario.from_encounter(os_state, tv_state, region, ShipDomain.from_length(tv_state.length))
    else:
        block = r.get(data, "region")
        if not isinstance(block, dict):
            r.fail("region", "expected a JSON object")
        center = r.pair(block, "region.center")
        rmin = r.number(block, "region.r_min", nonneg=True)
        rmax = r.number(block, "region.r_max", positive=True)
        if not rmin < rmax:
            r.fail("region.r_max", f"must exceed r_min ({rmin}), got {rmax}")
        arc = Arc(
            math.radians(r.number(block, "region.arc_start_deg", required=False, default=0.0)),
            math.radians(r.number(block, "region.arc_width_deg", required=False, default=360.0, positive=True)),
        )
        spec = AnnulusSpec(center, rmin, rmax, arc)
        goal = r.pair(data, "goal")
        if not spec.contains(*os_state.position.as_tuple()):
            if os_state.position.distance_to(center) < rmin:
                r.fail("own_ship", "start lies inside the inner circle of the region")
            r.fail("own_ship", "start lies outside the region")
        if goal.distance_to(center) > rmax + 1e-6:
            r.fail("goal", "goal lies outside the outer circle of the region")
        planning = Scenario(os=os_state, region=spec, goal=goal)

    return LoadedScenario(
        name=str(name),
        os=os_state,
        tv=tv_state,
        d_act=d_act,
        t_act=t_act,
        params=params,
        sha256=scenario_hash(text if text is not None else json.dumps(data, sort_keys=True)),
        raw=data,
        assessment=assessment,
        region=region,
        planning=planning,
        source=source,
    )


def load_scenario(path) -> LoadedScenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file {path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON: {exc.msg}", field="<document>", line=exc.lineno) from exc
    return parse_scenario(data, text, str(path))


def builtin_scenario_path(name: str) -> Path:
    """Path of a scenario shipped with the package (``crossing``, ``head_on`` ...)."""
    from importlib.resources import files

    return Path(str(files("colregs_rrt") / "scenarios" / f"{name}.json"))


def params_dict(params: PlannerParams) -> dict:
    out = {}
    for f in fields(params):
        value = getattr(params, f.name)
        out[f.name] = getattr(value, "value", value)
    return out
