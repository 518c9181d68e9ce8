"""COLREGs-compliant sampling subsets for RRT* ship collision avoidance."""
from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("colregs-rrt")
except PackageNotFoundError:
    __version__ = "0.1.0"

from .encounter import (
    CompliantRegion,
    EncounterAssessment,
    EncounterKind,
    ShipDomain,
    VesselState,
    classify_encounter,
    compliant_region,
    cpa,
    domain_violated,
    tcpa,
)
from .geom import Arc, Point, normalize_angle, polar_ellipse_radius, required_turning_radius
from .planner import PlannerParams, PlanResult, Scenario, Strategy, Waypoint, plan
from .sampling import AnnulusSpec, EllipticalAnnulusSpec, SamplingMode
from .scenario_file import LoadedScenario, builtin_scenario_path, load_scenario

__all__ = [
    "Arc",
    "AnnulusSpec",
    "CompliantRegion",
    "EllipticalAnnulusSpec",
    "EncounterAssessment",
    "EncounterKind",
    "LoadedScenario",
    "PlanResult",
    "PlannerParams",
    "Point",
    "SamplingMode",
    "Scenario",
    "ShipDomain",
    "Strategy",
    "VesselState",
    "Waypoint",
    "builtin_scenario_path",
    "classify_encounter",
    "compliant_region",
    "cpa",
    "domain_violated",
    "load_scenario",
    "normalize_angle",
    "plan",
    "polar_ellipse_radius",
    "required_turning_radius",
    "tcpa",
]
