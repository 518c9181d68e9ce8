"""Command-line interface: ``colregs-rrt plan | bench | sample``.

Exit codes: 0 success, 1 input error, 2 no solution (or no manoeuvre
required).  Output goes to ``--out``, defaulting to ``$COLREGS_RRT_OUT`` or
``./out``.  Every file carries the scenario hash and seed.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .bench import ALL_STRATEGIES, Campaign, run_campaign
from .errors import InfeasibleGeometryError, NoActionRequiredError, ScenarioError
from .geom import Arc, Point
from .planner import PlanResult, Strategy, plan
from .sampling import (
    AnnulusSpec,
    EllipticalAnnulusSpec,
    SamplingMode,
    sample_elliptical_half_annulus,
    sample_half_annulus,
)
from .scenario_file import LoadedScenario, load_scenario, params_dict, scenario_hash
from .svg import PALETTE, Canvas, Chart, MapView

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NO_SOLUTION = 2

OUTPUT_SCHEMA_VERSION = 1
OUT_ENV = "COLREGS_RRT_OUT"


def default_out_dir() -> Path:
    return Path(os.environ.get(OUT_ENV, "out"))


def _num(x):
    """JSON has no infinity; unbounded costs are written as null."""
    if x is None or not math.isfinite(x):
        return None
    return float(x)


def _inf(x):
    return math.inf if x is None else float(x)


# Plan output ---------------------------------------------------------------


@dataclass
class RunOutput:
    """Everything written to ``plan.json``; ``from_dict(to_dict())`` is lossless."""

    metadata: dict
    assessment: dict | None
    region: dict
    waypoints: list[tuple[float, float, float]]
    cost: float | None
    c_min: float
    switch_threshold: float
    samples_to_first_solution: int | None
    rejected_draws: int
    wall_time: float
    log_c_best: list[float] = field(default_factory=list)
    log_elapsed: list[float] = field(default_factory=list)
    log_space: list[str] = field(default_factory=list)
    log_accepted: list[bool] = field(default_factory=list)

    @classmethod
    def from_result(cls, result: PlanResult, loaded: LoadedScenario, seed: int) -> "RunOutput":
        a = loaded.assessment
        region = result.scenario.region
        return cls(
            metadata={
                "seed": seed,
                "version": __version__,
                "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
                "scenario": loaded.name,
                "scenario_sha256": loaded.sha256,
                "params": params_dict(replace(loaded.params, seed=seed)),
            },
            assessment=None
            if a is None
            else {
                "kind": a.kind.value,
                "cpa": a.cpa,
                "tcpa": a.tcpa,
                "relative_bearing_deg": math.degrees(a.relative_bearing),
            },
            region={
                "center": [region.center.north, region.center.east],
                "r_min": region.r_min,
                "r_max": region.r_max,
                "arc_start_deg": math.degrees(region.allowed_arc.start),
                "arc_width_deg": math.degrees(region.allowed_arc.width),
                "goal": [result.scenario.goal.north, result.scenario.goal.east],
            },
            waypoints=[(w.north, w.east, w.radius_of_acceptance) for w in result.path or []],
            cost=result.cost,
            c_min=result.c_min,
            switch_threshold=result.switch_threshold,
            samples_to_first_solution=result.samples_to_first_solution,
            rejected_draws=result.rejected_draws,
            wall_time=result.wall_time,
            log_c_best=[float(c) for c in result.log.c_best],
            log_elapsed=[float(t) for t in result.log.elapsed],
            log_space=result.log.spaces,
            log_accepted=[bool(x) for x in result.log.accepted_sample],
        )

    @property
    def solved(self) -> bool:
        return self.cost is not None

    def to_dict(self) -> dict:
        return {
            "schema_version": OUTPUT_SCHEMA_VERSION,
            "metadata": self.metadata,
            "assessment": self.assessment,
            "region": self.region,
            "solved": self.solved,
            "cost": self.cost,
            "c_min": self.c_min,
            "switch_threshold": self.switch_threshold,
            "samples_to_first_solution": self.samples_to_first_solution,
            "rejected_draws": self.rejected_draws,
            "wall_time": self.wall_time,
            "waypoints": [{"north": n, "east": e, "radius_of_acceptance": r} for n, e, r in self.waypoints],
            "iteration_log": {
                "c_best": [_num(c) for c in self.log_c_best],
                "elapsed": self.log_elapsed,
                "space": self.log_space,
                "accepted_sample": self.log_accepted,
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunOutput":
        if d.get("schema_version") != OUTPUT_SCHEMA_VERSION:
            raise ValueError(f"unsupported plan output schema {d.get('schema_version')!r}")
        log = d["iteration_log"]
        return cls(
            metadata=d["metadata"],
            assessment=d["assessment"],
            region=d["region"],
            waypoints=[(w["north"], w["east"], w["radius_of_acceptance"]) for w in d["waypoints"]],
            cost=d["cost"],
            c_min=d["c_min"],
            switch_threshold=d["switch_threshold"],
            samples_to_first_solution=d["samples_to_first_solution"],
            rejected_draws=d["rejected_draws"],
            wall_time=d["wall_time"],
            log_c_best=[_inf(c) for c in log["c_best"]],
            log_elapsed=list(log["elapsed"]),
            log_space=list(log["space"]),
            log_accepted=list(log["accepted_sample"]),
        )


def _stamp(sha: str, seed) -> str:
    return f"scenario_sha256={sha},seed={seed}"


def write_json(path: Path, data: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=1, allow_nan=False)
        fh.write("\n")


def write_csv(path: Path, header: list[str], rows, comment: str | None = None) -> None:
    buf = io.StringIO()
    if comment:
        buf.write(f"# {comment}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x) if math.isfinite(x) else ""
    return str(x)


def plan_svg(result: PlanResult, loaded: LoadedScenario, stamp: str) -> Canvas:
    sc = result.scenario
    region = sc.region
    c = region.center
    pad = region.r_max * 1.08
    view = MapView((c.north - pad, c.north + pad), (c.east - pad, c.east + pad))
    arc = region.allowed_arc
    view.sector(c, region.r_min, region.r_max, arc.start, arc.width)
    view.ring(c, region.r_max)
    if region.r_min > 0:
        view.ring(c, region.r_min, stroke="#d62728", dash="6,4")
    tree = result.tree
    for child in range(1, tree.n):
        p = int(tree.parent[child])
        view.segment(
            (tree.north[p], tree.east[p]), (tree.north[child], tree.east[child]), stroke="#999", width=0.5, opacity=0.6
        )
    if sc.tv is not None:
        tv = sc.tv
        horizon = (result.cost or result.c_min) / sc.os.speed
        end = tv.position_at(horizon)
        view.segment(tv.position.as_tuple(), end.as_tuple(), stroke="#d62728", width=1.2, dash="3,3")
        view.points([tv.position.as_tuple()], r=4, fill="#d62728")
        view.label(tv.position.north, tv.position.east, "TV")
    if result.path:
        view.polyline([(w.north, w.east) for w in result.path], stroke="#08519c", width=2.5)
        view.points([(w.north, w.east) for w in result.path], r=3, fill="#08519c")
    view.points([sc.start.as_tuple()], r=5, fill="#2ca02c")
    view.label(sc.start.north, sc.start.east, "start")
    view.points([sc.goal.as_tuple()], r=5, fill="#ff7f0e")
    view.label(sc.goal.north, sc.goal.east, "goal")
    title = f"{loaded.name}: " + (f"cost {result.cost:.1f} m (c_min {result.c_min:.1f} m)" if result.cost else "no solution")
    view.canvas.text(10, 20, title, size=14)
    view.canvas.add(f"<!-- {stamp} -->")
    return view.canvas


def cmd_plan(args) -> int:
    loaded = load_scenario(args.scenario)
    params = loaded.params
    if args.seed is not None:
        params = replace(params, seed=args.seed)
    if args.strategy is not None:
        params = replace(params, strategy=Strategy(args.strategy))
    if args.iterations is not None:
        params = replace(params, max_iterations=args.iterations)
    if args.mode is not None:
        params = replace(params, mode=SamplingMode(args.mode))
    loaded.params = params

    out = Path(args.out) if args.out else default_out_dir()
    out.mkdir(parents=True, exist_ok=True)
    result = plan(loaded.planning, params)
    stamp = _stamp(loaded.sha256, params.seed)
    run = RunOutput.from_result(result, loaded, params.seed)
    write_json(out / "plan.json", run.to_dict())
    write_csv(
        out / "path.csv",
        ["index", "north", "east", "radius_of_acceptance"],
        [[i, repr(n), repr(e), repr(r)] for i, (n, e, r) in enumerate(run.waypoints)],
        comment=stamp,
    )
    plan_svg(result, loaded, stamp).save(out / "plan.svg")
    if not result.solved:
        print(f"no solution within {params.max_iterations} iterations; wrote {out}", file=sys.stderr)
        return EXIT_NO_SOLUTION
    print(f"cost {result.cost:.2f} m (c_min {result.c_min:.2f} m), {len(result.path)} waypoints; wrote {out}")
    return EXIT_OK


# Bench output --------------------------------------------------------------

TRIAL_COLUMNS = [
    "strategy",
    "trial",
    "seed",
    "iterations",
    "samples_to_first_solution",
    "final_cost",
    "iterations_to_within_5pct",
    "rejected_draws",
]
TIMING_COLUMNS = ["strategy", "trial", "wall_time", "time_to_within_5pct"]


def bench_svg(campaign: Campaign, stamp: str) -> Canvas:
    summary = campaign.summary
    canvas = Canvas(1000, 460)
    budget = summary.budget
    its = np.unique(np.linspace(1, budget, min(budget, 200)).astype(int))
    curves = {}
    for strategy in summary.strategies:
        rows = [t for t in campaign.trials if t.strategy is strategy and t.solved]
        if rows:
            mat = np.array([[t.cost_at(int(i)) for i in its] for t in rows]) / summary.c_min
            with np.errstate(invalid="ignore"):
                finite = np.isfinite(mat)
                counts = finite.sum(axis=0)
                sums = np.where(finite, mat, 0.0).sum(axis=0)
                curves[strategy] = np.where(counts > 0, sums / np.maximum(counts, 1), np.inf)
    finite_vals = [v for c in curves.values() for v in c if math.isfinite(v)]
    y_hi = max(finite_vals) if finite_vals else 1.1
    left = Chart(
        canvas, (70, 50, 380, 340), (1, budget), (1.0, y_hi),
        title="Mean relative cost of solved trials", x_label="iteration", y_label="c_best / c_min",
    )
    for k, (strategy, curve) in enumerate(curves.items()):
        left.series(its, curve, PALETTE[k % len(PALETTE)])
    left.legend([(s.value, PALETTE[k % len(PALETTE)]) for k, s in enumerate(summary.strategies)])

    firsts = {
        s: [t.samples_to_first_solution for t in campaign.trials if t.strategy is s and t.solved]
        for s in summary.strategies
    }
    all_first = [v for vs in firsts.values() for v in vs]
    hi = max(all_first) if all_first else 1
    edges = np.linspace(0, hi, 26)
    hists = {s: np.histogram(v, bins=edges)[0] for s, v in firsts.items()}
    top = max((h.max() for h in hists.values() if h.size), default=1)
    right = Chart(
        canvas, (560, 50, 380, 340), (0, hi), (0, max(top, 1)),
        title="Samples to first solution", x_label="samples", y_label="trials",
    )
    for k, (strategy, h) in enumerate(hists.items()):
        right.bars(edges, h, PALETTE[k % len(PALETTE)])
    canvas.add(f"<!-- {stamp} -->")
    return canvas


def cmd_bench(args) -> int:
    loaded = load_scenario(args.scenario)
    if args.strategies in (None, "all"):
        strategies = list(ALL_STRATEGIES)
    else:
        try:
            strategies = [Strategy(s.strip()) for s in args.strategies.split(",") if s.strip()]
        except ValueError as exc:
            raise ScenarioError(f"{exc}; choose from {[s.value for s in Strategy]} or 'all'", field="--strategies")
    params = loaded.params
    if args.mode is not None:
        params = replace(params, mode=SamplingMode(args.mode))
    campaign = run_campaign(
        loaded.planning,
        strategies=strategies,
        n_trials=args.trials,
        budget=args.budget,
        base_seed=args.seed,
        params=params,
        workers=args.workers,
    )
    out = Path(args.out) if args.out else default_out_dir()
    out.mkdir(parents=True, exist_ok=True)
    stamp = _stamp(loaded.sha256, args.seed)
    write_csv(
        out / "trials.csv",
        TRIAL_COLUMNS,
        [
            [t.strategy.value, t.trial, t.seed, t.iterations, _cell(t.samples_to_first_solution),
             _cell(t.final_cost), _cell(t.iterations_to_within_5pct), t.rejected_draws]
            for t in campaign.trials
        ],
        comment=stamp,
    )
    write_csv(
        out / "timings.csv",
        TIMING_COLUMNS,
        [[t.strategy.value, t.trial, repr(t.wall_time), _cell(t.time_to_within_5pct)] for t in campaign.trials],
        comment=stamp,
    )
    summary = campaign.summary.to_dict()
    summary["schema_version"] = OUTPUT_SCHEMA_VERSION
    summary["scenario"] = loaded.name
    summary["scenario_sha256"] = loaded.sha256
    summary["version"] = __version__
    summary["mode"] = params.mode.value
    write_json(out / "summary.json", summary)
    bench_svg(campaign, stamp).save(out / "bench.svg")

    for strategy, s in campaign.summary.strategies.items():
        first = s.samples_to_first_solution
        t5 = s.time_to_within_5pct
        print(
            f"{strategy.value:24s} solved {s.n_solved}/{s.n_trials}  "
            f"first {first.mean if first.mean is not None else float('nan'):8.1f}  "
            f"converged {s.convergence_rate:.2f}  "
            f"t5% {1e3 * t5.mean if t5.mean is not None else float('nan'):8.2f} ms"
        )
    print(f"wrote {out}")
    return EXIT_OK


# Sample output ----------------------------------------------------------------

SPACES = ("half-annulus", "elliptical-half-annulus")


def _load_params(text: str) -> tuple[dict, str]:
    """``--params`` is inline JSON or a path to a JSON file."""
    raw = text
    if not text.lstrip().startswith("{"):
        try:
            raw = Path(text).read_text(encoding="utf-8")
        except OSError as exc:
            raise ScenarioError(f"cannot read {text}: {exc.strerror}", field="--params")
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON: {exc.msg}", field="--params", line=exc.lineno)
    if not isinstance(data, dict):
        raise ScenarioError("expected a JSON object", field="--params")
    return data, raw


def _space_from_params(space: str, p: dict):
    def need(key):
        if key not in p:
            raise ScenarioError("required field is missing", field=f"--params.{key}")
        return p[key]

    try:
        center = Point(*map(float, p.get("center", (0.0, 0.0))))
        if space == "half-annulus":
            arc = Arc(math.radians(float(p.get("arc_start_deg", 0.0))), math.radians(float(p.get("arc_width_deg", 180.0))))
            return AnnulusSpec(center, float(need("r_min")), float(need("r_max")), arc)
        if "c_best" in p:
            return EllipticalAnnulusSpec.informed(
                Point(*map(float, need("start"))),
                Point(*map(float, need("goal"))),
                float(p["c_best"]),
                float(p.get("r_min", 0.0)),
                int(p.get("allowed_half", 1)),
            )
        return EllipticalAnnulusSpec(
            center,
            float(need("a")),
            float(need("b")),
            float(p.get("r_min", 0.0)),
            math.radians(float(p.get("orientation_deg", 0.0))),
            int(p.get("allowed_half", 1)),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(f"invalid geometry: {exc}", field="--params") from exc


def sample_svg(spec, pts: np.ndarray, stamp: str) -> Canvas:
    if isinstance(spec, AnnulusSpec):
        c, reach = spec.center, spec.r_max
    else:
        c, reach = spec.center, spec.a
    pad = 1.08 * reach
    view = MapView((c.north - pad, c.north + pad), (c.east - pad, c.east + pad))
    if isinstance(spec, AnnulusSpec):
        view.sector(c, spec.r_min, spec.r_max, spec.allowed_arc.start, spec.allowed_arc.width, opacity=0.15)
    else:
        ts = np.linspace(0.0, 2.0 * math.pi, 181)
        cs, sn = math.cos(spec.orientation), math.sin(spec.orientation)
        x, y = spec.a * np.cos(ts), spec.b * np.sin(ts)
        view.polyline(list(zip(c.north + x * cs - y * sn, c.east + x * sn + y * cs)), stroke="#3182bd")
        if spec.r_min > 0:
            view.ring(c, spec.r_min, stroke="#d62728", dash="6,4")
    view.points(pts, r=1.6, fill="#08519c", opacity=0.7)
    view.canvas.text(10, 20, f"{len(pts)} samples", size=14)
    view.canvas.add(f"<!-- {stamp} -->")
    return view.canvas


def cmd_sample(args) -> int:
    if args.n < 0:
        raise ScenarioError(f"must be >= 0, got {args.n}", field="--n")
    data, raw = _load_params(args.params)
    spec = _space_from_params(args.space, data)
    rng = np.random.default_rng(args.seed)
    mode = SamplingMode(args.mode)
    if args.n == 0:
        pts = np.empty((0, 2))
    elif isinstance(spec, AnnulusSpec):
        pts = sample_half_annulus(spec, rng, mode, size=args.n)
    else:
        pts = sample_elliptical_half_annulus(spec, rng, mode, size=args.n)
    out = Path(args.out) if args.out else default_out_dir()
    out.mkdir(parents=True, exist_ok=True)
    stamp = _stamp(scenario_hash(raw), args.seed)
    write_csv(out / "samples.csv", ["north", "east"], [[repr(float(n)), repr(float(e))] for n, e in pts], comment=stamp)
    sample_svg(spec, pts, stamp).save(out / "samples.svg")
    print(f"wrote {len(pts)} samples to {out}")
    return EXIT_OK


# Entry point -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="colregs-rrt", description="COLREGs-compliant RRT* planning and benchmarks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    strategies = [s.value for s in Strategy]
    modes = [m.value for m in SamplingMode]

    p = sub.add_parser("plan", help="plan one evasive path for a scenario")
    p.add_argument("scenario", help="scenario JSON file")
    p.add_argument("--seed", type=int, default=None, help="random seed (default: scenario or 0)")
    p.add_argument("--strategy", choices=strategies, default=None)
    p.add_argument("--iterations", type=int, default=None, help="sampling iterations")
    p.add_argument("--mode", choices=modes, default=None, help="radial sampling law")
    p.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV} or ./out)")
    p.set_defaults(func=cmd_plan)

    b = sub.add_parser("bench", help="compare sampling strategies over many seeded trials")
    b.add_argument("scenario", help="scenario JSON file")
    b.add_argument("--trials", type=int, default=100)
    b.add_argument("--strategies", default="all", help=f"comma list of {strategies} or 'all'")
    b.add_argument("--budget", type=int, default=None, help="iterations per trial (default: scenario)")
    b.add_argument("--seed", type=int, default=0, help="base seed")
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--mode", choices=modes, default=None)
    b.add_argument("--out", default=None)
    b.set_defaults(func=cmd_bench)

    s = sub.add_parser("sample", help="draw points from a sampling space")
    s.add_argument("--space", choices=SPACES, required=True)
    s.add_argument("--params", required=True, help="geometry as inline JSON or a JSON file path")
    s.add_argument("--n", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--mode", choices=modes, default=SamplingMode.EXACT_AREA_UNIFORM.value)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_sample)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NoActionRequiredError as exc:
        print(f"colregs-rrt: {exc}", file=sys.stderr)
        return EXIT_NO_SOLUTION
    except (ScenarioError, InfeasibleGeometryError) as exc:
        print(f"colregs-rrt: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"colregs-rrt: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
