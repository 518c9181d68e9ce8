"""Trial campaigns comparing sampling strategies on one scenario."""
from __future__ import annotations

import math
import os
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .planner import PlannerParams, Scenario, Strategy, plan

CONVERGENCE_BAND = 0.05
REFERENCE_BUDGET_FACTOR = 10
# Seed-stream slot reserved for the high-budget reference runs.
_REFERENCE_SLOT = 2**31 - 1

ALL_STRATEGIES = tuple(Strategy)


def trial_seed(base_seed: int, strategy: Strategy, trial: int) -> int:
    """Independent, reproducible seed for one (strategy, trial) pair."""
    seq = np.random.SeedSequence([int(base_seed), ALL_STRATEGIES.index(strategy), int(trial)])
    return int(seq.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


@dataclass
class TrialStats:
    strategy: Strategy
    trial: int
    seed: int
    iterations: int
    samples_to_first_solution: int | None
    final_cost: float | None
    wall_time: float
    rejected_draws: int
    # (iteration, c_best, elapsed seconds) at every improvement of c_best.
    cost_curve: list[tuple[int, float, float]] = field(default_factory=list)
    time_to_within_5pct: float | None = None
    iterations_to_within_5pct: int | None = None

    @property
    def solved(self) -> bool:
        return self.final_cost is not None

    @property
    def rejection_fraction(self) -> float:
        return self.rejected_draws / self.iterations

    def with_reference(self, reference_cost: float, band: float = CONVERGENCE_BAND) -> "TrialStats":
        limit = (1.0 + band) * reference_cost
        for it, cost, elapsed in self.cost_curve:
            if cost <= limit:
                return replace(self, time_to_within_5pct=elapsed, iterations_to_within_5pct=it)
        return replace(self, time_to_within_5pct=None, iterations_to_within_5pct=None)

    def cost_at(self, iteration: int) -> float:
        """Best cost after ``iteration`` iterations (inf before the first solution)."""
        best = math.inf
        for it, cost, _ in self.cost_curve:
            if it > iteration:
                break
            best = cost
        return best


@dataclass
class MetricSummary:
    mean: float | None
    std: float | None
    count: int


@dataclass
class StrategySummary:
    strategy: Strategy
    n_trials: int
    n_solved: int
    convergence_rate: float
    samples_to_first_solution: MetricSummary
    final_cost_ratio: MetricSummary
    time_to_within_5pct: MetricSummary
    iterations_to_within_5pct: MetricSummary
    wall_time: MetricSummary
    rejection_fraction: MetricSummary


@dataclass
class CampaignSummary:
    strategies: dict[Strategy, StrategySummary]
    n_trials: int
    budget: int
    base_seed: int
    c_min: float
    reference_cost: float | None
    metadata: dict = field(default_factory=dict)

    def __getitem__(self, strategy: Strategy) -> StrategySummary:
        return self.strategies[Strategy(strategy)]

    def to_dict(self) -> dict:
        out = {
            "n_trials": self.n_trials,
            "budget": self.budget,
            "base_seed": self.base_seed,
            "c_min": self.c_min,
            "reference_cost": self.reference_cost,
            "metadata": self.metadata,
            "strategies": {},
        }
        for strategy, s in self.strategies.items():
            d = asdict(s)
            d["strategy"] = strategy.value
            out["strategies"][strategy.value] = d
        return out


@dataclass
class Campaign:
    summary: CampaignSummary
    trials: list[TrialStats]


def _metric(values) -> MetricSummary:
    vals = np.asarray([v for v in values if v is not None], dtype=float)
    if vals.size == 0:
        return MetricSummary(None, None, 0)
    std = float(vals.std(ddof=1)) if vals.size > 1 else 0.0
    return MetricSummary(float(vals.mean()), std, int(vals.size))


def summarize(raw: list[TrialStats], c_min: float | None = None) -> dict[Strategy, StrategySummary]:
    """Per-strategy mean and unbiased standard deviation of each metric.

    Unsolved trials count towards the convergence rate only.
    """
    if not raw:
        raise ValueError("no trials to summarize")
    out = {}
    for strategy in ALL_STRATEGIES:
        rows = [t for t in raw if t.strategy is strategy]
        if not rows:
            continue
        solved = [t for t in rows if t.solved]
        converged = [t for t in rows if t.time_to_within_5pct is not None]
        out[strategy] = StrategySummary(
            strategy=strategy,
            n_trials=len(rows),
            n_solved=len(solved),
            convergence_rate=len(converged) / len(rows),
            samples_to_first_solution=_metric(t.samples_to_first_solution for t in solved),
            final_cost_ratio=_metric(t.final_cost / c_min for t in solved) if c_min else MetricSummary(None, None, 0),
            time_to_within_5pct=_metric(t.time_to_within_5pct for t in converged),
            iterations_to_within_5pct=_metric(t.iterations_to_within_5pct for t in converged),
            wall_time=_metric(t.wall_time for t in rows),
            rejection_fraction=_metric(t.rejection_fraction for t in rows),
        )
    return out


def run_trial(scenario: Scenario, params: PlannerParams, strategy: Strategy, trial: int, seed: int) -> TrialStats:
    result = plan(scenario, replace(params, strategy=strategy, seed=seed))
    c = result.log.c_best
    previous = np.concatenate(([math.inf], c[:-1]))
    improved = np.flatnonzero(c < previous)
    curve = [(int(i) + 1, float(c[i]), float(result.log.elapsed[i])) for i in improved]
    return TrialStats(
        strategy=strategy,
        trial=trial,
        seed=seed,
        iterations=params.max_iterations,
        samples_to_first_solution=result.samples_to_first_solution,
        final_cost=result.cost,
        wall_time=result.wall_time,
        rejected_draws=result.rejected_draws,
        cost_curve=curve,
    )


def _run_job(job):
    return run_trial(*job)


def hardware_fingerprint() -> dict:
    return {
        "machine": platform.machine(),
        "processor": platform.processor(),
        "system": platform.system(),
        "python": platform.python_version(),
        "cpu_count": os.cpu_count(),
    }


def run_campaign(
    scenario: Scenario,
    strategies=ALL_STRATEGIES,
    n_trials: int = 100,
    budget: int | None = None,
    base_seed: int = 0,
    params: PlannerParams | None = None,
    workers: int = 1,
    reference_cost: float | None = None,
) -> Campaign:
    """Run ``n_trials`` plans per strategy and summarise them.

    The 5% convergence band is measured against the best cost seen by any
    trial or by one ``10 x budget`` run per strategy; pass ``reference_cost``
    to skip those runs.
    """
    if n_trials < 1:
        raise ValueError(f"n_trials must be >= 1, got {n_trials}")
    params = params or PlannerParams()
    if budget is not None:
        params = replace(params, max_iterations=int(budget))
    strategies = [Strategy(s) for s in strategies]
    # Canonical order makes merged results independent of the request order.
    strategies = [s for s in ALL_STRATEGIES if s in strategies]

    # Interleave strategies so drifting machine load hits them all alike.
    jobs = [
        (scenario, params, s, i, trial_seed(base_seed, s, i)) for i in range(n_trials) for s in strategies
    ]
    started = time.time()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            trials = list(pool.map(_run_job, jobs, chunksize=max(1, len(jobs) // (8 * workers))))
    else:
        trials = [_run_job(job) for job in jobs]
    trials.sort(key=lambda t: (ALL_STRATEGIES.index(t.strategy), t.trial))

    if reference_cost is None:
        long_params = replace(params, max_iterations=params.max_iterations * REFERENCE_BUDGET_FACTOR)
        costs = [t.final_cost for t in trials if t.final_cost is not None]
        for s in strategies:
            ref = run_trial(scenario, long_params, s, _REFERENCE_SLOT, trial_seed(base_seed, s, _REFERENCE_SLOT))
            if ref.final_cost is not None:
                costs.append(ref.final_cost)
        reference_cost = min(costs) if costs else None

    if reference_cost is not None:
        trials = [t.with_reference(reference_cost) for t in trials]

    summary = CampaignSummary(
        strategies=summarize(trials, scenario.c_min),
        n_trials=n_trials,
        budget=params.max_iterations,
        base_seed=base_seed,
        c_min=scenario.c_min,
        reference_cost=reference_cost,
        metadata={"hardware": hardware_fingerprint(), "elapsed_seconds": time.time() - started, "workers": workers},
    )
    return Campaign(summary, trials)
