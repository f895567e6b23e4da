"""Box-constrained optimizers: real-coded GA and simulated annealing.

Both work on bounded parameter vectors against a pluggable scalar
objective, share an evaluation budget, and are bit-deterministic per
seed. Every candidate handed to the objective lies inside the bounds.
"""

from __future__ import annotations

import logging
import math
import threading
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)


@dataclass
class Bounds:
    """Component-wise lower/upper box bounds."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        self.lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        self.upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if self.lower.shape != self.upper.shape:
            raise ValueError("bound vectors must have equal length")
        if np.any(self.lower >= self.upper):
            raise ValueError("lower bounds must be strictly below upper bounds")

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def range(self) -> np.ndarray:
        return self.upper - self.lower

    def contains(self, x: np.ndarray) -> bool:
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))


@dataclass
class GaConfig:
    population_size: int = 50
    generations: int = 200
    selection_q: float = 0.08      # probability of picking the best-ranked parent
    mutation_rate: float = 0.003   # per-individual
    crossover_rate: float = 0.60   # per-pair
    mutation_shape_b: float = 2.0
    seed: int = 0

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if self.generations < 1:
            raise ValueError("generations must be >= 1")
        for name in ("selection_q", "mutation_rate", "crossover_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if not 0.0 < self.selection_q < 1.0:
            raise ValueError("selection_q must lie strictly in (0, 1)")


@dataclass
class SaConfig:
    initial_temperature: float = 1.0
    cooling_factor: float = 0.9
    steps_per_temperature: int | None = None  # None -> 4 x dimension
    n_runs: int = 3
    step_scale: float = 0.1        # proposal std as a fraction of bound range
    min_temperature: float = 1.0e-6
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.cooling_factor < 1.0:
            raise ValueError("cooling_factor must lie in (0, 1)")
        if self.n_runs < 1:
            raise ValueError("n_runs must be >= 1")
        if not 0.0 < self.step_scale <= 1.0:
            raise ValueError("step_scale must lie in (0, 1]")
        if self.initial_temperature <= 0.0 or self.min_temperature <= 0.0:
            raise ValueError("temperatures must be positive")
        if self.steps_per_temperature is not None and self.steps_per_temperature < 1:
            raise ValueError("steps_per_temperature must be >= 1")


class EvalBudget:
    """Thread-safe running count of objective evaluations, with optional cap."""

    def __init__(self, limit: int | None = None):
        self.limit = limit
        self._calls = 0
        self._lock = threading.Lock()

    @property
    def calls(self) -> int:
        return self._calls

    @property
    def exhausted(self) -> bool:
        return self.limit is not None and self._calls >= self.limit

    def consume(self) -> bool:
        """Reserve one evaluation; False if the cap is already reached."""
        with self._lock:
            if self.limit is not None and self._calls >= self.limit:
                return False
            self._calls += 1
            return True

    def charge(self, n: int):
        """Account for n evaluations performed elsewhere (e.g. a loaded design)."""
        with self._lock:
            self._calls += n


@dataclass
class HistoryRecord:
    """One optimizer progress row for reporting."""

    step: int
    best_cost: float
    mean_cost: float
    evaluations: int
    temperature: float | None = None
    run: int | None = None


@dataclass
class OptimizeResult:
    best_x: np.ndarray
    best_cost: float
    history: list[HistoryRecord] = field(default_factory=list)
    truncated: bool = False


class _BudgetExhausted(Exception):
    pass


def arithmetic_crossover(p1: np.ndarray, p2: np.ndarray, rng) -> tuple[np.ndarray, np.ndarray]:
    """Interpolate two parents along their connecting segment.

    Draws a in [0, 1] and returns the complementary pair
    a*p1 + (1-a)*p2 and (1-a)*p1 + a*p2, which stay inside any box
    containing the parents.
    """
    if p1.shape != p2.shape:
        raise ValueError("parents must have equal length")
    a = rng.uniform()
    return a * p1 + (1.0 - a) * p2, (1.0 - a) * p1 + a * p2


def nonuniform_mutate(x: np.ndarray, t: int, t_max: int, bounds: Bounds,
                      b: float, rng) -> np.ndarray:
    """Non-uniform mutation of one random coordinate.

    Perturbs toward a randomly chosen bound by
    delta(t, y) = y * (1 - r^((1 - t/t_max)^b)), y being the distance to
    that bound. The perturbation contracts to zero as t approaches t_max.
    """
    if t > t_max:
        raise ValueError("generation exceeds maximum generation")
    out = x.copy()
    i = int(rng.integers(x.size))
    toward_upper = rng.uniform() < 0.5
    r = rng.uniform()
    expo = (1.0 - t / t_max) ** b
    if toward_upper:
        y = bounds.upper[i] - x[i]
        out[i] = x[i] + y * (1.0 - r**expo)
    else:
        y = x[i] - bounds.lower[i]
        out[i] = x[i] - y * (1.0 - r**expo)
    return out


def geometric_select(ranked_costs, q: float, rng) -> int:
    """Pick an index from an ascending-cost ranking.

    Rank r (0 = best) is chosen with the normalized geometric probability
    q' (1-q)^r, q' = q / (1 - (1-q)^n).
    """
    n = len(ranked_costs)
    if n == 0:
        raise ValueError("empty ranking")
    if not 0.0 < q < 1.0:
        raise ValueError("q must lie strictly in (0, 1)")
    if n == 1:
        return 0
    q_norm = q / (1.0 - (1.0 - q) ** n)
    u = rng.uniform()
    acc = 0.0
    for r in range(n):
        acc += q_norm * (1.0 - q) ** r
        if u < acc:
            return r
    return n - 1


def metropolis_accept(e_old: float, e_new: float, temperature: float, rng) -> bool:
    """Metropolis rule: always downhill, uphill with exp(-dE/T)."""
    de = e_new - e_old
    if de <= 0.0:
        return True
    arg = -de / temperature
    if arg < -700.0:
        return False
    return rng.uniform() < math.exp(arg)


def ga_optimize(objective, bounds: Bounds, cfg: GaConfig,
                budget: EvalBudget | None = None) -> OptimizeResult:
    """Real-coded genetic algorithm over a box.

    The full population is evaluated every generation (the carried-over
    elite included), so the total number of objective calls is exactly
    population_size * generations unless the budget truncates the run.
    History rows carry per-generation best/mean cost and cumulative
    evaluations; the best-ever individual is returned.
    """
    if budget is None:
        budget = EvalBudget()
    rng = np.random.default_rng(cfg.seed)
    d = bounds.dim

    def evaluate(x):
        if not budget.consume():
            raise _BudgetExhausted
        return float(objective(x))

    pop = rng.uniform(bounds.lower, bounds.upper, (cfg.population_size, d))
    best_x = pop[0].copy()
    best_cost = math.inf
    history: list[HistoryRecord] = []
    evaluations = 0
    truncated = False

    for gen in range(1, cfg.generations + 1):
        costs = np.empty(cfg.population_size)
        try:
            for i in range(cfg.population_size):
                costs[i] = evaluate(pop[i])
                evaluations += 1
        except _BudgetExhausted:
            truncated = True
            log.warning("GA stopped by evaluation budget at generation %d", gen)
            break
        gen_best = int(np.argmin(costs))
        if costs[gen_best] < best_cost:
            best_cost = float(costs[gen_best])
            best_x = pop[gen_best].copy()
        history.append(HistoryRecord(step=gen, best_cost=best_cost,
                                     mean_cost=float(costs.mean()),
                                     evaluations=evaluations))
        if gen < cfg.generations:
            pop = _next_generation(pop, costs, best_x, gen, cfg, bounds, rng)

    return OptimizeResult(best_x=best_x, best_cost=best_cost,
                          history=history, truncated=truncated)


def _next_generation(pop, costs, best_x, gen, cfg: GaConfig, bounds: Bounds, rng):
    order = np.argsort(costs, kind="stable")
    ranked = pop[order]
    ranked_costs = costs[order]
    new = [best_x.copy()]  # elitism of 1: incumbent best survives unmodified
    while len(new) < cfg.population_size:
        i1 = geometric_select(ranked_costs, cfg.selection_q, rng)
        i2 = geometric_select(ranked_costs, cfg.selection_q, rng)
        if rng.uniform() < cfg.crossover_rate:
            c1, c2 = arithmetic_crossover(ranked[i1], ranked[i2], rng)
        else:
            c1, c2 = ranked[i1].copy(), ranked[i2].copy()
        for child in (c1, c2):
            if len(new) >= cfg.population_size:
                break
            if rng.uniform() < cfg.mutation_rate:
                child = nonuniform_mutate(child, gen, cfg.generations, bounds,
                                          cfg.mutation_shape_b, rng)
            new.append(child)
    return np.array(new)


def sa_optimize(objective, bounds: Bounds, cfg: SaConfig,
                budget: EvalBudget | None = None,
                x0: np.ndarray | None = None) -> OptimizeResult:
    """Simulated annealing with geometric cooling and Gaussian proposals.

    Runs cfg.n_runs independent annealing chains from random in-box
    starts; when x0 is given, the first chain starts there instead. At
    each temperature level, steps_per_temperature proposals (all
    coordinates perturbed, std = step_scale * bound range, clipped to
    the box) are screened by the Metropolis rule; the temperature is
    then multiplied by cooling_factor until min_temperature. History has
    one row per temperature level, tagged with the run index. The global
    best over all runs is returned.
    """
    if budget is None:
        budget = EvalBudget()
    rng = np.random.default_rng(cfg.seed)
    steps = cfg.steps_per_temperature or 4 * bounds.dim
    std = cfg.step_scale * bounds.range

    def evaluate(x):
        if not budget.consume():
            raise _BudgetExhausted
        return float(objective(x))

    best_x = None
    best_cost = math.inf
    history: list[HistoryRecord] = []
    evaluations = 0
    truncated = False
    rejected_nonfinite = 0

    for run in range(cfg.n_runs):
        try:
            if run == 0 and x0 is not None:
                if not bounds.contains(np.asarray(x0, dtype=float)):
                    raise ValueError("x0 must lie inside the bounds")
                x = np.asarray(x0, dtype=float).copy()
            else:
                x = rng.uniform(bounds.lower, bounds.upper)
            e = evaluate(x)
            evaluations += 1
            if e < best_cost:
                best_cost, best_x = e, x.copy()
            temperature = cfg.initial_temperature
            level = 0
            while temperature > cfg.min_temperature:
                level_costs = []
                for _ in range(steps):
                    proposal = np.clip(x + rng.normal(0.0, 1.0, bounds.dim) * std,
                                       bounds.lower, bounds.upper)
                    e_new = evaluate(proposal)
                    evaluations += 1
                    if not math.isfinite(e_new):
                        rejected_nonfinite += 1
                        continue
                    level_costs.append(e_new)
                    if metropolis_accept(e, e_new, temperature, rng):
                        x, e = proposal, e_new
                    if e_new < best_cost:
                        best_cost, best_x = e_new, proposal.copy()
                level += 1
                history.append(HistoryRecord(
                    step=level, best_cost=best_cost,
                    mean_cost=float(np.mean(level_costs)) if level_costs else math.nan,
                    evaluations=evaluations, temperature=temperature, run=run))
                temperature *= cfg.cooling_factor
        except _BudgetExhausted:
            truncated = True
            log.warning("SA stopped by evaluation budget in run %d", run)
            break

    if rejected_nonfinite:
        log.warning("SA rejected %d non-finite objective values", rejected_nonfinite)
    if best_x is None:
        raise RuntimeError("SA budget exhausted before any evaluation")
    return OptimizeResult(best_x=best_x, best_cost=best_cost,
                          history=history, truncated=truncated)
