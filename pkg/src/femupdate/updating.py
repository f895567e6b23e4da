"""Updating strategies around a shared full-model objective.

Three routes tune per-element elastic moduli against measured modal
data: a response-surface loop (MLP surrogate refined by a GA and
re-anchored on the full model), a GA on the full model, and simulated
annealing on the full model. All FE evaluations pass through one
EvalBudget so the methods can be compared by evaluation count.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .beam import BeamStructure, assemble
from .modal import CostWeights, EigenSolveError, ModalData, cost, mac, pair_modes, solve_modes
from .optimizers import (
    Bounds, EvalBudget, GaConfig, HistoryRecord, SaConfig, ga_optimize,
    sa_optimize,
)
from .surrogate import SurrogateNet, TrainingSet, forward, init_net, target_scaling, train

log = logging.getLogger(__name__)

# extra modes solved beyond the compared ones, covering rigid-body modes
RIGID_ALLOWANCE = 4


@dataclass
class UpdatingProblem:
    """A structure, its measured modal data and the updating search space.

    param_elements optionally restricts updating to a subset of elements;
    the remaining elements keep the structure's stored moduli.
    """

    structure: BeamStructure
    bounds: Bounds
    measured: ModalData
    n_modes: int
    weights: CostWeights
    target_cost: float = 0.0
    param_elements: np.ndarray | None = None

    def __post_init__(self):
        if self.param_elements is not None:
            self.param_elements = np.asarray(self.param_elements, dtype=int)
            if np.unique(self.param_elements).size != self.param_elements.size:
                raise ValueError("param_elements must be unique")
            if np.any(self.param_elements < 0) or np.any(
                    self.param_elements >= self.structure.n_elements):
                raise ValueError("param_elements out of range")
        if self.bounds.dim != self.n_params:
            raise ValueError(
                f"bounds dimension {self.bounds.dim} != parameter count {self.n_params}")
        if self.measured.n_modes != self.n_modes:
            raise ValueError("measured mode count must equal n_modes")
        if self.weights.gamma.size != self.n_modes:
            raise ValueError("need one gamma weight per compared mode")
        if self.target_cost < 0.0:
            raise ValueError("target_cost must be >= 0")

    @property
    def n_params(self) -> int:
        if self.param_elements is not None:
            return self.param_elements.size
        return self.structure.n_elements

    def initial_parameters(self) -> np.ndarray:
        m = self.structure.moduli()
        if self.param_elements is not None:
            return m[self.param_elements]
        return m

    def full_moduli(self, params: np.ndarray) -> np.ndarray:
        if self.param_elements is None:
            return np.asarray(params, dtype=float)
        m = self.structure.moduli()
        m[self.param_elements] = params
        return m


@dataclass
class RsmConfig:
    n_samples: int = 150
    max_iterations: int = 10
    initial_cycles: int = 150
    incremental_cycles: int = 5
    m_hidden: int = 8
    ga: GaConfig = field(default_factory=GaConfig)
    sampler_seed: int = 0
    sampler: str = "lhs"  # or "uniform"

    def __post_init__(self):
        if self.n_samples < 2:
            raise ValueError("n_samples must be >= 2")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.initial_cycles < 1 or self.incremental_cycles < 1:
            raise ValueError("training cycle counts must be >= 1")
        if self.sampler not in ("lhs", "uniform"):
            raise ValueError("sampler must be 'lhs' or 'uniform'")


@dataclass
class UpdateReport:
    """Per-method updating outcome with enough detail to recompute it."""

    method: str
    initial_parameters: np.ndarray
    updated_parameters: np.ndarray
    measured_hz: np.ndarray
    initial_hz: np.ndarray
    updated_hz: np.ndarray
    initial_errors_pct: np.ndarray
    updated_errors_pct: np.ndarray
    mac_mean_initial: float
    mac_mean_updated: float
    initial_cost: float
    final_cost: float
    fe_evaluations: int
    history: list[HistoryRecord]
    wall_time_s: float
    seeds: dict
    config_echo: dict
    truncated: bool = False
    target_reached: bool = False
    surrogate: SurrogateNet | None = None
    design: tuple[np.ndarray, np.ndarray] | None = None  # final RSM training set

    def __post_init__(self):
        if self.fe_evaluations <= 0:
            raise ValueError("report must cover at least one FE evaluation")
        if np.any(self.measured_hz <= 0.0):
            raise ValueError("measured frequencies must be positive")

    @property
    def mean_abs_initial_error_pct(self) -> float:
        return float(np.mean(np.abs(self.initial_errors_pct)))

    @property
    def mean_abs_updated_error_pct(self) -> float:
        return float(np.mean(np.abs(self.updated_errors_pct)))


def full_objective(problem: UpdatingProblem, params: np.ndarray,
                   budget: EvalBudget) -> float:
    """Modal-distance cost of one parameter vector on the full FE model.

    Counts one FE evaluation. Eigen failures yield +inf so optimizers
    reject the candidate and keep running.
    """
    if not budget.consume():
        raise RuntimeError("FE evaluation budget exhausted")
    try:
        calc = _solve_observed(problem, params)
    except (EigenSolveError, ValueError) as exc:
        log.warning("full objective failed for a candidate: %s", exc)
        return math.inf
    pairing = pair_modes(calc, problem.measured)
    return cost(calc, problem.measured, problem.weights, pairing=pairing)


def _solve_observed(problem: UpdatingProblem, params: np.ndarray) -> ModalData:
    matrices = assemble(problem.structure, problem.full_moduli(params))
    n_solve = min(problem.n_modes + RIGID_ALLOWANCE, matrices.dof_count)
    modes = solve_modes(matrices, n_solve)
    return modes.at_coordinates(problem.measured.coordinate_map)


def compute_gamma_weights(initial: ModalData, measured: ModalData,
                          mode: str = "relative") -> np.ndarray:
    """Per-mode frequency weights from the initial model's errors.

    mode="relative": gamma_i = ((w_i^m - w_i^0) / w_i^m)^2, dimensionless.
    mode="absolute": gamma_i = (f_i^m - f_i^0)^2 in Hz^2, which makes the
    frequency term of the cost comparable to the beta-weighted MAC term
    instead of fourth-order small. Both operate on already-paired sets.
    """
    if initial.n_modes != measured.n_modes:
        raise ValueError("mode sets must be paired")
    if np.any(measured.frequencies == 0.0):
        raise ValueError("measured frequencies must be non-zero")
    if mode == "relative":
        rel = (measured.frequencies - initial.frequencies) / measured.frequencies
        return rel**2
    if mode == "absolute":
        return (measured.frequencies_hz - initial.frequencies_hz) ** 2
    raise ValueError("mode must be 'relative' or 'absolute'")


def sample_design(bounds: Bounds, n: int, seed: int, method: str = "lhs") -> np.ndarray:
    """n design points in the box; Latin hypercube by default.

    LHS places exactly one point per 1/n stratum in every coordinate.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    d = bounds.dim
    if method == "uniform":
        u = rng.uniform(0.0, 1.0, (n, d))
    elif method == "lhs":
        u = np.empty((n, d))
        for j in range(d):
            u[:, j] = (rng.permutation(n) + rng.uniform(0.0, 1.0, n)) / n
    else:
        raise ValueError("method must be 'lhs' or 'uniform'")
    return bounds.lower + u * bounds.range


def _modal_comparison(problem: UpdatingProblem, params: np.ndarray):
    """Paired frequencies (Hz), percent errors and mean MAC diagonal."""
    solved = _solve_observed(problem, params)
    pairing = pair_modes(solved, problem.measured)
    meas = problem.measured
    hz = solved.frequencies_hz[pairing]
    errors = 100.0 * (hz - meas.frequencies_hz) / meas.frequencies_hz
    mac_diag = np.diag(mac(solved.mode_shapes[:, pairing], meas.mode_shapes))
    return hz, errors, float(mac_diag.mean())


def _build_report(problem: UpdatingProblem, method: str, best_x: np.ndarray,
                  final_cost: float, history, budget: EvalBudget,
                  wall_time_s: float, seeds: dict, config_echo: dict,
                  truncated: bool = False, target_reached: bool = False) -> UpdateReport:
    x0 = problem.initial_parameters()
    initial_hz, initial_err, mac0 = _modal_comparison(problem, x0)
    updated_hz, updated_err, mac1 = _modal_comparison(problem, best_x)
    scratch = EvalBudget()
    initial_cost = full_objective(problem, x0, scratch)
    return UpdateReport(
        method=method,
        initial_parameters=np.asarray(x0, dtype=float),
        updated_parameters=np.asarray(best_x, dtype=float),
        measured_hz=problem.measured.frequencies_hz.copy(),
        initial_hz=initial_hz,
        updated_hz=updated_hz,
        initial_errors_pct=initial_err,
        updated_errors_pct=updated_err,
        mac_mean_initial=mac0,
        mac_mean_updated=mac1,
        initial_cost=initial_cost,
        final_cost=final_cost,
        fe_evaluations=budget.calls,
        history=list(history),
        wall_time_s=wall_time_s,
        seeds=dict(seeds),
        config_echo=dict(config_echo),
        truncated=truncated,
        target_reached=target_reached,
    )


def rsm_update(problem: UpdatingProblem, cfg: RsmConfig,
               initial_design: tuple[np.ndarray, np.ndarray] | None = None) -> UpdateReport:
    """Response-surface updating loop.

    1. Sample n_samples points (Latin hypercube) and evaluate them on the
       full model.
    2. Fit the MLP surrogate to (point, cost) pairs: initialized once,
       then warm-started with incremental_cycles per refinement.
    3. Run the GA on the surrogate prediction.
    4. Evaluate the GA optimum on the full model (one FE evaluation).
    5. If the cost still exceeds target_cost and iterations remain,
       replace the worst sample with the new pair and repeat from 2.

    Total FE evaluations are n_samples + (iterations performed). The
    returned parameters are always full-model evaluated. A precomputed
    (points, costs) design may be passed to warm-start step 1.
    """
    t0 = time.perf_counter()
    budget = EvalBudget()
    d = problem.n_params

    if initial_design is not None:
        X, t = initial_design
        X = np.asarray(X, dtype=float)
        t = np.asarray(t, dtype=float)
        if X.shape != (cfg.n_samples, d) or t.shape != (cfg.n_samples,):
            raise ValueError("initial design shape does not match the configuration")
        budget.charge(cfg.n_samples)  # design points count as FE evaluations
        X, t = X.copy(), t.copy()
    else:
        X = sample_design(problem.bounds, cfg.n_samples, cfg.sampler_seed, cfg.sampler)
        t = np.array([full_objective(problem, x, budget) for x in X])

    best_i = int(np.argmin(t))
    best_x, best_cost = X[best_i].copy(), float(t[best_i])

    center, scale = target_scaling(t)
    net = init_net(d, cfg.m_hidden, problem.bounds, seed=cfg.sampler_seed,
                   target_center=center, target_scale=scale,
                   planned_samples=cfg.n_samples)

    history: list[HistoryRecord] = []
    target_reached = False
    for it in range(1, cfg.max_iterations + 1):
        cycles = cfg.initial_cycles if it == 1 else cfg.incremental_cycles
        try:
            net = train(net, TrainingSet(inputs=X, targets=t), cycles)
        except ValueError as exc:
            log.error("surrogate training failed at iteration %d: %s", it, exc)
            break
        inner_cfg = replace(cfg.ga, seed=cfg.ga.seed + it)
        inner = ga_optimize(lambda x: forward(net, x), problem.bounds, inner_cfg)
        c_full = full_objective(problem, inner.best_x, budget)
        if c_full < best_cost:
            best_cost, best_x = c_full, inner.best_x.copy()
        history.append(HistoryRecord(step=it, best_cost=best_cost,
                                     mean_cost=float(np.mean(t)),
                                     evaluations=budget.calls))
        if c_full <= problem.target_cost:
            target_reached = True
            break
        # replace the worst-cost sample (first index on ties) with the new
        # pair; a pair worse than the current worst would only degrade the
        # set, so the design max never increases
        worst = int(np.argmax(t))
        if c_full <= t[worst]:
            X[worst] = inner.best_x
            t[worst] = c_full

    elapsed = time.perf_counter() - t0
    report = _build_report(
        problem, "rsm", best_x, best_cost, history, budget, elapsed,
        seeds={"sampler": cfg.sampler_seed, "ga": cfg.ga.seed},
        config_echo=_echo_rsm(cfg),
        target_reached=target_reached,
    )
    report.surrogate = net
    report.design = (X, t)
    return report


def load_design(path) -> tuple[np.ndarray, np.ndarray]:
    """Read a design written by the sample command: parameters + cost columns."""
    rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return rows[:, :-1], rows[:, -1]


def _echo_rsm(cfg: RsmConfig) -> dict:
    echo = {k: getattr(cfg, k) for k in
            ("n_samples", "max_iterations", "initial_cycles",
             "incremental_cycles", "m_hidden", "sampler_seed", "sampler")}
    echo["ga"] = _echo_dataclass(cfg.ga)
    return echo


def _echo_dataclass(cfg) -> dict:
    return {k: getattr(cfg, k) for k in cfg.__dataclass_fields__}


def ga_update(problem: UpdatingProblem, cfg: GaConfig) -> UpdateReport:
    """Genetic algorithm directly on the full FE model."""
    t0 = time.perf_counter()
    budget = EvalBudget()
    res = ga_optimize(lambda x: full_objective(problem, x, budget),
                      problem.bounds, cfg)
    return _build_report(
        problem, "ga", res.best_x, res.best_cost, res.history, budget,
        time.perf_counter() - t0, seeds={"ga": cfg.seed},
        config_echo=_echo_dataclass(cfg), truncated=res.truncated)


def sa_update(problem: UpdatingProblem, cfg: SaConfig) -> UpdateReport:
    """Simulated annealing directly on the full FE model.

    The first annealing run starts from the initial model, so the best
    cost can never exceed the initial cost.
    """
    t0 = time.perf_counter()
    budget = EvalBudget()
    res = sa_optimize(lambda x: full_objective(problem, x, budget),
                      problem.bounds, cfg, x0=problem.initial_parameters())
    return _build_report(
        problem, "sa", res.best_x, res.best_cost, res.history, budget,
        time.perf_counter() - t0, seeds={"sa": cfg.seed},
        config_echo=_echo_dataclass(cfg), truncated=res.truncated)
