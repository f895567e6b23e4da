"""INI-style run configuration for the command-line front end.

Sections: [structure], [scenario], [cost], [rsm], [ga], [sa]. Every
field has a default, so an empty file describes the default fixture at
production settings; see the README for the full schema and units.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, replace

import numpy as np

from .beam import BeamElement, BeamStructure
from .optimizers import GaConfig, SaConfig
from .scenario import ScenarioSpec
from .updating import RsmConfig


class ConfigError(Exception):
    """Config file problem, annotated with section/field context."""


@dataclass
class RunSettings:
    """Everything a command needs: fixture spec plus method configs."""

    spec: ScenarioSpec
    structure: BeamStructure | None
    rsm: RsmConfig
    ga: GaConfig
    sa: SaConfig

    def with_global_seed(self, seed: int | None) -> "RunSettings":
        """Derive all component seeds from one global seed."""
        if seed is None:
            return self
        return RunSettings(
            spec=replace(self.spec, seed=seed),
            structure=self.structure,
            rsm=replace(self.rsm, sampler_seed=seed + 1,
                        ga=replace(self.rsm.ga, seed=seed + 2)),
            ga=replace(self.ga, seed=seed + 2),
            sa=replace(self.sa, seed=seed + 3),
        )

    def all_seeds(self) -> dict:
        return {"scenario": self.spec.seed, "sampler": self.rsm.sampler_seed,
                "ga": self.ga.seed, "sa": self.sa.seed}


def _get(parser, section, key, cast, default):
    if not parser.has_option(section, key):
        return default
    raw = parser.get(section, key)
    try:
        return cast(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r} ({exc})") from exc


def _parse_perturbations(raw: str) -> tuple:
    out = []
    for chunk in raw.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        idx, _, value = chunk.partition(":")
        out.append((int(idx), float(value)))
    return tuple(out)


def _parse_int_list(raw: str) -> tuple:
    return tuple(int(v) for v in raw.replace(";", ",").split(",") if v.strip())


def _parse_nodes(raw: str) -> np.ndarray:
    rows = []
    for chunk in raw.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        x, y = (float(v) for v in chunk.split(","))
        rows.append((x, y))
    return np.array(rows)


def _parse_elements(raw: str) -> list[BeamElement]:
    out = []
    for chunk in raw.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        a, b, area, inertia, rho, e_mod = chunk.split(",")
        out.append(BeamElement(int(a), int(b), float(area), float(inertia),
                               float(rho), float(e_mod)))
    return out


def load_settings(path) -> RunSettings:
    """Parse a config file into run settings.

    Raises ConfigError with section/field diagnostics on any problem.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"config syntax error in {path}: {exc}") from exc

    for section in parser.sections():
        if section not in ("structure", "scenario", "cost", "rsm", "ga", "sa"):
            raise ConfigError(f"unknown section [{section}]")

    g = _get
    # built stepwise so one bad field reports its own section/key
    kind = g(parser, "structure", "kind", str, "h_fixture").strip().lower()
    structure = None
    spec_kwargs = dict(
        crossbar_length=g(parser, "structure", "crossbar_length", float, 0.6),
        left_flange_length=g(parser, "structure", "left_flange_length", float, 0.48),
        right_flange_length=g(parser, "structure", "right_flange_length", float, 0.5),
        left_flange_elements=g(parser, "structure", "left_flange_elements", int, 4),
        right_flange_elements=g(parser, "structure", "right_flange_elements", int, 5),
        crossbar_elements=g(parser, "structure", "crossbar_elements", int, 3),
        area=g(parser, "structure", "area", float, 3.0e-4),
        second_moment=g(parser, "structure", "second_moment", float, 2.5e-9),
        density=g(parser, "structure", "density", float, 2700.0),
        nominal_modulus=g(parser, "structure", "nominal_modulus", float, 7.0e10),
        ground_truth_perturbations=g(parser, "scenario", "perturbations",
                                     _parse_perturbations,
                                     ((2, 6.3e10), (3, 6.3e10), (4, 6.3e10))),
        n_modes=g(parser, "scenario", "n_modes", int, 5),
        noise_std=g(parser, "scenario", "noise_std", float, 0.0),
        seed=g(parser, "scenario", "seed", int, 2024),
        lower_bound=g(parser, "scenario", "lower_bound", float, 6.0e10),
        upper_bound=g(parser, "scenario", "upper_bound", float, 8.0e10),
        observed_dofs=g(parser, "scenario", "observed_dofs", _parse_int_list, None),
        beta=g(parser, "cost", "beta", float, 0.75),
        gamma_mode=g(parser, "cost", "gamma_mode", str, "absolute").strip().lower(),
        target_cost=g(parser, "cost", "target_cost", float, 0.0),
    )

    if kind == "explicit":
        if not parser.has_option("structure", "nodes") or \
                not parser.has_option("structure", "elements"):
            raise ConfigError("[structure] explicit structures need nodes and elements")
        try:
            structure = BeamStructure(
                nodes=g(parser, "structure", "nodes", _parse_nodes, None),
                elements=g(parser, "structure", "elements", _parse_elements, None),
                constrained_dofs=g(parser, "structure", "constrained_dofs",
                                   _parse_int_list, ()),
            )
        except ValueError as exc:
            raise ConfigError(f"[structure] invalid explicit structure: {exc}") from exc
    elif kind != "h_fixture":
        raise ConfigError(f"[structure] kind must be h_fixture or explicit, got {kind!r}")

    try:
        spec = ScenarioSpec(**spec_kwargs)
    except ValueError as exc:
        raise ConfigError(f"[scenario] invalid: {exc}") from exc

    ga = _load_ga(parser, "ga")
    try:
        rsm = RsmConfig(
            n_samples=g(parser, "rsm", "n_samples", int, 150),
            max_iterations=g(parser, "rsm", "max_iterations", int, 10),
            initial_cycles=g(parser, "rsm", "initial_cycles", int, 150),
            incremental_cycles=g(parser, "rsm", "incremental_cycles", int, 5),
            m_hidden=g(parser, "rsm", "m_hidden", int, 8),
            sampler=g(parser, "rsm", "sampler", str, "lhs").strip().lower(),
            sampler_seed=g(parser, "rsm", "sampler_seed", int, 1),
            ga=ga,
        )
    except ValueError as exc:
        raise ConfigError(f"[rsm] invalid: {exc}") from exc

    steps_raw = g(parser, "sa", "steps_per_temperature", str, "auto").strip().lower()
    try:
        steps = None if steps_raw == "auto" else int(steps_raw)
    except ValueError as exc:
        raise ConfigError(f"[sa] steps_per_temperature: {steps_raw!r}") from exc
    try:
        sa = SaConfig(
            initial_temperature=g(parser, "sa", "initial_temperature", float, 1.0),
            cooling_factor=g(parser, "sa", "cooling_factor", float, 0.9),
            steps_per_temperature=steps,
            n_runs=g(parser, "sa", "n_runs", int, 3),
            step_scale=g(parser, "sa", "step_scale", float, 0.1),
            min_temperature=g(parser, "sa", "min_temperature", float, 1.0e-6),
            seed=g(parser, "sa", "seed", int, 3),
        )
    except ValueError as exc:
        raise ConfigError(f"[sa] invalid: {exc}") from exc

    return RunSettings(spec=spec, structure=structure, rsm=rsm, ga=ga, sa=sa)


def _load_ga(parser, section) -> GaConfig:
    try:
        return GaConfig(
            population_size=_get(parser, section, "population_size", int, 50),
            generations=_get(parser, section, "generations", int, 200),
            selection_q=_get(parser, section, "selection_q", float, 0.08),
            mutation_rate=_get(parser, section, "mutation_rate", float, 0.003),
            crossover_rate=_get(parser, section, "crossover_rate", float, 0.60),
            mutation_shape_b=_get(parser, section, "mutation_shape_b", float, 2.0),
            seed=_get(parser, section, "seed", int, 2),
        )
    except ValueError as exc:
        raise ConfigError(f"[{section}] invalid: {exc}") from exc
