"""Experiment configuration: JSON schema, validation, and construction.

A config file is one JSON object; see README for the documented schema.
Validation happens before any computation: (n, p) admissibility, k >= 2 and
the power-of-two grid are all checked at construction time.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dataclass_field

from .grid import Grid
from .potentials import PotentialSpec, zero_potential
from .propagator import ProfileSpec
from .solver import SolverConfig


class ConfigError(ValueError):
    pass


_DEFAULT_PROBES = ("multiplication", "gagliardo_nirenberg", "nonlinear_bound",
                   "decay", "strichartz")


@dataclass
class ExperimentConfig:
    dimension: int
    grid: Grid
    solver: SolverConfig
    profile: ProfileSpec
    potential: PotentialSpec
    seed: int = 0
    output_dir: str = "artifacts"
    probes: tuple = _DEFAULT_PROBES
    probe_samples: int = 32
    probe_times: tuple = (2.0, 8.0, 32.0)
    evolver_dt: float = 2e-3
    snapshot_stride: int = 8
    extend_to_factor: float = 6.0     # backward horizon: t_end = -factor * S
    t1_factors: tuple = (0.5, 1.0)    # f_minus anchors, in units of S
    rate_window_factor: float = 16.0  # fit window [S, factor * S]
    boundary_tol: float = 1e-8
    raw: dict = dataclass_field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        try:
            dim = int(d["dimension"])
            grid = Grid(dim, float(d["grid"]["half_width"]), int(d["grid"]["points_per_axis"]))
            solver = SolverConfig(dim=dim, **{k: v for k, v in d.get("solver", {}).items()})
            prof = dict(d["profile"])
            prof.setdefault("dim", dim)
            profile = ProfileSpec.from_dict(prof)
            pot = dict(d.get("potential", {"family": "zero"}))
            pot.setdefault("dim", dim)
            potential = PotentialSpec.from_dict(pot)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        kwargs = {}
        for key in ("seed", "output_dir", "probe_samples", "snapshot_stride"):
            if key in d:
                kwargs[key] = d[key]
        for key in ("evolver_dt", "extend_to_factor", "rate_window_factor", "boundary_tol"):
            if key in d:
                kwargs[key] = float(d[key])
        if "probes" in d:
            kwargs["probes"] = tuple(d["probes"])
        if "probe_times" in d:
            kwargs["probe_times"] = tuple(float(t) for t in d["probe_times"])
        if "t1_factors" in d:
            kwargs["t1_factors"] = tuple(float(t) for t in d["t1_factors"])
        cfg = cls(dimension=dim, grid=grid, solver=solver, profile=profile,
                  potential=potential, raw=dict(d), **kwargs)
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config is not valid JSON: {exc}") from exc
        return cls.from_dict(data)

    def validate(self):
        if self.profile.dim != self.dimension or self.potential.dim != self.dimension:
            raise ConfigError("profile/potential dimension mismatch")
        unknown = set(self.probes) - set(_DEFAULT_PROBES)
        if unknown:
            raise ConfigError(f"unknown probes: {sorted(unknown)}")
        if self.evolver_dt <= 0:
            raise ConfigError("evolver_dt must be positive")

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "grid": {"half_width": self.grid.half_width,
                     "points_per_axis": self.grid.points_per_axis},
            "solver": {k: v for k, v in self.solver.to_dict().items() if k != "dim"},
            "profile": self.profile.to_dict(),
            "potential": self.potential.to_dict(),
            "seed": self.seed,
            "output_dir": self.output_dir,
            "probes": list(self.probes),
            "probe_samples": self.probe_samples,
            "probe_times": list(self.probe_times),
            "evolver_dt": self.evolver_dt,
            "snapshot_stride": self.snapshot_stride,
            "extend_to_factor": self.extend_to_factor,
            "t1_factors": list(self.t1_factors),
            "rate_window_factor": self.rate_window_factor,
            "boundary_tol": self.boundary_tol,
        }
