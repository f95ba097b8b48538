"""Admissible time-dependent potentials and their numerical admissibility check.

The solvable class is V in <t>^{-1} L^inf_t W^k_{Mt0}: real potentials whose
weighted module norm <t> ||V(t)||_{W^k_{Mt0}} stays bounded in time.  Two
constructive families are provided (plus zero, plus a deliberately
inadmissible time-independent fixture):

* self_similar   V(t, z) = a <t>^{-1} |2 t_*|^{-n/2} phi(z / (2 t_*)),
  a fixed lens-frame profile riding the dispersive spreading; the volume
  factor |2 t_*|^{-n/2} makes <t> ||V(t)||_{W^k_{Mt0}} constant in t, which
  is what membership at the edge of the class requires.
* nls_induced    V(t, .) = |P0 g|^{p-1}(t, .),
  the potential seen by the equation linearized around a free wave.

<t> = sqrt(1 + t^2); t_* is the small-time regularized t (t + 1 on [-1/2, 1/2)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid, Field
from .lens import lens_effective_time
from .modules import ModuleId, module_norm
from .propagator import ProfileSpec, poisson

_FAMILIES = ("zero", "self_similar", "nls_induced", "time_independent")


def _bracket(t):
    """<t> = sqrt(1 + t^2), elementwise on arrays."""
    return np.sqrt(1.0 + np.asarray(t, dtype=float) ** 2) if np.ndim(t) else float(np.sqrt(1.0 + t * t))


@dataclass(frozen=True)
class PotentialSpec:
    """One admissible potential family (or the inadmissible fixture)."""

    dim: int
    family: str = "zero"
    amplitude: float = 1.0
    profile: ProfileSpec = None   # phi for self_similar/time_independent, g for nls_induced
    power: int = 5                # p for nls_induced

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown potential family {self.family!r}")
        if self.family != "zero":
            if self.profile is None:
                raise ValueError(f"family {self.family!r} needs a profile")
            if self.profile.dim != self.dim:
                raise ValueError("profile dimension does not match potential dimension")
        if self.family in ("self_similar", "time_independent"):
            prof = self.profile
            if any(prof.phase_velocity) or prof.amplitude.imag != 0.0 \
                    or any(c.imag != 0.0 for c, _ in prof.poly):
                raise ValueError("potential profile must be real-valued")
        if self.family == "nls_induced" and (self.power < 3 or self.power % 2 == 0):
            raise ValueError(f"nls_induced power must be an odd integer >= 3, got {self.power}")

    @property
    def is_zero(self) -> bool:
        return self.family == "zero" or self.amplitude == 0.0

    def to_dict(self) -> dict:
        d = {"dim": self.dim, "family": self.family, "amplitude": self.amplitude}
        if self.profile is not None:
            d["profile"] = self.profile.to_dict()
        if self.family == "nls_induced":
            d["power"] = self.power
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PotentialSpec":
        profile = None
        if "profile" in d:
            prof = dict(d["profile"])
            prof.setdefault("dim", d["dim"])
            profile = ProfileSpec.from_dict(prof)
        return cls(dim=int(d["dim"]), family=d.get("family", "zero"),
                   amplitude=float(d.get("amplitude", 1.0)), profile=profile,
                   power=int(d.get("power", 5)))


def zero_potential(dim: int) -> PotentialSpec:
    return PotentialSpec(dim=dim, family="zero")


def eval_potential(spec: PotentialSpec, t: float, grid: Grid) -> Field:
    """Real-valued V(t, .) sampled on the grid."""
    if not np.isfinite(t):
        raise ValueError(f"nonfinite time {t}")
    if grid.dim != spec.dim:
        raise ValueError("grid dimension does not match potential dimension")
    if spec.is_zero:
        return Field(grid, np.zeros(grid.shape), time_tag=t)
    n = spec.dim
    if spec.family == "self_similar":
        ts = lens_effective_time(t)
        scale = 2.0 * ts
        coords = [grid.axis_coordinates(a) / scale for a in range(n)]
        vals = spec.profile.evaluate(coords).real
        amp = spec.amplitude / (_bracket(t) * abs(scale) ** (n / 2.0))
        return Field(grid, amp * vals + 0.0j, time_tag=t)
    if spec.family == "nls_induced":
        free = poisson(spec.profile, t, grid)
        vals = np.abs(free.samples) ** (spec.power - 1)
        return Field(grid, spec.amplitude * vals + 0.0j, time_tag=t)
    if spec.family == "time_independent":
        vals = spec.profile.evaluate_on_grid(grid).samples.real
        return Field(grid, spec.amplitude * vals + 0.0j, time_tag=t)
    raise ValueError(f"unknown potential family {spec.family!r}")


@dataclass
class AdmissibilityReport:
    bound: float
    admissible: bool
    times: list
    weighted_norms: list

    def to_dict(self) -> dict:
        return {
            "bound": self.bound,
            "admissible": self.admissible,
            "times": list(self.times),
            "weighted_norms": list(self.weighted_norms),
        }


def admissibility_bound(spec: PotentialSpec, k: int, t_samples, grid: Grid) -> AdmissibilityReport:
    """max over samples of <t> ||V(t)||_{W^k_{Mt0}}, with a stabilization check.

    Sampling cannot prove sup_t finiteness; the pragmatic stand-in flags the
    potential inadmissible when the running max still grows by more than 2x
    over the last decade of sampled times.
    """
    t_samples = sorted(float(t) for t in t_samples)
    if len(t_samples) < 16:
        raise ValueError(f"need at least 16 log-uniform samples of [1/2, T], got {len(t_samples)}")
    weighted = []
    for t in t_samples:
        v = eval_potential(spec, t, grid)
        weighted.append(_bracket(t) * module_norm(v, ModuleId("Mt0", k, t)))
    bound = max(weighted)
    t_end = t_samples[-1]
    early = [b for t, b in zip(t_samples, weighted) if t <= t_end / 10.0]
    early_max = max(early) if early else weighted[0]
    admissible = bound <= 2.0 * early_max and np.isfinite(bound)
    return AdmissibilityReport(bound=float(bound), admissible=bool(admissible),
                               times=t_samples, weighted_norms=[float(b) for b in weighted])


def lens_amplitude_and_symbol(spec: PotentialSpec, grid: Grid):
    """Large-s stationary-phase model of the potential term, for tail quadrature.

    For s far beyond the iterated mesh, V(s) u(s) for u ~ P0 f is, to leading
    order, amp(s) * (symbol * f) propagated freely, with

        self_similar:  amp(s) = a <s>^{-1} (2s)^{-n/2},   symbol = phi(xi),
        nls_induced:   amp(s) = a (4 pi s)^{-n(p-1)/2},   symbol = |g(xi)|^{p-1}.

    Returns (amp callable, symbol array on the dual lattice), or None when the
    family has no decaying model (zero or the inadmissible fixture).
    """
    n = spec.dim
    if spec.is_zero or spec.family == "time_independent":
        return None
    if spec.family == "self_similar":
        symbol = spec.profile.evaluate([grid.axis_frequencies(a) for a in range(n)]).real

        def amp(s):
            return spec.amplitude / (_bracket(s) * (2.0 * s) ** (n / 2.0))

        return amp, symbol
    if spec.family == "nls_induced":
        g_vals = spec.profile.evaluate([grid.axis_frequencies(a) for a in range(n)])
        symbol = np.abs(g_vals) ** (spec.power - 1)

        def amp(s):
            return spec.amplitude * (4.0 * np.pi * s) ** (-n * (spec.power - 1) / 2.0)

        return amp, symbol
    raise ValueError(f"unknown potential family {spec.family!r}")
