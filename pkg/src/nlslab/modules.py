"""Symmetry-module generators and the module-regularity norms W^k.

Three generator families measure regularity of a time slice:

* Mt      {Id, z_j D_i - z_i D_j, 2t D_j - z_j, D_j}          physical frame,
* Mt0     {Id, z_j D_i - z_i D_j, 2t D_j, D_j + z_j/(2t)}     phase-removed frame,
* Mt0hat  {Id, z_j D_i - z_i D_j, 2t D_j, z_j/(2t)}           equivalent set for |t| >= 1/2,
* Nzeta   {Id, z_j D_i - z_i D_j, D_j, z_j}                   zeta (final-state) frame.

For |t| < 1/2 (inclusive at -1/2, exclusive at +1/2) the time-dependent
families replace t by t + 1; this small-time rule keeps the generators
nondegenerate through t = 0.

The order-k norm sums ||A_1 ... A_k u||_{L^2}^2 over all ordered k-tuples of
generators drawn from the family, Identity included, so every monomial of
degree <= k contributes.  Enumeration order is fixed lexicographically by
generator index; the sum is order-independent but per-monomial logs follow it.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .grid import Field, coordinate_multiply, l2_norm, spectral_derivative

ORDER_CAP = 4

_FAMILIES = ("Mt", "Mt0", "Mt0hat", "Nzeta")

_FAMILY_KINDS = {
    "Mt": ("identity", "rotation", "galilean", "derivative"),
    "Mt0": ("identity", "rotation", "scaled_derivative", "conj_derivative"),
    "Mt0hat": ("identity", "rotation", "scaled_derivative", "zeta_coord"),
    "Nzeta": ("identity", "rotation", "zeta_derivative", "zeta_coord"),
}


@dataclass(frozen=True)
class GeneratorTag:
    """One generator: kind plus the axis (or axis pair, for rotations) it acts on."""

    kind: str
    axes: tuple = ()

    def label(self) -> str:
        if self.kind == "identity":
            return "Id"
        if self.kind == "rotation":
            i, j = self.axes
            return f"R({i},{j})"
        names = {
            "galilean": "2tD{0}-z{0}",
            "derivative": "D{0}",
            "conj_derivative": "D{0}+z{0}/2t",
            "scaled_derivative": "2tD{0}",
            "zeta_coord": "zeta{0}",
            "zeta_derivative": "Dzeta{0}",
        }
        return names[self.kind].format(self.axes[0])


@dataclass(frozen=True)
class ModuleId:
    """Which generator family, at which time, to which order."""

    family: str
    order: int
    time: float = 0.0

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown module family {self.family!r}")
        if not 0 <= self.order <= ORDER_CAP:
            raise ValueError(f"order must be in [0, {ORDER_CAP}], got {self.order}")

    @property
    def small_time_rule(self) -> bool:
        """t -> t + 1 region: inclusive at -1/2, exclusive at +1/2 (fixed convention)."""
        if self.family == "Nzeta":
            return False
        return -0.5 <= self.time < 0.5

    @property
    def effective_time(self) -> float:
        if self.family == "Nzeta":
            # makes z_j/(2 t_eff) the plain coordinate, which is zeta on a zeta-grid
            return 0.5
        return self.time + 1.0 if self.small_time_rule else self.time


def generators(module: ModuleId, dim: int) -> list:
    """Ordered generator list for a family in a given dimension (Identity first)."""
    kinds = _FAMILY_KINDS[module.family]
    gens = [GeneratorTag("identity")]
    for i in range(dim):
        for j in range(i + 1, dim):
            gens.append(GeneratorTag("rotation", (i, j)))
    for kind in kinds[2:]:
        for j in range(dim):
            gens.append(GeneratorTag(kind, (j,)))
    return gens


def apply_generator(f: Field, gen: GeneratorTag, module: ModuleId) -> Field:
    """Apply one generator: derivatives spectral, coordinate factors pointwise."""
    if gen.kind not in _FAMILY_KINDS[module.family]:
        raise ValueError(f"generator {gen.kind!r} not in family {module.family!r}")
    dim = f.grid.dim
    for a in gen.axes:
        if not 0 <= a < dim:
            raise ValueError(f"axis {a} out of range for dim {dim}")
    t = module.effective_time
    if gen.kind == "identity":
        return f
    if gen.kind == "rotation":
        i, j = gen.axes
        zj_di = coordinate_multiply(spectral_derivative(f, i), j)
        zi_dj = coordinate_multiply(spectral_derivative(f, j), i)
        return f.with_samples(zj_di.samples - zi_dj.samples)
    (j,) = gen.axes
    if gen.kind in ("derivative", "zeta_derivative"):
        return spectral_derivative(f, j)
    if gen.kind == "galilean":
        return f.with_samples(2.0 * t * spectral_derivative(f, j).samples
                              - coordinate_multiply(f, j).samples)
    if gen.kind == "scaled_derivative":
        return f.with_samples(2.0 * t * spectral_derivative(f, j).samples)
    if gen.kind == "conj_derivative":
        return f.with_samples(spectral_derivative(f, j).samples
                              + coordinate_multiply(f, j).samples / (2.0 * t))
    if gen.kind == "zeta_coord":
        return f.with_samples(coordinate_multiply(f, j).samples / (2.0 * t))
    raise ValueError(f"unknown generator kind {gen.kind!r}")


def _chain_contributions(f: Field, module: ModuleId):
    """(monomial label, squared L2 norm) for every ordered tuple of length k."""
    gens = generators(module, f.grid.dim)
    out = []

    def rec(current: Field, labels: tuple, depth: int):
        if depth == module.order:
            out.append((" ".join(labels) if labels else "Id^0", l2_norm(current) ** 2))
            return
        for g in gens:
            rec(apply_generator(current, g, module), labels + (g.label(),), depth + 1)

    rec(f, (), 0)
    return out


def module_norm(f: Field, module: ModuleId) -> float:
    """W^k norm: sqrt of the sum of ||A_1...A_k u||^2 over ordered generator tuples.

    Coordinate factors amplify periodic-boundary contamination; callers are
    responsible for keeping fields decayed at the box edge.
    """
    total = 0.0
    gens = generators(module, f.grid.dim)

    def rec(current: Field, depth: int):
        nonlocal total
        if depth == module.order:
            total += l2_norm(current) ** 2
            return
        for g in gens:
            rec(apply_generator(current, g, module), depth + 1)

    rec(f, 0)
    return float(np.sqrt(total))


def module_norm_breakdown(f: Field, module: ModuleId) -> list:
    """Per-monomial contributions in the fixed enumeration order."""
    return _chain_contributions(f, module)


def write_monomial_csv(path, f: Field, module: ModuleId):
    """Export the per-monomial breakdown (columns: monomial, l2_squared)."""
    rows = module_norm_breakdown(f, module)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["monomial", "l2_squared"])
        for label, value in rows:
            w.writerow([label, f"{value:.17e}"])


def onecusp_norm(profile_field: Field, k: int) -> float:
    """W^k_N norm of a profile in zeta variables.

    This generator-set norm is the implemented surrogate for the weighted
    1-cusp Sobolev norm; the two are equivalent, and only this one is computed.
    """
    return module_norm(profile_field, ModuleId("Nzeta", k))
