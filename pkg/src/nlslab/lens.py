"""Pseudoconformal (lens) frame: phase removal, zeta relabeling, final-state error.

The lens profile of a slice u(t, .) is

    U(bt, zeta) = (4 pi i t)^{n/2} e^{-i|z|^2/4t} u(t, z),   zeta = z/(2t),  bt = 1/(4t),

computed by pointwise phase removal and an exact relabeling of the z-grid as
a zeta-grid (never interpolation), so U converges to the final state f as
t -> +infinity and the comparison against an analytically evaluated f is free
of interpolation error.  The complex root uses the principal branch
exp((n/2) Log(4 pi i t)) everywhere, including inversion.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid, Field
from .modules import ModuleId, module_norm
from .propagator import ProfileSpec


def lens_effective_time(t: float) -> float:
    """Small-time rule shared with the module families: t+1 on [-1/2, 1/2)."""
    return t + 1.0 if -0.5 <= t < 0.5 else t


def remove_phase(u: Field, t: float) -> Field:
    """u -> e^{-i|z|^2/4t} u (with the small-time rule below |t| = 1/2)."""
    te = lens_effective_time(t)
    if te == 0.0:
        raise ValueError("t = 0 without small-time rule")
    g = u.grid
    rsq = sum(np.broadcast_to(g.axis_coordinates(a), g.shape) ** 2 for a in range(g.dim))
    return u.with_samples(u.samples * np.exp(-1j * rsq / (4.0 * te)))


def add_phase(u: Field, t: float) -> Field:
    """Exact inverse of remove_phase."""
    te = lens_effective_time(t)
    if te == 0.0:
        raise ValueError("t = 0 without small-time rule")
    g = u.grid
    rsq = sum(np.broadcast_to(g.axis_coordinates(a), g.shape) ** 2 for a in range(g.dim))
    return u.with_samples(u.samples * np.exp(1j * rsq / (4.0 * te)))


def lens_amplitude(t: float, dim: int) -> complex:
    """(4 pi i t)^{n/2} on the principal branch."""
    return complex(np.exp(0.5 * dim * np.log(complex(0.0, 4.0 * np.pi * t))))


@dataclass(frozen=True)
class LensFrame:
    """Bookkeeping for one lens transform: physical t, lens time, both grids."""

    t: float
    zeta_grid: Grid
    z_grid: Grid

    @property
    def lens_time(self) -> float:
        return 1.0 / (4.0 * self.t)


def _relabel_indices(n_points: int, t: float) -> np.ndarray:
    # t > 0: identity; t < 0: z/(2t) reverses orientation, and the relabeled
    # lattice matches the standard one after the periodic index map m -> -m mod N.
    if t > 0:
        return np.arange(n_points)
    return (-np.arange(n_points)) % n_points


def lens_profile(u: Field, t: float) -> tuple:
    """Return (U(bt, .) on the zeta-grid, LensFrame); requires |t| >= 1/2."""
    if abs(t) < 0.5:
        raise ValueError(f"lens profile needs |t| >= 1/2, got t = {t}")
    g = u.grid
    zeta_grid = Grid(g.dim, g.half_width / (2.0 * abs(t)), g.points_per_axis)
    frame = LensFrame(t=t, zeta_grid=zeta_grid, z_grid=g)
    tilde = remove_phase(u, t)
    idx = _relabel_indices(g.points_per_axis, t)
    samples = tilde.samples[np.ix_(*([idx] * g.dim))] if t < 0 else tilde.samples
    samples = lens_amplitude(t, g.dim) * samples
    return Field(zeta_grid, samples, time_tag=frame.lens_time), frame


def lens_invert(profile: Field, frame: LensFrame) -> Field:
    """Exact inverse of lens_profile (bit-for-bit up to the unimodular factors)."""
    if profile.grid != frame.zeta_grid:
        raise ValueError("profile does not live on the frame's zeta-grid")
    samples = profile.samples / lens_amplitude(frame.t, frame.z_grid.dim)
    if frame.t < 0:
        idx = _relabel_indices(frame.z_grid.points_per_axis, frame.t)
        samples = samples[np.ix_(*([idx] * frame.z_grid.dim))]
    tilde = Field(frame.z_grid, samples, time_tag=frame.t)
    return add_phase(tilde, frame.t)


def lens_profile_of_spec(f: ProfileSpec, frame: LensFrame) -> Field:
    """f evaluated analytically on the (time-dependent) zeta-grid."""
    return f.evaluate_on_grid(frame.zeta_grid)


def final_state_error(u: Field, t: float, f: ProfileSpec, k: int) -> float:
    """W^k_N norm of U(bt, .) - f on the zeta-grid."""
    profile, frame = lens_profile(u, t)
    target = lens_profile_of_spec(f, frame)
    diff = Field(frame.zeta_grid, profile.samples - target.samples, time_tag=profile.time_tag)
    return module_norm(diff, ModuleId("Nzeta", k))
