"""Free Schroedinger group exp(-i tau Delta) and the final-state (Poisson) operator.

The group solves (D_t + Delta) u = 0, Delta = -sum d^2/dz_j^2, so one time
step of tau multiplies the spectrum by exp(-i tau |xi|^2).  The Poisson
operator maps a closed-form profile f to the free solution

    P0 f(t, z) = (2pi)^{-n} integral exp(-i t |zeta|^2) exp(i z.zeta) f(zeta) dzeta,

realized exactly (up to band-limiting) by sampling f on the dual lattice.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid, Field, apply_multiplier, from_spectrum, spectral_tail_fraction

_FAMILIES = ("gaussian", "gaussian_poly", "gaussian_phase")


@dataclass(frozen=True)
class ProfileSpec:
    """Closed-form final-state profile f(zeta), evaluable at arbitrary points.

    f(zeta) = amplitude * P(zeta - center) * exp(-sum ((zeta_j - c_j)/w_j)^2)
                        * exp(i v . zeta)

    with P a polynomial given as (coefficient, powers) terms.  The Gaussian
    factor keeps every W^k_N norm finite.
    """

    dim: int
    family: str = "gaussian"
    amplitude: complex = 1.0
    width: tuple = (1.0,)
    center: tuple = (0.0,)
    phase_velocity: tuple = (0.0,)
    poly: tuple = ()   # ((coeff, (p_1, ..., p_n)), ...); empty means P = 1

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown profile family {self.family!r}")

        def _vec(v):
            v = tuple(float(x) for x in np.broadcast_to(np.asarray(v, dtype=float), (self.dim,)))
            return v

        object.__setattr__(self, "width", _vec(self.width))
        object.__setattr__(self, "center", _vec(self.center))
        object.__setattr__(self, "phase_velocity", _vec(self.phase_velocity))
        poly = tuple((complex(c), tuple(int(p) for p in powers)) for c, powers in self.poly)
        for _, powers in poly:
            if len(powers) != self.dim:
                raise ValueError("polynomial powers must have one entry per axis")
        object.__setattr__(self, "poly", poly)
        object.__setattr__(self, "amplitude", complex(self.amplitude))

    def evaluate(self, coords: list) -> np.ndarray:
        """Evaluate f at points given by broadcastable coordinate arrays."""
        if len(coords) != self.dim:
            raise ValueError(f"need {self.dim} coordinate arrays, got {len(coords)}")
        shifted = [np.asarray(c, dtype=float) - c0 for c, c0 in zip(coords, self.center)]
        expo = sum((s / w) ** 2 for s, w in zip(shifted, self.width))
        out = self.amplitude * np.exp(-expo)
        if self.poly:
            p = sum(c * np.prod([s ** k for s, k in zip(shifted, powers)], axis=0)
                    for c, powers in self.poly)
            out = out * p
        v = self.phase_velocity
        if any(v):
            out = out * np.exp(1j * sum(vj * np.asarray(c, dtype=float) for vj, c in zip(v, coords)))
        return np.asarray(out, dtype=np.complex128)

    def evaluate_on_grid(self, grid: Grid) -> Field:
        if grid.dim != self.dim:
            raise ValueError("grid dimension does not match profile dimension")
        return Field(grid, self.evaluate([grid.axis_coordinates(a) for a in range(grid.dim)]))

    def evaluate_on_lattice(self, grid: Grid) -> np.ndarray:
        """Sample f on the dual frequency lattice (FFT order)."""
        if grid.dim != self.dim:
            raise ValueError("grid dimension does not match profile dimension")
        return self.evaluate([grid.axis_frequencies(a) for a in range(grid.dim)])

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "family": self.family,
            "amplitude": [self.amplitude.real, self.amplitude.imag],
            "width": list(self.width),
            "center": list(self.center),
            "phase_velocity": list(self.phase_velocity),
            "poly": [[[c.real, c.imag], list(powers)] for c, powers in self.poly],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ProfileSpec":
        amp = d.get("amplitude", 1.0)
        if isinstance(amp, (list, tuple)):
            amp = complex(amp[0], amp[1])
        poly = tuple(
            (complex(c[0], c[1]) if isinstance(c, (list, tuple)) else complex(c), tuple(powers))
            for c, powers in d.get("poly", ())
        )
        return cls(
            dim=int(d["dim"]),
            family=d.get("family", "gaussian"),
            amplitude=amp,
            width=tuple(d.get("width", (1.0,))),
            center=tuple(d.get("center", (0.0,))),
            phase_velocity=tuple(d.get("phase_velocity", (0.0,))),
            poly=poly,
        )


def zero_profile(dim: int) -> ProfileSpec:
    return ProfileSpec(dim=dim, amplitude=0.0)


def propagate(f: Field, tau: float) -> Field:
    """exp(-i tau Delta) f: the free flow by time offset tau; unitary on discrete L^2."""
    if not np.isfinite(tau):
        raise ValueError(f"nonfinite propagation time {tau}")
    if tau == 0.0:
        return f.with_samples(f.samples.copy(), f.time_tag)
    mult = np.exp(-1j * tau * f.grid.ksq())
    return apply_multiplier(f, mult, time_tag=f.time_tag + tau)


POISSON_TAIL_TOL = 1e-10


def poisson(f: ProfileSpec, t: float, grid: Grid) -> Field:
    """P0 f(t, .): sample f on the dual lattice, phase by exp(-i t |xi|^2), invert.

    Raises if the profile is not representable on the lattice (spectral tail
    above POISSON_TAIL_TOL of total mass).
    """
    if not np.isfinite(t):
        raise ValueError(f"nonfinite time {t}")
    values = f.evaluate_on_lattice(grid)
    tail = spectral_tail_fraction(values, grid)
    if tail > POISSON_TAIL_TOL:
        raise ValueError(f"profile not representable on grid: spectral tail fraction {tail:.3e}")
    spectrum = np.exp(-1j * t * grid.ksq()) * values
    return from_spectrum(grid, spectrum, time_tag=t)
