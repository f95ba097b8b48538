"""Property probes for the norm inequalities and log-log rate fitting.

Inequalities with unquantified constants are probed as (a) finiteness of the
left/right ratio over seeded sample families and (b) stability of the max
ratio under the parameter the constant must not depend on (time, scale).
Samples are profiles instantiated in the self-similar frame

    u(t, z) = (2t)^{-n/2} P(z / 2t)        (phase-removed objects)

so that their module norms are time-uniform, which is the sharpness class of
the inequalities being probed.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field
from itertools import combinations_with_replacement

import numpy as np

from .grid import Grid, Field, l2_norm, norm, spectral_derivative, coordinate_multiply
from .lens import add_phase
from .modules import ModuleId, module_norm
from .potentials import PotentialSpec, eval_potential, _bracket
from .propagator import ProfileSpec


@dataclass
class ProbeReport:
    """Outcome of one probe: per-sample ratios plus a stability verdict."""

    name: str
    ratios: list
    max_ratio: float
    stable: bool
    excluded: int = 0
    details: dict = dataclass_field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "ratios": self.ratios,
            "max_ratio": self.max_ratio,
            "stable": self.stable,
            "excluded": self.excluded,
            "details": self.details,
        }


def random_profile(rng: np.random.Generator, dim: int, real: bool = False) -> ProfileSpec:
    """Seeded Gaussian x polynomial (degree <= 2) x plane-phase profile."""
    width = tuple(rng.uniform(0.7, 1.5, size=dim))
    center = tuple(rng.uniform(-0.4, 0.4, size=dim))
    amplitude = rng.uniform(0.5, 1.5)
    poly = [(1.0, (0,) * dim)]
    for a in range(dim):
        if rng.random() < 0.7:
            powers = [0] * dim
            powers[a] = int(rng.integers(1, 3))
            poly.append((float(rng.uniform(-0.6, 0.6)), tuple(powers)))
    phase = (0.0,) * dim if real else tuple(rng.uniform(-0.8, 0.8, size=dim))
    family = "gaussian_poly" if len(poly) > 1 else ("gaussian" if real or not any(phase) else "gaussian_phase")
    return ProfileSpec(dim=dim, family=family, amplitude=amplitude, width=width,
                       center=center, phase_velocity=phase, poly=tuple(poly))


def self_similar_field(profile: ProfileSpec, t: float, grid: Grid, with_phase: bool = False) -> Field:
    """Materialize a profile in the spreading frame at time t (optionally re-phased)."""
    n = grid.dim
    coords = [grid.axis_coordinates(a) / (2.0 * t) for a in range(n)]
    samples = profile.evaluate(coords) * (2.0 * t) ** (-n / 2.0)
    f = Field(grid, samples, time_tag=t)
    return add_phase(f, t) if with_phase else f


def probe_multiplication(samples: list, k: int) -> ProbeReport:
    """||uv||_{W^k_{Mt0}} vs <t>^{-n/2} ||u||_{W^k_{Mt0}} ||v||_{W^k_{Mt0}}.

    samples: list of (Field u, Field v, t).  Requires k > n/2.
    """
    ratios = []
    excluded = 0
    by_t = {}
    for u, v, t in samples:
        n = u.grid.dim
        if not k > n / 2:
            raise ValueError(f"multiplication rule needs k > n/2, got k={k}, n={n}")
        mod = ModuleId("Mt0", k, t)
        nu = module_norm(u, mod)
        nv = module_norm(v, mod)
        if nu == 0.0 or nv == 0.0:
            excluded += 1
            continue
        uv = Field(u.grid, u.samples * v.samples, time_tag=t)
        ratio = module_norm(uv, mod) / (_bracket(t) ** (-n / 2.0) * nu * nv)
        ratios.append({"t": t, "ratio": float(ratio)})
        by_t.setdefault(t, []).append(float(ratio))
    if not ratios:
        return ProbeReport("multiplication", [], float("nan"), False, excluded,
                           {"note": "all samples excluded"})
    group_max = {t: max(v) for t, v in by_t.items()}
    stable = max(group_max.values()) <= 3.0 * min(group_max.values())
    return ProbeReport("multiplication", ratios, max(r["ratio"] for r in ratios),
                       bool(stable), excluded, {"max_by_t": group_max})


# -- V-monomial machinery of the Gagliardo-Nirenberg chain ---------------------
# components: D_zeta_j, rotations, and the bracket <zeta>; a monomial V^alpha
# applies bracket powers innermost, then rotations, then derivatives.

def _v_components(grid: Grid):
    comps = []
    for a in range(grid.dim):
        comps.append(("D", a))
    for i in range(grid.dim):
        for j in range(i + 1, grid.dim):
            comps.append(("R", (i, j)))
    comps.append(("B", None))
    return comps


def _apply_v_component(f: Field, comp) -> Field:
    kind, arg = comp
    if kind == "D":
        return spectral_derivative(f, arg)
    if kind == "R":
        i, j = arg
        return f.with_samples(coordinate_multiply(spectral_derivative(f, i), j).samples
                              - coordinate_multiply(spectral_derivative(f, j), i).samples)
    if kind == "B":
        g = f.grid
        brk = np.sqrt(1.0 + sum(np.broadcast_to(g.axis_coordinates(a), g.shape) ** 2
                                for a in range(g.dim)))
        return f.with_samples(f.samples * brk)
    raise ValueError(kind)


def _lp_norm(f: Field, exponent: float) -> float:
    """L^q with the convention that a nonpositive/infinite index means L^inf."""
    if exponent is None or not np.isfinite(exponent) or exponent <= 0:
        return norm(f, "Linf")
    if exponent < 1.0:
        raise ValueError(f"L^q with q = {exponent} < 1 is outside the probed statements")
    return norm(f, "Lr", r=float(exponent))


def vmonomial_norm(f: Field, degree: int, exponent: float) -> float:
    """sum over monomials |alpha| <= degree of ||V^alpha f||_{L^exponent}."""
    comps = _v_components(f.grid)
    total = _lp_norm(f, exponent)
    for d in range(1, degree + 1):
        for combo in combinations_with_replacement(range(len(comps)), d):
            w = f
            for ci in reversed(combo):
                w = _apply_v_component(w, comps[ci])
            total += _lp_norm(w, exponent)
    return float(total)


def probe_gagliardo_nirenberg(samples: list, k: int, l: int, p_index: int) -> ProbeReport:
    """Ratios for the three probed statements of the V-monomial chain:

      base     ||V^1 u||^2_{L^{2k/p}} <= C ||u||_{L^{2k/(p-1)}} ||V^2 u||_{L^{2k/(p+1)}}
      corollary ||V^l u||_{L^{2k/l}}  <= C ||u||_inf^{1-l/k} ||V^k u||_{L^2}^{l/k}
      product  ||V^k(u1 u2)||_{L^2}   <= C (||u1||_inf ||V^k u2|| + ||V^k u1|| ||u2||_inf)

    samples: profile Fields in zeta variables; the product statement pairs
    consecutive samples.  p_index is the dummy exponent index p of the base
    case (1 <= p_index <= k required there).
    """
    if not (1 <= l <= k):
        raise ValueError(f"corollary needs 1 <= l <= k, got l={l}, k={k}")
    if not (1 <= p_index <= k):
        raise ValueError(f"base case needs 1 <= p_index <= k, got {p_index}")
    ratios = []
    excluded = 0
    for idx, u in enumerate(samples):
        if l2_norm(u) == 0.0:
            excluded += 1
            continue
        lhs = vmonomial_norm(u, 1, 2.0 * k / p_index) ** 2
        rhs = (_lp_norm(u, 2.0 * k / (p_index - 1) if p_index > 1 else None)
               * vmonomial_norm(u, 2, 2.0 * k / (p_index + 1)))
        ratios.append({"statement": "base", "sample": idx, "ratio": float(lhs / rhs)})

        lhs = vmonomial_norm(u, l, 2.0 * k / l)
        rhs = norm(u, "Linf") ** (1.0 - l / k) * vmonomial_norm(u, k, 2.0) ** (l / k)
        ratios.append({"statement": "corollary", "sample": idx, "ratio": float(lhs / rhs)})

    for idx in range(0, len(samples) - 1, 2):
        u1, u2 = samples[idx], samples[idx + 1]
        if l2_norm(u1) == 0.0 or l2_norm(u2) == 0.0:
            excluded += 1
            continue
        uv = Field(u1.grid, u1.samples * u2.samples)
        lhs = vmonomial_norm(uv, k, 2.0)
        rhs = (norm(u1, "Linf") * vmonomial_norm(u2, k, 2.0)
               + vmonomial_norm(u1, k, 2.0) * norm(u2, "Linf"))
        ratios.append({"statement": "product", "sample": idx, "ratio": float(lhs / rhs)})

    if not ratios:
        return ProbeReport("gagliardo_nirenberg", [], float("nan"), False, excluded,
                           {"note": "all samples excluded"})
    by_stmt = {}
    for r in ratios:
        by_stmt.setdefault(r["statement"], []).append(r["ratio"])
    finite = all(np.isfinite(v) for vals in by_stmt.values() for v in vals)
    return ProbeReport("gagliardo_nirenberg", ratios, max(r["ratio"] for r in ratios),
                       bool(finite), excluded,
                       {"max_by_statement": {s: max(v) for s, v in by_stmt.items()},
                        "k": k, "l": l, "p_index": p_index})


def probe_nonlinear_bound(samples: list, p: int, k: int) -> ProbeReport:
    """|| |u|^{p-1} u ||_{W^k_{Mt}} vs ||u||_inf^{p-1} ||u||_{W^k_{Mt}}; t-stable max.

    samples: list of (Field u, t); p odd.
    """
    if p % 2 == 0 or p < 3:
        raise ValueError(f"p must be an odd integer >= 3, got {p}")
    ratios = []
    excluded = 0
    by_t = {}
    for u, t in samples:
        mod = ModuleId("Mt", k, t)
        nu = module_norm(u, mod)
        sup = norm(u, "Linf")
        if nu == 0.0 or sup == 0.0:
            excluded += 1
            continue
        nl = Field(u.grid, np.abs(u.samples) ** (p - 1) * u.samples, time_tag=t)
        ratio = module_norm(nl, mod) / (sup ** (p - 1) * nu)
        ratios.append({"t": t, "ratio": float(ratio)})
        by_t.setdefault(t, []).append(float(ratio))
    if not ratios:
        return ProbeReport("nonlinear_bound", [], float("nan"), False, excluded,
                           {"note": "all samples excluded"})
    group_max = {t: max(v) for t, v in by_t.items()}
    stable = max(group_max.values()) <= 1.5 * min(group_max.values())
    return ProbeReport("nonlinear_bound", ratios, max(r["ratio"] for r in ratios),
                       bool(stable), excluded, {"max_by_t": group_max, "p": p, "k": k})


_DECAY_RANGES = {
    # k_mode -> dim -> (r_low_exclusive?, r_low, r_high) handled below
}


def _check_decay_range(r: float, n: int, k_mode: str):
    # r = 2 is the trivial endpoint (slope 0 by mass conservation) in both modes
    if k_mode == "module_class":
        ok = (n == 1 and 2 <= r) or (n == 2 and 2 <= r < np.inf) or (n == 3 and 2 <= r <= 6)
    elif k_mode == "nls":
        ok = (n == 1 and 2 <= r) or (n == 2 and 2 <= r < np.inf) or (n == 3 and 2 <= r <= 6)
    else:
        raise ValueError(f"unknown k_mode {k_mode!r}")
    if not ok:
        raise ValueError(f"r = {r} outside the admissible decay range for n = {n} ({k_mode})")


def decay_reference_slope(r: float, n: int, k_mode: str) -> float:
    frac = 0.5 if not np.isfinite(r) else (0.5 - 1.0 / r)
    if k_mode == "module_class":
        return -n * frac
    return -n * (0.5 + n / 8.0) * frac


def probe_decay(subject, r: float, k_mode: str, grid: Grid = None, times=None,
                cfg=None) -> ProbeReport:
    """Fit the L^r decay slope of a module-class object or an NLS trajectory.

    subject: PotentialSpec (measured as <t> V(t), the class-weight-stripped
    object) with an explicit grid and times, or a Trajectory (fields at its
    positive-time nodes).  module_class references -n(1/2 - 1/r), two-sided;
    nls references -n(1/2 + n/8)(1/2 - 1/r), one-sided (the bound is declared
    non-optimal, so only 'at least this fast' is checkable).
    """
    if isinstance(subject, PotentialSpec):
        n = subject.dim
        _check_decay_range(r, n, k_mode)
        if grid is None or times is None:
            raise ValueError("potential decay probe needs a grid and sample times")
        ts = sorted(float(t) for t in times)
        vals = []
        for t in ts:
            v = eval_potential(subject, t, grid)
            vals.append(_bracket(t) * (norm(v, "Linf") if not np.isfinite(r) else norm(v, "Lr", r=r)))
    else:
        traj = subject
        n = traj.grid.dim
        _check_decay_range(r, n, k_mode)
        pairs = [(t, u) for t, u in zip(traj.mesh.nodes, traj.fields) if t >= 1.0]
        ts = [t for t, _ in pairs]
        vals = [norm(u, "Linf") if not np.isfinite(r) else norm(u, "Lr", r=r) for _, u in pairs]
    if len(ts) < 5:
        raise ValueError(f"need at least 5 time samples, got {len(ts)}")
    fit = rate_fit(list(zip(ts, vals)))
    ref = decay_reference_slope(r, n, k_mode)
    if k_mode == "module_class":
        ok = abs(fit.slope - ref) <= 0.05
    else:
        ok = fit.slope <= ref + 0.1
    return ProbeReport("decay", [{"t": t, "value": float(v)} for t, v in zip(ts, vals)],
                       float(fit.slope), bool(ok),
                       details={"reference_slope": ref, "k_mode": k_mode, "r": None if not np.isfinite(r) else r,
                                "slope": fit.slope, "intercept": fit.intercept,
                                "fit_residual": fit.residual})


def strichartz_accumulate(traj, q: float, r: float):
    """Trapezoid accumulation of ||u(t)||_{L^r}^q over a trajectory.

    (q, r) must be Strichartz-admissible: 2/q + n/r = n/2, excluding
    (q, r, n) = (inf, 2, 2).  Returns (total, stabilized) where stabilized
    means the last decade of time contributes under 5%.
    """
    n = traj.grid.dim
    qi = 0.0 if not np.isfinite(q) else 1.0 / q
    ri = 0.0 if not np.isfinite(r) else 1.0 / r
    if abs(2.0 * qi + n * ri - n / 2.0) > 1e-9:
        raise ValueError(f"(q, r) = ({q}, {r}) is not admissible in dimension {n}")
    if not np.isfinite(q) and r == 2 and n == 2:
        raise ValueError("(q, r, n) = (inf, 2, 2) is excluded from the admissible pairs")
    ts = np.asarray(traj.mesh.nodes)
    vals = np.array([norm(u, "Linf") if not np.isfinite(r) else norm(u, "Lr", r=r)
                     for u in traj.fields])
    if not np.isfinite(q):
        return float(np.max(vals)), True
    integrand = vals ** q
    total = float(np.trapezoid(integrand, ts))
    t_end = ts[-1]
    if t_end <= 0:
        return total, False
    mask = ts >= t_end / 10.0
    last = float(np.trapezoid(integrand[mask], ts[mask])) if np.sum(mask) > 1 else 0.0
    stabilized = total > 0 and last < 0.05 * total
    return total, bool(stabilized)


@dataclass
class RateFit:
    slope: float
    intercept: float
    residual: float

    def to_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "residual": self.residual}


def rate_fit(series) -> RateFit:
    """Least-squares fit of log err against log t; residual is the RMS misfit.

    Needs at least 6 points spanning at least one decade, with positive errors.
    """
    pts = [(float(t), float(e)) for t, e in series]
    if len(pts) < 6:
        raise ValueError(f"need at least 6 points, got {len(pts)}")
    ts = np.array([t for t, _ in pts])
    es = np.array([e for _, e in pts])
    if np.any(es <= 0.0) or np.any(ts <= 0.0):
        raise ValueError("degenerate series: nonpositive times or errors")
    if np.max(ts) < 10.0 * np.min(ts):
        raise ValueError("series must span at least one decade in t")
    x = np.log(ts)
    y = np.log(es)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return RateFit(float(slope), float(intercept), float(np.sqrt(np.mean(resid ** 2))))
