"""Acceptance suite: one test and one printed pass/fail line per criterion.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines and timings.  Expensive reference runs are shared via session fixtures.
"""

import time

import numpy as np
import pytest

from nlslab.grid import Grid, Field, l2_norm
from nlslab.diagnostics import (probe_decay, probe_gagliardo_nirenberg, probe_multiplication,
                                probe_nonlinear_bound, random_profile, rate_fit,
                                self_similar_field, strichartz_accumulate, vmonomial_norm)
from nlslab.evolver import compute_f_minus, evolve, extend_backward, frequency_lattice_grid
from nlslab.lens import final_state_error, remove_phase
from nlslab.modules import ModuleId, module_norm, onecusp_norm
from nlslab.potentials import PotentialSpec, zero_potential, _bracket
from nlslab.propagator import ProfileSpec, poisson, propagate
from nlslab.solver import SolverConfig, TimeMesh, free_trajectory, phi_apply, solve_final_state
from oracles import (duhamel_double_loop, free_evolution_quadrature, sym_gaussian,
                     sym_lp, sym_module_norm, sym_vmonomial_norm)


def report(criterion, ok, detail, t0=None):
    stamp = f" [{time.time() - t0:.1f}s]" if t0 is not None else ""
    print(f"\n{'PASS' if ok else 'FAIL'}  criterion {criterion}: {detail}{stamp}")
    assert ok, f"criterion {criterion}: {detail}"


GRID_N1 = Grid(1, 700.0, 2048)
F_UNIT = ProfileSpec(dim=1, amplitude=0.312, width=(1.0,))          # ||f||_{W^2_N} ~ 1
PHI_WIDE = ProfileSpec(dim=1, amplitude=1.0, width=(2.0,))
V_HALF = PotentialSpec(dim=1, family="self_similar", amplitude=0.5, profile=PHI_WIDE)
V_RATE = PotentialSpec(dim=1, family="self_similar", amplitude=2.0, profile=PHI_WIDE)


@pytest.fixture(scope="session")
def contraction_runs():
    cfg = SolverConfig(dim=1, p=5, k=2, s_initial=4.0, t_max_factor=20.0, mesh_points=48,
                       picard_tol=1e-10, use_analytic_tail=True)
    out = {}
    for label, V in (("V=0", zero_potential(1)), ("V=self_similar(a=0.5)", V_HALF)):
        out[label] = solve_final_state(F_UNIT, V, cfg, GRID_N1)
    return out


@pytest.fixture(scope="session")
def rate_run_n1():
    cfg = SolverConfig(dim=1, p=5, k=2, s_initial=4.0, t_max_factor=20.0, mesh_points=96,
                       picard_tol=1e-10, use_analytic_tail=True)
    return solve_final_state(F_UNIT, V_RATE, cfg, GRID_N1)


@pytest.fixture(scope="session")
def extension_run():
    cfg = SolverConfig(dim=1, p=5, k=2, s_initial=4.0, t_max_factor=16.0, mesh_points=192,
                       picard_tol=1e-11, use_analytic_tail=True)
    traj, rep = solve_final_state(F_UNIT, V_HALF, cfg, GRID_N1)
    s = rep.S_used
    backward = extend_backward(traj.field_at(s), s, -6.0 * s, V_HALF, cfg,
                               dt=2e-3, snapshot_stride=8)
    return traj, rep, backward, cfg


def test_criterion_1_propagator():
    t0 = time.time()
    g = Grid(1, 20.0, 1024)
    z = g.axis_coordinates(0).ravel()
    u = Field(g, np.exp(-(z / 2.0) ** 2).astype(complex))
    worst = 0.0
    for tau in (0.5, 2.0):
        out = propagate(u, tau)
        oracle = free_evolution_quadrature(
            lambda xi: 2 * np.sqrt(np.pi) * np.exp(-xi ** 2), tau, z, xi_max=9.0)
        worst = max(worst, l2_norm(Field(g, out.samples - oracle)) / l2_norm(out))
    rng = np.random.default_rng(3)
    w = Field(g, rng.normal(size=1024) + 1j * rng.normal(size=1024))
    unit = abs(l2_norm(propagate(w, 1.7)) - l2_norm(w)) / l2_norm(w)
    ab = propagate(propagate(w, 0.6), 0.9)
    group = l2_norm(Field(g, ab.samples - propagate(w, 1.5).samples)) / l2_norm(w)
    ok = worst <= 1e-8 and unit <= 1e-12 and group <= 1e-12
    report(1, ok, f"oracle {worst:.1e} (<=1e-8), unitarity {unit:.1e}, group {group:.1e}", t0)


def test_criterion_2_norm_identities():
    t0 = time.time()
    worst_phase, worst_scale, worst_iso = 0.0, 0.0, 0.0
    for n in (1, 2):
        g = Grid(n, 192.0, 512)
        f = ProfileSpec(dim=n, amplitude=0.5, width=(0.6,) * n)
        u0 = poisson(f, 2.0, g)
        ref = module_norm(u0, ModuleId("Mt", 2, 2.0))
        for t in (2.0, 8.0, 32.0):
            u = poisson(f, t, g)
            a = module_norm(u, ModuleId("Mt", 2, t))
            ut = remove_phase(u, t)
            b = module_norm(ut, ModuleId("Mt0", 2, t))
            worst_phase = max(worst_phase, abs(a - b) / a)
            zg = Grid(n, g.half_width / (2 * t), 512)
            lhs = module_norm(ut, ModuleId("Mt0hat", 2, t))
            rhs = (2 * t) ** (n / 2) * onecusp_norm(Field(zg, ut.samples), 2)
            worst_scale = max(worst_scale, abs(lhs - rhs) / lhs)
            if t > 2.0:
                iso = module_norm(propagate(u0, t - 2.0), ModuleId("Mt", 2, t))
                worst_iso = max(worst_iso, abs(iso - ref) / ref)
    ok = worst_phase <= 1e-8 and worst_scale <= 1e-7 and worst_iso <= 1e-6
    report(2, ok, f"phase-removal {worst_phase:.1e} (<=1e-8), "
                  f"scaling {worst_scale:.1e} (<=1e-7), isometry {worst_iso:.1e} (<=1e-6)", t0)


def test_criterion_3_contraction(contraction_runs):
    t0 = time.time()
    details = []
    ok = True
    for label, (traj, rep) in contraction_runs.items():
        worst_ratio = max(rep.ratios) if rep.ratios else 0.0
        ok = ok and rep.converged and worst_ratio <= 0.55 \
            and rep.residual <= 1e-7 and rep.ball_max_over_K <= 2.0
        details.append(f"{label}: S={rep.S_used:g}, max ratio {worst_ratio:.3f}, "
                       f"residual {rep.residual:.1e}, ball {rep.ball_max_over_K:.2f}K")
    report(3, ok, "; ".join(details), t0)


def test_criterion_4_duhamel_sweep():
    t0 = time.time()
    g = Grid(1, 120.0, 512)
    f = ProfileSpec(dim=1, amplitude=0.4)
    worst = 0.0
    for m in (8, 12, 16):
        cfg = SolverConfig(dim=1, p=5, s_initial=2.0, t_max_factor=8.0, mesh_points=m,
                           use_analytic_tail=(m == 12))
        mesh = TimeMesh.log_uniform(2.0, 16.0, m, 1, 5)
        traj = free_trajectory(f, mesh, g)
        a = phi_apply(traj, f, V_HALF, cfg)
        b = duhamel_double_loop(traj, f, V_HALF, cfg)
        worst = max(worst, max(l2_norm(Field(g, x.samples - y.samples)) / l2_norm(y)
                               for x, y in zip(a.fields, b.fields)))
    report(4, worst <= 1e-10, f"sweep vs double-loop worst rel {worst:.1e} (<=1e-10)", t0)


def test_criterion_5_conservation(extension_run):
    t0 = time.time()
    cfg0 = SolverConfig(dim=1, p=5, k=2)
    u_s = poisson(F_UNIT, 4.0, GRID_N1)
    free_run = evolve(u_s, 4.0, -4.0, zero_potential(1), cfg0, dt=2e-3, snapshot_stride=50)
    obs0 = free_run.meta["observables"]
    mass0 = max(o.mass for o in obs0) / min(o.mass for o in obs0) - 1.0
    energy0 = max(o.energy for o in obs0) / min(o.energy for o in obs0) - 1.0

    _, _, backward, _ = extension_run
    obsV = backward.meta["observables"]
    massV = max(o.mass for o in obsV) / min(o.mass for o in obsV) - 1.0
    energyV = max(o.energy for o in obsV) / min(o.energy for o in obsV)

    ok = mass0 <= 1e-9 and massV <= 1e-9 and energy0 <= 1e-7 and np.isfinite(energyV)
    report(5, ok, f"mass drift: V=0 {mass0:.1e}, V!=0 {massV:.1e} (<=1e-9); "
                  f"V=0 energy drift {energy0:.1e} (<=1e-7); "
                  f"V!=0 energy max/min {energyV:.4f} (finite, reported)", t0)


def test_criterion_6a_rate_n1(rate_run_n1):
    t0 = time.time()
    traj, rep = rate_run_n1
    s = rep.S_used
    pts = [(t, final_state_error(u, t, F_UNIT, 0))
           for t, u in zip(traj.mesh.nodes, traj.fields) if t <= 16 * s + 1e-9]
    fit = rate_fit(pts)
    ok = abs(fit.slope - (-0.5)) <= 0.15
    report("6a (n=1)", ok, f"W^(k-2)_N slope {fit.slope:.3f} vs -0.5 +- 0.15 "
                           f"over [{s:g}, {16 * s:g}], {len(pts)} points", t0)


def test_criterion_6b_rate_n2_pinned():
    # Faithful run at the criterion's pinned resolution (N=256^2, L=30).  At this
    # box size no admissible profile satisfies both the boundary monitor through
    # t = 16S and the small-lens-time regime needed for the -1 asymptotics, so
    # the measured slope sits in the crossover region.  See the companion test
    # below for the same measurement at N=512^2, L=197, which passes.
    t0 = time.time()
    g = Grid(2, 30.0, 256)
    f = ProfileSpec(dim=2, amplitude=0.6, width=(0.35, 0.35))
    cfg = SolverConfig(dim=2, p=3, k=2, s_initial=1.0, t_max_factor=16.0, mesh_points=24,
                       picard_tol=1e-9, use_analytic_tail=True)
    traj, rep = solve_final_state(f, zero_potential(2), cfg, g)
    s = rep.S_used
    pts = [(t, final_state_error(u, t, f, 0))
           for t, u in zip(traj.mesh.nodes, traj.fields) if t <= 16 * s + 1e-9]
    fit = rate_fit(pts)
    ok = abs(fit.slope - (-1.0)) <= 0.15
    report("6b (n=2, pinned 256^2/L=30)", ok,
           f"W^(k-2)_N slope {fit.slope:.3f} vs -1 +- 0.15", t0)


def test_rate_n2_companion_512():
    # not a numbered criterion: the same gamma = 1 measurement at a box that can
    # hold it (within the spec's stated n=2 grid family)
    t0 = time.time()
    g = Grid(2, 197.0, 512)
    f = ProfileSpec(dim=2, amplitude=0.25, width=(0.8, 0.8))
    cfg = SolverConfig(dim=2, p=3, k=2, s_initial=1.85, t_max_factor=17.3, mesh_points=32,
                       picard_tol=1e-9, use_analytic_tail=True)
    traj, rep = solve_final_state(f, zero_potential(2), cfg, g)
    s = rep.S_used
    pts = [(t, final_state_error(u, t, f, 0))
           for t, u in zip(traj.mesh.nodes, traj.fields) if t <= 16 * s + 1e-9]
    fit = rate_fit(pts)
    ok = abs(fit.slope - (-1.0)) <= 0.15
    print(f"\nINFO  companion (n=2, 512^2/L=197): slope {fit.slope:.3f} vs -1 +- 0.15 "
          f"[{time.time() - t0:.0f}s]")
    assert ok


def test_criterion_7_backward_final_state(extension_run):
    t0 = time.time()
    # free dynamics: f_- = f_+ to 1e-10
    cfg_free = SolverConfig(dim=1, p=5, k=2, nonlinearity_enabled=False)
    u = poisson(F_UNIT, 4.0, GRID_N1)
    back_free = evolve(u, 4.0, -4.0, zero_potential(1), cfg_free, dt=2e-3, snapshot_stride=25)
    fm_free = compute_f_minus(back_free, 2.0, cfg_free)
    lattice = frequency_lattice_grid(GRID_N1)
    fp = F_UNIT.evaluate([lattice.axis_coordinates(0)])
    free_err = float(np.max(np.abs(fm_free.samples - fp)))

    traj, rep, backward, cfg = extension_run
    s = rep.S_used
    na = min(backward.mesh.nodes, key=lambda t: abs(t - s / 2))
    nb = min(backward.mesh.nodes, key=lambda t: abs(t - s))
    fma = compute_f_minus(backward, na, cfg)
    fmb = compute_f_minus(backward, nb, cfg)
    spread = l2_norm(Field(lattice, fma.samples - fmb.samples))
    wk = onecusp_norm(fma, 2)
    ok = free_err <= 1e-10 and spread <= 1e-6 and np.isfinite(wk)
    report(7, ok, f"free |f_- - f_+| {free_err:.1e} (<=1e-10); t1-independence {spread:.1e} "
                  f"(<=1e-6); W^k_N(f_-) = {wk:.4f} (finite)", t0)


def test_criterion_8_probe_suite(extension_run):
    t0 = time.time()
    rng = np.random.default_rng(20240808)
    grid = Grid(1, 240.0, 1024)
    ts = (2.0, 8.0, 32.0)
    issues = []

    samples = [(self_similar_field(random_profile(rng, 1), ts[i % 3], grid),
                self_similar_field(random_profile(rng, 1), ts[i % 3], grid), ts[i % 3])
               for i in range(32)]
    mult = probe_multiplication(samples, k=1)
    if not (mult.stable and np.isfinite(mult.max_ratio) and mult.excluded == 0):
        issues.append("multiplication unstable")

    t_cal, wu, wv = 4.0, 0.5, 0.7
    u = self_similar_field(ProfileSpec(dim=1, amplitude=1.0, width=(wu,)), t_cal, grid)
    v = self_similar_field(ProfileSpec(dim=1, amplitude=0.8, width=(wv,)), t_cal, grid)
    ratio = probe_multiplication([(u, v, t_cal)], k=1).ratios[0]["ratio"]
    scale = 2.0 * t_cal
    su = sym_gaussian(amplitude=scale ** -0.5, width=wu * scale)
    sv = sym_gaussian(amplitude=0.8 * scale ** -0.5, width=wv * scale)
    oracle = (sym_module_norm(su * sv, "Mt0", 1, t_cal, bound=80.0)
              / (_bracket(t_cal) ** -0.5
                 * sym_module_norm(su, "Mt0", 1, t_cal, bound=80.0)
                 * sym_module_norm(sv, "Mt0", 1, t_cal, bound=80.0)))
    if abs(ratio - oracle) / oracle > 1e-5:
        issues.append(f"multiplication oracle {abs(ratio - oracle) / oracle:.1e}")

    zg = Grid(1, 24.0, 512)
    gn_samples = [random_profile(rng, 1).evaluate_on_grid(zg) for _ in range(32)]
    gn = probe_gagliardo_nirenberg(gn_samples, k=2, l=1, p_index=2)
    if not gn.stable:
        issues.append("GN ratios not finite")
    p_gauss = ProfileSpec(dim=1, amplitude=1.0, width=(1.0,))
    ug = p_gauss.evaluate_on_grid(Grid(1, 40.0, 1024))
    from nlslab.grid import norm as gnorm
    gn_ratio = vmonomial_norm(ug, 1, 4.0) / (gnorm(ug, "Linf") ** 0.5
                                             * vmonomial_norm(ug, 2, 2.0) ** 0.5)
    expr = sym_gaussian()
    gn_oracle = sym_vmonomial_norm(expr, 1, 4.0) / (sym_lp(expr, np.inf) ** 0.5
                                                    * sym_vmonomial_norm(expr, 2, 2.0) ** 0.5)
    if abs(gn_ratio - gn_oracle) / gn_oracle > 1e-5:
        issues.append(f"GN oracle {abs(gn_ratio - gn_oracle) / gn_oracle:.1e}")

    nl_samples = [(self_similar_field(random_profile(rng, 1), ts[i % 3], grid,
                                      with_phase=True), ts[i % 3]) for i in range(32)]
    nl = probe_nonlinear_bound(nl_samples, p=5, k=2)
    by_t = nl.details["max_by_t"]
    if not (max(by_t.values()) <= 1.5 * min(by_t.values())):
        issues.append("N[u] bound max varies over t by more than 50%")

    mesh = TimeMesh(nodes=tuple(np.geomspace(4.0, 64.0, 8)),
                    tail_exponent=float("nan"), tail_estimate=float("nan"))
    free_traj = type(extension_run[0])(mesh, [poisson(F_UNIT, t, GRID_N1) for t in mesh.nodes])
    dec_free = probe_decay(free_traj, np.inf, "module_class")
    if abs(dec_free.details["slope"] - (-0.5)) > 0.05:
        issues.append(f"free L^inf slope {dec_free.details['slope']:.3f}")
    phi_narrow = ProfileSpec(dim=1, amplitude=1.0, width=(0.4,))
    v_probe = PotentialSpec(dim=1, family="self_similar", amplitude=1.0, profile=phi_narrow)
    dec_pot = probe_decay(v_probe, 4.0, "module_class", grid=grid,
                          times=np.geomspace(2.0, 32.0, 8))
    if abs(dec_pot.details["slope"] - dec_pot.details["reference_slope"]) > 0.05:
        issues.append(f"potential L^4 slope {dec_pot.details['slope']:.3f}")

    traj, rep, _, _ = extension_run
    dec_nls = probe_decay(traj, np.inf, "nls")
    if not dec_nls.details["slope"] <= dec_nls.details["reference_slope"] + 0.1:
        issues.append(f"NLS L^inf slope {dec_nls.details['slope']:.3f} not <= bound")

    report(8, not issues, "; ".join(issues) if issues else
           f"mult max {mult.max_ratio:.3f} stable, GN max {gn.max_ratio:.3f}, "
           f"N[u] max {nl.max_ratio:.3f} t-stable, decay slopes ok, oracles <=1e-5", t0)


def test_criterion_9_strichartz(extension_run):
    t0 = time.time()
    traj, rep, backward, cfg = extension_run
    s = rep.S_used
    nodes = list(backward.mesh.nodes) + [t for t in traj.mesh.nodes if t > s]
    fields = list(backward.fields) + [u for t, u in zip(traj.mesh.nodes, traj.fields) if t > s]
    combined = type(traj)(TimeMesh(nodes=tuple(nodes), tail_exponent=float("nan"),
                                   tail_estimate=float("nan")), fields)
    total, stable = strichartz_accumulate(combined, float(cfg.p - 1), np.inf)

    g2 = Grid(2, 10.0, 32)
    mesh2 = TimeMesh(nodes=(1.0, 2.0), tail_exponent=0.0, tail_estimate=0.0)
    traj2 = type(traj)(mesh2, [Field(g2, np.zeros(g2.shape, complex))] * 2)
    try:
        strichartz_accumulate(traj2, np.inf, 2.0)
        rejected = False
    except ValueError:
        rejected = True
    ok = total > 0 and stable and rejected
    report(9, ok, f"int ||u||_inf^4 dt = {total:.4e}, last-decade share < 5%: {stable}; "
                  f"(inf,2) rejected in n=2: {rejected}", t0)


def test_criterion_10_determinism(tmp_path):
    t0 = time.time()
    import json
    from nlslab.runner import run_experiment
    cfg = {
        "dimension": 1,
        "grid": {"half_width": 240.0, "points_per_axis": 1024},
        "solver": {"p": 5, "k": 2, "s_initial": 4.0, "t_max_factor": 8.0,
                   "mesh_points": 16, "picard_tol": 1e-10, "use_analytic_tail": True},
        "profile": {"family": "gaussian", "amplitude": [0.3, 0.0], "width": [0.5]},
        "potential": {"family": "zero"},
        "seed": 99,
        "output_dir": str(tmp_path / "det"),
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    out1 = run_experiment(str(path), "final-state", output_dir=str(tmp_path / "r1"))
    out2 = run_experiment(str(path), "final-state", output_dir=str(tmp_path / "r2"))
    import os
    b1 = open(os.path.join(out1, "series.csv"), "rb").read()
    b2 = open(os.path.join(out2, "series.csv"), "rb").read()
    report(10, b1 == b2, f"series.csv byte-identical across reruns ({len(b1)} bytes)", t0)
