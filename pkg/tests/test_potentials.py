import numpy as np
import pytest

from nlslab.grid import Grid
from nlslab.modules import ModuleId, module_norm
from nlslab.potentials import (PotentialSpec, admissibility_bound, eval_potential,
                               zero_potential, _bracket)
from nlslab.propagator import ProfileSpec
from nlslab.diagnostics import rate_fit
from oracles import sym_gaussian, sym_module_norm
import sympy as sp


@pytest.fixture(scope="module")
def grid():
    # box must hold the potential's self-similar support through t = 64:
    # scale 2t * profile support 3.5 w needs L >= 128 * 1.4 for w = 0.4
    return Grid(1, 240.0, 1024)


def gaussian_profile(width=0.4, amplitude=1.0):
    return ProfileSpec(dim=1, amplitude=amplitude, width=(width,))


def test_zero_family(grid):
    V = zero_potential(1)
    for t in (-3.0, 0.0, 7.5):
        assert np.all(eval_potential(V, t, grid).samples == 0)


def test_self_similar_definition(grid):
    # a <t>^{-1} |2t|^{-1/2} phi(z/(2t)) at t = 4, pointwise by construction
    phi = gaussian_profile(width=1.0)
    V = PotentialSpec(dim=1, family="self_similar", amplitude=1.0, profile=phi)
    vals = eval_potential(V, 4.0, grid)
    z = grid.axis_coordinates(0).ravel()
    expected = (1.0 / (_bracket(4.0) * 8.0 ** 0.5)) * np.exp(-(z / 8.0) ** 2)
    assert np.allclose(vals.samples.real, expected)
    assert np.all(vals.samples.imag == 0.0)


def test_self_similar_small_time_regularization(grid):
    phi = gaussian_profile()
    V = PotentialSpec(dim=1, family="self_similar", amplitude=1.0, profile=phi)
    vals = eval_potential(V, 0.0, grid)     # t_* = 1, no singularity
    assert np.isfinite(vals.samples).all()
    assert np.max(np.abs(vals.samples)) > 0


def test_realness_required():
    phi = ProfileSpec(dim=1, phase_velocity=(0.5,))
    with pytest.raises(ValueError, match="real"):
        PotentialSpec(dim=1, family="self_similar", profile=phi)


def test_weighted_norm_constant_for_self_similar():
    # <t> ||V(t)||_{W^k_{Mt0}} constant within 5% for t >= 2; the box holds the
    # scale-2t support of a width-1 profile through t = 64
    big = Grid(1, 450.0, 1024)
    phi = gaussian_profile(width=1.0)
    V = PotentialSpec(dim=1, family="self_similar", amplitude=1.0, profile=phi)
    vals = []
    for t in (2.0, 4.0, 8.0, 16.0, 32.0, 64.0):
        vals.append(_bracket(t) * module_norm(eval_potential(V, t, big), ModuleId("Mt0", 2, t)))
    assert max(vals) / min(vals) < 1.05


def test_admissibility_self_similar(grid):
    phi = gaussian_profile()
    V = PotentialSpec(dim=1, family="self_similar", amplitude=1.0, profile=phi)
    ts = np.geomspace(0.5, 64.0, 20)
    report = admissibility_bound(V, 2, ts, grid)
    assert report.admissible
    assert np.isfinite(report.bound)
    # stabilized by t = 32: running max does not move beyond it
    below32 = max(b for t, b in zip(report.times, report.weighted_norms) if t <= 32.0)
    assert report.bound <= below32 * 1.001


def test_admissibility_oracle_value(grid):
    # weighted norm at two sample times against the symbolic-quadrature oracle
    phi = gaussian_profile()
    V = PotentialSpec(dim=1, family="self_similar", amplitude=1.0, profile=phi)
    for t in (4.0, 16.0):
        val = _bracket(t) * module_norm(eval_potential(V, t, grid), ModuleId("Mt0", 2, t))
        scale = 2.0 * t
        expr = sym_gaussian(amplitude=1.0 / (_bracket(t) * scale ** 0.5), width=0.4 * scale)
        oracle = _bracket(t) * sym_module_norm(expr, "Mt0", 2, t, bound=240.0)
        assert val == pytest.approx(oracle, rel=1e-6)


def test_time_independent_flagged_inadmissible(grid):
    V = PotentialSpec(dim=1, family="time_independent", amplitude=1.0,
                      profile=gaussian_profile())
    ts = np.geomspace(0.5, 64.0, 20)
    report = admissibility_bound(V, 2, ts, grid)
    assert not report.admissible
    # bound grows with <t>
    assert report.weighted_norms[-1] > 4 * report.weighted_norms[0]


def test_admissibility_needs_enough_samples(grid):
    V = zero_potential(1)
    with pytest.raises(ValueError):
        admissibility_bound(V, 2, [1.0, 2.0], grid)


def test_zero_potential_bound(grid):
    ts = np.geomspace(0.5, 64.0, 16)
    report = admissibility_bound(zero_potential(1), 2, ts, grid)
    assert report.bound == 0.0


def test_nls_induced_decay_slope():
    # || V(t) ||_{W^2_{Mt0}} ~ t^{-n(p-2)/2} = t^{-3/2} for Gaussian g, p=5, n=1
    big = Grid(1, 280.0, 1024)
    g_prof = gaussian_profile(width=1.0)
    V = PotentialSpec(dim=1, family="nls_induced", amplitude=1.0, profile=g_prof, power=5)
    ts = np.geomspace(4.0, 64.0, 7)
    vals = [module_norm(eval_potential(V, t, big), ModuleId("Mt0", 2, t)) for t in ts]
    fit = rate_fit(list(zip(ts, vals)))
    assert fit.slope == pytest.approx(-1.5, abs=0.2)


def test_potential_serialization_roundtrip():
    phi = gaussian_profile(width=2.0)
    V = PotentialSpec(dim=1, family="self_similar", amplitude=0.5, profile=phi)
    assert PotentialSpec.from_dict(V.to_dict()) == V
