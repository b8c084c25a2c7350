import math

import numpy as np
import pytest

import thermomap as tm



def test_jacobian_trivial_potential(mp05, omega_a):
    f0 = tm.Potential.constant(0.0, omega_a, 4096)
    data = tm.solve_eigendata(mp05, f0, 4096)
    rng = np.random.default_rng(20)
    xs = rng.random(500)
    assert np.allclose(tm.jacobian(mp05, f0, data, xs), 2.0, atol=1e-9)


def test_jacobian_reciprocal_sum(mp05, pot4096, eig4096):
    rng = np.random.default_rng(21)
    assert tm.jacobian_reciprocal_defect(mp05, pot4096, eig4096,
                                         rng.random(1000)) <= 1e-3


def test_jacobian_at_fixed_point(mp05, pot4096, eig4096):
    val = tm.jacobian(mp05, pot4096, eig4096, 0.0)
    assert val == pytest.approx(eig4096.chi * math.exp(-pot4096.f(0.0)), rel=1e-10)
    assert val > 1.0


def test_rokhlin_entropy_trivial(mp05, omega_a):
    f0 = tm.Potential.constant(0.0, omega_a, 4096)
    data = tm.solve_eigendata(mp05, f0, 4096)
    assert tm.rokhlin_entropy(mp05, f0, data) == pytest.approx(math.log(2.0),
                                                               abs=1e-6)


def test_rokhlin_entropy_constant_shift(mp05, omega_a):
    # adding a constant leaves mu, hence the entropy, unchanged
    fc = tm.Potential.constant(0.8, omega_a, 4096)
    data = tm.solve_eigendata(mp05, fc, 4096)
    assert tm.rokhlin_entropy(mp05, fc, data) == pytest.approx(math.log(2.0),
                                                               abs=1e-6)


def test_dirac_exclusion_check(mp05, omega_a, pot4096, eig4096):
    f0 = tm.Potential.constant(0.0, omega_a, 256)
    ok, margin = tm.dirac_exclusion_check(f0, 2.0)
    assert ok and margin == pytest.approx(math.log(2.0))
    bad = tm.Potential.constant(math.log(2.0) + 1.0, omega_a, 256)
    ok, margin = tm.dirac_exclusion_check(bad, 2.0)
    assert not ok and margin == pytest.approx(-1.0)
    ok, margin = tm.dirac_exclusion_check(pot4096, eig4096.chi)
    assert ok
    assert margin == pytest.approx(math.log(eig4096.chi) - 0.2, abs=1e-12)


def test_dynamic_ball_depth_zero(mp05):
    ball = tm.dynamic_ball(mp05, 0.3, 0, 0.05, rho1=0.14)
    assert ball.left == pytest.approx(0.25)
    assert ball.right == pytest.approx(0.35)


def test_dynamic_ball_nesting(mp05):
    rng = np.random.default_rng(22)
    for x in rng.random(10):
        prev = None
        for n in range(0, 8):
            ball = tm.dynamic_ball(mp05, x, n, 0.05, rho1=0.14)
            if prev is not None:
                assert ball.lo <= prev.lo + 1e-14
                assert ball.hi <= prev.hi + 1e-14
            prev = ball


def test_dynamic_ball_matches_brute_force(mp05):
    ball = tm.dynamic_ball(mp05, 0.3, 5, 0.05, rho1=0.14)
    ys = np.arange(1_000_000) / 1_000_000
    keep = np.ones(ys.size, dtype=bool)
    tx, ty = 0.3, ys.copy()
    for _ in range(6):  # j = 0..5
        keep &= tm.circle_dist(tx, ty) < 0.05
        tx = mp05.apply(tx)
        ty = np.asarray(mp05.apply(ty))
    inside = ys[keep]
    assert inside.min() == pytest.approx(ball.left, abs=2e-6)
    assert inside.max() == pytest.approx(ball.right, abs=2e-6)


def test_dynamic_ball_radius_guard(mp05):
    with pytest.raises(ValueError):
        tm.dynamic_ball(mp05, 0.3, 2, 0.2, rho1=0.14)


def test_gibbs_report_trivial_potential(mp05, omega_a, expansion05):
    f0 = tm.Potential.constant(0.0, omega_a, 8192)
    data = tm.solve_eigendata(mp05, f0, 8192)
    rep = tm.gibbs_report(mp05, f0, data, r=0.05, x_samples=40, n_max=12,
                          rho1=expansion05.ball_radius_cap,
                          rng=np.random.default_rng(23))
    assert 0.0 < rep.K_low <= rep.K_high < math.inf
    # for f = 0 the ratio is mu(B) e^{n log 2}; the band must not widen in n
    spread = rep.spread_by_depth()
    assert spread[12][1] / spread[12][0] <= 3.0 * spread[4][1] / spread[4][0]
    for row in rep.rows:
        if row.n == 0 and row.resolved:
            assert row.ratio == pytest.approx(row.ball_mass)
            assert row.ratio > 0.0


def test_gibbs_report_ceiling_and_rows(mp05, pot4096, eig4096, compat_a,
                                       expansion05):
    rep = tm.gibbs_report(mp05, pot4096, eig4096, r=0.05, x_samples=20,
                          n_max=6, rho1=expansion05.ball_radius_cap,
                          Omega=tm.omega_ab(0.25, 0.0), C1=compat_a.C1,
                          rng=np.random.default_rng(24))
    big_l = math.ceil(1.0 / expansion05.ball_radius_cap)
    expected = (big_l + 1) * pot4096.kappa(compat_a.C1) * tm.omega_ab(0.25, 0.0)(0.5)
    assert rep.log_k_ceiling == pytest.approx(expected)
    # empirical band sits far inside the proof-shaped ceiling
    assert math.log(rep.K_high / rep.K_low) <= rep.log_k_ceiling
    assert len(rep.rows) == 20 * 7


def test_cover_pressure_trivial(mp05, omega_a):
    f0 = tm.Potential.constant(0.0, omega_a, 256)
    for n, val in tm.cover_pressure(mp05, f0, 6):
        assert val == pytest.approx(math.log(2.0), abs=1e-9)


def test_cover_pressure_lower_bound(mp05, pot4096, eig4096):
    logchi = math.log(eig4096.chi)
    table = tm.cover_pressure(mp05, pot4096, 8)
    assert all(val >= logchi - 0.05 for _, val in table)


def test_thermo_report_identity(mp05, pot4096, eig4096):
    rep = tm.thermo_report(mp05, pot4096, eig4096, cover_n_max=4)
    assert rep.pressure == pytest.approx(math.log(eig4096.chi))
    # the identity gap is controlled by the two residuals plus quadrature
    budget = 5.0 * (eig4096.eigen_residual + eig4096.invariance_residual) + 1e-3
    assert rep.identity_gap <= budget
    assert rep.dirac_margin > 0.0
    assert rep.valid
    assert rep.cover_pressure_lower >= rep.pressure - 0.05


def test_variational_probe_is_strict(mp05, pot4096, eig4096, omega_a):
    f0 = tm.Potential.constant(0.0, omega_a, 4096)
    data0 = tm.solve_eigendata(mp05, f0, 4096)
    probe = tm.variational_probe(mp05, pot4096, eig4096, f0, data0)
    assert probe.entropy_m == pytest.approx(math.log(2.0), abs=1e-6)
    assert probe.gap > 1e-3
    # the equilibrium itself attains the supremum
    self_probe = tm.variational_probe(mp05, pot4096, eig4096, pot4096, eig4096)
    assert abs(self_probe.gap) <= 1e-4


def test_dynamic_ball_rejects_negative_depth(mp05):
    with pytest.raises(ValueError):
        tm.dynamic_ball(mp05, 0.3, -1, 0.05, rho1=0.14)


def test_cover_pressure_rejects_zero_levels(mp05, pot4096):
    with pytest.raises(ValueError):
        tm.cover_pressure(mp05, pot4096, 0)


def test_gibbs_report_errors_when_nothing_resolves(mp05, omega_a, expansion05):
    f0 = tm.Potential.constant(0.0, omega_a, 256)
    data = tm.solve_eigendata(mp05, f0, 256)
    with pytest.raises(ValueError):
        tm.gibbs_report(mp05, f0, data, r=0.001, x_samples=3, n_max=2,
                        rho1=expansion05.ball_radius_cap, min_cells=200)
