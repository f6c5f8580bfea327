"""Time-evolution tests: generator consistency, energy, the trapezoidal
stepper, spectral projections, extinction and decay-rate estimation."""

import math

import numpy as np
import pytest

from singwave.data import (InitialData, bump_data, combine, mode_data,
                           sine_data, zero_data)
from singwave.evolution import (EnergyTrace, Grid, State, apply_generator,
                                decay_rate, energy, extinction_time,
                                project_out, projection_condition, simulate)


class TestGrid:
    def test_nodes(self):
        g = Grid(9)
        assert g.h == pytest.approx(0.1)
        assert np.allclose(g.nodes, 0.1 * np.arange(1, 10))

    def test_too_small(self):
        with pytest.raises(ValueError):
            Grid(1)


class TestApplyGenerator:
    def test_zero_velocity_ignores_damping(self):
        g = Grid(200)
        u = np.sin(np.pi * g.nodes)
        out = apply_generator(7.3, g, State(u, np.zeros_like(u)))
        assert np.allclose(out.u, 0.0)
        assert np.max(np.abs(out.v + np.pi ** 2 * u)) < 1e-2

    def test_zero_displacement(self):
        g = Grid(50)
        phi = g.nodes * (1 - g.nodes)
        out = apply_generator(2.0, g, State(np.zeros_like(phi), phi))
        assert np.allclose(out.u, phi)
        assert np.allclose(out.v, -(2 * 2.0 / g.nodes) * phi)

    def test_second_order_consistency(self):
        # Richardson: residual against the analytic action decays as O(h^2)
        alpha = 1.5

        def residual(N):
            g = Grid(N)
            x = g.nodes
            u = np.sin(np.pi * x)
            v = x * (1 - x)
            out = apply_generator(alpha, g, State(u, v))
            exact = -np.pi ** 2 * np.sin(np.pi * x) - (2 * alpha / x) * v
            return np.max(np.abs(out.v - exact))

        r1, r2 = residual(200), residual(400)
        assert r1 / r2 > 3.5  # ~4 for O(h^2)


class TestEnergy:
    def test_sine(self):
        g = Grid(2000)
        u = np.sin(np.pi * g.nodes)
        e = energy(g, State(u, np.zeros_like(u)))
        assert e == pytest.approx(np.pi ** 2 / 2, rel=1e-3)

    def test_quadratic_scaling(self):
        g = Grid(64)
        rng = np.random.default_rng(0)
        s = State(rng.standard_normal(64), rng.standard_normal(64))
        assert energy(g, State(3 * s.u, 3 * s.v)) \
            == pytest.approx(9 * energy(g, s))

    def test_zero(self):
        g = Grid(16)
        z = np.zeros(16)
        assert energy(g, State(z, z)) == 0.0


class TestSimulate:
    def test_standing_wave(self):
        run = simulate(2.0, mode_data(1, 1), 1.0, 1e-3, N=500,
                       snapshot_times=[1.0])
        x = run.grid.nodes
        exact = math.exp(-1.0) * x * np.exp(-x) * (2 - 2 * x)
        assert np.max(np.abs(run.snapshots[-1].u - exact)) < 5e-5

    def test_zero_data(self):
        run = simulate(1.0, zero_data(), 0.5, 1e-2, N=50)
        assert run.trace.energies[-1] == 0.0

    def test_linearity(self):
        d1, d2 = sine_data(1), sine_data(2)
        combo = combine([d1, d2], [2.0, -0.5])
        kw = dict(T=0.5, dt=1e-3, N=200, snapshot_times=[0.5])
        ra = simulate(1.5, d1, **kw)
        rb = simulate(1.5, d2, **kw)
        rc = simulate(1.5, combo, **kw)
        lin = 2.0 * ra.snapshots[-1].u - 0.5 * rb.snapshots[-1].u
        assert np.max(np.abs(rc.snapshots[-1].u - lin)) < 1e-10

    def test_energy_monotone(self):
        run = simulate(1.5, sine_data(1), 1.0, 1e-3, N=300)
        assert run.max_energy_increase_ratio <= 1e-10
        assert np.all(np.diff(run.trace.energies)
                      <= 1e-10 * run.trace.energies[0])

    def test_schemes_coincide(self):
        kw = dict(T=0.3, dt=1e-3, N=100, snapshot_times=[0.3])
        a = simulate(2.0, sine_data(1), scheme="implicit-midpoint", **kw)
        b = simulate(2.0, sine_data(1), scheme="crank-nicolson", **kw)
        assert np.array_equal(a.snapshots[-1].u, b.snapshots[-1].u)

    def test_bad_args(self):
        with pytest.raises(ValueError):
            simulate(1.0, sine_data(1), 1.0, -0.1)
        with pytest.raises(ValueError):
            simulate(1.0, sine_data(1), 1.0, 0.1, scheme="euler")


class TestProjection:
    def test_mode_pairing_magnitude(self):
        # oracle: direct quadrature of the energy pairing for mode data
        import scipy.integrate
        n = 2
        data = mode_data(n, 1)
        c = projection_condition(data, n)
        assert abs(c[0]) > 1e-3  # nonzero self-pairing
        mu = math.nan
        from singwave.laplace import _poles
        mus = _poles(n)
        from singwave.specfun import laguerre
        mu = mus[0]
        f = lambda x: x * np.exp(mu * x) * np.real(
            laguerre(n, 1, -2 * mu * x))
        df = lambda x: np.exp(mu * x) * (
            (1 + mu * x) * np.real(laguerre(n, 1, -2 * mu * x))
            + 2 * mu * x * np.real(laguerre(n - 1, 2, -2 * mu * x)))
        a = scipy.integrate.quad(lambda x: float(data.du0(x)) * float(df(x)),
                                 0, 1, epsabs=1e-12)[0]
        b = scipy.integrate.quad(lambda x: float(data.u1(x)) * float(f(x)),
                                 0, 1, epsabs=1e-12)[0]
        assert c[0] == pytest.approx(a - mu * b, abs=1e-10)

    def test_project_out_annihilates(self):
        for n in (1, 2):
            data = project_out(sine_data(1), n)
            c = projection_condition(data, n)
            assert np.max(np.abs(c)) < 1e-10

    def test_idempotent(self):
        g = Grid(200)
        x = g.nodes
        once = project_out(sine_data(1), 1)
        twice = project_out(once, 1)
        assert np.max(np.abs(once.u0(x) - twice.u0(x))) < 1e-10
        assert np.max(np.abs(once.u1(x) - twice.u1(x))) < 1e-10

    def test_orthogonal_input_unchanged(self):
        base = project_out(sine_data(1), 1)
        again = project_out(base, 1)
        x = np.linspace(0.05, 0.95, 50)
        assert np.max(np.abs(base.u0(x) - again.u0(x))) < 1e-10


class TestExtinctionAndDecay:
    def test_extinction_time_semantics(self):
        times = np.linspace(0, 4, 41)
        energies = np.where(times < 2.0, 1.0, 1e-6)
        run = simulate(1.0, zero_data(), 0.1, 0.05, N=10)
        run.trace = EnergyTrace(times, energies)
        assert extinction_time(run, 1e-2) == pytest.approx(2.0)

    def test_no_extinction(self):
        run = simulate(1.5, sine_data(1), 1.0, 1e-2, N=100)
        assert extinction_time(run, 1e-12) is None

    def test_decay_rate_standing_wave(self):
        run = simulate(2.0, mode_data(1, 1), 3.0, 1e-3, N=500)
        rate = decay_rate(run.trace, (1.0, 3.0))
        assert rate == pytest.approx(-1.0, rel=0.01)

    def test_decay_rate_errors(self):
        tr = EnergyTrace(np.array([0.0, 1.0]), np.array([1.0, 0.0]))
        with pytest.raises(ValueError):
            decay_rate(tr, (0.0, 1.0))
        with pytest.raises(ValueError):
            decay_rate(tr, (5.0, 6.0))


class TestInitialData:
    def test_from_grid_endpoints(self):
        x = np.linspace(0.1, 0.9, 9)
        d = InitialData.from_grid(x, np.sin(np.pi * x), np.zeros_like(x))
        assert d.u0(0.0) == pytest.approx(0.0)
        assert d.u0(1.0) == pytest.approx(0.0)
        assert d.u0(0.5) == pytest.approx(1.0, abs=1e-2)

    def test_sine_over_x_limit(self):
        d = sine_data(2)
        assert d.u0_over_x(0.0) == pytest.approx(2 * np.pi)

    def test_bump_support(self):
        d = bump_data()
        assert d.u0(np.array([0.0, 1.0])).tolist() == [0.0, 0.0]
        assert d.u0(0.5) == pytest.approx(1.0)
