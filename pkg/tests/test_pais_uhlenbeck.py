import csv

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ptbench.errors import NumericalFailure, ValidationError
from ptbench.pais_uhlenbeck import (
    LatticeQuadraticForm,
    LatticeSpec,
    PUParams,
    action_matrix,
    continuity_jumps,
    fit_correlator,
    free_energy,
    ground_energy,
    lattice_correlator,
    logdet_partition,
    omega_sweep,
    wedge_scan,
    write_sweep_csv,
)

FIT_TAU = np.round(np.arange(0.5, 4.0 + 1e-9, 0.1), 10)


def dense_kernel(p, n, dt):
    """Oracle: assemble gamma dt (D2^T D2 + s D1^T D1 + w1^2 w2^2 I) from explicit difference maps."""
    d1 = (np.eye(n + 1, n) - np.eye(n + 1, n, k=-1)) / dt  # forward differences incl. both boundaries
    d2 = (np.eye(n, n, k=-1) - 2 * np.eye(n) + np.eye(n, n, k=1)) / dt ** 2  # central, zero outside
    s = p.omega1 ** 2 + p.omega2 ** 2
    return p.gamma * dt * (d2.T @ d2 + s * d1.T @ d1 + (p.omega1 * p.omega2) ** 2 * np.eye(n))


def continuum_correlator(w1, w2, tau, gamma=1.0):
    if abs(w1 - w2) < 1e-12:
        return (1 + w1 * tau) * np.exp(-w1 * tau) / (4 * w1 ** 3 * gamma)
    return (np.exp(-w1 * tau) / (2 * w1) - np.exp(-w2 * tau) / (2 * w2)) / ((w2 ** 2 - w1 ** 2) * gamma)


class TestParams:
    @pytest.mark.parametrize("kwargs", [
        dict(omega1=-1, omega2=1), dict(omega1=1, omega2=np.nan), dict(omega1=1, omega2=1, gamma=0),
        dict(omega1=1, omega2=1, epsilon=-0.1),
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ValidationError):
            PUParams(**kwargs)

    @pytest.mark.parametrize("n, dt", [(4, 0.1), (10, 0.0), (10, -1.0), (7.5, 0.1)])
    def test_invalid_lattice(self, n, dt):
        with pytest.raises(ValidationError):
            LatticeSpec(n, dt)


class TestActionMatrix:
    @given(st.floats(0, 3), st.floats(0, 3), st.floats(0.1, 5), st.integers(5, 30), st.floats(0.05, 1))
    @settings(max_examples=40, deadline=None)
    def test_matches_dense_oracle(self, w1, w2, gamma, n, dt):
        p = PUParams(w1, w2, gamma)
        k = action_matrix(p, LatticeSpec(n, dt)).dense()
        ref = dense_kernel(p, n, dt)
        np.testing.assert_allclose(k, ref, rtol=1e-12, atol=1e-12 * np.max(np.abs(ref)))

    def test_stencil_corner(self):
        k = action_matrix(PUParams(1, 2), LatticeSpec(5, 1.0)).dense()
        assert k[0, 2] == 1.0
        assert np.count_nonzero(np.triu(k, 3)) == 0

    def test_symmetric_bitwise(self):
        k = action_matrix(PUParams(0.7, 1.3, 2.5), LatticeSpec(12, 0.3)).dense()
        assert np.array_equal(k, k.T)

    def test_free_limit_is_biharmonic(self):
        n, dt = 8, 0.5
        d2 = (np.eye(n, n, k=-1) - 2 * np.eye(n) + np.eye(n, n, k=1)) / dt ** 2
        k = action_matrix(PUParams(0, 0), LatticeSpec(n, dt)).dense()
        np.testing.assert_allclose(k, dt * d2.T @ d2, rtol=1e-13)
        assert np.min(np.linalg.eigvalsh(k)) > 0


class TestLogDet:
    def test_identity(self):
        form = LatticeQuadraticForm((np.ones(5), np.zeros(4), np.zeros(3)))
        ld = logdet_partition(form)
        assert ld.logdet == 0.0 and ld.positive

    def test_regression_fixture(self):
        ld = logdet_partition(action_matrix(PUParams(1, 2), LatticeSpec(200, 0.1)))
        assert ld.positive
        sign, ref = np.linalg.slogdet(action_matrix(PUParams(1, 2), LatticeSpec(200, 0.1)).dense())
        assert sign == 1 and ld.logdet == pytest.approx(ref, rel=1e-12)

    def test_indefinite(self):
        form = LatticeQuadraticForm((np.array([1.0, -2, 3, 4, 5]), np.zeros(4), np.zeros(3)))
        ld = logdet_partition(form)
        assert not ld.positive and ld.logdet == pytest.approx(np.log(120))

    def test_singular_pivot_index(self):
        form = LatticeQuadraticForm((np.array([1.0, 1, 0, 1, 1]), np.zeros(4), np.zeros(3)))
        with pytest.raises(NumericalFailure) as info:
            logdet_partition(form)
        assert info.value.index == 2

    @given(st.floats(0, 4), st.floats(0, 4), st.integers(5, 60), st.floats(0.01, 1))
    @settings(max_examples=40, deadline=None)
    def test_always_positive(self, w1, w2, n, dt):
        form = action_matrix(PUParams(w1, w2), LatticeSpec(n, dt))
        ld = logdet_partition(form)
        assert ld.positive
        assert ld.logdet == pytest.approx(np.linalg.slogdet(form.dense())[1], rel=1e-9, abs=1e-9)

    def test_sweep_continuity(self):
        lat = LatticeSpec(200, 0.1)
        w2 = np.round(np.arange(0.5, 1.5 + 1e-9, 1e-3), 10)
        rows = omega_sweep(1.0, w2, lat)
        assert all(r[2] for r in rows)
        assert np.max(continuity_jumps([r[1] for r in rows])) < 1e-6

    def test_continuity_detects_jump(self):
        v = np.linspace(1, 2, 50)
        v[25:] += 1e-3
        assert np.max(continuity_jumps(v)) > 1e-4
        assert continuity_jumps([1.0, 2.0]).size == 0


class TestGroundEnergy:
    def test_two_frequencies(self):
        est = ground_energy(PUParams(1, 2), 0.01, 20.0)
        assert est.e0 == pytest.approx(1.5, rel=0.02)
        assert est.converged and est.achieved < 0.02 * est.e0

    def test_equal_frequencies(self):
        assert ground_energy(PUParams(1, 1), 0.01, 20.0).e0 == pytest.approx(1.0, rel=0.02)

    @pytest.mark.parametrize("gamma", [0.1, 3.0, 40.0])
    def test_gamma_independent(self, gamma):
        base = ground_energy(PUParams(2, 2), 0.01, 20.0).e0
        assert ground_energy(PUParams(2, 2, gamma), 0.01, 20.0).e0 == pytest.approx(base, rel=0.01)

    def test_lattice_dispersion_oracle(self):
        # on the lattice each mode contributes theta/(2 dt) with cosh(theta) = 1 + w^2 dt^2 / 2
        dt = 0.05
        theta = [np.arccosh(1 + (w * dt) ** 2 / 2) for w in (1.0, 2.0)]
        est = ground_energy(PUParams(1, 2), dt, 40.0)
        assert est.e0 == pytest.approx(sum(theta) / (2 * dt), rel=1e-6)

    def test_free_energy_extensive(self):
        p = PUParams(1, 2)
        f1, f2, f3 = (free_energy(p, LatticeSpec(n, 0.05)) for n in (400, 800, 1200))
        assert (f3 - f2) == pytest.approx(f2 - f1, rel=1e-9)

    def test_zero_frequency_rejected(self):
        with pytest.raises(ValidationError):
            ground_energy(PUParams(0, 1))


class TestCorrelator:
    LAT = LatticeSpec(200, 0.1)

    def test_matches_dense_inverse(self):
        p = PUParams(1, 2)
        k = action_matrix(p, self.LAT).dense()
        col = np.linalg.solve(k, np.eye(200)[:, 99])
        g = lattice_correlator(p, self.LAT, [0.0, 0.5, 1.0])
        np.testing.assert_allclose(g, col[[99, 104, 109]], rtol=1e-10)

    def test_two_mode_fit(self):
        g = lattice_correlator(PUParams(1, 2), self.LAT, FIT_TAU)
        fit = fit_correlator(FIT_TAU, g, 1, 2)
        assert fit.model == "two-mode" and fit.rel_residual < 0.02
        np.testing.assert_allclose(g, continuum_correlator(1, 2, FIT_TAU), rtol=0.02)

    def test_jordan_fit(self):
        g = lattice_correlator(PUParams(1, 1), self.LAT, FIT_TAU)
        fit = fit_correlator(FIT_TAU, g, 1, 1)
        a, b = fit.coeffs
        assert fit.model == "jordan" and fit.rel_residual < 0.02
        assert abs(b) > 1e-3 * abs(a)
        assert a == pytest.approx(0.25, rel=0.02) and b == pytest.approx(0.25, rel=0.02)

    def test_free_limit_flagged(self):
        g = lattice_correlator(PUParams(0, 0), self.LAT, FIT_TAU)
        assert fit_correlator(FIT_TAU, g, 0, 0).model == "none"
        assert np.all(g > 1.0)

    def test_continuous_across_jordan_point(self):
        # second differences carry the smooth O(h^2) curvature (~4e-6 here);
        # third differences cancel it, so a jump or kink at w2 = w1 would stand out
        w2 = np.round(np.arange(0.99, 1.01 + 1e-9, 1e-3), 10)
        g = np.array([lattice_correlator(PUParams(1, w), self.LAT, [1.0])[0] for w in w2])
        third = np.abs(np.diff(g, 3)) / np.max(np.abs(g))
        assert np.max(third) < 1e-6

    def test_decays(self):
        g = lattice_correlator(PUParams(1, 2), self.LAT, [1.0, 3.0, 6.0])
        assert g[0] > g[1] > g[2] > 0

    def test_out_of_range(self):
        with pytest.raises(ValidationError):
            lattice_correlator(PUParams(1, 2), self.LAT, [50.0])


class TestWedge:
    P = PUParams(1, 2, epsilon=0.01)

    def test_real_axes(self):
        rep = wedge_scan(self.P, 0.0, 0.0)
        assert (rep.damping_z, rep.damping_zdot) == ("divergent", "damped")

    def test_imaginary_z(self):
        rep = wedge_scan(self.P, np.pi / 2, 0.0)
        assert rep.damped

    def test_stokes_line(self):
        assert wedge_scan(self.P, np.pi / 4, 0.0).damping_z == "marginal"

    def test_values(self):
        rep = wedge_scan(self.P, 0.0, 0.0)
        assert rep.re_z == pytest.approx(0.5 * 0.01 * 5)
        assert rep.re_zdot == pytest.approx(-0.01)

    @given(st.floats(-7, 7), st.floats(-7, 7))
    @settings(max_examples=50, deadline=None)
    def test_quadrant_symmetry(self, tz, tzd):
        a = wedge_scan(self.P, tz, tzd)
        b = wedge_scan(self.P, tz + np.pi, tzd + np.pi)
        assert a.re_z == pytest.approx(b.re_z, abs=1e-12)
        assert a.re_zdot == pytest.approx(b.re_zdot, abs=1e-12)

    def test_needs_epsilon(self):
        with pytest.raises(ValidationError):
            wedge_scan(PUParams(1, 2), 0, 0)


def test_sweep_csv(tmp_path):
    path = tmp_path / "sweep.csv"
    write_sweep_csv(path, [(1.0, 2.0, 200, 0.1, 12.5, 1.5)])
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["omega1", "omega2", "N", "delta_tau", "logdet", "E0_estimate"]
    assert [float(x) for x in rows[1]] == [1.0, 2.0, 200, 0.1, 12.5, 1.5]
