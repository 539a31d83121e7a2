import numpy as np
import pytest

from conftest import TWO_PI, random_field
from nsgalerkin.domain import BoxDomain
from nsgalerkin.field import SpectralField
from nsgalerkin.initial import random_field as seeded_field, single_mode, taylor_green
from nsgalerkin.operators import apply_A, apply_B
from nsgalerkin.solver import (CSV_HEADER, RK4_STABILITY, GalerkinSystem, NumericalInstabilityError,
                               evolve, read_csv, rhs, step)

TORUS4 = BoxDomain(4, (TWO_PI,) * 4)
TORUS2 = BoxDomain(2, (TWO_PI, TWO_PI))


def test_rk4_stability_constant():
    z = -RK4_STABILITY
    assert abs(1 + z + z**2 / 2 + z**3 / 6 + z**4 / 24) == pytest.approx(1.0, abs=1e-14)


class TestRhs:
    def test_single_mode(self):
        system = GalerkinSystem(TORUS4, 1, 0.1)
        u = single_mode(TORUS4, 1, (1, 0, 0, 0))
        np.testing.assert_allclose(rhs(system, u).coeffs, -0.1 * u.coeffs, atol=1e-16)

    def test_zero(self, domain):
        system = GalerkinSystem(domain, 2, 0.5)
        assert not np.any(rhs(system, system.zeros()).coeffs)

    def test_matches_operators(self, domain, rng):
        system = GalerkinSystem(domain, 2, 0.3)
        u = random_field(domain, 2, rng)
        expected = -(apply_A(u, 0.3) + apply_B(u))
        np.testing.assert_allclose(rhs(system, u).coeffs, expected.coeffs, atol=1e-12)

    def test_rejects_other_truncation(self, rng):
        system = GalerkinSystem(TORUS4, 2, 0.3)
        with pytest.raises(ValueError):
            rhs(system, random_field(TORUS4, 1, rng))


class TestStep:
    def test_rk4_local_error_ratio(self):
        system = GalerkinSystem(TORUS4, 1, 0.1)
        u = single_mode(TORUS4, 1, (0, 0, 1, 0))

        def err(dt):
            out = step(system, u, dt)
            return np.abs(out.coeffs - np.exp(-0.1 * dt) * u.coeffs).max()

        ratio = err(2.0) / err(1.0)
        assert 32 * 0.85 <= ratio <= 32 * 1.15

    @pytest.mark.parametrize("scheme", ["rk4", "imex_euler", "etd_rk2"])
    def test_zero_field(self, scheme):
        system = GalerkinSystem(TORUS2, 3, 0.1)
        assert not np.any(step(system, system.zeros(), 0.01, scheme).coeffs)

    @pytest.mark.parametrize("dt", [0.0, -1.0, float("nan")])
    def test_bad_dt(self, dt):
        system = GalerkinSystem(TORUS2, 2, 0.1)
        with pytest.raises(ValueError):
            step(system, system.zeros(), dt)

    def test_unstable_dt_reports_bound(self):
        system = GalerkinSystem(TORUS2, 2, 1.0)
        bound = system.stability_bound()
        assert bound == pytest.approx(RK4_STABILITY / 8.0)
        with pytest.raises(NumericalInstabilityError, match="stability bound"):
            step(system, system.zeros(), 1.01 * bound)
        step(system, system.zeros(), bound, "rk4")
        # implicit linear treatment has no linear bound
        step(system, system.zeros(), 10 * bound, "imex_euler")

    def test_unknown_scheme(self):
        system = GalerkinSystem(TORUS2, 2, 1.0)
        with pytest.raises(ValueError):
            step(system, system.zeros(), 0.01, "euler")

    def test_etd_exact_on_linear_dynamics(self):
        system = GalerkinSystem(TORUS4, 1, 0.7)
        u = single_mode(TORUS4, 1, (1, 1, 0, 0))
        out = step(system, u, 0.9, "etd_rk2")
        np.testing.assert_allclose(out.coeffs, np.exp(-0.7 * 2 * 0.9) * u.coeffs, atol=1e-15)

    @pytest.mark.parametrize("scheme,order", [("imex_euler", 1), ("etd_rk2", 2), ("rk4", 4)])
    def test_global_order(self, scheme, order):
        system = GalerkinSystem(TORUS2, 3, 0.05)
        u0 = seeded_field(TORUS2, 3, seed=7, vnorm=2.0)
        _, ref = evolve(system, u0, 0.5, 1e-3)
        errs = []
        for dt in (0.02, 0.01):
            _, out = evolve(system, u0, 0.5, dt, scheme)
            errs.append((out - ref).l2_norm())
        ratio = errs[0] / errs[1]
        assert 2**order * 0.8 <= ratio <= 2**order * 1.25


class TestEvolve:
    def test_single_mode_decay(self):
        system = GalerkinSystem(TORUS4, 1, 0.1)
        u = single_mode(TORUS4, 1, (0, 1, 0, 0))
        rec, final = evolve(system, u, 1.0, 1e-3, sample_every=100)
        assert len(rec) == 11
        np.testing.assert_allclose(final.coeffs, np.exp(-0.1) * u.coeffs, rtol=0, atol=1e-10)
        assert rec.l2_sq[-1] / rec.l2_sq[0] == pytest.approx(np.exp(-0.2), rel=1e-8)
        # ut_sq = (nu kappa)^2 l2_sq along a pure Stokes mode
        np.testing.assert_allclose(rec.ut_sq, 0.01 * rec.l2_sq, rtol=1e-12)

    def test_taylor_green(self):
        system = GalerkinSystem(TORUS2, 4, 0.1)
        rec, _ = evolve(system, taylor_green(TORUS2, 4), 1.0, 0.01, sample_every=10)
        np.testing.assert_allclose(rec.l2_sq, rec.l2_sq[0] * np.exp(-0.4 * rec.times), rtol=1e-6)

    def test_zero(self, domain):
        system = GalerkinSystem(domain, 2, 0.2)
        rec, final = evolve(system, system.zeros(), 0.5)
        for name in ("l2_sq", "v_sq", "a_sq", "ut_sq", "energy_residual"):
            assert not np.any(getattr(rec, name))
        assert not np.any(final.coeffs)

    def test_monotone_energy(self, domain, rng):
        system = GalerkinSystem(domain, 2, 0.5)
        u0 = random_field(domain, 2, rng)
        u0 = u0 * (0.05 / u0.v_norm())
        rec, _ = evolve(system, u0, 0.5, sample_every=5)
        assert np.all(np.diff(rec.l2_sq) < 0)

    def test_estimate_two_monotone(self):
        """With a certified margin the V-norm is nonincreasing at samples."""
        system = GalerkinSystem(TORUS4, 2, 1.0)
        u0 = seeded_field(TORUS4, 2, seed=3, vnorm=0.09)
        rec, _ = evolve(system, u0, 1.0, sample_every=5)
        assert np.all(np.diff(rec.v_sq) <= 0)

    def test_consistent_with_step(self, rng):
        system = GalerkinSystem(TORUS2, 3, 0.1)
        u = random_field(TORUS2, 3, rng)
        _, final = evolve(system, u, 0.05, 0.01)
        v = u
        for _ in range(5):
            v = step(system, v, 0.01)
        np.testing.assert_allclose(final.coeffs, v.coeffs, atol=1e-14)

    def test_projects_initial_data(self, rng):
        system = GalerkinSystem(TORUS2, 2, 0.1)
        u = random_field(TORUS2, 4, rng, solenoidal=False)
        rec, _ = evolve(system, u, 0.1, 0.01)
        expected = u.with_cutoff(2, solenoidal=True)
        assert rec.l2_sq[0] == pytest.approx(expected.l2_sq(), rel=1e-14)
        assert expected.l2_sq() < u.l2_sq()

    def test_lands_on_final_time(self):
        system = GalerkinSystem(TORUS2, 2, 0.1)
        rec, _ = evolve(system, system.zeros(), 1.0, 0.3)
        assert rec.times[-1] == 1.0 and rec.dt == pytest.approx(1 / 3)

    def test_residual_fourth_order(self):
        system = GalerkinSystem(TORUS4, 2, 0.1)
        u0 = seeded_field(TORUS4, 2, seed=1, vnorm=1.0)
        res = [np.abs(evolve(system, u0, 0.4, dt)[0].step_residuals).max() for dt in (0.04, 0.02)]
        assert 16 * 0.8 <= res[0] / res[1] <= 16 * 1.2

    def test_default_dt_is_stable(self):
        system = GalerkinSystem(TORUS4, 2, 1.0)
        assert system.default_dt() == pytest.approx(system.stability_bound() / 4)

    def test_csv(self, tmp_path, rng):
        system = GalerkinSystem(TORUS2, 2, 0.1)
        rec, _ = evolve(system, random_field(TORUS2, 2, rng), 0.1, 0.01, sample_every=2)
        path = tmp_path / "traj.csv"
        rec.to_csv(path)
        header, data = read_csv(path)
        assert tuple(header) == CSV_HEADER
        assert data.shape == (6, 6)
        np.testing.assert_array_equal(data[:, 1], rec.l2_sq)
        assert path.read_text().splitlines()[0] == ",".join(CSV_HEADER)

    def test_instability_detected(self):
        system = GalerkinSystem(TORUS2, 2, 1.0)
        with pytest.raises(NumericalInstabilityError, match=r"dt <="):
            evolve(system, system.zeros(), 1.0, 0.5)

    def test_nonfinite_state(self):
        """A huge state blows up under the explicit nonlinear term and is reported."""
        system = GalerkinSystem(TORUS2, 3, 1e-3)
        u = seeded_field(TORUS2, 3, seed=0, vnorm=1e6)
        with np.errstate(all="ignore"), pytest.raises(NumericalInstabilityError, match="non-finite"):
            evolve(system, u, 50.0, 0.1)


def test_invalid_system():
    with pytest.raises(ValueError):
        GalerkinSystem(TORUS2, 2, 0.0)
    with pytest.raises(ValueError):
        GalerkinSystem(TORUS2, 0, 1.0)
