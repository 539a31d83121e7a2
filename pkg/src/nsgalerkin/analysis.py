"""Checks of the decay, uniqueness and time-derivative estimates on computed trajectories."""
import math
from dataclasses import asdict, dataclass

import numpy as np

from .certificates import check_regularity_condition
from .domain import chi
from .operators import TRILINEAR_CONSTANT, apply_B
from .solver import GalerkinSystem, evolve, rhs

__all__ = [
    "chi",
    "steklov_check",
    "steklov_quadrature",
    "DecayReport",
    "verify_decay",
    "ContractionReport",
    "perturbation_experiment",
    "UtReport",
    "ut_estimates",
]


def steklov_check(profile, L):
    """Rayleigh quotient ``||v_x||^2 / ||v||^2`` of ``v = sum_n b_n sin(n pi x / L)``.

    ``profile[n-1]`` is ``b_n``.  By orthogonality of the sine series the
    quotient is ``sum (n pi / L)^2 b_n^2 / sum b_n^2``, never below
    ``pi^2 / L^2``.
    """
    b = np.asarray(profile, dtype=float)
    if not L > 0:
        raise ValueError("interval length must be positive")
    energy = float(np.sum(b**2))
    if energy == 0.0:
        raise ValueError("profile is identically zero")
    n = np.arange(1, b.size + 1)
    ratio = float(np.sum((n * np.pi / L) ** 2 * b**2) / energy)
    assert ratio >= (np.pi / L) ** 2 * (1 - 1e-14)
    return ratio


def steklov_quadrature(profile, L, points=None):
    """Same quotient by trapezoid quadrature of the synthesized profile."""
    b = np.asarray(profile, dtype=float)
    n = np.arange(1, b.size + 1)
    if points is None:
        points = 4 * b.size + 8
    x = np.linspace(0.0, L, points + 1)
    arg = np.pi * np.outer(x, n) / L
    v = np.sin(arg) @ b
    vx = (np.cos(arg) * (n * np.pi / L)) @ b
    w = np.full(points + 1, L / points)
    w[0] = w[-1] = 0.5 * L / points
    return float(np.sum(w * vx**2) / np.sum(w * v**2))


@dataclass
class DecayReport:
    chi: float
    lambda_min: float
    nu: float
    guaranteed_rate: float
    fitted_rate: float
    fit_defined: bool
    envelope_ok: bool
    max_envelope_excess: float
    v_guaranteed_rate: float
    v_envelope_ok: bool
    v_max_envelope_excess: float
    tol: float

    def to_dict(self):
        d = asdict(self)
        if not self.fit_defined:
            d["fitted_rate"] = None
        return d


def _envelope(times, values, rate):
    """Largest ``values / (values[0] exp(-rate t))`` over the samples."""
    if values[0] == 0.0:
        return 0.0 if np.all(values == 0.0) else math.inf
    ratios = values / (values[0] * np.exp(-rate * times))
    return float(np.max(ratios))


def fit_rate(times, values, window=(0.1, 1.0)):
    """Least-squares decay rate of ``log values`` over ``t in [w0 T, w1 T]``.

    Returns ``nan`` when fewer than two positive samples fall in the window.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    T = times[-1]
    sel = (times >= window[0] * T - 1e-12) & (times <= window[1] * T + 1e-12) & (values > 0)
    if np.count_nonzero(sel) < 2:
        return math.nan
    slope = np.polyfit(times[sel], np.log(values[sel]), 1)[0]
    return float(-slope)


def verify_decay(traj, system: GalerkinSystem, tol=1e-6) -> DecayReport:
    """Check ``||u||^2(t) <= ||u0||^2 exp(-2 nu mu t)`` and the V-norm analogue at rate ``nu mu``.

    ``mu = min(chi, lambda_min)``: the box constant and the discrete gap.
    """
    if len(traj) < 10:
        raise ValueError(f"need at least 10 samples, trajectory has {len(traj)}")
    if np.any(traj.l2_sq < 0) or np.any(traj.v_sq < 0):
        raise ValueError("negative energies in trajectory")
    if traj.l2_sq[0] > 0 and np.any(traj.l2_sq <= 0):
        raise ValueError("energy reached zero along a nonzero trajectory")
    nu = system.nu
    mu = min(system.chi, system.lambda_min)
    rate = 2.0 * nu * mu
    v_rate = nu * mu
    excess = _envelope(traj.times, traj.l2_sq, rate) - 1.0
    v_excess = _envelope(traj.times, traj.v_sq, v_rate) - 1.0
    if traj.l2_sq[0] == 0.0:
        excess = v_excess = 0.0
    fitted = fit_rate(traj.times, traj.l2_sq)
    return DecayReport(
        chi=system.chi,
        lambda_min=system.lambda_min,
        nu=nu,
        guaranteed_rate=rate,
        fitted_rate=fitted,
        fit_defined=not math.isnan(fitted),
        envelope_ok=bool(excess <= tol),
        max_envelope_excess=float(excess),
        v_guaranteed_rate=v_rate,
        v_envelope_ok=bool(v_excess <= tol),
        v_max_envelope_excess=float(v_excess),
        tol=tol,
    )


@dataclass
class ContractionReport:
    times: np.ndarray
    difference_sq: np.ndarray
    nonincreasing: bool
    max_increase: float
    hypothesis_holds: bool
    min_hypothesis_margin: float
    tol: float

    def to_dict(self):
        return {
            "times": [float(t) for t in self.times],
            "difference_sq": [float(w) for w in self.difference_sq],
            "nonincreasing": self.nonincreasing,
            "max_increase": self.max_increase,
            "hypothesis_holds": self.hypothesis_holds,
            "min_hypothesis_margin": self.min_hypothesis_margin,
            "tol": self.tol,
        }


def perturbation_experiment(system, u1_0, u2_0, T, dt=None, scheme="rk4",
                            sample_every=1, tol=1e-10) -> ContractionReport:
    """Evolve two initial data and track ``||u1 - u2||^2``.

    The running hypothesis ``nu - 9 ||u2(t)||_V > 0`` is reported, not
    enforced.
    """
    rec1, _ = evolve(system, u1_0, T, dt, scheme, sample_every, keep_fields=True)
    rec2, _ = evolve(system, u2_0, T, dt, scheme, sample_every, keep_fields=True)
    w = np.array([(f1 - f2).l2_sq() for f1, f2 in zip(rec1.fields, rec2.fields)])
    margins = system.nu - TRILINEAR_CONSTANT * np.sqrt(rec2.v_sq)
    inc = np.diff(w)
    max_inc = float(inc.max(initial=0.0))
    return ContractionReport(
        times=rec1.times,
        difference_sq=w,
        nonincreasing=bool(np.all(inc <= tol)),
        max_increase=max_inc,
        hypothesis_holds=bool(np.all(margins > 0)),
        min_hypothesis_margin=float(margins.min()),
        tol=tol,
    )


@dataclass
class UtReport:
    hypothesis_holds: bool
    hypothesis_margin: float
    ut0_sq: float
    max_lhs_ratio: float
    integral_ok: bool
    ut0_norm: float
    stokes_term: float
    nonlinear_term: float
    initial_bound_ok: bool
    tol: float

    def to_dict(self):
        return asdict(self)


def ut_estimates(traj, system, u0, tol=1e-6) -> UtReport:
    """Check the time-derivative estimates on a trajectory.

    * ``||u_t||^2(t) + int_0^t nu ||u_t||_V^2 <= ||u_t||^2(0)`` (trapezoid in time)
    * ``||u_t||(0) <= ||A u0|| + ||B u0||``
    """
    cert = check_regularity_condition(system.nu, u0)
    nu = system.nu
    integrand = nu * traj.ut_v_sq
    steps = np.diff(traj.times) * 0.5 * (integrand[1:] + integrand[:-1])
    integral = np.concatenate([[0.0], np.cumsum(steps)])
    lhs = traj.ut_sq + integral
    ut0 = traj.ut_sq[0]
    if ut0 > 0:
        max_ratio = float(np.max(lhs / ut0))
        integral_ok = bool(np.all(lhs <= ut0 * (1 + tol)))
    else:
        max_ratio = 0.0
        integral_ok = bool(np.all(lhs == 0.0))

    if u0.cutoff != system.cutoff or not u0.solenoidal:
        u0 = u0.with_cutoff(system.cutoff, solenoidal=True)
    ut0_norm = rhs(system, u0).l2_norm()
    stokes_term = nu * u0.a_norm()
    nonlinear_term = apply_B(u0).l2_norm()
    return UtReport(
        hypothesis_holds=cert.holds,
        hypothesis_margin=cert.margin,
        ut0_sq=float(ut0),
        max_lhs_ratio=max_ratio,
        integral_ok=integral_ok,
        ut0_norm=float(ut0_norm),
        stokes_term=float(stokes_term),
        nonlinear_term=float(nonlinear_term),
        initial_bound_ok=bool(ut0_norm <= stokes_term + nonlinear_term + 1e-12),
        tol=tol,
    )
