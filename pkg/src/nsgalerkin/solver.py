"""Time integration of the truncated Galerkin system ``u' + A u + B u = 0``."""
import csv
import math
from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from . import kernels
from .domain import BoxDomain, enumerate_modes, mode_basis
from .field import SpectralField

SCHEMES = ("rk4", "imex_euler", "etd_rk2")
# real-axis stability limit of classical RK4: |1 + z + z^2/2 + z^3/6 + z^4/24| = 1
RK4_STABILITY = 2.785293563405282

CSV_HEADER = ("t", "l2_sq", "v_sq", "a_sq", "ut_sq", "energy_residual")


class NumericalInstabilityError(RuntimeError):
    """Raised for unstable step sizes or non-finite states."""


@dataclass(frozen=True)
class GalerkinSystem:
    domain: BoxDomain
    cutoff: int
    nu: float

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError(f"viscosity must be positive, got {self.nu}")
        mode_basis(self.domain, self.cutoff)  # validates cutoff

    @property
    def basis(self):
        return mode_basis(self.domain, self.cutoff)

    @property
    def modes(self):
        return enumerate_modes(self.domain, self.cutoff)

    @property
    def lambda_min(self):
        return self.basis.lambda_min

    @property
    def chi(self):
        return self.domain.chi

    def stability_bound(self, scheme="rk4"):
        """Largest admissible ``dt`` for the linear part, ``inf`` if unconditional."""
        if scheme == "rk4":
            return RK4_STABILITY / (self.nu * self.basis.kappa_max)
        if scheme in ("imex_euler", "etd_rk2"):
            return math.inf
        raise ValueError(f"unknown scheme {scheme!r}; choose from {SCHEMES}")

    def default_dt(self, scheme="rk4"):
        bound = self.stability_bound("rk4")
        return bound / 4.0

    def zeros(self):
        return SpectralField.zeros(self.domain, self.cutoff)


class _Dynamics:
    """Coefficient-level right-hand side; avoids field wrapping in inner loops."""

    def __init__(self, system: GalerkinSystem):
        self.system = system
        self.basis = b = system.basis
        self.nu = system.nu
        self.lin = system.nu * b.kappa[:, None]
        self.table = kernels.triad_table(system.domain.dim, system.cutoff, system.cutoff)
        self.iq = 1j * b.lattice_q

    def nonlinear(self, a):
        b = self.basis
        lat = b.to_lattice(a)
        grad = self.iq[:, None, :] * lat[None, :, :]
        adv = kernels.convolve(lat, grad, self.table)
        c = b.from_lattice(adv)
        qc = np.einsum("nd,nd->n", b.q, c)
        return c - (qc / b.kappa)[:, None] * b.q

    def rhs(self, a):
        return -self.lin * a - self.nonlinear(a)

    def norms(self, a, r):
        b = self.basis
        w = b.weight
        mag = np.sum(np.abs(a) ** 2, axis=1)
        rmag = np.sum(np.abs(r) ** 2, axis=1)
        cross = np.sum((a * np.conj(r)).real, axis=1)
        return {
            "l2_sq": float(np.sum(w * mag)),
            "v_sq": float(np.sum(w * b.kappa * mag)),
            "a_sq": float(np.sum(w * b.kappa**2 * mag)),
            "ut_sq": float(np.sum(w * rmag)),
            "ut_v_sq": float(np.sum(w * b.kappa * rmag)),
            # d/dt ||u||_V^2 along the exact flow through this state
            "dv_sq": float(2.0 * np.sum(w * b.kappa * cross)),
        }

    def step(self, a, dt, scheme, k1=None):
        if scheme == "rk4":
            if k1 is None:
                k1 = self.rhs(a)
            k2 = self.rhs(a + 0.5 * dt * k1)
            k3 = self.rhs(a + 0.5 * dt * k2)
            k4 = self.rhs(a + dt * k3)
            return a + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if scheme == "imex_euler":
            return (a - dt * self.nonlinear(a)) / (1.0 + dt * self.lin)
        if scheme == "etd_rk2":
            z = -self.lin * dt
            e = np.exp(z)
            phi1 = _phi1(z)
            phi2 = _phi2(z)
            n0 = -self.nonlinear(a)
            mid = e * a + dt * phi1 * n0
            n1 = -self.nonlinear(mid)
            return mid + dt * phi2 * (n1 - n0)
        raise ValueError(f"unknown scheme {scheme!r}; choose from {SCHEMES}")


def _phi1(z):
    """``(e^z - 1) / z`` with the removable singularity handled."""
    small = np.abs(z) < 1e-5
    zs = np.where(small, 1.0, z)
    return np.where(small, 1.0 + z / 2.0 + z**2 / 6.0, np.expm1(zs) / zs)


def _phi2(z):
    """``(e^z - 1 - z) / z^2``."""
    small = np.abs(z) < 1e-3
    zs = np.where(small, 1.0, z)
    return np.where(small, 0.5 + z / 6.0 + z**2 / 24.0 + z**3 / 120.0,
                    (np.expm1(zs) - zs) / zs**2)


def _check_field(system, u):
    if u.domain != system.domain or u.cutoff != system.cutoff or not u.solenoidal:
        raise ValueError("field does not match the system truncation")


def rhs(system: GalerkinSystem, u: SpectralField) -> SpectralField:
    """``-A u - B u``."""
    _check_field(system, u)
    return SpectralField._wrap(system.domain, system.cutoff, _Dynamics(system).rhs(u.coeffs))


def _check_dt(system, dt, scheme):
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; choose from {SCHEMES}")
    if not (dt > 0 and math.isfinite(dt)):
        raise ValueError(f"time step must be positive, got {dt}")
    bound = system.stability_bound(scheme)
    if dt > bound:
        raise NumericalInstabilityError(
            f"dt={dt!r} exceeds the {scheme} stability bound "
            f"dt*nu*kappa_max <= {RK4_STABILITY:.6f}, i.e. dt <= {bound!r}")


def step(system: GalerkinSystem, u: SpectralField, dt: float, scheme="rk4") -> SpectralField:
    """Advance one step.  Every increment lies in the projected truncation."""
    _check_field(system, u)
    _check_dt(system, dt, scheme)
    out = _Dynamics(system).step(u.coeffs, dt, scheme)
    return SpectralField._wrap(system.domain, system.cutoff, out)


@dataclass
class TrajectoryRecord:
    """Sampled norms of a Galerkin trajectory.

    ``energy_residual[s]`` is the largest-magnitude per-step residual among
    the steps since the previous sample (0 at ``t = 0``); the full per-step
    series is kept in ``step_residuals``.
    """

    times: np.ndarray
    l2_sq: np.ndarray
    v_sq: np.ndarray
    a_sq: np.ndarray
    ut_sq: np.ndarray
    energy_residual: np.ndarray
    ut_v_sq: np.ndarray
    step_residuals: np.ndarray
    nu: float
    dt: float
    scheme: str
    fields: Optional[list] = dc_field(default=None, repr=False)

    def __post_init__(self):
        n = len(self.times)
        for name in ("l2_sq", "v_sq", "a_sq", "ut_sq", "energy_residual", "ut_v_sq"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} has {len(getattr(self, name))} samples, expected {n}")
        if n > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("sample times must be strictly increasing")

    def __len__(self):
        return len(self.times)

    def rows(self):
        return zip(self.times, self.l2_sq, self.v_sq, self.a_sq, self.ut_sq,
                   self.energy_residual)

    def to_csv(self, path):
        write_csv(path, CSV_HEADER, self.rows())


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format(float(x), ".17g") for x in row])


def read_csv(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = np.array([[float(x) for x in row] for row in reader])
    return header, data


def evolve(system: GalerkinSystem, u0: SpectralField, T: float, dt=None,
           scheme="rk4", sample_every=1, keep_fields=False):
    """Integrate from ``u0`` to time ``T``; returns ``(TrajectoryRecord, final field)``.

    ``u0`` is spectrally truncated (or padded) to the system cutoff and
    Leray-projected.  The step count is ``round(T / dt)`` and the step is
    then adjusted to land exactly on ``T``.

    The energy residual of step n is

        r_n = (E_{n+1} - E_n) / dt + (2 nu / dt) * I_n,

    with ``E = ||u||^2`` and ``I_n`` the two-point Hermite quadrature of
    ``||u||_V^2`` over the step (endpoint values and slopes), which is
    fifth-order accurate so ``r_n`` measures the scheme's own error.
    """
    if not T > 0:
        raise ValueError(f"final time must be positive, got {T}")
    if dt is None:
        dt = system.default_dt(scheme)
    if int(sample_every) != sample_every or sample_every < 1:
        raise ValueError("sample_every must be a positive integer")
    n_steps = max(1, int(round(T / dt)))
    dt = T / n_steps
    _check_dt(system, dt, scheme)

    if u0.domain != system.domain:
        raise ValueError("initial data lives on a different domain")
    a = np.array(project_initial(system, u0).coeffs)

    dyn = _Dynamics(system)
    nu = system.nu
    r = dyn.rhs(a)
    cur = dyn.norms(a, r)

    keys = ("l2_sq", "v_sq", "a_sq", "ut_sq", "ut_v_sq")
    samples = {k: [cur[k]] for k in keys}
    times = [0.0]
    sampled_res = [0.0]
    step_res = np.empty(n_steps)
    fields = [SpectralField._wrap(system.domain, system.cutoff, a.copy())] if keep_fields else None
    worst = 0.0

    for n in range(1, n_steps + 1):
        a_next = dyn.step(a, dt, scheme, k1=r if scheme == "rk4" else None)
        if not np.all(np.isfinite(a_next)):
            raise NumericalInstabilityError(
                f"non-finite state at step {n} (t={n * dt!r}); stability bound "
                f"dt <= {system.stability_bound('rk4')!r} for rk4")
        r_next = dyn.rhs(a_next)
        nxt = dyn.norms(a_next, r_next)
        integral = 0.5 * dt * (cur["v_sq"] + nxt["v_sq"]) \
            + dt**2 / 12.0 * (cur["dv_sq"] - nxt["dv_sq"])
        res = (nxt["l2_sq"] - cur["l2_sq"]) / dt + 2.0 * nu * integral / dt
        step_res[n - 1] = res
        if abs(res) >= abs(worst):
            worst = res
        a, r, cur = a_next, r_next, nxt
        if n % sample_every == 0 or n == n_steps:
            times.append(n * dt)
            for k in keys:
                samples[k].append(cur[k])
            sampled_res.append(worst)
            worst = 0.0
            if keep_fields:
                fields.append(SpectralField._wrap(system.domain, system.cutoff, a.copy()))

    record = TrajectoryRecord(
        times=np.array(times),
        l2_sq=np.array(samples["l2_sq"]),
        v_sq=np.array(samples["v_sq"]),
        a_sq=np.array(samples["a_sq"]),
        ut_sq=np.array(samples["ut_sq"]),
        energy_residual=np.array(sampled_res),
        ut_v_sq=np.array(samples["ut_v_sq"]),
        step_residuals=step_res,
        nu=nu,
        dt=dt,
        scheme=scheme,
        fields=fields,
    )
    final = SpectralField._wrap(system.domain, system.cutoff, a)
    return record, final


def project_initial(system: GalerkinSystem, u0: SpectralField) -> SpectralField:
    """Orthogonal projection of ``u0`` onto the truncated solenoidal span."""
    if u0.cutoff != system.cutoff or not u0.solenoidal:
        u0 = u0.with_cutoff(system.cutoff, solenoidal=True)
    return SpectralField.from_projection(system.domain, system.cutoff, u0.coeffs)
