"""Initial-data presets."""
import numpy as np

from .domain import mode_basis
from .field import SpectralField, from_function


def single_mode(domain, cutoff, k, amplitude=1.0):
    """One divergence-free mode with Euclidean amplitude ``amplitude``.

    The direction is the coordinate axis with the smallest ``|q_j|`` among
    the live components, Leray-projected.
    """
    basis = mode_basis(domain, cutoff)
    k = tuple(int(c) for c in k)
    keys = [tuple(int(c) for c in row) for row in basis.k]
    if k not in keys:
        raise ValueError(f"mode {k} is not a retained mode at cutoff {cutoff}")
    n = keys.index(k)
    q = basis.q[n]
    live = np.flatnonzero(basis.active[n])
    j = live[np.argmin(np.abs(q[live]))]
    a = np.zeros(domain.dim)
    a[j] = 1.0
    a = a - (q @ a) / (q @ q) * q
    a = amplitude * a / np.linalg.norm(a)
    coeffs = np.zeros((len(basis), domain.dim), basis.dtype)
    coeffs[n] = a
    return SpectralField(domain, cutoff, coeffs)


def _tg_wavenumbers(domain):
    if domain.flavor == "periodic":
        return 2 * np.pi / domain.sides[0], 2 * np.pi / domain.sides[1]
    return np.pi / domain.sides[0], np.pi / domain.sides[1]


def taylor_green_decay_rate(domain, nu):
    """Amplitude decay rate ``nu (a^2 + b^2)`` of the Taylor-Green vortex."""
    a, b = _tg_wavenumbers(domain)
    return nu * (a * a + b * b)


def taylor_green_function(domain, amplitude=1.0):
    """Closed-form Taylor-Green velocity in the first two coordinates.

    Periodic: ``(A cos(a x) sin(b y), -A (a/b) sin(a x) cos(b y))``.
    Free slip: ``(A sin(a x) cos(b y), -A (a/b) cos(a x) sin(b y))``.
    Remaining components vanish.
    """
    a, b = _tg_wavenumbers(domain)
    periodic = domain.flavor == "periodic"

    def func(*x):
        zero = np.zeros_like(x[0])
        if periodic:
            u1 = amplitude * np.cos(a * x[0]) * np.sin(b * x[1])
            u2 = -amplitude * (a / b) * np.sin(a * x[0]) * np.cos(b * x[1])
        else:
            u1 = amplitude * np.sin(a * x[0]) * np.cos(b * x[1])
            u2 = -amplitude * (a / b) * np.cos(a * x[0]) * np.sin(b * x[1])
        return [u1, u2] + [zero] * (domain.dim - 2)

    return func


def taylor_green(domain, cutoff, amplitude=1.0):
    return from_function(domain, cutoff, taylor_green_function(domain, amplitude))


def taylor_green_exact(domain, cutoff, nu, t, amplitude=1.0):
    """Exact solution at time ``t``: the initial vortex times ``exp(-nu (a^2+b^2) t)``."""
    decay = np.exp(-taylor_green_decay_rate(domain, nu) * t)
    return taylor_green(domain, cutoff, amplitude * decay)


def random_field(domain, cutoff, seed=0, vnorm=None, amplitude=1.0, radius=None):
    """Seeded Gaussian amplitudes on modes with ``|k|^2 <= radius^2``.

    ``radius`` defaults to the cutoff.  The draw is Leray-projected and, when
    ``vnorm`` is given, rescaled so that ``||u||_V = vnorm``.
    """
    basis = mode_basis(domain, cutoff)
    if radius is None:
        radius = cutoff
    rng = np.random.default_rng(seed)
    shape = (len(basis), domain.dim)
    coeffs = rng.standard_normal(shape)
    if basis.dtype == np.complex128:
        coeffs = coeffs + 1j * rng.standard_normal(shape)
    keep = np.sum(basis.k**2, axis=1) <= radius**2
    coeffs = np.where(keep[:, None], amplitude * coeffs, 0)
    u = SpectralField.from_projection(domain, cutoff, coeffs)
    if vnorm is not None:
        current = u.v_norm()
        if current == 0:
            raise ValueError("random draw has no energy; increase radius")
        u = u * (vnorm / current)
    return u
