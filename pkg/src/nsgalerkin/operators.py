"""Stokes operator, advective nonlinearity, trilinear form and steady Stokes solve.

The trilinear form ``b(u, v, w) = sum_ij int u_i (D_i v_j) w_j dx`` has two
independent evaluation paths: an exact triad convolution on the lattice and
an unaliased grid quadrature.  Skew symmetry is never built in; it is
checked.
"""
import numpy as np

from . import kernels
from .field import ScalarField, SpectralField, _lattice_to_grid
from .domain import mode_basis

TRILINEAR_CONSTANT = 9.0


def apply_A(field: SpectralField, nu: float) -> SpectralField:
    """Stokes operator ``A u = -nu P Laplacian u``, diagonal with eigenvalue ``nu kappa``."""
    b = field.basis
    return SpectralField._wrap(field.domain, field.cutoff,
                               nu * b.kappa[:, None] * field.coeffs, field.solenoidal)


def _check_same(*fields):
    first = fields[0]
    for f in fields[1:]:
        if f.domain != first.domain or f.cutoff != first.cutoff:
            raise ValueError("b_form arguments must share domain and cutoff")


def advect_lattice(u: SpectralField, v: SpectralField, cutoff_out=None, use_numba=None):
    """Lattice coefficients of ``(u . grad) v`` up to ``cutoff_out`` (default: the fields' cutoff)."""
    _check_same(u, v)
    if cutoff_out is None:
        cutoff_out = u.cutoff
    table = kernels.triad_table(u.dim, u.cutoff, cutoff_out)
    return kernels.convolve(u.lattice(), v.gradient_lattice(), table, use_numba)


def _torus_measure(domain):
    return float(np.prod(domain.torus_sides)) / domain.symmetry_factor


def b_form(u, v, w, method="convolution", n=None, use_numba=None) -> float:
    """Trilinear form ``b(u, v, w)``.

    ``method="convolution"`` sums the triad interactions exactly;
    ``method="quadrature"`` integrates on a grid with ``n >= 3*cutoff + 1``
    points per torus axis, which is exact for the triple product.
    """
    _check_same(u, v, w)
    if method == "convolution":
        adv = advect_lattice(u, v, use_numba=use_numba)
        total = np.sum((adv * np.conj(w.lattice())).real)
        return float(_torus_measure(u.domain) * total)
    if method == "quadrature":
        return _b_quadrature(u, v, w, n)
    raise ValueError(f"unknown method {method!r}")


def _b_quadrature(u, v, w, n=None):
    domain = u.domain
    dim = domain.dim
    m = u.cutoff
    if n is None:
        n = 3 * m + 2
    if n < 3 * m + 1:
        raise ValueError(f"quadrature grid needs at least {3 * m + 1} points per axis")
    if domain.flavor == "freeslip" and n % 2:
        n += 1
    # the full doubled torus is integrated, so no box trapezoid is needed
    uu = _lattice_to_grid(u.lattice(), domain, m, n, box_only=False)
    ww = _lattice_to_grid(w.lattice(), domain, m, n, box_only=False)
    grad = v.gradient_lattice().reshape(dim * dim, -1)
    gv = _lattice_to_grid(grad, domain, m, n, box_only=False).reshape(
        (dim, dim) + uu.shape[1:])
    integrand = np.einsum("i...,ij...,j...->...", uu, gv, ww)
    cell = float(np.prod(domain.torus_sides)) / float(n) ** dim
    return float(np.sum(integrand) * cell / domain.symmetry_factor)


def apply_B(u: SpectralField, use_numba=None) -> SpectralField:
    """``B(u) = P[(u . grad) u]`` truncated to the cutoff."""
    adv = advect_lattice(u, u, use_numba=use_numba)
    return SpectralField.from_lattice(u.domain, u.cutoff, adv, u.solenoidal)


def trilinear_bound_check(u, v, w, method="convolution"):
    """Compare ``|b(u, v, w)|`` with ``9 ||u||_V ||v||_V ||w||_V``.

    The constant 9 is the four-dimensional bound; for other dimensions the
    ratio is still reported but ``constant_applies`` is False.
    """
    lhs = abs(b_form(u, v, w, method))
    rhs = TRILINEAR_CONSTANT * u.v_norm() * v.v_norm() * w.v_norm()
    ratio = lhs / rhs if rhs > 0 else 0.0
    applies = u.dim == 4
    return {
        "lhs": lhs,
        "rhs": rhs,
        "ratio": ratio,
        "constant_applies": applies,
        "violation": bool(applies and ratio > 1.0),
    }


def stokes_solve(f: SpectralField, nu: float) -> SpectralField:
    """Solve ``A u = f`` (i.e. ``-nu Laplacian u + grad p = f``) modewise."""
    if not nu > 0:
        raise ValueError(f"viscosity must be positive, got {nu}")
    if f.solenoidal:
        g = f
    else:
        g = SpectralField.from_projection(f.domain, f.cutoff, f.coeffs, True)
    b = g.basis
    return SpectralField._wrap(g.domain, g.cutoff, g.coeffs / (nu * b.kappa[:, None]))


def stokes_shift_constant(domain, cutoff, nu):
    """Spectral constant ``C`` with ``||u||_{H^{m+2}} <= C ||f||_{H^m}`` for ``A u = f``.

    Per mode the squared ratio is
    ``(kappa^-2 + kappa^-1 + S_m) / (nu^2 S_m)`` with ``S_m = sum_{j<=m} kappa^j >= 1``,
    bounded by ``(1 + 1/lam + 1/lam^2) / nu^2`` with ``lam`` the spectral gap.
    """
    lam = mode_basis(domain, cutoff, True).lambda_min
    return float(np.sqrt(1.0 + 1.0 / lam + 1.0 / lam**2) / nu)


def stokes_regularity_check(f: SpectralField, nu: float, m: int):
    """Norm-shift report for the steady Stokes solve at regularity level ``m``."""
    u = stokes_solve(f, nu)
    C = stokes_shift_constant(f.domain, f.cutoff, nu)
    lhs = u.sobolev_norm(m + 2)
    rhs = C * f.sobolev_norm(m)
    hom_lhs = u.sobolev_norm(m + 2, homogeneous=True)
    hom_rhs = f.sobolev_norm(m, homogeneous=True) / nu
    residual = apply_A(u, nu) - f
    return {
        "m": m,
        "constant": C,
        "lhs": lhs,
        "rhs": rhs,
        "holds": bool(lhs <= rhs * (1 + 1e-12)),
        "homogeneous_lhs": hom_lhs,
        "homogeneous_rhs": hom_rhs,
        "inverse_residual": residual.l2_norm() / max(f.l2_norm(), 1e-300),
    }


def recover_pressure(u: SpectralField, use_numba=None) -> ScalarField:
    """Pressure of the nonlinear term: ``grad p = -(I - P)[(u . grad) u]``.

    The unprojected term ``F`` is kept up to twice the cutoff (no
    truncation) and ``p_k = i (q_k . F_k) / kappa_k``.
    """
    cutoff_out = 2 * u.cutoff
    adv = advect_lattice(u, u, cutoff_out, use_numba)
    q = mode_basis(u.domain, cutoff_out, False).lattice_q
    kappa = np.sum(q**2, axis=0)
    qF = np.sum(q * adv, axis=0)
    p = np.zeros_like(qF)
    nz = kappa > 0
    p[nz] = 1j * qF[nz] / kappa[nz]
    return ScalarField(u.domain, cutoff_out, p)


def nonlinear_gradient_part(u: SpectralField, use_numba=None):
    """Lattice coefficients of ``(I - P)[(u . grad) u]`` up to twice the cutoff."""
    cutoff_out = 2 * u.cutoff
    adv = advect_lattice(u, u, cutoff_out, use_numba)
    q = mode_basis(u.domain, cutoff_out, False).lattice_q
    kappa = np.sum(q**2, axis=0)
    out = np.zeros_like(adv)
    nz = kappa > 0
    out[:, nz] = q[:, nz] * (np.sum(q * adv, axis=0)[nz] / kappa[nz])
    out[:, ~nz] = adv[:, ~nz]
    return out
