"""Divergence-free spectral fields: norms, projection, synthesis and quadrature."""
import json
from pathlib import Path

import numpy as np

from .domain import BoxDomain, mode_basis

DIV_TOL = 1e-12
SUPPORTED_P = (2, 4, 6, 12)


def leray_project(q, a):
    """Remove the component of ``a`` parallel to the wavevector ``q``.

    >>> leray_project([1.0, 1.0], [1.0, 0.0])
    array([ 0.5, -0.5])
    """
    q = np.asarray(q, dtype=float)
    a = np.asarray(a)
    kappa = float(q @ q)
    if kappa == 0.0:
        raise ValueError("the zero mode has no Leray projection")
    return a - (q @ a) / kappa * q


def project_coeffs(basis, coeffs):
    """Modewise Leray projection of an (n, dim) coefficient array."""
    coeffs = np.where(basis.active, coeffs, 0)
    if not basis.solenoidal:
        return coeffs
    qa = np.einsum("nd,nd->n", basis.q, coeffs)
    return coeffs - (qa / basis.kappa)[:, None] * basis.q


class SpectralField:
    """Real vector field spanned by the retained trigonometric modes.

    ``coeffs[n]`` is the amplitude vector of ``basis.k[n]``.  Instances are
    treated as immutable; arithmetic returns new fields.
    """

    __slots__ = ("domain", "cutoff", "coeffs", "solenoidal")

    def __init__(self, domain: BoxDomain, cutoff: int, coeffs, solenoidal=True,
                 validate=True):
        self.domain = domain
        self.cutoff = int(cutoff)
        self.solenoidal = bool(solenoidal)
        basis = self.basis
        if validate and basis.dtype == np.float64 and np.iscomplexobj(coeffs):
            if np.any(np.imag(coeffs) != 0):
                raise ValueError("free-slip amplitudes must be real")
            coeffs = np.real(coeffs)
        coeffs = np.array(coeffs, dtype=basis.dtype if validate else None, copy=True)
        if coeffs.shape != (len(basis), domain.dim):
            raise ValueError(
                f"coeffs must have shape {(len(basis), domain.dim)}, got {coeffs.shape}")
        if validate:
            self._validate(basis, coeffs)
        coeffs.setflags(write=False)
        self.coeffs = coeffs

    @staticmethod
    def _validate(basis, coeffs):
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("coefficients must be finite")
        if np.any(np.where(basis.active, 0, coeffs) != 0):
            raise ValueError("free-slip amplitude set on a component with k_i = 0")
        if basis.solenoidal:
            qa = np.abs(np.einsum("nd,nd->n", basis.q, coeffs))
            scale = np.sqrt(basis.kappa) * np.linalg.norm(coeffs, axis=1)
            bad = qa > DIV_TOL * scale + 1e-300
            if np.any(bad):
                k = tuple(basis.k[np.argmax(bad)])
                raise ValueError(f"field is not divergence-free at mode {k}")

    @classmethod
    def zeros(cls, domain, cutoff, solenoidal=True):
        basis = mode_basis(domain, cutoff, solenoidal)
        return cls(domain, cutoff, np.zeros((len(basis), domain.dim), basis.dtype),
                   solenoidal)

    @classmethod
    def from_projection(cls, domain, cutoff, coeffs, solenoidal=True):
        """Build a field from arbitrary amplitudes by Leray-projecting them."""
        basis = mode_basis(domain, cutoff, solenoidal)
        coeffs = np.asarray(coeffs, dtype=basis.dtype)
        return cls._wrap(domain, cutoff, project_coeffs(basis, coeffs), solenoidal)

    @classmethod
    def _wrap(cls, domain, cutoff, coeffs, solenoidal=True):
        return cls(domain, cutoff, coeffs, solenoidal, validate=False)

    @classmethod
    def from_lattice(cls, domain, cutoff, lattice, solenoidal=True, project=True):
        basis = mode_basis(domain, cutoff, solenoidal)
        coeffs = basis.from_lattice(lattice)
        if project:
            coeffs = project_coeffs(basis, coeffs)
        return cls._wrap(domain, cutoff, coeffs, solenoidal)

    @property
    def basis(self):
        return mode_basis(self.domain, self.cutoff, self.solenoidal)

    @property
    def dim(self):
        return self.domain.dim

    def modes(self):
        return self.basis.k

    def lattice(self):
        return self.basis.to_lattice(self.coeffs)

    def gradient_lattice(self):
        """Coefficients of ``d u_i / d x_j`` as an array indexed ``[j, i, :]``."""
        lat = self.lattice()
        iq = 1j * self.basis.lattice_q
        return iq[:, None, :] * lat[None, :, :]

    # arithmetic -----------------------------------------------------------
    def _check_compatible(self, other):
        if not isinstance(other, SpectralField):
            raise TypeError(f"expected SpectralField, got {type(other).__name__}")
        if (other.domain != self.domain or other.cutoff != self.cutoff
                or other.solenoidal != self.solenoidal):
            raise ValueError("fields live on different truncations")

    def __add__(self, other):
        self._check_compatible(other)
        return self._wrap(self.domain, self.cutoff, self.coeffs + other.coeffs,
                          self.solenoidal)

    def __sub__(self, other):
        self._check_compatible(other)
        return self._wrap(self.domain, self.cutoff, self.coeffs - other.coeffs,
                          self.solenoidal)

    def __mul__(self, scalar):
        if isinstance(scalar, SpectralField):
            return NotImplemented
        return self._wrap(self.domain, self.cutoff, self.coeffs * float(scalar),
                          self.solenoidal)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __repr__(self):
        return (f"SpectralField(dim={self.dim}, flavor={self.domain.flavor!r}, "
                f"cutoff={self.cutoff}, modes={len(self.basis)})")

    # norms ----------------------------------------------------------------
    def _weighted_sq(self, power):
        b = self.basis
        mag = np.sum(np.abs(self.coeffs) ** 2, axis=1)
        return float(np.sum(b.weight * b.kappa**power * mag))

    def l2_sq(self):
        return self._weighted_sq(0)

    def v_sq(self):
        return self._weighted_sq(1)

    def a_sq(self):
        return self._weighted_sq(2)

    def l2_norm(self):
        return np.sqrt(self.l2_sq())

    def v_norm(self):
        """``||grad u||_{L^2}``."""
        return np.sqrt(self.v_sq())

    def a_norm(self):
        """``||Delta u||_{L^2}``; the Stokes operator norm is ``nu`` times this."""
        return np.sqrt(self.a_sq())

    def sobolev_norm(self, s, homogeneous=False):
        """Spectral ``H^s`` norm: ``sum_k w_k |a_k|^2 sum_{j<=s} kappa^j``.

        With ``homogeneous=True`` only the top-order term ``kappa^s`` is kept.
        """
        b = self.basis
        mag = np.sum(np.abs(self.coeffs) ** 2, axis=1)
        if homogeneous:
            factor = b.kappa**s
        else:
            factor = sum(b.kappa**j for j in range(int(s) + 1))
        return float(np.sqrt(np.sum(b.weight * factor * mag)))

    def inner(self, other):
        """``(u, v)`` in L^2 of the box."""
        self._check_compatible(other)
        b = self.basis
        prod = np.sum((self.coeffs * np.conj(other.coeffs)).real, axis=1)
        return float(np.sum(b.weight * prod))

    def v_inner(self, other):
        """``((u, v)) = sum_i (D_i u, D_i v)``."""
        self._check_compatible(other)
        b = self.basis
        prod = np.sum((self.coeffs * np.conj(other.coeffs)).real, axis=1)
        return float(np.sum(b.weight * b.kappa * prod))

    def max_divergence(self):
        """Largest modewise ``|q . a| / (|q| |a|)``."""
        b = self.basis
        qa = np.abs(np.einsum("nd,nd->n", b.q, self.coeffs))
        scale = np.sqrt(b.kappa) * np.linalg.norm(self.coeffs, axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            rel = np.where(scale > 0, qa / scale, 0.0)
        return float(rel.max(initial=0.0))

    def with_cutoff(self, cutoff, solenoidal=None):
        """Spectral truncation or zero-padding to another cutoff.

        Converting a non-solenoidal field to a solenoidal truncation applies
        the Leray projection.
        """
        if solenoidal is None:
            solenoidal = self.solenoidal
        new = mode_basis(self.domain, cutoff, solenoidal)
        old = self.basis
        lookup = {tuple(k): n for n, k in enumerate(old.k)}
        coeffs = np.zeros((len(new), self.dim), new.dtype)
        for n, k in enumerate(new.k):
            j = lookup.get(tuple(k))
            if j is not None:
                coeffs[n] = self.coeffs[j]
        if solenoidal and not self.solenoidal:
            coeffs = project_coeffs(new, coeffs)
        return self._wrap(self.domain, cutoff, coeffs, solenoidal)

    # physical space -------------------------------------------------------
    def synthesize(self, n=None):
        return synthesize(self, n)

    # serialization --------------------------------------------------------
    def to_dict(self):
        d = self.domain.to_dict()
        d["cutoff"] = self.cutoff
        if not self.solenoidal:
            d["solenoidal"] = False
        d["modes"] = [
            {"k": [int(c) for c in k],
             "re": [float(x) for x in np.real(a)],
             "im": [float(x) for x in np.imag(a)]}
            for k, a in zip(self.basis.k, self.coeffs)
        ]
        return d

    @classmethod
    def from_dict(cls, data):
        domain = BoxDomain(int(data["dim"]), tuple(data["sides"]), data["flavor"])
        cutoff = int(data["cutoff"])
        solenoidal = bool(data.get("solenoidal", True))
        basis = mode_basis(domain, cutoff, solenoidal)
        lookup = {tuple(k): n for n, k in enumerate(basis.k)}
        coeffs = np.zeros((len(basis), domain.dim), np.complex128)
        for entry in data["modes"]:
            k = tuple(int(c) for c in entry["k"])
            if k not in lookup:
                raise ValueError(f"mode {k} is not retained at cutoff {cutoff}")
            coeffs[lookup[k]] = np.asarray(entry["re"]) + 1j * np.asarray(entry["im"])
        if domain.flavor == "freeslip":
            if np.any(coeffs.imag != 0):
                raise ValueError("free-slip amplitudes must be real")
            coeffs = coeffs.real
        return cls(domain, cutoff, coeffs, solenoidal)

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n")

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text()))


class ScalarField:
    """Scalar field held as full-lattice exponential coefficients (e.g. pressure)."""

    def __init__(self, domain, cutoff, lattice):
        self.domain = domain
        self.cutoff = int(cutoff)
        self.lattice = np.asarray(lattice, dtype=np.complex128)

    @property
    def lattice_q(self):
        return mode_basis(self.domain, self.cutoff, False).lattice_q

    def gradient_lattice(self):
        return 1j * self.lattice_q * self.lattice[None, :]

    def l2_norm(self):
        vol = float(np.prod(self.domain.torus_sides))
        return float(np.sqrt(vol * np.sum(np.abs(self.lattice) ** 2)
                             / self.domain.symmetry_factor))

    def synthesize(self, n=None):
        vals = _lattice_to_grid(self.lattice[None, :], self.domain, self.cutoff,
                                _grid_size(self.cutoff, n))
        return vals[0]


# ---------------------------------------------------------------------------
# synthesis / analysis on uniform tensor grids

def _grid_size(cutoff, n):
    if n is None:
        n = 4 * cutoff + 4
    n = int(n)
    if n < 2 * cutoff + 2:
        raise ValueError(
            f"grid of {n} points per axis is too coarse for cutoff {cutoff} "
            f"(need at least {2 * cutoff + 2})")
    return n


def _check_even(domain, n):
    if domain.flavor == "freeslip" and n % 2:
        raise ValueError("free-slip grids need an even number of torus points per axis")


def _box_slice(domain, n):
    if domain.flavor == "periodic":
        return (slice(None),) * domain.dim
    return (slice(0, n // 2 + 1),) * domain.dim


def _lattice_to_grid(lattice, domain, cutoff, n, box_only=True):
    ncomp = lattice.shape[0]
    dim = domain.dim
    _check_even(domain, n)
    m = 2 * cutoff + 1
    spectrum = np.zeros((ncomp,) + (n,) * dim, dtype=np.complex128)
    idx = np.arange(-cutoff, cutoff + 1) % n
    spectrum[np.ix_(range(ncomp), *([idx] * dim))] = lattice.reshape((ncomp,) + (m,) * dim)
    vals = np.fft.ifftn(spectrum, axes=tuple(range(1, dim + 1))).real * float(n) ** dim
    if box_only:
        vals = vals[(slice(None),) + _box_slice(domain, n)]
    return vals


def grid_coordinates(domain, n):
    """1-D coordinate arrays of the sampling grid (box points for free slip)."""
    coords = []
    for L_torus in domain.torus_sides:
        x = np.arange(n) * (L_torus / n)
        if domain.flavor == "freeslip":
            x = x[: n // 2 + 1]
        coords.append(x)
    return coords


def synthesize(field: SpectralField, n=None):
    """Velocity samples, shape (dim, n_1, ..., n_d).

    ``n`` counts points per axis of the computational torus (period ``L`` for
    periodic boxes, ``2 L`` for free slip); the free-slip samples are the
    ``n // 2 + 1`` points covering the closed box.
    """
    n = _grid_size(field.cutoff, n)
    return _lattice_to_grid(field.lattice(), field.domain, field.cutoff, n)


def _extend_to_torus(samples, domain):
    """Reflect free-slip box samples onto the doubled torus."""
    out = samples
    dim = domain.dim
    comps = []
    for i in range(samples.shape[0]):
        c = out[i]
        for ax in range(dim):
            h = c.shape[ax] - 1
            inner = np.take(c, np.arange(h - 1, 0, -1), axis=ax)
            sign = -1.0 if ax == i else 1.0
            c = np.concatenate([c, sign * inner], axis=ax)
        comps.append(c)
    return np.stack(comps)


def analyze(samples, domain, cutoff, solenoidal=True, project=False):
    """Coefficients of the field sampled by :func:`synthesize` (its inverse)."""
    samples = np.asarray(samples, dtype=float)
    dim = domain.dim
    if domain.flavor == "freeslip":
        samples = _extend_to_torus(samples, domain)
    n = samples.shape[1]
    _grid_size(cutoff, n)
    fourier = np.fft.fftn(samples, axes=tuple(range(1, dim + 1))) / float(n) ** dim
    idx = np.arange(-cutoff, cutoff + 1) % n
    lattice = fourier[np.ix_(range(samples.shape[0]), *([idx] * dim))].reshape(
        samples.shape[0], -1)
    return SpectralField.from_lattice(domain, cutoff, lattice, solenoidal, project=project)


def quadrature_weights(domain, n):
    """Tensor quadrature weights on the sampling grid of :func:`synthesize`."""
    ws = []
    for L, L_torus in zip(domain.sides, domain.torus_sides):
        h = L_torus / n
        if domain.flavor == "periodic":
            w = np.full(n, h)
        else:
            w = np.full(n // 2 + 1, h)
            w[0] = w[-1] = 0.5 * h
        ws.append(w)
    out = ws[0]
    for w in ws[1:]:
        out = np.multiply.outer(out, w)
    return out


def lp_norm_samples(samples, domain, n, p):
    """``(sum_i int |u_i|^p dx)^(1/p)`` by tensor trapezoid quadrature."""
    w = quadrature_weights(domain, n)
    total = float(np.sum(w * np.sum(np.abs(samples) ** p, axis=0)))
    return total ** (1.0 / p)


def lp_norm(field: SpectralField, p, n=None):
    """Quadrature ``L^p`` norm of a field.

    Vector ``L^p`` norms sum the component integrals,
    ``||u||_p^p = sum_i int |u_i|^p``.
    """
    if p not in SUPPORTED_P:
        raise ValueError(f"unsupported exponent p={p}; choose from {SUPPORTED_P}")
    n = _grid_size(field.cutoff, n)
    return lp_norm_samples(synthesize(field, n), field.domain, n, p)


def from_function(domain, cutoff, func, solenoidal=True, n=None):
    """Spectral coefficients of ``func(*coords)`` sampled on the synthesis grid.

    ``func`` receives ``dim`` broadcastable coordinate arrays and returns a
    sequence of ``dim`` component arrays.  The result is Leray-projected.
    """
    n = _grid_size(cutoff, n)
    coords = np.meshgrid(*grid_coordinates(domain, n), indexing="ij")
    vals = np.stack([np.broadcast_to(np.asarray(c, dtype=float), coords[0].shape)
                     for c in func(*coords)])
    return analyze(vals, domain, cutoff, solenoidal, project=True)
