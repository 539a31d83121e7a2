"""Box domains and the divergence-free trigonometric mode basis.

Two boundary flavors are supported:

``periodic``
    The torus ``prod [0, L_i)``.  A real field is stored on the half lattice
    (first nonzero index positive) as ``u(x) = sum_k Re(a_k exp(i q_k . x))``
    with complex amplitude vectors ``a_k`` and ``q_k = 2 pi k / L``.

``freeslip``
    The box ``prod [0, L_i]`` with impermeable, stress-free walls.  Component
    ``i`` of mode ``k`` (all ``k_j >= 0``) is
    ``a_{k,i} sin(q_i x_i) prod_{j != i} cos(q_j x_j)`` with ``q = pi k / L``
    and real ``a_k``.  Such a field is the restriction of a field on the
    doubled torus ``prod [0, 2 L_i)`` that is odd in ``x_i`` for component
    ``i`` and even in the other coordinates; all lattice work happens on
    that doubled torus.

Norms are un-normalized integrals over the box, so every mode carries a
weight ``int |basis|^2 dx``: half the box volume for periodic modes and
``vol * 2**-nnz(k)`` for free-slip modes.
"""
import itertools
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

FLAVORS = ("periodic", "freeslip")


@dataclass(frozen=True)
class BoxDomain:
    dim: int
    sides: tuple
    flavor: str = "periodic"

    def __post_init__(self):
        if self.dim not in (2, 3, 4):
            raise ValueError(f"dim must be 2, 3 or 4, got {self.dim}")
        sides = tuple(float(s) for s in self.sides)
        object.__setattr__(self, "sides", sides)
        if len(sides) != self.dim:
            raise ValueError(f"expected {self.dim} side lengths, got {len(sides)}")
        if not all(np.isfinite(s) and s > 0 for s in sides):
            raise ValueError(f"side lengths must be positive and finite: {sides}")
        if self.flavor not in FLAVORS:
            raise ValueError(f"flavor must be one of {FLAVORS}, got {self.flavor!r}")

    @classmethod
    def cube(cls, dim, side=2 * np.pi, flavor="periodic"):
        return cls(dim, (side,) * dim, flavor)

    @property
    def volume(self) -> float:
        return float(np.prod(self.sides))

    @property
    def chi(self) -> float:
        """``sum_i pi^2 / L_i^2`` for the bounding box."""
        return float(sum(np.pi**2 / L**2 for L in self.sides))

    @property
    def torus_sides(self) -> tuple:
        """Periods of the computational torus (doubled box for free slip)."""
        if self.flavor == "periodic":
            return self.sides
        return tuple(2.0 * L for L in self.sides)

    @property
    def symmetry_factor(self) -> int:
        """Ratio of computational-torus integrals to box integrals."""
        return 1 if self.flavor == "periodic" else 2**self.dim

    def scale(self) -> np.ndarray:
        """Wavenumber per unit lattice index along each axis."""
        return 2.0 * np.pi / np.asarray(self.torus_sides)

    def to_dict(self):
        return {"dim": self.dim, "sides": list(self.sides), "flavor": self.flavor}


def chi(domain: BoxDomain) -> float:
    return domain.chi


@dataclass(frozen=True)
class ModeIndex:
    k: tuple
    kappa: float


def _lattice_points(domain: BoxDomain, cutoff: int, solenoidal: bool):
    dim = domain.dim
    if domain.flavor == "periodic":
        for k in itertools.product(range(-cutoff, cutoff + 1), repeat=dim):
            nz = [c for c in k if c != 0]
            if nz and nz[0] > 0:
                yield k
    else:
        # a free-slip mode with a single nonzero index cannot carry a
        # solenoidal field: its only live component is parallel to q
        min_nnz = 2 if solenoidal else 1
        for k in itertools.product(range(0, cutoff + 1), repeat=dim):
            if sum(c != 0 for c in k) >= min_nnz:
                yield k


def enumerate_modes(domain: BoxDomain, cutoff: int, solenoidal: bool = True):
    """Retained modes with ``|k_i| <= cutoff``, zero mode excluded, lexicographic.

    Periodic domains return one representative per conjugate pair.
    """
    basis = mode_basis(domain, cutoff, solenoidal)
    return [ModeIndex(tuple(int(c) for c in k), float(kap))
            for k, kap in zip(basis.k, basis.kappa)]


class ModeBasis:
    """Cached index tables for one (domain, cutoff, solenoidal) truncation."""

    def __init__(self, domain: BoxDomain, cutoff: int, solenoidal: bool = True):
        if int(cutoff) != cutoff or cutoff < 1:
            raise ValueError(f"cutoff must be an integer >= 1, got {cutoff}")
        self.domain = domain
        self.cutoff = int(cutoff)
        self.solenoidal = bool(solenoidal)
        dim = domain.dim

        k = np.array(list(_lattice_points(domain, self.cutoff, self.solenoidal)),
                     dtype=np.int64).reshape(-1, dim)
        self.k = k
        self.q = k * domain.scale()[None, :]
        self.kappa = np.sum(self.q**2, axis=1)
        nnz = np.count_nonzero(k, axis=1)
        if domain.flavor == "periodic":
            self.weight = np.full(len(k), 0.5 * domain.volume)
            self.active = np.ones_like(k, dtype=bool)
            self.dtype = np.complex128
        else:
            self.weight = domain.volume * 2.0 ** (-nnz)
            self.active = k != 0
            self.dtype = np.float64
        for arr in (self.k, self.q, self.kappa, self.weight, self.active):
            arr.setflags(write=False)

        self.lattice_shape = (2 * self.cutoff + 1,) * dim
        self.plus_index = self.flat_index(k)
        if domain.flavor == "periodic":
            self.minus_index = self.flat_index(-k)
        else:
            self.patterns = [np.array(s) for s in itertools.product((1, -1), repeat=dim)]
            self.pattern_index = [self.flat_index(k * s[None, :]) for s in self.patterns]
            self.analysis_factor = 1j * 2.0**nnz

    def __len__(self):
        return int(self.k.shape[0])

    @property
    def n_lattice(self) -> int:
        return int(np.prod(self.lattice_shape))

    @property
    def lambda_min(self) -> float:
        return float(self.kappa.min())

    @property
    def kappa_max(self) -> float:
        return float(self.kappa.max())

    def flat_index(self, k):
        k = np.asarray(k).reshape(-1, self.domain.dim)
        return np.ravel_multi_index(tuple((k + self.cutoff).T), self.lattice_shape)

    @cached_property
    def lattice_k(self) -> np.ndarray:
        """Integer lattice indices, shape (dim, n_lattice)."""
        axes = [np.arange(-self.cutoff, self.cutoff + 1)] * self.domain.dim
        grids = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in grids])

    @cached_property
    def lattice_q(self) -> np.ndarray:
        """Scaled wavevectors on the lattice, shape (dim, n_lattice)."""
        return self.lattice_k * self.domain.scale()[:, None]

    def to_lattice(self, coeffs: np.ndarray) -> np.ndarray:
        """Mode amplitudes (n, dim) -> full-lattice exponential coefficients (dim, n_lattice)."""
        dim = self.domain.dim
        out = np.zeros((dim, self.n_lattice), dtype=np.complex128)
        if self.domain.flavor == "periodic":
            out[:, self.plus_index] += 0.5 * coeffs.T
            out[:, self.minus_index] += 0.5 * np.conj(coeffs.T)
        else:
            scale = -0.5j / 2.0 ** (dim - 1)
            for s, idx in zip(self.patterns, self.pattern_index):
                out[:, idx] += (scale * s[:, None]) * coeffs.T
        return out

    def from_lattice(self, lattice: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`to_lattice` for lattices with the field's symmetry."""
        if self.domain.flavor == "periodic":
            return 2.0 * lattice[:, self.plus_index].T
        a = (lattice[:, self.plus_index].T * self.analysis_factor[:, None]).real
        return np.where(self.active, a, 0.0)


@lru_cache(maxsize=64)
def mode_basis(domain: BoxDomain, cutoff: int, solenoidal: bool = True) -> ModeBasis:
    return ModeBasis(domain, cutoff, solenoidal)
