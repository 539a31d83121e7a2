"""Smallness-condition certificates and a numerical lower bound for the L^4 embedding constant."""
import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .domain import BoxDomain, mode_basis
from .field import SpectralField, analyze, lp_norm_samples, synthesize, _grid_size

H01_EMBEDDING_CONSTANT = 3.0
TRILINEAR_CONSTANT = 9.0

EXISTENCE = "existence_regular"
REGULARITY = "higher_regularity"


@dataclass(frozen=True)
class Certificate:
    kind: str
    nu: float
    u0_vnorm: float
    c1_estimate: Optional[float]
    threshold: float
    margin: float
    holds: bool
    chi: Optional[float]
    guaranteed_rates: Optional[dict]

    def to_dict(self):
        return asdict(self)


def _rates(nu, chi):
    if chi is None:
        return None
    return {"l2": 2.0 * nu * chi, "v": nu * chi}


def existence_certificate(nu, u0_vnorm, c1=H01_EMBEDDING_CONSTANT, chi=None) -> Certificate:
    """``nu - max(9, 3 c1) ||u0||_V > 0`` (strict)."""
    if not c1 > 0:
        raise ValueError(f"c1 must be positive, got {c1}")
    threshold = max(TRILINEAR_CONSTANT, 3.0 * c1) * u0_vnorm
    margin = nu - threshold
    return Certificate(EXISTENCE, float(nu), float(u0_vnorm), float(c1), float(threshold),
                       float(margin), bool(margin > 0), chi, _rates(nu, chi))


def regularity_certificate(nu, u0_vnorm, chi=None) -> Certificate:
    """``nu - 9 ||u0||_V >= 0`` (non-strict)."""
    threshold = TRILINEAR_CONSTANT * u0_vnorm
    margin = nu - threshold
    return Certificate(REGULARITY, float(nu), float(u0_vnorm), None, float(threshold),
                       float(margin), bool(margin >= 0), chi, _rates(nu, chi))


def check_existence_condition(nu, u0: SpectralField, c1=H01_EMBEDDING_CONSTANT) -> Certificate:
    return existence_certificate(nu, u0.v_norm(), c1, u0.domain.chi)


def check_regularity_condition(nu, u0: SpectralField) -> Certificate:
    return regularity_certificate(nu, u0.v_norm(), u0.domain.chi)


# ---------------------------------------------------------------------------
# C1 lower bound

def embedding_ratio(field: SpectralField, n=None) -> float:
    """``||v||_{L^4} / ||grad v||_{L^2}`` with exact quadrature for the quartic."""
    vn = field.v_norm()
    if vn == 0:
        raise ValueError("ratio undefined for a field with zero gradient")
    n = _grid_size(field.cutoff, n)
    return lp_norm_samples(synthesize(field, n), field.domain, n, 4) / vn


def trial_mode_ratio(domain: BoxDomain) -> float:
    """Closed-form ratio for ``v = sin(pi x_1 / L_1) e_1`` on a free-slip box.

    ``int sin^4 = 3 L / 8`` and ``int cos^2 = L / 2`` over ``(0, L)``.
    """
    L = domain.sides
    rest = float(np.prod(L[1:]))
    l4 = (3.0 * L[0] / 8.0 * rest) ** 0.25
    grad = (np.pi / L[0]) * math.sqrt(L[0] / 2.0 * rest)
    return l4 / grad


@dataclass
class C1Search:
    value: float
    per_cutoff: list
    best_field: SpectralField
    seed: int
    iterations: int
    restarts: int
    solenoidal: bool

    def to_dict(self):
        return {
            "c1_lower_bound": self.value,
            "per_cutoff": self.per_cutoff,
            "seed": self.seed,
            "iterations": self.iterations,
            "restarts": self.restarts,
            "solenoidal": self.solenoidal,
        }


class _QuarticObjective:
    """``F(y) = ||v||_4^4`` in coordinates where ``||grad v||^2 = |y|^2``."""

    def __init__(self, domain, cutoff, solenoidal):
        self.domain = domain
        self.cutoff = cutoff
        self.solenoidal = solenoidal
        self.basis = b = mode_basis(domain, cutoff, solenoidal)
        self.n = _grid_size(cutoff, None)
        self.scale = np.sqrt(b.kappa * b.weight)[:, None]
        self.mask = b.active

    def field(self, y):
        return SpectralField._wrap(self.domain, self.cutoff, y / self.scale, self.solenoidal)

    def value(self, y):
        vals = synthesize(self.field(y), self.n)
        return lp_norm_samples(vals, self.domain, self.n, 4) ** 4, vals

    def gradient(self, vals):
        g = analyze(vals**3, self.domain, self.cutoff, self.solenoidal, project=False).coeffs
        g = 4.0 * self.basis.weight[:, None] * g / self.scale
        return self.project(g)

    def project(self, y):
        y = np.where(self.mask, y, 0)
        if self.solenoidal:
            # the solenoidal constraint is modewise orthogonal to q, unaffected by scaling
            q = self.basis.q
            y = y - (np.einsum("nd,nd->n", q, y) / self.basis.kappa)[:, None] * q
        return y

    def random_point(self, rng):
        y = rng.standard_normal(self.scale.shape[:1] + (self.domain.dim,))
        if self.basis.dtype == np.complex128:
            y = y + 1j * rng.standard_normal(y.shape)
        y = self.project(y)
        return y / _norm(y)


def _norm(y):
    return float(np.sqrt(np.sum(np.abs(y) ** 2)))


def _real_dot(a, b):
    return float(np.sum((np.conj(a) * b).real))


def _ascend(obj, y, iterations):
    f, vals = obj.value(y)
    for _ in range(iterations):
        g = obj.gradient(vals)
        g = g - _real_dot(y, g) * y
        gn = _norm(g)
        if gn < 1e-14 * max(f, 1e-300):
            break
        d = g / gn
        eta = 1.0
        improved = False
        while eta > 1e-10:
            trial = math.cos(eta) * y + math.sin(eta) * d
            trial = trial / _norm(trial)
            f_new, vals_new = obj.value(trial)
            if f_new > f:
                y, f, vals = trial, f_new, vals_new
                improved = True
                break
            eta *= 0.5
        if not improved:
            break
    return y, f


def search_C1(domain: BoxDomain, cutoff: int, iterations=50, restarts=8, seed=0,
              solenoidal=False) -> C1Search:
    """Projected gradient ascent for ``max ||v||_4 / ||grad v||`` over truncated fields.

    Cutoffs ``1..cutoff`` are searched in turn and each level is seeded with
    the previous level's maximizer, so the per-cutoff values are
    nondecreasing.  Every value is the ratio of an explicit field and hence a
    lower bound on the embedding constant, never its true value.
    """
    if int(cutoff) != cutoff or cutoff < 1:
        raise ValueError(f"cutoff must be an integer >= 1, got {cutoff}")
    if iterations < 1 or restarts < 0:
        raise ValueError("iterations must be >= 1 and restarts >= 0")
    rng = np.random.default_rng(seed)
    best_field = None
    best_value = 0.0
    per_cutoff = []
    for m in range(1, int(cutoff) + 1):
        obj = _QuarticObjective(domain, m, solenoidal)
        starts = []
        if best_field is not None:
            y = best_field.with_cutoff(m).coeffs * obj.scale
            starts.append(y / _norm(y))
        starts.extend(obj.random_point(rng) for _ in range(restarts))
        for y0 in starts:
            y, f = _ascend(obj, y0, iterations)
            if not math.isfinite(f):
                raise FloatingPointError(
                    f"non-finite objective at cutoff {m} (|y|={_norm(y)!r})")
            field = obj.field(y)
            value = embedding_ratio(field)
            if value > best_value:
                best_value, best_field = value, field
        per_cutoff.append({"cutoff": m, "value": float(best_value)})
    return C1Search(float(best_value), per_cutoff, best_field, seed, iterations, restarts,
                    solenoidal)


def estimate_C1(domain, cutoff, iterations=50, restarts=8, seed=0, solenoidal=False) -> float:
    """Best ratio found by :func:`search_C1`; a lower bound on ``C_1``."""
    return search_C1(domain, cutoff, iterations, restarts, seed, solenoidal).value
