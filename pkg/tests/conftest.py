import numpy as np
import pytest

from nsgalerkin.domain import BoxDomain, mode_basis
from nsgalerkin.field import SpectralField

ACCEPTANCE_LINES = []

TWO_PI = 2 * np.pi


def random_field(domain, cutoff, rng, solenoidal=True):
    basis = mode_basis(domain, cutoff, solenoidal)
    shape = (len(basis), domain.dim)
    c = rng.standard_normal(shape)
    if basis.dtype == np.complex128:
        c = c + 1j * rng.standard_normal(shape)
    return SpectralField.from_projection(domain, cutoff, c, solenoidal)


DOMAINS = [
    BoxDomain(2, (TWO_PI, TWO_PI)),
    BoxDomain(2, (1.0, 2.5), "freeslip"),
    BoxDomain(3, (1.0, 2.0, 3.0)),
    BoxDomain(3, (np.pi, 2.0, 1.5), "freeslip"),
    BoxDomain(4, (TWO_PI,) * 4),
    BoxDomain(4, (np.pi, np.pi, 2.0, 2.5), "freeslip"),
]


@pytest.fixture(params=DOMAINS, ids=lambda d: f"{d.dim}d-{d.flavor}")
def domain(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
