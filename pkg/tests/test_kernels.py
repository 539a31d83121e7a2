import itertools

import numpy as np
import pytest

from nsgalerkin import _accel, kernels


def brute_force_triads(dim, cutoff_in, cutoff_out):
    pts = list(itertools.product(range(-cutoff_in, cutoff_in + 1), repeat=dim))
    return sum(1 for l in pts for m in pts
               if all(abs(a + b) <= cutoff_out for a, b in zip(l, m)))


@pytest.mark.parametrize("dim,cin,cout", [(2, 1, 1), (2, 2, 4), (3, 1, 1), (3, 2, 1), (4, 1, 1)])
def test_triad_count(dim, cin, cout):
    assert len(kernels.triad_table(dim, cin, cout)) == brute_force_triads(dim, cin, cout)


def test_triad_sums():
    t = kernels.triad_table(2, 2, 2)
    base_in, base_out = 5, 5

    def unflat(idx, base, c):
        return np.stack(np.unravel_index(idx, (base, base)), axis=-1) - c

    np.testing.assert_array_equal(unflat(t.l_index, base_in, 2) + unflat(t.m_index, base_in, 2),
                                  unflat(t.k_index, base_out, 2))


def _random_inputs(dim, cutoff, seed=0):
    rng = np.random.default_rng(seed)
    n = (2 * cutoff + 1) ** dim
    u = rng.standard_normal((dim, n)) + 1j * rng.standard_normal((dim, n))
    g = rng.standard_normal((dim, dim, n)) + 1j * rng.standard_normal((dim, dim, n))
    return u, g


@pytest.mark.parametrize("dim,cutoff,cout", [(2, 3, 3), (3, 2, 4), (4, 2, 2)])
def test_numba_matches_numpy(dim, cutoff, cout):
    table = kernels.triad_table(dim, cutoff, cout)
    u, g = _random_inputs(dim, cutoff)
    a = kernels.convolve(u, g, table, use_numba=False)
    b = kernels.convolve(u, g, table, use_numba=True)
    assert np.abs(a - b).max() <= 1e-12 * np.abs(a).max()


def test_against_dense_sum():
    dim, cutoff = 2, 1
    table = kernels.triad_table(dim, cutoff, 2)
    u, g = _random_inputs(dim, cutoff, 3)
    pts = list(itertools.product(range(-1, 2), repeat=2))
    expected = np.zeros((dim, 25), complex)
    for li, l in enumerate(pts):
        for mi, m in enumerate(pts):
            k = (l[0] + m[0] + 2) * 5 + (l[1] + m[1] + 2)
            for i in range(dim):
                expected[i, k] += sum(u[j, li] * g[j, i, mi] for j in range(dim))
    np.testing.assert_allclose(kernels.convolve(u, g, table, use_numba=False), expected,
                               atol=1e-13)


def test_env_flag(monkeypatch):
    for value, expected in [("0", False), ("off", False), ("1", True), ("", True)]:
        monkeypatch.setenv("NSGALERKIN_NUMBA", value)
        assert _accel._flag_enabled() is expected
