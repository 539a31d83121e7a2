"""Hot kernels: the triad convolution behind the advective nonlinear term.

Lattice arrays are flattened full lattices ``{-M..M}^d`` in C order.  A
triad table lists every pair ``(l, m)`` of input lattice points whose sum
``k = l + m`` lands inside the output lattice; the convolution

    out[i, k] = sum_{l + m = k} sum_j u[j, l] * grad_v[j, i, m]

is the Fourier image of ``(u . grad) v``.  Both implementations walk the
table in the same order, so results are deterministic run to run.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _accel


@dataclass(frozen=True, eq=False)
class TriadTable:
    """Interacting lattice triples ``k = l + m`` within the cutoffs."""

    dim: int
    cutoff_in: int
    cutoff_out: int
    l_index: np.ndarray
    m_index: np.ndarray
    k_index: np.ndarray

    def __len__(self):
        return int(self.k_index.shape[0])

    @property
    def n_in(self):
        return (2 * self.cutoff_in + 1) ** self.dim

    @property
    def n_out(self):
        return (2 * self.cutoff_out + 1) ** self.dim


@lru_cache(maxsize=16)
def triad_table(dim: int, cutoff_in: int, cutoff_out: int) -> TriadTable:
    a = np.arange(-cutoff_in, cutoff_in + 1)
    aa, bb = np.meshgrid(a, a, indexing="ij")
    keep = np.abs(aa + bb) <= cutoff_out
    a1, b1 = aa[keep], bb[keep]
    n1 = a1.size

    base_in = 2 * cutoff_in + 1
    base_out = 2 * cutoff_out + 1
    l_flat = np.zeros((1,), dtype=np.int64)
    m_flat = np.zeros((1,), dtype=np.int64)
    k_flat = np.zeros((1,), dtype=np.int64)
    for _ in range(dim):
        l_flat = (l_flat[:, None] * base_in + (a1 + cutoff_in)[None, :]).ravel()
        m_flat = (m_flat[:, None] * base_in + (b1 + cutoff_in)[None, :]).ravel()
        k_flat = (
            k_flat[:, None] * base_out + (a1 + b1 + cutoff_out)[None, :]
        ).ravel()
    assert l_flat.size == n1**dim
    for arr in (l_flat, m_flat, k_flat):
        arr.setflags(write=False)
    return TriadTable(dim, cutoff_in, cutoff_out, l_flat, m_flat, k_flat)


def convolve_numpy(u, grad_v, l_index, m_index, k_index, n_out):
    dim = u.shape[0]
    out = np.zeros((dim, n_out), dtype=np.complex128)
    ul = u[:, l_index]
    for i in range(dim):
        contrib = np.zeros(l_index.shape[0], dtype=np.complex128)
        for j in range(dim):
            contrib += ul[j] * grad_v[j, i, m_index]
        out[i].real = np.bincount(k_index, weights=contrib.real, minlength=n_out)
        out[i].imag = np.bincount(k_index, weights=contrib.imag, minlength=n_out)
    return out


def _convolve_loops(u, grad_v, l_index, m_index, k_index, n_out):
    dim = u.shape[0]
    out = np.zeros((dim, n_out), dtype=np.complex128)
    for t in range(l_index.shape[0]):
        li = l_index[t]
        mi = m_index[t]
        ki = k_index[t]
        for i in range(dim):
            acc = 0j
            for j in range(dim):
                acc += u[j, li] * grad_v[j, i, mi]
            out[i, ki] += acc
    return out


convolve_numba = _accel.njit(_convolve_loops)


def convolve(u, grad_v, table: TriadTable, use_numba=None):
    """Triad convolution ``(u . grad) v`` on the lattice described by ``table``.

    Parameters
    ----------
    u : complex array, shape (dim, n_in)
    grad_v : complex array, shape (dim, dim, n_in); ``grad_v[j, i]`` holds
        the coefficients of ``d v_i / d x_j``.
    """
    if use_numba is None:
        use_numba = _accel.USE_NUMBA
    u = np.ascontiguousarray(u, dtype=np.complex128)
    grad_v = np.ascontiguousarray(grad_v, dtype=np.complex128)
    fn = convolve_numba if (use_numba and _accel.HAVE_NUMBA) else convolve_numpy
    return fn(u, grad_v, table.l_index, table.m_index, table.k_index, table.n_out)
