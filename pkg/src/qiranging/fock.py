"""Brute-force Fock-basis fidelity, used to cross-check the Gaussian closed form.

The density matrix of a zero-mean Gaussian state is generated from its
covariance matrix through the multidimensional Hermite recursion of its
Bargmann representation, truncated at ``cutoff`` photons per mode.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .exceptions import DomainError, PrecisionError
from .gaussian import CLIP_HARD, GaussianState

DEFAULT_CUTOFF = 30
DEFAULT_MAX_DEFICIT = 1e-10


class FockFidelity(NamedTuple):
    fidelity: float
    trace_deficit: float


def _complex_covariance(cov: np.ndarray) -> np.ndarray:
    """Covariance of (a_1..a_n, a_1^dag..a_n^dag) from interleaved quadratures."""
    n = cov.shape[0] // 2
    t = np.zeros((2 * n, 2 * n), dtype=complex)
    for k in range(n):
        # a = (x + i p) / 2 with vacuum quadrature variance 1
        t[k, 2 * k] = 0.5
        t[k, 2 * k + 1] = 0.5j
        t[n + k, 2 * k] = 0.5
        t[n + k, 2 * k + 1] = -0.5j
    return t @ cov @ t.conj().T


def _hermite_table(a_mat: np.ndarray, prefactor, cutoff: int) -> np.ndarray:
    """Table G[k] of normalised Hermite coefficients for exp(z^T A z / 2).

    G[k + e_i] = (sum_j A_ij sqrt(k_j) G[k - e_j]) / sqrt(k_i + 1)
    """
    d = a_mat.shape[0]
    g = np.zeros((cutoff,) * d, dtype=a_mat.dtype)
    g[(0,) * d] = prefactor
    root = np.sqrt(np.arange(cutoff))
    # grow one axis at a time; axes before `ax` are pinned at zero
    for ax in reversed(range(d)):
        sub = g[(0,) * ax]
        for k in range(cutoff - 1):
            cur = sub[k]
            new = a_mat[ax, ax] * root[k] * sub[k - 1] if k else np.zeros_like(cur)
            for j in range(ax + 1, d):
                jj = j - ax - 1
                if a_mat[ax, j] == 0:
                    continue
                shifted = np.zeros_like(cur)
                lo = [slice(None)] * cur.ndim
                hi = [slice(None)] * cur.ndim
                lo[jj] = slice(1, None)
                hi[jj] = slice(None, -1)
                shape = [1] * cur.ndim
                shape[jj] = cutoff - 1
                shifted[tuple(lo)] = root[1:].reshape(shape) * cur[tuple(hi)]
                new = new + a_mat[ax, j] * shifted
            sub[k + 1] = new / root[k + 1]
    return g


def fock_density_matrix(state: GaussianState, cutoff: int = DEFAULT_CUTOFF) -> np.ndarray:
    """Truncated density matrix, row index = ket, in the product Fock basis."""
    if cutoff < 1:
        raise DomainError("cutoff must be a positive integer")
    if np.any(state.mean):
        raise DomainError("only zero-mean states are supported")
    n = state.num_modes
    sigma = _complex_covariance(state.cov)
    q = sigma + 0.5 * np.eye(2 * n)
    x = np.block([[np.zeros((n, n)), np.eye(n)], [np.eye(n), np.zeros((n, n))]])
    a_mat = x @ np.conj(np.eye(2 * n) - np.linalg.inv(q))
    prefactor = 1.0 / np.sqrt(np.linalg.det(q))
    if np.max(np.abs(a_mat.imag)) < 1e-14 and abs(prefactor.imag) < 1e-14:
        a_mat = a_mat.real.copy()
        prefactor = prefactor.real
    g = _hermite_table(a_mat, prefactor, cutoff)
    dim = cutoff**n
    rho = g.reshape(dim, dim)
    return 0.5 * (rho + rho.conj().T)


def _psd_sqrt(mat: np.ndarray) -> np.ndarray:
    w, u = np.linalg.eigh(mat)
    if w.min() < -CLIP_HARD:
        raise PrecisionError(f"truncated density matrix has eigenvalue {w.min():.3g}")
    w = np.sqrt(np.clip(w, 0.0, None))
    return (u * w) @ u.conj().T


def uhlmann_fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """``Tr sqrt(sqrt(rho) sigma sqrt(rho))`` by dense linear algebra.

    Both matrices are split into the connected blocks of their combined
    sparsity pattern first; the fidelity is additive over common blocks.
    """
    pattern = csr_matrix((np.abs(rho) + np.abs(sigma)) > 0)
    nblocks, labels = connected_components(pattern, directed=False)
    total = 0.0
    for b in range(nblocks):
        idx = np.flatnonzero(labels == b)
        rb = rho[np.ix_(idx, idx)]
        sb = sigma[np.ix_(idx, idx)]
        sq = _psd_sqrt(rb)
        ev = np.linalg.eigvalsh(sq @ sb @ sq)
        if ev.size and ev.min() < -CLIP_HARD:
            raise PrecisionError(f"fidelity operator has eigenvalue {ev.min():.3g}")
        total += float(np.sum(np.sqrt(np.clip(ev, 0.0, None))))
    return total


def fock_fidelity_oracle(
    a: GaussianState,
    b: GaussianState,
    cutoff: int = DEFAULT_CUTOFF,
    max_deficit: float = DEFAULT_MAX_DEFICIT,
) -> FockFidelity:
    """Fidelity of two Gaussian states from their truncated Fock density matrices.

    Raises PrecisionError when either truncated state misses more than
    ``max_deficit`` of its trace; the worse deficit is reported either way.
    """
    if a.num_modes != b.num_modes:
        raise DomainError(f"mode counts differ: {a.num_modes} vs {b.num_modes}")
    rho = fock_density_matrix(a, cutoff)
    sigma = fock_density_matrix(b, cutoff)
    deficit = max(1.0 - float(np.trace(rho).real), 1.0 - float(np.trace(sigma).real))
    if deficit > max_deficit:
        raise PrecisionError(
            f"cutoff {cutoff} leaves a trace deficit of {deficit:.3g} (threshold {max_deficit:.3g})"
        )
    return FockFidelity(uhlmann_fidelity(rho, sigma), deficit)
