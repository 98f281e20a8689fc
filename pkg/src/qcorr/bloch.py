"""Generalized Gell-Mann basis and the Bloch form of bipartite states.

Generators are normalized as ``Tr(mu_i mu_j) = 2 delta_ij`` and ordered
symmetric pairs, antisymmetric pairs, then diagonal ones. With that convention

    rho = (I (x) I + sum x_i mu_i (x) I + sum y_j I (x) nu_j
           + sum T_ij mu_i (x) nu_j) / (m n).
"""
from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, QcorrError
from .states import DensityMatrix

IMAG_TOL = 1e-9


@dataclass(frozen=True)
class GeneratorBasis:
    dim: int
    matrices: np.ndarray  # shape (d*d - 1, d, d)

    def __len__(self):
        return len(self.matrices)

    def __iter__(self):
        return iter(self.matrices)

    def __getitem__(self, i):
        return self.matrices[i]


def _build_generators(d):
    mats = []
    for j in range(d):
        for k in range(j + 1, d):
            g = np.zeros((d, d), dtype=np.complex128)
            g[j, k] = g[k, j] = 1.0
            mats.append(g)
    for j in range(d):
        for k in range(j + 1, d):
            g = np.zeros((d, d), dtype=np.complex128)
            g[j, k] = -1j
            g[k, j] = 1j
            mats.append(g)
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1.0
        diag[l] = -l
        mats.append(np.diag(np.sqrt(2 / (l * (l + 1))) * diag).astype(np.complex128))
    arr = np.array(mats).reshape(d * d - 1, d, d)
    arr.setflags(write=False)
    return GeneratorBasis(d, arr)


_cache: dict[int, GeneratorBasis] = {}
_cache_lock = threading.Lock()


def generators(d: int) -> GeneratorBasis:
    """Generalized Gell-Mann matrices of SU(d); cached per dimension."""
    if d < 2:
        raise DimensionError(f"generators need d >= 2, got {d}")
    basis = _cache.get(d)
    if basis is None:
        with _cache_lock:
            basis = _cache.get(d)
            if basis is None:
                basis = _cache[d] = _build_generators(d)
    return basis


@dataclass(frozen=True)
class BlochForm:
    dim_a: int
    dim_b: int
    x: np.ndarray
    y: np.ndarray
    T: np.ndarray


def decompose(rho: DensityMatrix) -> BlochForm:
    m, n = rho.dims
    mu, nu = generators(m).matrices, generators(n).matrices
    r = rho.tensor()
    rho_a = np.einsum("iaja->ij", r)
    rho_b = np.einsum("iaib->ab", r)
    # Tr(rho (mu (x) nu)) = sum r[i,a,j,b] mu[j,i] nu[b,a]
    tx = np.einsum("ij,kji->k", rho_a, mu)
    ty = np.einsum("ab,kba->k", rho_b, nu)
    tt = np.einsum("iajb,kji,lba->kl", r, mu, nu, optimize=True)
    imag = max(np.abs(tx.imag).max(), np.abs(ty.imag).max(), np.abs(tt.imag).max())
    if imag > IMAG_TOL:
        raise QcorrError(f"non-Hermitian input: imaginary Bloch residue {imag:.3g}")
    return BlochForm(m, n, m / 2 * tx.real, n / 2 * ty.real, m * n / 4 * tt.real)


def reconstruct(bf: BlochForm) -> DensityMatrix:
    m, n = bf.dim_a, bf.dim_b
    mu, nu = generators(m).matrices, generators(n).matrices
    if bf.x.shape != (m * m - 1,) or bf.y.shape != (n * n - 1,) or bf.T.shape != (m * m - 1, n * n - 1):
        raise DimensionError("Bloch vectors do not match the declared dimensions")
    op_a = np.einsum("k,kij->ij", bf.x, mu)
    op_b = np.einsum("k,kij->ij", bf.y, nu)
    corr = np.einsum("kl,kij,lab->iajb", bf.T, mu, nu).reshape(m * n, m * n)
    data = np.eye(m * n) + np.kron(op_a, np.eye(n)) + np.kron(np.eye(m), op_b) + corr
    return DensityMatrix(data / (m * n), m, n)


def gram(bf: BlochForm) -> np.ndarray:
    """G = x x^t + (2/n) T T^t, symmetrized."""
    g = np.outer(bf.x, bf.x) + 2 / bf.dim_b * bf.T @ bf.T.T
    return (g + g.T) / 2


def purity_from_bloch(bf: BlochForm) -> float:
    m, n = bf.dim_a, bf.dim_b
    return (
        1 + 2 / m * bf.x @ bf.x + 2 / n * bf.y @ bf.y + 4 / (m * n) * np.sum(bf.T**2)
    ) / (m * n)
