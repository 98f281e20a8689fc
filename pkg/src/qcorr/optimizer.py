"""Monte Carlo search over von Neumann measurements.

Trials are split into fixed-size blocks. Block ``j`` draws from a Philox
generator keyed by ``(seed, j)``, so the set of sampled measurements depends
only on the seed and the trial count, never on how blocks are scheduled over
worker threads.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .measures import (
    Measurement,
    _require_ordered,
    distances_from_vectors,
    eigenspaces,
    marginal,
    normalized_distance,
)
from .states import DensityMatrix

BLOCK_SIZE = 4096
REFINE_ROUNDS = 200
REFINE_ANGLE = 0.05
REFINE_PATIENCE = 20
_REFINE_BLOCK = 2**64 - 1  # stream index reserved for refinement
THREADS_ENV = "QCORR_THREADS"


@dataclass(frozen=True)
class SamplerConfig:
    trials: int
    seed: int = 0
    refine: bool = False
    bins: int = 60

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")


@dataclass(frozen=True)
class SampleReport:
    best_value: float
    best_measurement: Measurement
    trial_index: int
    histogram: list
    values: np.ndarray
    refined: bool = False


def stream(seed: int, block: int) -> np.random.Generator:
    """Counter-based generator for one block of trials."""
    return np.random.Generator(np.random.Philox(key=int(seed) + (int(block) << 64)))


def _haar_from_gaussians(g):
    """Unitaries from i.i.d. normals of shape (count, d, d, 2) (real, imaginary)."""
    z = (g[..., 0] + 1j * g[..., 1]) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=1, axis2=2)
    return q * (diag / np.abs(diag))[:, None, :]


def _haar_batch(d, count, rng):
    # one interleaved draw per trial, so fewer trials consume a prefix of the same stream
    return _haar_from_gaussians(rng.standard_normal((count, d, d, 2)))


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed d x d unitary (phase-corrected QR of a complex Ginibre matrix)."""
    return _haar_batch(d, 1, rng)[0]


def haar_unitaries(d: int, count: int, rng: np.random.Generator) -> np.ndarray:
    return _haar_batch(d, count, rng)


def histogram(values, bins: int) -> list[tuple[float, int]]:
    """Equal-width bins over [min, max]; returns (bin_lower, count) pairs."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("histogram of an empty sample")
    if bins < 1:
        raise ValueError("bins must be >= 1")
    lo, hi = float(values.min()), float(values.max())
    if hi == lo:
        return [(lo, int(values.size))] + [(lo, 0)] * (bins - 1)
    counts, edges = np.histogram(values, bins=bins, range=(lo, hi))
    return [(float(e), int(c)) for e, c in zip(edges[:-1], counts)]


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        return max(1, int(raw))
    return os.cpu_count() or 1


def _block_bounds(trials):
    return [(start, min(start + BLOCK_SIZE, trials)) for start in range(0, trials, BLOCK_SIZE)]


def _free_bases(rho):
    """Orthonormal bases of the eigenspaces of rho_A."""
    return [basis for _, basis in eigenspaces(marginal(rho))]


def _draw(bases, m, count, rng):
    """Batch of unitaries whose columns are Haar-rotated bases of each given subspace."""
    sizes = [b.shape[1] for b in bases]
    free = [k for k in sizes if k > 1]
    # all normals of a trial are contiguous in the stream
    g = rng.standard_normal((count, sum(2 * k * k for k in free))) if free else None
    out = np.empty((count, m, m), dtype=np.complex128)
    col = offset = 0
    for basis, k in zip(bases, sizes):
        if k == 1:
            out[:, :, col] = basis[:, 0]
        else:
            block = g[:, offset:offset + 2 * k * k].reshape(count, k, k, 2)
            out[:, :, col:col + k] = np.einsum("ij,bjk->bik", basis, _haar_from_gaussians(block))
            offset += 2 * k * k
        col += k
    return out


def _run(rho, cfg, bases, maximize):
    m = rho.dim_a
    blocks = _block_bounds(cfg.trials)

    def job(index):
        start, stop = blocks[index]
        us = _draw(bases, m, stop - start, stream(cfg.seed, index))
        vals = distances_from_vectors(rho, us)
        k = int(np.argmax(vals) if maximize else np.argmin(vals))
        return vals, us[k]

    workers = min(worker_count(), len(blocks))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, range(len(blocks))))
    else:
        results = [job(i) for i in range(len(blocks))]

    values = np.concatenate([r[0] for r in results])
    # argmin/argmax return the first hit, so ties go to the lowest trial index
    best = int(np.argmax(values) if maximize else np.argmin(values))
    best_u = results[best // BLOCK_SIZE][1]
    if cfg.refine:
        best_u = _refine(rho, best_u, bases, cfg.seed, maximize)
    meas = Measurement.from_vectors(best_u)
    return SampleReport(
        best_value=normalized_distance(rho, meas),
        best_measurement=meas,
        trial_index=best,
        histogram=histogram(values, cfg.bins),
        values=values,
        refined=cfg.refine,
    )


def _random_hermitian(k, rng):
    a = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
    h = (a + a.conj().T) / 2
    return h / np.linalg.norm(h)


def _expi(h, angle):
    w, v = np.linalg.eigh(h)
    return (v * np.exp(1j * angle * w)) @ v.conj().T


def _refine(rho, u, bases, seed, maximize):
    """Random small rotations around the best candidate, kept when they improve it."""
    rng = stream(seed, _REFINE_BLOCK)
    m = rho.dim_a
    sign = -1.0 if maximize else 1.0
    best = sign * distances_from_vectors(rho, u[None])[0]
    angle = REFINE_ANGLE
    stale = 0
    # each rotation acts inside one eigenspace (all of C^m when unconstrained)
    proj_bases = [b for b in bases if b.shape[1] > 1]
    if not proj_bases:
        return u
    for _ in range(REFINE_ROUNDS):
        rot = np.eye(m, dtype=np.complex128)
        for basis in proj_bases:
            k = basis.shape[1]
            local = _expi(_random_hermitian(k, rng), angle)
            rot = rot + basis @ (local - np.eye(k)) @ basis.conj().T
        cand = rot @ u
        val = sign * distances_from_vectors(rho, cand[None])[0]
        if val < best:
            u, best, stale = cand, val, 0
        else:
            stale += 1
            if stale >= REFINE_PATIENCE:
                angle /= 2
                stale = 0
    return u


def sample_gd(rho: DensityMatrix, cfg: SamplerConfig) -> SampleReport:
    """Minimum normalized distance over Haar-random measurements on A."""
    _require_ordered(rho)
    m = rho.dim_a
    return _run(rho, cfg, [np.eye(m, dtype=np.complex128)], maximize=False)


def sample_min(rho: DensityMatrix, cfg: SamplerConfig) -> SampleReport:
    """Maximum normalized distance over measurements that leave rho_A unchanged.

    Each trial rotates an orthonormal basis of every eigenspace of rho_A by an
    independent Haar unitary, so the pinching never disturbs the marginal.
    """
    _require_ordered(rho)
    return _run(rho, cfg, _free_bases(rho), maximize=True)
