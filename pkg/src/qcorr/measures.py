"""Geometric discord (GD) and measurement-induced nonlocality (MIN).

Both measures are normalized by ``m / (m - 1)`` so that their maximum is 1:

    GD(rho)  = m/(m-1) * min  ||rho - Pi(rho)||^2   over von Neumann measurements on A
    MIN(rho) = m/(m-1) * max  ||rho - Pi(rho)||^2   over those that leave rho_A unchanged

The module provides the eigenvalue bounds built from the Bloch form, exact
values in the cases where they are attainable, and the exact optimizer for a
marginal with a single two-fold degenerate eigenvalue.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from . import bloch
from .errors import (
    DegeneracyError,
    DimensionError,
    InvalidMeasurementError,
    UnsupportedDimensionError,
)
from .states import DensityMatrix, Family, StateSpec

MEAS_TOL = 1e-10
CANDIDATE_TOL = 1e-8
DEGENERACY_TOL = 1e-9
MARGINAL_TOL = 1e-9

PAULI = np.array(
    [[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=np.complex128
)


def projector_defects(projectors) -> float:
    """Largest violation of Hermiticity, idempotence, rank one, orthogonality and completeness."""
    p = np.asarray(projectors, dtype=np.complex128)
    d = p.shape[-1]
    worst = 0.0
    for k, pk in enumerate(p):
        worst = max(worst, np.abs(pk - pk.conj().T).max())
        worst = max(worst, np.abs(pk @ pk - pk).max())
        worst = max(worst, abs(np.trace(pk) - 1))
        for pj in p[k + 1:]:
            worst = max(worst, np.abs(pk @ pj).max())
    worst = max(worst, np.abs(p.sum(axis=0) - np.eye(d)).max())
    return float(worst)


@dataclass(frozen=True)
class Measurement:
    """A complete set of m orthogonal rank-1 projectors on subsystem A."""

    projectors: np.ndarray  # shape (m, m, m)

    def __post_init__(self):
        p = np.array(self.projectors, dtype=np.complex128)
        if p.ndim != 3 or p.shape[0] != p.shape[1] or p.shape[1] != p.shape[2]:
            raise InvalidMeasurementError(f"expected m projectors of size m x m, got shape {p.shape}")
        defect = projector_defects(p)
        if defect > MEAS_TOL:
            raise InvalidMeasurementError(f"projector defect {defect:.3g} exceeds {MEAS_TOL}")
        p.setflags(write=False)
        object.__setattr__(self, "projectors", p)

    @property
    def dim(self) -> int:
        return self.projectors.shape[0]

    @classmethod
    def from_vectors(cls, vectors) -> "Measurement":
        """Build from the columns of a unitary (one basis vector per column)."""
        v = np.asarray(vectors, dtype=np.complex128)
        return cls(np.einsum("ik,jk->kij", v, v.conj()))

    @classmethod
    def computational(cls, m: int) -> "Measurement":
        return cls.from_vectors(np.eye(m))

    def vectors(self) -> np.ndarray:
        """Unit vectors spanning each projector, as columns (phases arbitrary)."""
        cols = []
        for p in self.projectors:
            w, v = np.linalg.eigh(p)
            cols.append(v[:, -1])
        return np.array(cols).T

    def same_as(self, other: "Measurement", tol: float = 1e-9) -> bool:
        """Equality of the projector sets, ignoring order."""
        if other.dim != self.dim:
            return False
        remaining = list(other.projectors)
        for p in self.projectors:
            for i, q in enumerate(remaining):
                if np.abs(p - q).max() < tol:
                    del remaining[i]
                    break
            else:
                return False
        return True


class Kind(enum.Enum):
    EXACT = "exact"
    LOWER_BOUND = "lower-bound"
    UPPER_BOUND = "upper-bound"
    SAMPLED = "sampled"


@dataclass(frozen=True)
class MeasureEstimate:
    value: float
    kind: Kind
    witness: Optional[Measurement] = None

    @property
    def reported_value(self) -> float:
        # clamping is for display only; comparisons use `value`
        return min(max(self.value, 0.0), 1.0)


def _require_ordered(rho):
    if rho.dim_a > rho.dim_b:
        raise DimensionError(
            f"measures are defined here for dim_a <= dim_b, got ({rho.dim_a}, {rho.dim_b})"
        )


def apply_measurement(rho: DensityMatrix, meas: Measurement) -> np.ndarray:
    """sum_k (P_k (x) I) rho (P_k (x) I)."""
    if meas.dim != rho.dim_a:
        raise DimensionError(f"measurement on C^{meas.dim} applied to subsystem of dim {rho.dim_a}")
    eye = np.eye(rho.dim_b)
    out = np.zeros_like(rho.data)
    for p in meas.projectors:
        big = np.kron(p, eye)
        out += big @ rho.data @ big
    return out


def normalized_distance(rho: DensityMatrix, meas: Measurement) -> float:
    m = rho.dim_a
    diff = rho.data - apply_measurement(rho, meas)
    return m / (m - 1) * float(np.real(np.vdot(diff, diff)))


def _sorted_eigh(mat):
    w, v = np.linalg.eigh(mat)
    order = np.argsort(w)[::-1]
    return w[order], v[:, order]


def gd_lower_bound(rho: DensityMatrix) -> MeasureEstimate:
    _require_ordered(rho)
    m, n = rho.dims
    bf = bloch.decompose(rho)
    lam = np.sort(np.linalg.eigvalsh(bloch.gram(bf)))[::-1]
    inner = bf.x @ bf.x + 2 / n * np.sum(bf.T**2) - lam[: m - 1].sum()
    return MeasureEstimate(2 / (m * (m - 1) * n) * float(inner), Kind.LOWER_BOUND)


def min_upper_bound(rho: DensityMatrix) -> MeasureEstimate:
    _require_ordered(rho)
    m, n = rho.dims
    bf = bloch.decompose(rho)
    lam = np.sort(np.linalg.eigvalsh(bf.T @ bf.T.T))[::-1]
    value = 4 / (m * (m - 1) * n * n) * lam[: m * m - m].sum()
    return MeasureEstimate(float(value), Kind.UPPER_BOUND)


def qubit_measurement(direction) -> Measurement:
    """Pi_{1,2} = (I +- e.sigma) / 2 for a unit vector e."""
    e = np.asarray(direction, dtype=float)
    e = e / np.linalg.norm(e)
    s = np.einsum("k,kij->ij", e, PAULI)
    return Measurement(np.array([(np.eye(2) + s) / 2, (np.eye(2) - s) / 2]))


def gd_exact_2xn(rho: DensityMatrix) -> MeasureEstimate:
    """GD of a 2 (x) n state; the bound is attained by the top eigenvector of G."""
    if rho.dim_a != 2:
        raise UnsupportedDimensionError(f"gd_exact_2xn needs dim_a = 2, got {rho.dim_a}")
    bound = gd_lower_bound(rho)
    _, vecs = _sorted_eigh(bloch.gram(bloch.decompose(rho)))
    return MeasureEstimate(bound.value, Kind.EXACT, qubit_measurement(vecs[:, 0]))


def _qutrit_candidates(e1, e2):
    """Pi_{1,2} = I/3 + (+-e1 + e2/sqrt3).mu/2, Pi_3 = I - Pi_1 - Pi_2, batched over rows of e1, e2."""
    mu = bloch.generators(3).matrices
    e1, e2 = np.atleast_2d(e1), np.atleast_2d(e2)
    p1 = np.eye(3) / 3 + 0.5 * np.einsum("gk,kij->gij", e1 + e2 / math.sqrt(3), mu)
    p2 = np.eye(3) / 3 + 0.5 * np.einsum("gk,kij->gij", -e1 + e2 / math.sqrt(3), mu)
    return np.stack([p1, p2, np.eye(3) - p1 - p2], axis=1)


def _squared_defects(projs):
    """Summed squared idempotence and orthogonality defects, per batch entry."""
    sq = projs @ projs - projs
    total = np.sum(np.abs(sq) ** 2, axis=(1, 2, 3))
    for j, k in ((0, 1), (0, 2), (1, 2)):
        total = total + np.sum(np.abs(projs[:, j] @ projs[:, k]) ** 2, axis=(1, 2))
    return total


def gd_candidate_3x3(rho: DensityMatrix) -> Optional[MeasureEstimate]:
    """Try the measurement built from the top two eigenvectors of G.

    If those operators are legitimate projectors the lower bound is attained
    and the result is exact; otherwise ``None``. When the top two eigenvalues
    of G coincide, the eigenvectors are only fixed up to a rotation of their
    plane, and the rotation is searched as well.
    """
    if rho.dim_a != 3:
        raise UnsupportedDimensionError(f"gd_candidate_3x3 needs dim_a = 3, got {rho.dim_a}")
    _require_ordered(rho)
    lam, vecs = _sorted_eigh(bloch.gram(bloch.decompose(rho)))
    e1, e2 = vecs[:, 0], vecs[:, 1]
    projs = _qutrit_candidates(e1, e2)[0]
    if projector_defects(projs) > CANDIDATE_TOL:
        scale = max(1.0, abs(lam[0]))
        top_pair = abs(lam[0] - lam[1]) <= DEGENERACY_TOL * scale
        if not (top_pair and lam[1] - lam[2] > DEGENERACY_TOL * scale):
            return None
        projs = _search_plane_rotation(e1, e2)
        if projs is None:
            return None
    # snap to exact rank-1 projectors before building the witness
    cols = [np.linalg.eigh((p + p.conj().T) / 2)[1][:, -1] for p in projs]
    witness = Measurement.from_vectors(np.array(cols).T)
    return MeasureEstimate(gd_lower_bound(rho).value, Kind.EXACT, witness)


def _search_plane_rotation(e1, e2):
    """Rotate (e1, e2) within their plane looking for a legitimate candidate."""
    grid = np.linspace(0, 2 * math.pi, 721)[:-1]
    step = grid[1] - grid[0]
    for flip in (1, -1):
        def rotated(phi):
            c, s = np.cos(phi)[:, None], np.sin(phi)[:, None]
            return _qutrit_candidates(c * e1 + s * e2, flip * (c * e2 - s * e1))

        start = grid[int(np.argmin(_squared_defects(rotated(grid))))]
        # optimize the offset so the tolerance is not scaled by |phi|
        res = minimize_scalar(
            lambda d: _squared_defects(rotated(np.array([start + d])))[0],
            bounds=(-step, step),
            method="bounded",
            options={"xatol": 1e-14},
        )
        projs = rotated(np.array([start + res.x]))[0]
        if projector_defects(projs) <= CANDIDATE_TOL:
            return projs
    return None


def marginal(rho: DensityMatrix) -> np.ndarray:
    """Partial trace over B."""
    return np.einsum("iaja->ij", rho.tensor())


def marginal_b(rho: DensityMatrix) -> np.ndarray:
    return np.einsum("iaib->ab", rho.tensor())


def pinch(meas: Measurement, mat) -> np.ndarray:
    return sum(p @ mat @ p for p in meas.projectors)


def preserves_marginal(meas: Measurement, rho_a, tol: float = MARGINAL_TOL) -> bool:
    rho_a = np.asarray(rho_a)
    if rho_a.shape != (meas.dim, meas.dim):
        raise DimensionError("marginal and measurement dimensions differ")
    return bool(np.abs(pinch(meas, rho_a) - rho_a).max() <= tol)


def eigenspaces(rho_a, tol: float = DEGENERACY_TOL) -> list[tuple[float, np.ndarray]]:
    """Group the eigenvectors of a Hermitian matrix into degenerate clusters.

    Returns ``(eigenvalue, basis)`` pairs in ascending order; ``basis`` holds
    orthonormal columns. Eigenvalues closer than ``tol`` times the spectral
    scale count as degenerate.
    """
    w, v = np.linalg.eigh(np.asarray(rho_a))
    scale = max(1.0, float(np.abs(w).max()))
    groups = [[0]]
    for k in range(1, len(w)):
        if w[k] - w[groups[-1][-1]] <= tol * scale:
            groups[-1].append(k)
        else:
            groups.append([k])
    return [(float(w[g].mean()), v[:, g]) for g in groups]


def min_exact_nondegenerate(rho: DensityMatrix) -> MeasureEstimate:
    """MIN when rho_A has a simple spectrum: its eigenbasis is the only admissible measurement."""
    _require_ordered(rho)
    spaces = eigenspaces(marginal(rho))
    if any(basis.shape[1] > 1 for _, basis in spaces):
        raise DegeneracyError(
            "marginal on A is degenerate; use min_exact_2d_block or min_upper_bound"
        )
    meas = Measurement.from_vectors(np.hstack([basis for _, basis in spaces]))
    return MeasureEstimate(normalized_distance(rho, meas), Kind.EXACT, meas)


def block_measurement(direction, block_basis, fixed_vectors=None) -> Measurement:
    """Measurement made of (I +- x.sigma)/2 inside a 2-d subspace plus fixed rank-1 projectors.

    ``block_basis`` is an m x 2 array of orthonormal columns, ``fixed_vectors``
    an m x (m - 2) array of the remaining basis vectors.
    """
    v = np.asarray(block_basis, dtype=np.complex128)
    x = np.asarray(direction, dtype=float)
    x = x / np.linalg.norm(x)
    s = np.einsum("k,kij->ij", x, PAULI)
    projs = [v @ ((np.eye(2) + s) / 2) @ v.conj().T, v @ ((np.eye(2) - s) / 2) @ v.conj().T]
    if fixed_vectors is not None:
        for col in np.asarray(fixed_vectors, dtype=np.complex128).T:
            projs.append(np.outer(col, col.conj()))
    return Measurement(np.array(projs))


def block_quadratic_form(rho: DensityMatrix, block_basis, fixed_vectors=None) -> np.ndarray:
    """Symmetric M with normalized_distance(x) = x^t M x for unit x.

    The distance is an even quadratic function of the Bloch direction, so it is
    recovered from its values at the axes and at the three pairwise diagonals.
    """
    def f(x):
        return normalized_distance(rho, block_measurement(x, block_basis, fixed_vectors))

    eye = np.eye(3)
    diag = [(f(eye[i]) + f(-eye[i])) / 2 for i in range(3)]
    mat = np.diag(diag)
    for i in range(3):
        for j in range(i + 1, 3):
            mixed = f((eye[i] + eye[j]) / math.sqrt(2))
            mat[i, j] = mat[j, i] = mixed - (diag[i] + diag[j]) / 2
    return mat


def _two_fold_block(rho):
    spaces = eigenspaces(marginal(rho))
    sizes = sorted(basis.shape[1] for _, basis in spaces)
    if sizes.count(2) != 1 or any(s > 2 for s in sizes):
        raise DegeneracyError(f"need exactly one two-fold eigenvalue in rho_A, got multiplicities {sizes}")
    block = next(basis for _, basis in spaces if basis.shape[1] == 2)
    fixed = [basis for _, basis in spaces if basis.shape[1] == 1]
    fixed = np.hstack(fixed) if fixed else None
    return block, fixed


def min_exact_2d_block(rho: DensityMatrix) -> MeasureEstimate:
    """Exact MIN when rho_A has one doubly degenerate eigenvalue and is otherwise simple."""
    _require_ordered(rho)
    block, fixed = _two_fold_block(rho)
    mat = block_quadratic_form(rho, block, fixed)
    w, v = np.linalg.eigh(mat)
    witness = block_measurement(v[:, -1], block, fixed)
    return MeasureEstimate(float(w[-1]), Kind.EXACT, witness)


def min_exact(rho: DensityMatrix) -> Optional[MeasureEstimate]:
    """Exact MIN from whichever exact method applies, else ``None``."""
    sizes = [basis.shape[1] for _, basis in eigenspaces(marginal(rho))]
    if all(s == 1 for s in sizes):
        return min_exact_nondegenerate(rho)
    if sizes.count(2) == 1 and max(sizes) == 2:
        return min_exact_2d_block(rho)
    return None


def gd_exact(rho: DensityMatrix) -> Optional[MeasureEstimate]:
    """Exact GD from whichever exact method applies, else ``None``."""
    if rho.dim_a == 2:
        return gd_exact_2xn(rho)
    if rho.dim_a == 3:
        return gd_candidate_3x3(rho)
    return None


def closed_forms(spec: StateSpec) -> Optional[tuple[MeasureEstimate, MeasureEstimate]]:
    """Known analytic (GD, MIN) for the families where both are settled."""
    p = spec.params
    fam = spec.family
    if fam is Family.HORODECKI_2X4:
        a = p["a"]
        if a <= 1 / 3:
            gd = 12 * a * a / (1 + 7 * a) ** 2
        else:
            gd = (1 + a * (6 * a - 1)) / (1 + 7 * a) ** 2
        mn = 12 * a * a / (1 + 7 * a) ** 2
    elif fam is Family.WERNER:
        m, z = p["m"], p["z"]
        gd = mn = ((m * z - 1) / (m * m - 1)) ** 2
    elif fam is Family.ISOTROPIC:
        m, z = p["m"], p["z"]
        gd = mn = ((m * m * z - 1) / (m * m - 1)) ** 2
    elif fam is Family.BENATTI:
        gd = mn = 1 / 9
    elif fam is Family.PYRAMID:
        gd = (19 - 7 * math.sqrt(5)) / 32
        mn = 0.75 * (math.sqrt(5) - 2)
    else:
        return None
    return MeasureEstimate(gd, Kind.EXACT), MeasureEstimate(mn, Kind.EXACT)


def distances_from_vectors(rho: DensityMatrix, vectors: np.ndarray) -> np.ndarray:
    """Normalized distances for a batch of measurements given as unitaries.

    ``vectors`` has shape (batch, m, m); column k of each unitary spans the
    k-th projector. Uses ||rho - Pi(rho)||^2 = ||rho||^2 - ||Pi(rho)||^2, which
    holds because the pinching is an orthogonal projection.
    """
    m, n = rho.dims
    r = rho.tensor()
    # blocks[b, k, a, c] = <u_k a| rho |u_k c>
    half = np.einsum("iajc,bjk->bkiac", r, vectors, optimize=True)
    blocks = np.einsum("bik,bkiac->bkac", vectors.conj(), half, optimize=True)
    kept = np.sum(np.abs(blocks) ** 2, axis=(1, 2, 3))
    total = float(np.real(np.vdot(rho.data, rho.data)))
    return m / (m - 1) * (total - kept)



def reference_measurements(spec: StateSpec) -> list[tuple[str, Measurement]]:
    """Hand-picked measurements with known values for some families."""
    r2, r3, r6 = math.sqrt(2), math.sqrt(3), math.sqrt(6)
    if spec.family is Family.HORODECKI_3X3:
        p1 = np.array([1, 1, 1]) / r3
        p2 = np.array([1, 1, -2]) / r6
        return [("trial-basis", Measurement.from_vectors(np.array([p1, p2, np.cross(p1, p2)]).T))]
    if spec.family is Family.PYRAMID:
        p1 = np.array([r3, 1, r2]) / r6
        p2 = np.array([0, -r2, 1]) / r3
        return [("bound-witness", Measurement.from_vectors(np.array([p1, p2, np.cross(p1, p2)]).T))]
    if spec.family is Family.HORODECKI_4X4_KEY:
        h = np.array([[1, 1, 0, 0], [1, -1, 0, 0], [0, 0, 1, 1], [0, 0, 1, -1]]) / r2
        return [
            ("computational", Measurement.computational(4)),
            ("paired-hadamard", Measurement.from_vectors(h)),
        ]
    if spec.family is Family.BENATTI:
        return [("computational", Measurement.computational(4))]
    return []
