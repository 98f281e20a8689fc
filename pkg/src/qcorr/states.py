"""Bipartite density matrices of the bound entangled families and their relatives.

All matrices use the row-major product basis: ``|i>|j>`` sits at index ``i * n + j``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import DimensionError, DomainError, SpecParseError

TOL_HERM = 1e-12
TOL_TRACE = 1e-12
TOL_PSD = -1e-10


@dataclass(frozen=True)
class DensityMatrix:
    """A density matrix on C^m (x) C^n.

    ``data`` is stored as a read-only complex array. The constructor does not
    validate; use :func:`validate` to get the defects.
    """

    data: np.ndarray
    dim_a: int
    dim_b: int

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.complex128)
        size = self.dim_a * self.dim_b
        if arr.shape != (size, size):
            raise DimensionError(
                f"matrix of shape {arr.shape} does not match dims ({self.dim_a}, {self.dim_b})"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def dims(self) -> tuple[int, int]:
        return self.dim_a, self.dim_b

    @property
    def size(self) -> int:
        return self.dim_a * self.dim_b

    def tensor(self) -> np.ndarray:
        """View as a rank-4 array indexed ``[i, a, j, b]`` for ``<i a| rho |j b>``."""
        m, n = self.dims
        return self.data.reshape(m, n, m, n)


@dataclass(frozen=True)
class Validation:
    hermiticity: float
    trace: float
    min_eigenvalue: float

    def ok(self) -> bool:
        return (
            self.hermiticity <= TOL_HERM
            and self.trace <= TOL_TRACE
            and self.min_eigenvalue >= TOL_PSD
        )


def validate(rho: DensityMatrix) -> Validation:
    """Report hermiticity defect, trace defect and smallest eigenvalue."""
    data = rho.data
    herm = float(np.max(np.abs(data - data.conj().T)))
    trace = float(abs(np.trace(data) - 1.0))
    hermitian_part = (data + data.conj().T) / 2
    min_eig = float(np.linalg.eigvalsh(hermitian_part)[0])
    return Validation(herm, trace, min_eig)


def reinterpret(rho: DensityMatrix, m2: int, n2: int) -> DensityMatrix:
    """Same matrix, new bipartition tags."""
    if m2 < 1 or n2 < 1 or m2 * n2 != rho.size:
        raise DimensionError(f"cannot view a {rho.size}x{rho.size} matrix as {m2}x{n2}")
    return DensityMatrix(rho.data, m2, n2)


def _ket(i, d):
    v = np.zeros(d, dtype=np.complex128)
    v[i] = 1.0
    return v


def _proj(v):
    return np.outer(v, v.conj())


def _check_range(name, value, lo, hi):
    if not (lo <= value <= hi):
        raise DomainError(f"parameter {name}={value} outside [{lo}, {hi}]")


def horodecki_2x4(a: float) -> DensityMatrix:
    """P. Horodecki's 2x4 state, bound entangled for 0 < a < 1."""
    _check_range("a", a, 0.0, 1.0)
    ent = np.zeros((8, 8), dtype=np.complex128)
    for i in (1, 2, 3):
        psi = (np.kron(_ket(0, 2), _ket(i - 1, 4)) + np.kron(_ket(1, 2), _ket(i, 4))) / math.sqrt(2)
        ent += 2 / 7 * _proj(psi)
    ent += 1 / 7 * _proj(np.kron(_ket(0, 2), _ket(3, 4)))
    # |1> (x) (sqrt((1+a)/2)|0> + sqrt((1-a)/2)|3>); the |3> component keeps the family PPT
    local = math.sqrt((1 + a) / 2) * _ket(0, 4) + math.sqrt((1 - a) / 2) * _ket(3, 4)
    phi = np.kron(_ket(1, 2), local)
    data = 7 * a / (7 * a + 1) * ent + 1 / (7 * a + 1) * _proj(phi)
    return DensityMatrix(data, 2, 4)


def horodecki_3x3(beta: float) -> DensityMatrix:
    """The Horodeckis' 3x3 family: NPT, PPT, separable or bound entangled depending on beta."""
    _check_range("beta", beta, 0.0, 5.0)
    phi = sum(np.kron(_ket(k, 3), _ket(k, 3)) for k in range(3)) / math.sqrt(3)
    sigma_plus = np.zeros((9, 9), dtype=np.complex128)
    sigma_minus = np.zeros((9, 9), dtype=np.complex128)
    for k in range(3):
        sigma_plus += _proj(np.kron(_ket(k, 3), _ket((k + 1) % 3, 3))) / 3
        sigma_minus += _proj(np.kron(_ket((k + 1) % 3, 3), _ket(k, 3))) / 3
    data = 2 / 7 * _proj(phi) + beta / 7 * sigma_plus + (5 - beta) / 7 * sigma_minus
    return DensityMatrix(data, 3, 3)


# nonzero entries of the 4x4 key state, upper triangle; "s", "t" or "-s"
_KEY_ENTRIES = [
    (0, 0, "s"), (0, 10, "s"), (1, 1, "s"), (1, 14, "s"),
    (2, 2, "t"), (2, 8, "s"), (2, 13, "s"), (4, 4, "s"), (4, 11, "s"),
    (5, 5, "s"), (5, 15, "-s"), (7, 7, "t"), (7, 8, "s"), (7, 13, "-s"),
    (8, 8, "t"), (10, 10, "s"), (11, 11, "s"), (13, 13, "t"),
    (14, 14, "s"), (15, 15, "s"),
]


def horodecki_4x4_key() -> DensityMatrix:
    """The 4x4 bound entangled state with positive distillable key."""
    s = math.sqrt(2) / (8 * (1 + math.sqrt(2)))
    t = 1 / (4 * (1 + math.sqrt(2)))
    values = {"s": s, "t": t, "-s": -s}
    data = np.zeros((16, 16), dtype=np.complex128)
    for i, j, tag in _KEY_ENTRIES:
        data[i, j] = data[j, i] = values[tag]
    return DensityMatrix(data, 4, 4)


def pyramid_vectors() -> list[np.ndarray]:
    """The five product vectors of the Pyramid UPB."""
    norm = 2 / math.sqrt(5 + math.sqrt(5))
    h = math.sqrt(1 + math.sqrt(5)) / 2
    v = [
        norm * np.array([math.cos(2 * math.pi * i / 5), math.sin(2 * math.pi * i / 5), h], dtype=np.complex128)
        for i in range(5)
    ]
    return [np.kron(v[i], v[(2 * i) % 5]) for i in range(5)]


def tiles_vectors() -> list[np.ndarray]:
    """The five product vectors of the Tiles UPB."""
    e0, e1, e2 = (_ket(k, 3) for k in range(3))
    r2 = math.sqrt(2)
    return [
        np.kron(e0, (e0 - e1) / r2),
        np.kron((e0 - e1) / r2, e2),
        np.kron(e2, (e1 - e2) / r2),
        np.kron((e1 - e2) / r2, e0),
        np.kron(e0 + e1 + e2, e0 + e1 + e2) / 3,
    ]


def _upb_state(vectors):
    data = np.eye(9, dtype=np.complex128)
    for v in vectors:
        data -= _proj(v)
    return DensityMatrix(data / 4, 3, 3)


def upb_pyramid() -> DensityMatrix:
    return _upb_state(pyramid_vectors())


def upb_tiles() -> DensityMatrix:
    return _upb_state(tiles_vectors())


_BENATTI_PATTERN = [
    [(0, 1), (5, -1), (10, -1), (15, 1)],
    [(1, 3), (4, -1), (11, -1), (14, -1)],
    [(2, 1), (7, -1), (8, -1), (13, 1)],
    [(3, 1), (6, 1), (9, 1), (12, 1)],
    [(1, -1), (4, 3), (11, -1), (14, -1)],
    [(0, -1), (5, 1), (10, 1), (15, -1)],
    [(3, 1), (6, 1), (9, 1), (12, 1)],
    [(2, -1), (7, 1), (8, 1), (13, -1)],
    [(2, -1), (7, 1), (8, 1), (13, -1)],
    [(3, 1), (6, 1), (9, 1), (12, 1)],
    [(0, -1), (5, 1), (10, 1), (15, -1)],
    [(1, -1), (4, -1), (11, 3), (14, -1)],
    [(3, 1), (6, 1), (9, 1), (12, 1)],
    [(2, 1), (7, -1), (8, -1), (13, 1)],
    [(1, -1), (4, -1), (11, -1), (14, 3)],
    [(0, 1), (5, -1), (10, -1), (15, 1)],
]


def benatti_4x4() -> DensityMatrix:
    """Benatti et al.'s 4x4 bound entangled state (from a non-decomposable positive map)."""
    data = np.zeros((16, 16), dtype=np.complex128)
    for row, entries in enumerate(_BENATTI_PATTERN):
        for col, val in entries:
            data[row, col] = val
    return DensityMatrix(data / 24, 4, 4)


def _check_m(m):
    if int(m) != m or m < 2:
        raise DomainError(f"parameter m={m} must be an integer >= 2")
    return int(m)


def swap_operator(m: int) -> np.ndarray:
    """F = sum_kl |kl><lk| on C^m (x) C^m."""
    f = np.zeros((m * m, m * m))
    for k in range(m):
        for l in range(m):
            f[k * m + l, l * m + k] = 1.0
    return f


def werner(m: int, z: float) -> DensityMatrix:
    m = _check_m(m)
    _check_range("z", z, -1.0, 1.0)
    norm = m**3 - m
    data = (m - z) / norm * np.eye(m * m) + (m * z - 1) / norm * swap_operator(m)
    return DensityMatrix(data, m, m)


def isotropic(m: int, z: float) -> DensityMatrix:
    m = _check_m(m)
    _check_range("z", z, 0.0, 1.0)
    psi = sum(np.kron(_ket(k, m), _ket(k, m)) for k in range(m)) / math.sqrt(m)
    data = (1 - z) / (m * m - 1) * np.eye(m * m) + (m * m * z - 1) / (m * m - 1) * _proj(psi)
    return DensityMatrix(data, m, m)


class Family(enum.Enum):
    HORODECKI_2X4 = "horodecki2x4"
    HORODECKI_3X3 = "horodecki3x3"
    HORODECKI_4X4_KEY = "horodecki4x4key"
    PYRAMID = "pyramid"
    TILES = "tiles"
    BENATTI = "benatti"
    WERNER = "werner"
    ISOTROPIC = "isotropic"


# parameter names each family takes, in constructor order
FAMILY_PARAMS: dict[Family, tuple[str, ...]] = {
    Family.HORODECKI_2X4: ("a",),
    Family.HORODECKI_3X3: ("beta",),
    Family.HORODECKI_4X4_KEY: (),
    Family.PYRAMID: (),
    Family.TILES: (),
    Family.BENATTI: (),
    Family.WERNER: ("m", "z"),
    Family.ISOTROPIC: ("m", "z"),
}

_BUILDERS = {
    Family.HORODECKI_2X4: horodecki_2x4,
    Family.HORODECKI_3X3: horodecki_3x3,
    Family.HORODECKI_4X4_KEY: horodecki_4x4_key,
    Family.PYRAMID: upb_pyramid,
    Family.TILES: upb_tiles,
    Family.BENATTI: benatti_4x4,
    Family.WERNER: werner,
    Family.ISOTROPIC: isotropic,
}


def parse_family_params(text: str) -> tuple[Family, dict[str, float]]:
    """Split ``family:key=value,...`` without checking which parameters are present."""
    name, _, rest = text.strip().partition(":")
    try:
        family = Family(name.strip().lower())
    except ValueError:
        raise SpecParseError(f"unknown state family {name!r}", token=name) from None
    params = {}
    if rest.strip():
        for item in rest.split(","):
            key, eq, value = item.partition("=")
            key = key.strip()
            if not eq or not key:
                raise SpecParseError(f"expected key=value, got {item!r}", token=item)
            try:
                params[key] = float(value)
            except ValueError:
                raise SpecParseError(f"bad number {value!r} for {key}", token=value) from None
    return family, params


@dataclass(frozen=True)
class StateSpec:
    """A named family plus its parameters, e.g. ``werner:m=4,z=0.3``."""

    family: Family
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        expected = FAMILY_PARAMS[self.family]
        unknown = set(self.params) - set(expected)
        if unknown:
            name = sorted(unknown)[0]
            raise SpecParseError(f"family {self.family.value} has no parameter {name!r}", token=name)
        missing = [p for p in expected if p not in self.params]
        if missing:
            raise SpecParseError(
                f"family {self.family.value} requires parameter {missing[0]!r}", token=missing[0]
            )
        object.__setattr__(self, "params", dict(self.params))

    @classmethod
    def parse(cls, text: str) -> "StateSpec":
        family, params = parse_family_params(text)
        return cls(family, params)

    def with_param(self, name: str, value: float) -> "StateSpec":
        return StateSpec(self.family, {**self.params, name: value})

    def build(self) -> DensityMatrix:
        args = []
        for p in FAMILY_PARAMS[self.family]:
            v = self.params[p]
            args.append(int(v) if p == "m" and float(v).is_integer() else v)
        return _BUILDERS[self.family](*args)

    def __str__(self):
        if not self.params:
            return self.family.value
        body = ",".join(f"{k}={self.params[k]:g}" for k in FAMILY_PARAMS[self.family])
        return f"{self.family.value}:{body}"
