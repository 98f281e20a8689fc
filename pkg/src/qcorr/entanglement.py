"""Partial transpose, PPT test and negativity."""
from __future__ import annotations

import enum

import numpy as np

from .errors import DomainError
from .states import TOL_PSD, DensityMatrix, horodecki_3x3


def partial_transpose(rho: DensityMatrix, side: str = "B") -> np.ndarray:
    m, n = rho.dims
    r = rho.tensor()
    if side.upper() == "B":
        out = r.transpose(0, 3, 2, 1)
    elif side.upper() == "A":
        out = r.transpose(2, 1, 0, 3)
    else:
        raise ValueError(f"side must be 'A' or 'B', got {side!r}")
    return out.reshape(m * n, m * n)


def _pt_spectrum(rho):
    pt = partial_transpose(rho)
    return np.linalg.eigvalsh((pt + pt.conj().T) / 2)


def is_ppt(rho: DensityMatrix) -> bool:
    return bool(_pt_spectrum(rho)[0] >= TOL_PSD)


def negativity(rho: DensityMatrix) -> float:
    """Sum of |negative eigenvalues| of the partial transpose."""
    w = _pt_spectrum(rho)
    return float(-w[w < 0].sum())


class Regime(enum.Enum):
    NPT_ENTANGLED = "npt-entangled"
    PPT_UNKNOWN = "ppt-unknown"
    SEPARABLE = "separable"
    BOUND_ENTANGLED = "bound-entangled"
    FREE_ENTANGLED = "free-entangled"

    @property
    def ppt(self) -> bool:
        return self in (Regime.PPT_UNKNOWN, Regime.SEPARABLE, Regime.BOUND_ENTANGLED)


def classify_horodecki_3x3(beta: float) -> Regime:
    """Known entanglement regime of the Horodeckis' 3x3 family at ``beta``.

    The labels are looked up, not computed; the PPT part is cross-checked
    against the partial transpose.
    """
    if not 0 <= beta <= 5:
        raise DomainError(f"parameter beta={beta} outside [0, 5]")
    if beta < 1:
        regime = Regime.NPT_ENTANGLED
    elif beta < 2:
        regime = Regime.PPT_UNKNOWN
    elif beta <= 3:
        regime = Regime.SEPARABLE
    elif beta <= 4:
        regime = Regime.BOUND_ENTANGLED
    else:
        regime = Regime.FREE_ENTANGLED
    if regime.ppt != is_ppt(horodecki_3x3(beta)):
        raise RuntimeError(f"regime lookup disagrees with the partial transpose at beta={beta}")
    return regime
