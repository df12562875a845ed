"""Difference coarray, weight function, uDOF closed forms and mutual coupling."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

from .geometry import ArrayGeometry, UnsupportedSensorCount, max_ies, misc_max_ies


@dataclass(frozen=True)
class CoarrayProfile:
    """Difference coarray of a linear array.

    Attributes:
        lags: Sorted distinct differences ``p_a - p_b``.
        weights: Multiplicity of each lag over ordered sensor pairs.
        consecutive_bound: Largest L with every integer in [-L, L] a lag.
    """

    lags: tuple[int, ...]
    weights: dict
    consecutive_bound: int

    @property
    def udof(self) -> int:
        return 2 * self.consecutive_bound + 1

    def w(self, n: int) -> int:
        return self.weights.get(n, 0)


def difference_coarray(geom: Union[ArrayGeometry, "np.ndarray", list]) -> CoarrayProfile:
    """Enumerate all ordered sensor pairs and collect their differences."""
    pos = geom.positions if isinstance(geom, ArrayGeometry) else tuple(int(p) for p in geom)
    weights = Counter(a - b for a in pos for b in pos)
    L = 0
    while L + 1 in weights:
        L += 1
    return CoarrayProfile(tuple(sorted(weights)), dict(weights), L)


def imisc_udof_closed_form(Q: int) -> int:
    """uDOF of IMISC, ``2MQ - 3M^2/2 - M + 3``."""
    M = max_ies(Q)
    return 2 * M * Q - 3 * M * M // 2 - M + 3


def imisc_udof_by_residue(Q: int) -> int:
    """uDOF of IMISC from the case expression selected by ``Q mod 6``."""
    max_ies(Q)
    base = Fraction(2 * Q * Q, 3) - Fraction(2 * Q, 3)
    r = Q % 6
    if r in (4, 3):
        val = base - 1
    elif r in (5, 2):
        val = base + Fraction(5, 3)
    else:
        val = base + 3
    return _as_int(val)


def imisc_consecutive_segment(Q: int) -> tuple[int, int]:
    """Closed-form consecutive coarray segment ``[-L, L]`` of IMISC."""
    M = max_ies(Q)
    L = M * Q - 3 * M * M // 4 - M // 2 + 1
    return -L, L


def misc_udof_closed_form(Q: int) -> int:
    """uDOF of the MISC array, by ``Q mod 4``.

    The odd branches subtract a half-integer from the half-integer ``Q^2/2``,
    so every branch is integral. Evaluated with exact fractions regardless.
    """
    misc_max_ies(Q)
    base = Fraction(Q * Q, 2) + 3 * Q
    if Q % 2 == 0:
        val = base - 9
    elif Q % 4 == 1:
        val = base - Fraction(17, 2)
    else:
        val = base - Fraction(21, 2)
    return _as_int(val)


def _as_int(val: Fraction):
    return int(val) if val.denominator == 1 else val


def imisc_weights_closed_form(Q: int) -> tuple[int, int, int]:
    """``(w(1), w(2), w(3))`` of the IMISC array."""
    max_ies(Q)
    if Q >= 16:
        return 2, 2 * ((Q + 2) // 6), 1
    return 2, 5, 2


def misc_weights_closed_form(Q: int) -> tuple[int, int, int]:
    """``(w(1), w(2), w(3))`` of the MISC array as published.

    Note this disagrees with brute force on :func:`~imisc.geometry.misc_geometry`
    by one in ``w(2)``; see the README.
    """
    if Q < 8:
        raise UnsupportedSensorCount(f"unsupported sensor count Q={Q}")
    return 1, 2 * (Q // 4) - 3, 2 if Q == 9 else 1


def first_weights(profile: CoarrayProfile) -> tuple[int, int, int]:
    return profile.w(1), profile.w(2), profile.w(3)


# -- mutual coupling ----------------------------------------------------------


@dataclass(frozen=True)
class CouplingModel:
    """Banded mutual coupling with ``a_i = a1 * exp(-j (i-1) step) / i``.

    Args:
        a1: Complex coupling coefficient between adjacent positions.
        band: Coupling vanishes beyond this many half-wavelengths.
        decay_phase_step: Phase rotation per extra unit of separation.
    """

    a1: complex = 0.0
    band: int = 100
    decay_phase_step: float = np.pi / 8

    def __post_init__(self):
        if abs(self.a1) >= 1:
            raise ValueError("|a1| must be below 1")
        if self.band < 0:
            raise ValueError("band must be non-negative")

    @classmethod
    def polar(cls, magnitude: float, phase: float = np.pi / 3, band: int = 100) -> "CouplingModel":
        return cls(magnitude * np.exp(1j * phase), band=band)

    @property
    def is_identity(self) -> bool:
        return self.a1 == 0 or self.band == 0

    def coefficients(self) -> np.ndarray:
        """Array ``[a_0, a_1, ..., a_D]`` with ``a_0 = 1``."""
        i = np.arange(1, self.band + 1)
        a = self.a1 * np.exp(-1j * (i - 1) * self.decay_phase_step) / i
        return np.concatenate([[1.0 + 0j], a])


def coupling_matrix(geom: ArrayGeometry, model: CouplingModel) -> np.ndarray:
    pos = geom.as_array()
    sep = np.abs(pos[:, None] - pos[None, :])
    coef = model.coefficients()
    inside = sep <= model.band
    return np.where(inside, coef[np.where(inside, sep, 0)], 0)


def coupling_leakage(geom: ArrayGeometry, model: CouplingModel) -> float:
    """Off-diagonal share of the coupling matrix's Frobenius norm."""
    A = coupling_matrix(geom, model)
    off = A - np.diag(np.diag(A))
    return float(np.linalg.norm(off) / np.linalg.norm(A))
