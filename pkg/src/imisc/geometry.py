"""Sparse linear array constructions.

All positions are integers in units of half a wavelength, so the physical
wavelength never enters this module.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import gcd
from typing import Optional, Sequence

import numpy as np

LABELS = ("imisc", "nested", "coprime", "misc", "custom")


class UnsupportedSensorCount(ValueError):
    """Raised when a construction is undefined for the requested sensor count."""


@dataclass(frozen=True)
class ArrayGeometry:
    """A linear array described by sorted integer sensor positions.

    Args:
        positions: Strictly increasing non-negative integer positions.
        label: Construction name, one of ``LABELS``.
        max_ies: Maximum inter-element spacing ``M`` (IMISC) or ``P`` (MISC).
        sub_ulas: For IMISC, the six sub-ULAs in order. Their disjoint union
            is ``positions``.
        params: Construction parameters, kept for CSV metadata.
    """

    positions: tuple[int, ...]
    label: str = "custom"
    max_ies: Optional[int] = None
    sub_ulas: Optional[tuple[tuple[int, ...], ...]] = None
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        pos = tuple(int(p) for p in self.positions)
        object.__setattr__(self, "positions", pos)
        if len(pos) == 0:
            raise ValueError("geometry needs at least one sensor")
        if any(b <= a for a, b in zip(pos, pos[1:])):
            raise ValueError("positions must be strictly increasing")
        if pos[0] < 0:
            raise ValueError("positions must be non-negative")
        if self.label not in LABELS:
            raise ValueError(f"unknown array label {self.label!r}")

    @property
    def sensor_count(self) -> int:
        return len(self.positions)

    @property
    def aperture(self) -> int:
        return self.positions[-1] - self.positions[0]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.positions, dtype=np.int64)

    def ies(self) -> tuple[int, ...]:
        """Consecutive inter-element spacings, left to right."""
        return tuple(b - a for a, b in zip(self.positions, self.positions[1:]))

    def describe_params(self) -> str:
        return ";".join(f"{k}={v}" for k, v in self.params.items())

    # -- plain text / record I/O -------------------------------------------

    def to_text(self) -> str:
        return "".join(f"{p}\n" for p in self.positions)

    @classmethod
    def from_text(cls, text: str, label: str = "custom") -> "ArrayGeometry":
        pos = [int(line) for line in text.split() if line.strip()]
        return cls(tuple(pos), label=label)

    def to_record(self) -> dict:
        rec = {
            "label": self.label,
            "Q": self.sensor_count,
            "M": self.max_ies,
            "positions": list(self.positions),
        }
        if self.sub_ulas is not None:
            rec["sub_ulas"] = [list(s) for s in self.sub_ulas]
        if self.params:
            rec["params"] = dict(self.params)
        return rec

    def to_json(self) -> str:
        return json.dumps(self.to_record())

    @classmethod
    def from_record(cls, rec: dict) -> "ArrayGeometry":
        sub = rec.get("sub_ulas")
        geom = cls(
            tuple(rec["positions"]),
            label=rec.get("label", "custom"),
            max_ies=rec.get("M"),
            sub_ulas=None if sub is None else tuple(tuple(s) for s in sub),
            params=dict(rec.get("params", {})),
        )
        if "Q" in rec and rec["Q"] != geom.sensor_count:
            raise ValueError("record Q does not match number of positions")
        return geom


def max_ies(Q: int) -> int:
    """Maximum inter-element spacing of the IMISC array, ``4*floor((Q+2)/6)``."""
    if Q < 10:
        raise UnsupportedSensorCount(f"unsupported sensor count Q={Q}; IMISC needs Q >= 10")
    return 4 * ((Q + 2) // 6)


def imisc_ies(Q: int) -> list[int]:
    """IES sequence of the IMISC array (Q - 1 entries)."""
    M = max_ies(Q)
    h, k = M // 2, M // 4
    return (
        [2] * (k - 1)
        + [1, 1, h - 2]
        + [h - 1] * (k - 2)
        + [M] * (Q - M)
        + [h + 1]
        + [h + 1] * (k - 2)
        + [2]
        + [2] * (k - 1)
    )


def imisc_sub_ulas(Q: int) -> tuple[tuple[int, ...], ...]:
    """The six sub-ULAs of the IMISC array as inclusive arithmetic ranges.

    Sub-ULAs 3 and 5 hold a single sensor when ``M == 8``.
    """
    M = max_ies(Q)
    MM = M * M

    def arange(start, stop, step):
        return tuple(range(start, stop + 1, step))

    return (
        arange(0, M // 2 - 2, 2),
        (M // 2 - 1, M // 2),
        arange(M - 2, MM // 8 - M // 4, M // 2 - 1),
        arange(MM // 8 + 3 * M // 4, M * Q - 7 * MM // 8 - M // 4, M),
        arange(M * Q - 7 * MM // 8 + M // 4 + 1, M * Q - 3 * MM // 4 - M // 2 - 1, M // 2 + 1),
        arange(M * Q - 3 * MM // 4 - M // 2 + 1, M * Q - 3 * MM // 4 - 1, 2),
    )


def imisc_geometry(Q: int) -> ArrayGeometry:
    """Build the Q-sensor IMISC array from its six sub-ULAs."""
    subs = imisc_sub_ulas(Q)
    positions = tuple(p for s in subs for p in s)
    geom = ArrayGeometry(positions, label="imisc", max_ies=max_ies(Q), sub_ulas=subs,
                         params={"Q": Q})
    # the location set and the IES set describe the same array
    if list(geom.ies()) != imisc_ies(Q):
        raise AssertionError(f"IMISC sub-ULAs disagree with the IES set at Q={Q}")
    return geom


def from_ies(ies: Sequence[int], label: str = "custom", **kwargs) -> ArrayGeometry:
    """Build a geometry starting at 0 from an inter-element spacing sequence."""
    pos = np.concatenate([[0], np.cumsum(np.asarray(ies, dtype=np.int64))])
    return ArrayGeometry(tuple(int(p) for p in pos), label=label, **kwargs)


def nested_geometry(n1: int, n2: int) -> ArrayGeometry:
    """Two-level nested array, shifted to start at 0."""
    if n1 < 1 or n2 < 1:
        raise ValueError(f"invalid nested parameters n1={n1}, n2={n2}")
    pos = sorted(set(range(1, n1 + 1)) | {k * (n1 + 1) for k in range(1, n2 + 1)})
    return ArrayGeometry(tuple(p - 1 for p in pos), label="nested", params={"n1": n1, "n2": n2})


def coprime_geometry(p: int, q: int) -> ArrayGeometry:
    """Extended coprime array: ``2q`` sensors at spacing p plus ``p - 1`` at spacing q."""
    if p < 1 or q < 1 or p >= q or gcd(p, q) != 1:
        raise ValueError(f"invalid coprime pair ({p}, {q}); need p < q and gcd(p, q) = 1")
    pos = {k * p for k in range(2 * q)} | {k * q for k in range(1, p)}
    return ArrayGeometry(tuple(sorted(pos)), label="coprime", params={"p": p, "q": q})


def misc_max_ies(Q: int) -> int:
    """Maximum IES ``P = 2*floor(Q/4) + 2`` of the MISC array."""
    if Q < 8:
        raise UnsupportedSensorCount(f"unsupported sensor count Q={Q}; MISC needs Q >= 8")
    return 2 * (Q // 4) + 2


def misc_geometry(Q: int) -> ArrayGeometry:
    """MISC array with IES set ``{1, P-3, P x (Q-P), 2 x (P/2-2), 3, 2 x (P/2-2)}``."""
    P = misc_max_ies(Q)
    ies = [1, P - 3] + [P] * (Q - P) + [2] * (P // 2 - 2) + [3] + [2] * (P // 2 - 2)
    return from_ies(ies, label="misc", max_ies=P, params={"Q": Q})


def nested_for(Q: int) -> ArrayGeometry:
    """Nested array with Q sensors, using the balanced split n1 = floor(Q/2)."""
    n1 = Q // 2
    return nested_geometry(n1, Q - n1)


def coprime_for(Q: int) -> ArrayGeometry:
    """Extended coprime array with exactly Q sensors (2q + p - 1 = Q).

    Among the valid pairs the one with the most balanced ``p`` and ``q`` is
    chosen, which is the usual pick for the largest consecutive coarray.
    """
    best = None
    for p in range(1, Q):
        q2 = Q - p + 1
        if q2 % 2:
            continue
        q = q2 // 2
        if p < q and gcd(p, q) == 1:
            if best is None or q - p < best[1] - best[0]:
                best = (p, q)
    if best is None:
        raise UnsupportedSensorCount(f"no extended coprime pair gives Q={Q} sensors")
    return coprime_geometry(*best)


def build(label: str, Q: int) -> ArrayGeometry:
    """Construct a Q-sensor array of the given family."""
    builders = {
        "imisc": imisc_geometry,
        "misc": misc_geometry,
        "nested": nested_for,
        "coprime": coprime_for,
    }
    if label not in builders:
        raise ValueError(f"cannot build {label!r} from a sensor count")
    return builders[label](Q)
