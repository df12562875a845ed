"""Exhaustive checks of the IMISC consecutive-lag proof.

The proof splits the positive coarray into cross differences between the six
sub-ULAs, gives closed forms for fourteen of them, and argues three unions
cover the consecutive segment. Everything here is checked per Q by brute
force. Closed forms are written with the sensor count ``Q`` wherever the
published expressions use ``N``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .geometry import imisc_geometry, imisc_sub_ulas, max_ies

NOTATION_NOTE = "closed forms evaluated with N read as Q (sensor count)"


def sub_ula_positions(Q: int) -> tuple[tuple[int, ...], ...]:
    """The six sub-ULAs, indexed 0..5 for ULA 1..6."""
    return imisc_sub_ulas(Q)


def _check_pair(i: int, j: int):
    if not (1 <= i <= 6 and 1 <= j <= 6):
        raise ValueError(f"sub-ULA indices must be in 1..6, got ({i}, {j})")


def cross_difference(i: int, j: int, Q: int) -> frozenset:
    """``{p_j(y) - p_i(x)}`` over all sensors of ULA i and ULA j."""
    _check_pair(i, j)
    subs = sub_ula_positions(Q)
    return frozenset(y - x for x in subs[i - 1] for y in subs[j - 1])


def _scaled(k: int, step: int) -> list[int]:
    # "(0, 1, ..., k)(step)"
    return [t * step for t in range(k + 1)]


def _closed_forms(Q: int) -> dict[tuple[int, int], tuple[int, list[list[int]]]]:
    M = max_ies(Q)
    MM = M * M
    even = list(range(0, M // 2 - 1, 2))  # 0, 2, ..., M/2 - 2
    pair = [0, 1]
    s3 = _scaled(M // 4 - 2, M // 2 - 1)
    s4 = _scaled(Q - M - 1, M)
    s5 = _scaled(M // 4 - 2, M // 2 + 1)
    return {
        (1, 2): (1, [list(range(M // 2))]),
        (1, 3): (M // 2, [even, s3]),
        (1, 4): (MM // 8 + M // 4 + 2, [even, s4]),
        (1, 5): (M * Q - 7 * MM // 8 - M // 4 + 3, [even, s5]),
        (1, 6): (M * Q - 3 * MM // 4 - M + 3, [even, even]),
        (2, 4): (MM // 8 + M // 4, [pair, s4]),
        (2, 5): (M * Q - 7 * MM // 8 - M // 4 + 1, [pair, s5]),
        (2, 6): (M * Q - 3 * MM // 4 - M + 1, [pair, even]),
        (3, 4): (M, [s3, s4]),
        (3, 5): (M * Q - MM + M // 2 + 1, [s3, s5]),
        (3, 6): (M * Q - 7 * MM // 8 - M // 4 + 1, [s3, even]),
        (4, 5): (M // 2 + 1, [s5, s4]),
        (4, 6): (MM // 8 - M // 4 + 1, [even, s4]),
        (5, 6): (2, [even, s5]),
    }


CLOSED_FORM_PAIRS = tuple(sorted(_closed_forms(10)))


def closed_form_difference(i: int, j: int, Q: int) -> Optional[frozenset]:
    """Evaluate the published closed form for ``D_{i,j}``, or None if none is listed."""
    _check_pair(i, j)
    forms = _closed_forms(Q)
    if (i, j) not in forms:
        return None
    offset, index_sets = forms[(i, j)]
    out = {offset}
    for idx in index_sets:
        out = {a + b for a in out for b in idx}
    return frozenset(out)


@dataclass(frozen=True)
class CrossDiffReport:
    pair: tuple[int, int]
    Q: int
    closed_form_set: Optional[frozenset]
    brute_force_set: frozenset

    @property
    def equal(self) -> bool:
        return self.closed_form_set is None or self.closed_form_set == self.brute_force_set

    def first_mismatch(self) -> Optional[int]:
        if self.closed_form_set is None:
            return None
        diff = self.closed_form_set ^ self.brute_force_set
        return min(diff) if diff else None


def check_cross_difference(i: int, j: int, Q: int) -> CrossDiffReport:
    return CrossDiffReport((i, j), Q, closed_form_difference(i, j, Q), cross_difference(i, j, Q))


def coverage_ranges(Q: int) -> list[tuple[str, list[tuple[int, int]], tuple[int, int]]]:
    """The three (name, unions, range) claims the proof rests on."""
    M = max_ies(Q)
    MM = M * M
    a = MM // 8 - M // 4
    b = M * Q - 7 * MM // 8 - 5 * M // 4 + 3
    c = M * Q - 3 * MM // 4 - M // 2 + 1
    return [
        ("low", [(1, 2), (1, 3), (3, 4), (4, 5), (5, 6)], (1, a)),
        ("middle", [(1, 4), (2, 4), (3, 4), (4, 5), (4, 6), (4, 4)], (a + 1, b)),
        ("high", [(1, 5), (1, 6), (2, 5), (2, 6), (3, 5), (3, 6), (1, 4), (2, 4), (4, 6)], (b, c)),
    ]


@dataclass
class RangeCheck:
    name: str
    pairs: list
    lo: int
    hi: int
    uncovered: list = field(default_factory=list)
    # uncovered lag -> sub-ULA pairs that do produce it
    produced_by: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.uncovered


@dataclass
class CoverageReport:
    """Result of :func:`verify_coverage`.

    ``uncovered`` lists positive lags in the claimed segment that no sensor
    pair produces; ``segment`` is the brute-force positive consecutive run.
    """

    Q: int
    M: int
    claimed: tuple[int, int]
    segment: tuple[int, int]
    ranges: list
    uncovered: list
    # every lag in the claimed segment lies in the union of all named pairs
    unions_cover_segment: bool = True

    @property
    def ok(self) -> bool:
        return not self.uncovered and self.segment == self.claimed and all(r.ok for r in self.ranges)


def _positive_segment(positions) -> tuple[int, int]:
    pos = sorted(positions)
    diffs = {b - a for a in pos for b in pos if b > a}
    L = 0
    while L + 1 in diffs:
        L += 1
    return 1, L


def verify_coverage(Q: int, positions=None) -> CoverageReport:
    """Check the three coverage ranges and the total positive segment.

    Args:
        Q: Sensor count of the IMISC array.
        positions: Optional override of the array positions, e.g. to check
            that a corrupted array is caught. The sub-ULA ranges are then
            intersected with it.
    """
    M = max_ies(Q)
    geom = imisc_geometry(Q)
    pos = set(geom.positions if positions is None else positions)
    subs = [tuple(p for p in s if p in pos) for s in sub_ula_positions(Q)]

    def dset(i, j):
        return {y - x for x in subs[i - 1] for y in subs[j - 1]}

    every = {(i, j): dset(i, j) for i in range(1, 7) for j in range(1, 7)}
    ranges = []
    named = set()
    for name, pairs, (lo, hi) in coverage_ranges(Q):
        named.update(pairs)
        got = set().union(*(every[p] for p in pairs))
        missing = [n for n in range(lo, hi + 1) if n not in got]
        src = {n: [p for p, d in every.items() if n in d] for n in missing}
        ranges.append(RangeCheck(name, pairs, lo, hi, missing, src))

    claimed = (1, M * Q - 3 * M * M // 4 - M // 2 + 1)
    all_pos = {y - x for x in pos for y in pos if y > x}
    uncovered = [n for n in range(claimed[0], claimed[1] + 1) if n not in all_pos]
    in_named = set().union(*(every[p] for p in named))
    spans = all(n in in_named for n in range(claimed[0], claimed[1] + 1))
    return CoverageReport(Q, M, claimed, _positive_segment(pos), ranges, uncovered, spans)


@dataclass
class CheckLine:
    check: str
    Q: int
    passed: bool
    detail: str = ""

    def text(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{self.check}\tQ={self.Q}\t{status}" + (f"\t{self.detail}" if self.detail else "")


def appendix_checks(Q: int) -> list[CheckLine]:
    """All closed-form set equalities and coverage checks for one Q."""
    lines = []
    for i, j in CLOSED_FORM_PAIRS:
        rep = check_cross_difference(i, j, Q)
        detail = "" if rep.equal else f"first mismatch at lag {rep.first_mismatch()}"
        lines.append(CheckLine(f"D_{i},{j} closed form", Q, rep.equal, detail))
    cov = verify_coverage(Q)
    for r in cov.ranges:
        detail = f"[{r.lo}, {r.hi}]"
        if r.uncovered:
            pairs = sorted({p for ps in r.produced_by.values() for p in ps})
            detail += f" uncovered {r.uncovered[:5]} (found in {', '.join(f'D_{i},{j}' for i, j in pairs)})"
        lines.append(CheckLine(f"coverage {r.name}", Q, r.ok, detail))
    seg_ok = cov.segment == cov.claimed and not cov.uncovered
    detail = f"segment [{cov.segment[0]}, {cov.segment[1]}] claimed [{cov.claimed[0]}, {cov.claimed[1]}]"
    lines.append(CheckLine("positive consecutive segment", Q, seg_ok, detail))
    lines.append(CheckLine("named unions span segment", Q, cov.unions_cover_segment))
    return lines
