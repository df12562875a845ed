import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from imisc.coarray import (
    CouplingModel,
    coupling_leakage,
    coupling_matrix,
    difference_coarray,
    first_weights,
    imisc_consecutive_segment,
    imisc_udof_by_residue,
    imisc_udof_closed_form,
    imisc_weights_closed_form,
    misc_udof_closed_form,
    misc_weights_closed_form,
)
from imisc.geometry import ArrayGeometry, UnsupportedSensorCount, imisc_geometry, misc_geometry

from oracles import difference_counts, udof, weight

IMISC10 = (0, 2, 3, 4, 6, 14, 22, 27, 29, 31)
A1 = 0.3 * cmath.exp(1j * math.pi / 3)

positions_st = st.lists(st.integers(0, 60), min_size=1, max_size=14, unique=True).map(sorted)


def test_imisc10_profile():
    prof = difference_coarray(imisc_geometry(10))
    assert prof.consecutive_bound == 29
    assert prof.udof == 59
    assert 30 not in prof.weights
    assert prof.weights == difference_counts(IMISC10)


def test_single_sensor():
    prof = difference_coarray(ArrayGeometry((0,)))
    assert prof.lags == (0,)
    assert prof.udof == 1


@given(positions_st)
def test_profile_invariants(pos):
    prof = difference_coarray(pos)
    Q = len(pos)
    assert prof.weights[0] == Q
    assert all(prof.weights[n] == prof.weights[-n] for n in prof.lags)
    assert sum(prof.weights.values()) == Q * Q
    assert prof.udof % 2 == 1
    assert prof.udof == udof(pos)
    assert prof.weights == difference_counts(pos)


@pytest.mark.parametrize("Q, expected", [(10, 59), (12, 91), (16, 159)])
def test_imisc_udof_closed_form(Q, expected):
    assert imisc_udof_closed_form(Q) == expected
    assert imisc_udof_by_residue(Q) == expected


def test_imisc_udof_closed_form_range_check():
    with pytest.raises(UnsupportedSensorCount):
        imisc_udof_closed_form(9)


def test_residue_branches_agree():
    for Q in range(10, 201):
        assert imisc_udof_by_residue(Q) == imisc_udof_closed_form(Q), Q


def test_imisc_udof_matches_brute_force():
    for Q in range(10, 201):
        pos = imisc_geometry(Q).positions
        assert udof(pos) == imisc_udof_closed_form(Q), Q
        lo, hi = imisc_consecutive_segment(Q)
        assert (lo, hi) == (-(udof(pos) // 2), udof(pos) // 2)


@pytest.mark.parametrize("Q, expected", [(10, (2, 5, 2)), (16, (2, 6, 1)), (100, (2, 34, 1))])
def test_imisc_weights_closed_form(Q, expected):
    assert imisc_weights_closed_form(Q) == expected


def test_imisc10_weights_by_hand():
    # 1: (2,3) (3,4); 2: (0,2) (2,4) (4,6) (27,29) (29,31); 3: (0,3) (3,6)
    assert weight(IMISC10, 1) == 2
    assert weight(IMISC10, 2) == 5
    assert weight(IMISC10, 3) == 2


def test_imisc_weights_match_brute_force():
    for Q in range(10, 201):
        pos = imisc_geometry(Q).positions
        assert tuple(weight(pos, n) for n in (1, 2, 3)) == imisc_weights_closed_form(Q), Q


@pytest.mark.parametrize("Q, expected", [(20, 251), (100, 5291), (21, 275), (23, 323)])
def test_misc_udof_closed_form(Q, expected):
    val = misc_udof_closed_form(Q)
    assert val == expected
    assert isinstance(val, int)


def test_misc_udof_matches_brute_force():
    for Q in range(8, 201):
        assert udof(misc_geometry(Q).positions) == misc_udof_closed_form(Q), Q


@pytest.mark.parametrize("Q, expected", [(20, (1, 7, 1)), (9, (1, 1, 2)), (100, (1, 47, 1))])
def test_misc_weights_closed_form(Q, expected):
    assert misc_weights_closed_form(Q) == expected


def test_misc_geometry_weights_vs_published():
    # w(1) and w(3) agree for Q >= 12; w(2) is one above the published value
    for Q in range(12, 201):
        w1, w2, w3 = first_weights(difference_coarray(misc_geometry(Q)))
        c1, c2, c3 = misc_weights_closed_form(Q)
        assert (w1, w3) == (c1, c3)
        assert w2 == c2 + 1


@pytest.mark.xfail(strict=True, reason="transcribed MISC has w(2) = 2*floor(Q/4) - 2, one above the published formula")
def test_misc_geometry_q20_w2_published():
    assert difference_coarray(misc_geometry(20)).w(2) == 7


# -- coupling -------------------------------------------------------------------


def test_zero_coupling_is_identity():
    g = imisc_geometry(12)
    assert np.array_equal(coupling_matrix(g, CouplingModel(0)), np.eye(12))
    assert coupling_leakage(g, CouplingModel(0)) == 0.0


def test_two_sensor_matrix():
    C = coupling_matrix(ArrayGeometry((0, 1)), CouplingModel(A1, band=100))
    assert C[0, 1] == pytest.approx(A1)
    assert C[1, 0] == pytest.approx(A1)
    assert C[0, 0] == C[1, 1] == 1


def test_coefficient_law():
    a = CouplingModel(A1).coefficients()
    assert len(a) == 101
    assert a[0] == 1
    assert a[1] == A1
    mags = np.abs(a)
    assert np.all(np.diff(mags) < 0)
    assert abs(a[4] / a[2]) == pytest.approx(0.5)
    for i, j in [(1, 7), (3, 5), (2, 100)]:
        assert abs(a[i] / a[j]) == pytest.approx(j / i)
    assert a[3] == pytest.approx(A1 * cmath.exp(-2j * math.pi / 8) / 3)


def test_band_cutoff():
    g = ArrayGeometry((0, 1, 5))
    C = coupling_matrix(g, CouplingModel(A1, band=3))
    assert C[0, 2] == 0 and C[1, 2] == 0
    assert C[0, 1] == pytest.approx(A1)


@given(positions_st, st.floats(0, 0.9), st.floats(-math.pi, math.pi))
def test_matrix_symmetric_with_unit_diagonal(pos, mag, phase):
    C = coupling_matrix(ArrayGeometry(tuple(pos)), CouplingModel.polar(mag, phase))
    assert np.array_equal(C, C.T)
    assert np.all(np.diag(C) == 1)


@pytest.mark.parametrize("r", [0.1, 0.3, 0.5, 0.9])
def test_two_sensor_leakage(r):
    E = coupling_leakage(ArrayGeometry((0, 1)), CouplingModel(r))
    assert E == pytest.approx(r / math.sqrt(1 + r * r), rel=1e-12)


@settings(max_examples=25)
@given(st.lists(st.integers(0, 80), min_size=2, max_size=12, unique=True).map(sorted))
def test_leakage_increases_with_a1(pos):
    g = ArrayGeometry(tuple(pos))
    E = [coupling_leakage(g, CouplingModel.polar(m)) for m in np.arange(0, 0.51, 0.1)]
    assert all(b > a for a, b in zip(E, E[1:]))


def test_leakage_in_unit_interval():
    for Q in (10, 40, 100):
        E = coupling_leakage(imisc_geometry(Q), CouplingModel(A1))
        assert 0 < E < 1


def test_imisc_below_misc_at_q40():
    model = CouplingModel(A1)
    assert coupling_leakage(imisc_geometry(40), model) < coupling_leakage(misc_geometry(40), model)


def test_coupling_model_validation():
    with pytest.raises(ValueError):
        CouplingModel(1.0)
    with pytest.raises(ValueError):
        CouplingModel(0.2, band=-1)
