import math

import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings, strategies as st

from imisc.coarray import CouplingModel, difference_coarray
from imisc.estimation import (
    IdentifiabilityError,
    SourceScene,
    coarray_music,
    lag_average,
    model_covariance,
    music_estimate,
    rmse,
    sample_covariance,
    spatial_smoothing,
    steering_matrix,
    steering_vector,
    synthesize_snapshots,
    uniform_angles,
)
from imisc.geometry import ArrayGeometry, imisc_geometry

from oracles import lag_truth

G10 = imisc_geometry(10)


def test_steering_broadside_is_ones():
    npt.assert_array_equal(steering_vector(G10, 0.0), np.ones(10))


def test_steering_phase():
    v = steering_vector(ArrayGeometry((0, 1)), 89.9)
    assert v[0] == 1
    assert np.angle(v[1]) == pytest.approx(math.pi * math.sin(math.radians(89.9)))


@given(st.floats(-89.0, 89.0))
def test_steering_conjugate_symmetry(theta):
    npt.assert_allclose(steering_vector(G10, -theta), steering_vector(G10, theta).conj(), atol=1e-12)


def test_steering_rejects_endfire():
    with pytest.raises(ValueError):
        steering_vector(G10, 90.0)
    with pytest.raises(ValueError):
        steering_matrix(G10, [10.0, -95.0])


def test_scene_validation():
    with pytest.raises(ValueError):
        SourceScene((10.0, 5.0), (1.0, 1.0))
    with pytest.raises(ValueError):
        SourceScene((10.0,), (0.0,))
    with pytest.raises(ValueError):
        SourceScene((), ())
    s = SourceScene.from_snr([0.0, 10.0], 10.0)
    assert s.powers == (10.0, 10.0) and s.noise_power == 1.0


def test_noiseless_single_source_is_rank_one():
    scene = SourceScene((20.0,), (4.0,), noise_power=0.0)
    snaps = synthesize_snapshots(G10, scene, None, 1, seed=3)
    x = snaps.data[:, 0]
    g = x[0]  # the sensor at position 0 has unit steering gain
    npt.assert_allclose(x, g * steering_vector(G10, 20.0), atol=1e-12)


def test_snapshot_determinism():
    scene = SourceScene.from_snr([-10.0, 25.0], 0.0)
    a = synthesize_snapshots(G10, scene, CouplingModel(0.2), 50, seed=[7, 1])
    b = synthesize_snapshots(G10, scene, CouplingModel(0.2), 50, seed=[7, 1])
    assert a.T == 50
    assert np.array_equal(a.data, b.data)


def test_sample_covariance_converges():
    scene = SourceScene((-20.0, 15.0), (2.0, 1.0), noise_power=0.5)
    coupling = CouplingModel.polar(0.3)
    T = 200_000
    R = sample_covariance(synthesize_snapshots(G10, scene, coupling, T, seed=11))
    R0 = model_covariance(G10, scene, coupling)
    # O(T^-1/2) with generous constant
    assert np.max(np.abs(R - R0)) < 10 * np.max(np.abs(R0)) / math.sqrt(T)


def test_sample_covariance_identities():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((6, 9)) + 1j * rng.standard_normal((6, 9))
    R = sample_covariance(X)
    npt.assert_allclose(R, R.conj().T, atol=0)
    assert np.trace(R).real == pytest.approx(np.sum(np.abs(X) ** 2) / 9)
    assert np.min(np.linalg.eigvalsh(R)) > -1e-12
    R1 = sample_covariance(X[:, 0])
    assert np.linalg.matrix_rank(R1) == 1


def test_lag_average_identity():
    prof = difference_coarray(G10)
    z = lag_average(np.eye(10), prof, G10)
    assert len(z) == 59
    expected = np.zeros(59)
    expected[29] = 1
    npt.assert_allclose(z, expected)


def test_lag_average_divisor_is_weight():
    prof = difference_coarray(G10)
    pos = np.array(G10.positions)
    diff = pos[:, None] - pos[None, :]
    Rx = np.where(diff == 2, np.arange(100.0).reshape(10, 10), 0).astype(complex)
    z = lag_average(Rx, prof, G10)
    assert z[29 + 2] == pytest.approx(Rx[diff == 2].sum() / prof.w(2))


@pytest.mark.parametrize("Q", [10, 16, 23])
def test_lag_average_of_exact_covariance(Q):
    g = imisc_geometry(Q)
    prof = difference_coarray(g)
    scene = SourceScene((-41.0, -3.5, 12.0, 50.0), (1.0, 2.0, 0.5, 3.0), noise_power=0.7)
    z = lag_average(model_covariance(g, scene), prof, g)
    L = prof.consecutive_bound
    npt.assert_allclose(z, lag_truth(scene.angles, scene.powers, scene.noise_power, L), atol=1e-11)
    npt.assert_allclose(z, z[::-1].conj(), atol=1e-13)


def test_smoothing_of_delta():
    z = np.zeros(59, complex)
    z[29] = 1
    npt.assert_allclose(spatial_smoothing(z), np.eye(30) / 30)


def test_smoothing_rejects_asymmetric():
    z = np.zeros(5, complex)
    z[0] = 1
    with pytest.raises(ValueError):
        spatial_smoothing(z)
    with pytest.raises(ValueError):
        spatial_smoothing(np.ones(4))


def test_smoothing_single_source_rank_one():
    L = 29
    z = lag_truth([17.0], [1.0], 0.0, L)
    Rss = spatial_smoothing(z)
    w, V = np.linalg.eigh(Rss)
    assert w[-1] > 0
    assert np.all(np.abs(w[:-1]) < 1e-12 * w[-1])
    a = np.exp(1j * np.pi * np.arange(L + 1) * math.sin(math.radians(17.0)))
    assert abs(np.vdot(V[:, -1], a)) ** 2 / np.vdot(a, a).real == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-80, 80), min_size=1, max_size=5, unique=True),
       st.floats(0.0, 2.0), st.integers(0, 2**31))
def test_smoothing_is_hermitian_psd(angles, noise, seed):
    rng = np.random.default_rng(seed)
    powers = rng.uniform(0.1, 3, len(angles))
    z = lag_truth(sorted(angles), powers, noise, 20)
    Rss = spatial_smoothing(z)
    npt.assert_allclose(Rss, Rss.conj().T, atol=0)
    assert np.min(np.linalg.eigvalsh(Rss)) > -1e-9 * np.max(np.abs(Rss))


def test_smoothing_dimension_q10():
    prof = difference_coarray(G10)
    Rss = spatial_smoothing(lag_average(np.eye(10), prof, G10))
    assert Rss.shape == (30, 30)


def test_music_single_source_on_grid():
    scene = SourceScene((12.34,), (1.0,), noise_power=0.0)
    res = coarray_music(model_covariance(G10, scene), G10, 1)
    assert res.resolved
    assert res.estimates[0] == pytest.approx(12.34, abs=1e-9)
    assert np.all(res.spectrum > 0)
    assert np.isin(res.estimates, res.grid).all()


def test_music_refinement_off_grid():
    scene = SourceScene((12.345,), (1.0,), noise_power=0.1)
    R = model_covariance(G10, scene)
    coarse = coarray_music(R, G10, 1, grid_step=0.1)
    fine = coarray_music(R, G10, 1, grid_step=0.1, refine=True)
    assert abs(fine.estimates[0] - 12.345) < abs(coarse.estimates[0] - 12.345)


def test_music_many_sources_large_T():
    g = imisc_geometry(12)
    angles = [-40.0, -22.5, -5.0, 8.26, 30.0, 47.5]
    scene = SourceScene.from_snr(angles, 20.0)
    snaps = synthesize_snapshots(g, scene, None, 10_000, seed=5)
    res = coarray_music(sample_covariance(snaps), g, len(angles))
    assert res.resolved
    assert np.max(np.abs(res.estimates - angles)) <= 0.02 + 1e-9


def test_music_too_many_sources():
    with pytest.raises(IdentifiabilityError):
        music_estimate(np.eye(5), 5)


def test_music_flags_missing_peaks():
    # 5x5 smoothed covariance of one source: the spectrum has only 3 local maxima
    res = music_estimate(spatial_smoothing(lag_truth([10.0], [1.0], 0.0, 4)), 4, grid_step=1.0)
    assert res.n_peaks == 3
    assert not res.resolved
    assert len(res.estimates) == 3


def test_uniform_angles():
    npt.assert_allclose(uniform_angles(3), [-60, 0, 60])
    npt.assert_allclose(uniform_angles(1), [0.0])


def test_rmse_examples():
    assert rmse([[1.0, 2.0]], [1.0, 2.0]).value == 0
    assert rmse([[10.1]], [10.0]).value == pytest.approx(0.1)
    r = rmse([[0.3], [0.4]], [0.0])
    assert r.value == pytest.approx(math.sqrt((0.09 + 0.16) / 2))
    assert r.trials == 2 and r.failed == 0


def test_rmse_pairs_sorted_estimates():
    assert rmse([[20.0, -10.0]], [-10.0, 20.0]).value == 0


def test_rmse_excludes_failures():
    r = rmse([[0.3], None, [0.4]], [0.0])
    assert r.failed == 1 and r.trials == 3
    assert r.value == pytest.approx(math.sqrt(0.125))
    bad = rmse([None, None], [0.0])
    assert not bad.ok and math.isnan(bad.value)
