import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from orora.core import Pose2, RadarPoint
from orora.uncertainty import NoiseParams, point_covariance, polar_covariances, rotate_covariance


def sampled_covariance(rng_m, azimuth, noise, samples, gen):
    """Empirical covariance of points with independent range and bearing noise."""
    r = rng_m + gen.normal(0.0, noise.sigma_range, samples)
    a = azimuth + gen.normal(0.0, noise.sigma_azimuth, samples)
    return np.cov(np.vstack((r * np.cos(a), r * np.sin(a))))


def frobenius_rel(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


def test_axis_aligned_point():
    cov = point_covariance(RadarPoint.from_polar(1.0, 0.0), NoiseParams(0.1, 0.2))
    np.testing.assert_allclose(cov, [[0.01, 0.0], [0.0, 0.04]], atol=1e-15)


def test_quarter_turn_point():
    cov = point_covariance(RadarPoint.from_polar(2.0, math.pi / 2), NoiseParams(0.1, 0.2))
    np.testing.assert_allclose(cov, [[0.16, 0.0], [0.0, 0.01]], atol=1e-15)


def test_diagonal_point_matches_sampling():
    noise = NoiseParams(0.1, 0.1)
    cov = point_covariance(RadarPoint.from_polar(3.0, math.pi / 4), noise)
    emp = sampled_covariance(3.0, math.pi / 4, noise, 10**6, np.random.default_rng(1))
    assert frobenius_rel(emp, cov) < 0.02


def test_point_at_sensor():
    cov = point_covariance(RadarPoint.from_polar(0.0, 1.0), NoiseParams(0.3, 0.2))
    np.testing.assert_array_equal(cov, [[0.09, 0.0], [0.0, 0.0]])


@pytest.mark.parametrize("sr, sa", [(0.0, 0.1), (0.1, 0.0), (-1.0, 0.1)])
def test_noise_params_positive(sr, sa):
    with pytest.raises(ValueError):
        NoiseParams(sr, sa)


@given(
    st.floats(0.0, 500.0), st.floats(-math.pi, math.pi),
    st.floats(0.01, 1.0), st.floats(1e-4, 0.3),
)
def test_covariance_shape_invariants(r, az, sr, sa):
    noise = NoiseParams(sr, sa)
    cov = point_covariance(RadarPoint.from_polar(r, az), noise)
    np.testing.assert_allclose(cov, cov.T, atol=1e-12)
    eig = np.linalg.eigvalsh(cov)
    assert eig.min() >= -1e-12
    expected = sorted([sr**2, (r * sa) ** 2])
    np.testing.assert_allclose(eig, expected, atol=1e-9, rtol=1e-9)


@given(st.floats(-math.pi, math.pi), st.floats(0.01, 1.0), st.floats(1e-4, 0.3))
def test_largest_eigenvalue_grows_with_range(az, sr, sa):
    noise = NoiseParams(sr, sa)
    ranges = np.linspace(0.0, 200.0, 50)
    top = [np.linalg.eigvalsh(point_covariance(RadarPoint.from_polar(r, az), noise))[-1] for r in ranges]
    assert all(b >= a - 1e-12 for a, b in zip(top, top[1:]))


def test_vectorised_matches_scalar():
    gen = np.random.default_rng(3)
    r = gen.uniform(0, 100, 20)
    a = gen.uniform(-math.pi, math.pi, 20)
    noise = NoiseParams()
    stack = polar_covariances(r, a, noise)
    for k in range(20):
        np.testing.assert_allclose(stack[k], point_covariance(RadarPoint.from_polar(r[k], a[k]), noise))


def test_rotate_identity_and_quarter_turn():
    cov = np.array([[2.0, 0.3], [0.3, 5.0]])
    np.testing.assert_allclose(rotate_covariance(cov, 0.0), cov)
    np.testing.assert_allclose(rotate_covariance(np.diag([1.0, 4.0]), math.pi / 2), np.diag([4.0, 1.0]), atol=1e-15)


def test_rotate_thirty_degrees():
    c, s = math.cos(math.radians(30)), math.sin(math.radians(30))
    # R diag(1, 4) R^T by hand
    expected = np.array([[c * c + 4 * s * s, c * s - 4 * s * c], [c * s - 4 * s * c, s * s + 4 * c * c]])
    np.testing.assert_allclose(rotate_covariance(np.diag([1.0, 4.0]), math.radians(30)), expected, atol=1e-15)
    np.testing.assert_allclose(
        rotate_covariance(np.diag([1.0, 4.0]), Pose2(math.radians(30), (5.0, 1.0))), expected, atol=1e-15
    )


@given(st.floats(-10, 10), st.floats(0.0, 10.0), st.floats(0.0, 10.0), st.floats(-3, 3))
def test_rotation_preserves_trace(angle, a, b, off):
    cov = np.array([[a, off], [off, b]])
    assert np.trace(rotate_covariance(cov, angle)) == pytest.approx(np.trace(cov), abs=1e-9)


def test_matches_sampling_over_random_points():
    gen = np.random.default_rng(11)
    for _ in range(100):
        r = gen.uniform(1.0, 100.0)
        a = gen.uniform(-math.pi, math.pi)
        noise = NoiseParams(gen.uniform(0.05, 0.5), gen.uniform(0.001, 0.05))
        emp = sampled_covariance(r, a, noise, 10**5, gen)
        assert frobenius_rel(emp, point_covariance(RadarPoint.from_polar(r, a), noise)) < 0.05
