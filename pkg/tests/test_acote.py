import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar

from orora.acote import boundary_set, build_measurements, estimate_axis, estimate_translation
from orora.core import CorrespondenceSet, DegenerateError, Pose2
from orora.oracles import oracle_acote
from orora.synth import SceneSpec, generate_pair
from orora.uncertainty import NoiseParams

values_st = st.lists(st.floats(-20, 20), min_size=1, max_size=12)


def instance(draw_values, gen):
    values = np.asarray(draw_values)
    return values, gen.uniform(0.05, 2.0, len(values))


def test_single_vote():
    est = estimate_axis(np.array([3.0]), np.array([0.2]))
    assert est.value == 3.0
    assert list(est.inliers) == [0]


def test_two_close_votes_beat_a_far_one():
    est = estimate_axis(np.array([0.0, 0.1, 5.0]), np.full(3, 0.2))
    assert list(est.inliers) == [0, 1]
    assert est.value == pytest.approx(0.05, abs=1e-12)
    value, members = oracle_acote([0.0, 0.1, 5.0], [0.2] * 3)
    assert members == {0, 1} and value == pytest.approx(0.05, abs=1e-12)


def test_unequal_spreads_follow_the_cost():
    values, sigmas = [0.0, 0.1, 5.0], [0.2, 0.1, 0.2]
    est = estimate_axis(np.array(values), np.array(sigmas))
    value, members = oracle_acote(values, sigmas)
    assert set(est.inliers) == members
    assert est.value == pytest.approx(value, abs=1e-12)
    # the pair {0, 0.1} has inverse-variance mean 0.08 but scores 0.4;
    # the lone vote at 0 scores 0.3 and wins
    assert set(est.inliers) == {0}
    assert est.value == 0.0
    w = 1.0 / np.square(sigmas[:2])
    assert np.dot(w, values[:2]) / w.sum() == pytest.approx(0.08, abs=1e-12)


def test_boundary_set_sorted():
    b = boundary_set(np.array([1.0, 0.0]), np.array([0.5, 0.2]))
    np.testing.assert_allclose(b.values, [-0.2, 0.2, 0.5, 1.5])
    assert list(b.owner) == [1, 1, 0, 0]
    assert list(b.is_upper) == [False, True, False, True]


def test_empty_axis_is_degenerate():
    with pytest.raises(DegenerateError):
        estimate_axis(np.zeros(0), np.zeros(0))


@given(values_st, st.integers(0, 2**32 - 1))
def test_matches_exhaustive_search(values, seed):
    v, s = instance(values, np.random.default_rng(seed))
    est = estimate_axis(v, s)
    value, members = oracle_acote(v, s)
    assert set(est.inliers.tolist()) == members
    assert abs(est.value - value) <= 1e-12


@given(values_st, st.integers(0, 2**32 - 1))
def test_inliers_contain_the_probe(values, seed):
    v, s = instance(values, np.random.default_rng(seed))
    est = estimate_axis(v, s)
    assert np.all((est.probe - v[est.inliers]) ** 2 <= s[est.inliers] ** 2)


@given(values_st, st.integers(0, 2**32 - 1), st.floats(-100, 100))
def test_shift_moves_the_estimate(values, seed, shift):
    v, s = instance(values, np.random.default_rng(seed))
    base = estimate_axis(v, s)
    moved = estimate_axis(v + shift, s)
    # a near-tie between consensus sets can flip under rounding of the shift
    assume(abs(base.cost - moved.cost) < 1e-9)
    assume(set(base.inliers) == set(moved.inliers))
    assert moved.value == pytest.approx(base.value + shift, abs=1e-9)


def test_shift_exact_on_fixed_instances():
    gen = np.random.default_rng(0)
    for _ in range(200):
        v = gen.uniform(-10, 10, 8)
        s = gen.uniform(0.1, 2.0, 8)
        base = estimate_axis(v, s)
        moved = estimate_axis(v + 3.5, s)
        if set(base.inliers) == set(moved.inliers):
            assert moved.value == pytest.approx(base.value + 3.5, abs=1e-9)


@given(
    st.floats(-10, 10),
    st.lists(st.tuples(st.floats(-0.01, 0.01), st.floats(0.5, 2.0)), min_size=1, max_size=12),
)
def test_unanimous_votes_give_global_mean(center, votes):
    # every fit term is below (0.02 / 0.5)^2, so the whole set costs less than
    # dropping any single vote (at least 0.5) and unanimity must win
    v = center + np.array([o for o, _ in votes])
    s = np.array([sd for _, sd in votes])
    w = 1.0 / s**2
    est = estimate_axis(v, s)
    assert len(est.inliers) == len(v)
    assert est.value == pytest.approx(np.dot(w, v) / w.sum(), abs=1e-12)


def test_overlapping_votes_can_still_split():
    # all four intervals share the point 0, yet dropping the first vote costs
    # its spread (0.1) and saves more fit than that
    v = np.array([0.0390625, -0.03125, 0.0, 0.0])
    s = 0.1 + np.linspace(0.0, 0.2, 4)
    assert np.all(np.abs(v) <= s)
    est = estimate_axis(v, s)
    value, members = oracle_acote(v, s)
    assert set(est.inliers) == members == {1, 2, 3}
    assert est.value == pytest.approx(value, abs=1e-12)


def test_consensus_value_minimises_fit():
    gen = np.random.default_rng(1)
    for _ in range(50):
        v = gen.uniform(-5, 5, 10)
        s = gen.uniform(0.2, 3.0, 10)
        est = estimate_axis(v, s)
        vi, si = v[est.inliers], s[est.inliers]
        fit = lambda xi: float(np.sum(((xi - vi) / si) ** 2))  # noqa: E731
        lo, hi = vi.min() - 1.0, vi.max() + 1.0
        gold = minimize_scalar(fit, bracket=(lo, hi), method="golden", tol=1e-10).x
        assert est.value == pytest.approx(gold, abs=1e-6)


def test_equal_votes_of_zero_measurement():
    corr = CorrespondenceSet.from_arrays([[3.0, 4.0]], [[3.0, 4.0]])
    meas = build_measurements(corr, 0.0, NoiseParams())
    np.testing.assert_array_equal(meas.v, [[0.0, 0.0]])


def test_measurement_spread_on_the_axis():
    corr = CorrespondenceSet.from_arrays([[1.0, 0.0]], [[1.0, 0.0]])
    meas = build_measurements(corr, 0.0, NoiseParams(0.1, 0.2))
    np.testing.assert_allclose(meas.sigma, [[math.sqrt(0.02), math.sqrt(0.08)]], atol=1e-15)


def test_measurement_spread_matches_sampling():
    gen = np.random.default_rng(2)
    noise = NoiseParams(0.2, 0.02)
    angle = math.radians(30)
    rot = Pose2(angle).rotation
    samples = 200_000
    for _ in range(10):
        p = gen.uniform(-50, 50, 2)
        q = rot @ p + (1.0, 2.0)
        corr = CorrespondenceSet.from_arrays([p], [q])
        sigma = build_measurements(corr, angle, noise).sigma[0]

        def noisy(point):
            r = np.hypot(*point) + gen.normal(0, noise.sigma_range, samples)
            a = math.atan2(point[1], point[0]) + gen.normal(0, noise.sigma_azimuth, samples)
            return np.column_stack((r * np.cos(a), r * np.sin(a)))

        v = noisy(q) - noisy(p) @ rot.T
        np.testing.assert_allclose(v.std(axis=0), sigma, rtol=0.05)


def test_sigma_floor_applies():
    corr = CorrespondenceSet.from_arrays([[0.0, 0.0]], [[0.0, 0.0]])
    meas = build_measurements(corr, 0.0, NoiseParams(1e-9, 1e-9), sigma_floor=1e-3)
    np.testing.assert_array_equal(meas.sigma, [[1e-3, 1e-3]])


def test_pure_translation_recovered():
    corr, _, _ = generate_pair(SceneSpec(40, pose=Pose2(0.0, (2.0, -1.0)), seed=3))
    t, _ = estimate_translation(corr, 0.0, NoiseParams())
    np.testing.assert_allclose(t, [2.0, -1.0], atol=1e-9)


def test_translation_survives_outliers():
    noise = NoiseParams(0.1, 0.018)
    truth = np.array([3.0, 4.0])
    hits = 0
    for seed in range(100):
        corr, _, _ = generate_pair(
            SceneSpec(100, pose=Pose2(0.0, tuple(truth)), noise=noise, noise_model="bounded", seed=seed)
        )
        meas = build_measurements(corr, 0.0, noise)
        gen = np.random.default_rng(seed + 500)
        v = meas.v.copy()
        bad = gen.choice(100, 60, replace=False)
        v[bad] = gen.uniform(-50, 50, (60, 2))
        ok = True
        for axis in (0, 1):
            est = estimate_axis(v[:, axis], meas.sigma[:, axis])
            ok &= abs(est.value - truth[axis]) < 3 * np.median(meas.sigma[:, axis])
        hits += ok
    assert hits >= 95


def test_axes_are_independent():
    gen = np.random.default_rng(4)
    corr, _, _ = generate_pair(SceneSpec(60, outlier_ratio=0.3, noise=NoiseParams(), seed=4))
    meas = build_measurements(corr, 0.1, NoiseParams())
    x = estimate_axis(meas.v[:, 0], meas.sigma[:, 0])
    perm = gen.permutation(60)
    v = meas.v.copy()
    sigma = meas.sigma.copy()
    v[:, 1], sigma[:, 1] = v[perm, 1], sigma[perm, 1]
    x2 = estimate_axis(v[:, 0], sigma[:, 0])
    assert x.value == x2.value
