import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from orora.core import CorrespondenceSet, DegenerateError, Pose2
from orora.gnc import (
    MU_FLOOR,
    GncConfig,
    TimSet,
    build_tims,
    estimate_rotation,
    initialize,
    residuals,
    run_gnc,
    solve_weighted_rotation,
    surrogate_objective,
    tls_weights,
)
from orora.oracles import oracle_rotation
from orora.synth import SceneSpec, generate_pair
from orora.uncertainty import NoiseParams


def rotated_tims(angle, count, gen, scale=20.0):
    alpha = gen.uniform(-scale, scale, (count, 2))
    c, s = math.cos(angle), math.sin(angle)
    beta = alpha @ np.array([[c, -s], [s, c]]).T
    return TimSet.from_vectors(alpha, beta)


def test_pure_translation_tims_are_equal():
    corr = CorrespondenceSet.from_arrays([[0.0, 0.0], [1.0, 0.0]], [[1.0, 1.0], [2.0, 1.0]])
    tims = build_tims(corr)
    assert len(tims) == 2
    np.testing.assert_allclose(tims.alpha, tims.beta)


def test_open_chain_drops_wrap():
    corr, _, _ = generate_pair(SceneSpec(6, seed=1))
    assert len(build_tims(corr, "closed")) == 6
    assert len(build_tims(corr, "open")) == 5
    with pytest.raises(DegenerateError):
        build_tims(corr.subset([0]))


def test_tims_follow_the_rotation():
    pose = Pose2(0.6, (4.0, -2.0))
    corr, _, _ = generate_pair(SceneSpec(5, pose=pose, seed=2))
    tims = build_tims(corr)
    np.testing.assert_allclose(tims.beta, tims.alpha @ pose.rotation.T, atol=1e-12)
    # prior ranges are the scan t-1 ranges of the two endpoints
    ranges = corr.dst_polar[:, 0]
    np.testing.assert_array_equal(tims.prior_ranges, np.column_stack((ranges, np.roll(ranges, -1))))


def test_single_quarter_turn():
    tims = TimSet.from_vectors([[1.0, 0.0]], [[0.0, 1.0]])
    assert solve_weighted_rotation(tims, [1.0]) == pytest.approx(math.pi / 2, abs=1e-15)


def test_zero_weights_exclude_measurements():
    gen = np.random.default_rng(0)
    tims = TimSet.from_vectors(gen.normal(size=(10, 2)), gen.normal(size=(10, 2)))
    w = gen.uniform(0.1, 1.0, 10)
    w[[2, 5, 7]] = 0.0
    keep = w > 0
    reduced = TimSet.from_vectors(tims.alpha[keep], tims.beta[keep])
    assert solve_weighted_rotation(tims, w) == pytest.approx(
        solve_weighted_rotation(reduced, w[keep]), abs=1e-15
    )


def test_noiseless_weighted_rotation_matches_grid():
    gen = np.random.default_rng(1)
    tims = rotated_tims(math.radians(37), 50, gen)
    w = gen.uniform(1e-3, 1.0, 50)
    angle = solve_weighted_rotation(tims, w)
    assert angle == pytest.approx(math.radians(37), abs=1e-9)
    grid = oracle_rotation(tims.alpha, tims.beta, w, step=math.radians(0.001))
    assert abs(grid - angle) <= math.radians(0.001)


def test_noisy_weighted_rotation_matches_grid():
    gen = np.random.default_rng(2)
    for _ in range(5):
        tims = TimSet.from_vectors(gen.normal(size=(30, 2)), gen.normal(size=(30, 2)))
        w = gen.uniform(0.0, 1.0, 30)
        angle = solve_weighted_rotation(tims, w)
        grid = oracle_rotation(tims.alpha, tims.beta, w, step=1e-4)
        assert abs(math.remainder(grid - angle, 2 * math.pi)) <= 1e-4


def test_rotation_unobservable():
    with pytest.raises(DegenerateError):
        solve_weighted_rotation(TimSet.from_vectors([[0.0, 0.0]], [[1.0, 0.0]]), [1.0])


@given(st.floats(1e-6, 1e6))
def test_weight_scaling_invariance(scale):
    gen = np.random.default_rng(3)
    tims = TimSet.from_vectors(gen.normal(size=(20, 2)), gen.normal(size=(20, 2)))
    w = gen.uniform(0.0, 1.0, 20)
    assert solve_weighted_rotation(tims, w * scale) == pytest.approx(
        solve_weighted_rotation(tims, w), abs=1e-12
    )


def test_weight_examples():
    assert tls_weights(np.array([0.0]), 1.0, 1.0)[0] == 1.0
    assert tls_weights(np.array([10.0]), 1.0, 1.0)[0] == 0.0
    assert tls_weights(np.array([1.0]), 1.0, 1.0)[0] == pytest.approx(math.sqrt(2) - 1, abs=1e-12)


@given(st.floats(1e-6, 1e3), st.floats(0.05, 5.0))
def test_weight_continuity_and_monotonicity(mu, cbar):
    c2 = cbar * cbar
    for edge in (mu / (mu + 1) * c2, (mu + 1) / mu * c2):
        below = tls_weights(np.array([np.nextafter(edge, 0.0)]), mu, cbar)[0]
        above = tls_weights(np.array([edge]), mu, cbar)[0]
        assert abs(below - above) < 1e-9
    r = np.linspace(0.0, 3.0 * (mu + 1) / mu * c2, 500)
    w = tls_weights(r, mu, cbar)
    assert np.all(np.diff(w) <= 1e-15)
    assert np.all((w >= 0) & (w <= 1))


def test_prior_weights_equal_ranges():
    tims = TimSet.from_vectors(np.eye(2), np.eye(2), np.full((2, 2), 7.0))
    np.testing.assert_array_equal(initialize(tims, GncConfig()).prior_weights, [1.0, 1.0])


def test_prior_weights_mixed_ranges():
    ranges = np.array([[5.0, 10.0], [10.0, 20.0], [20.0, 5.0]])
    gen = np.random.default_rng(4)
    tims = TimSet.from_vectors(gen.normal(size=(3, 2)), gen.normal(size=(3, 2)), ranges)
    spread = [math.sqrt(a * a + b * b) for a, b in ranges]
    expected = [min(spread) / s for s in spread]
    np.testing.assert_allclose(initialize(tims, GncConfig()).prior_weights, expected, rtol=1e-15)


def test_noiseless_start_hits_mu_floor():
    tims = rotated_tims(0.4, 10, np.random.default_rng(5))
    state = initialize(tims, GncConfig())
    assert state.mu == MU_FLOOR
    np.testing.assert_array_equal(state.weights, np.ones(10))


def test_initial_mu_from_largest_residual():
    gen = np.random.default_rng(6)
    tims = TimSet.from_vectors(gen.uniform(-10, 10, (20, 2)), gen.uniform(-10, 10, (20, 2)))
    cfg = GncConfig(cbar=1.0)
    state = initialize(tims, cfg)
    r_max = residuals(tims, state.rotation).max()
    assert state.mu == pytest.approx(1.0 / (2 * r_max - 1.0), rel=1e-12)


def test_pure_translation_gives_zero_rotation():
    corr, _, _ = generate_pair(SceneSpec(30, pose=Pose2(0.0, (2.0, -1.0)), seed=7))
    assert estimate_rotation(corr).rotation == pytest.approx(0.0, abs=1e-9)


def test_noiseless_rotation_recovered():
    state = run_gnc(rotated_tims(math.radians(25), 100, np.random.default_rng(8)), GncConfig())
    assert state.rotation == pytest.approx(math.radians(25), abs=1e-6)
    np.testing.assert_array_equal(state.weights, np.ones(100))
    assert state.converged


def contaminated_tims(seed, ratio=0.7):
    noise = NoiseParams(0.1, 0.018)
    pose = Pose2(math.radians(25), (1.0, 2.0))
    corr, _, _ = generate_pair(
        SceneSpec(100, pose=pose, noise=noise, noise_model="bounded", seed=seed)
    )
    tims = build_tims(corr)
    gen = np.random.default_rng(seed + 1000)
    bad = gen.choice(100, int(ratio * 100), replace=False)
    beta = tims.beta.copy()
    beta[bad] = gen.uniform(-50, 50, (len(bad), 2))
    return TimSet(tims.alpha, beta, tims.prior_ranges)


def test_rotation_survives_heavy_contamination():
    hits = 0
    for seed in range(100):
        state = run_gnc(contaminated_tims(seed), GncConfig())
        hits += abs(math.remainder(state.rotation - math.radians(25), 2 * math.pi)) < math.radians(0.5)
    assert hits >= 95


def test_mu_trace_and_half_steps():
    cfg = GncConfig()
    for seed in range(20):
        state = run_gnc(contaminated_tims(seed, 0.4), cfg)
        mu0 = state.mu_history[0]
        for n, mu in enumerate(state.mu_history):
            assert mu == mu0 * cfg.kappa**n
        for step in state.half_steps:
            assert step.rotation_after <= step.rotation_before + 1e-9 * max(1.0, step.rotation_before)
            assert step.weights_after <= step.weights_before + 1e-9 * max(1.0, step.weights_before)


def test_surrogate_objective_at_unit_weights():
    res = np.array([0.5, 2.0])
    assert surrogate_objective(res, np.ones(2), 1.0, 1.0) == pytest.approx(2.5)
    assert surrogate_objective(res, np.zeros(2), 2.0, 1.0) == pytest.approx(2.0)


def test_config_validation():
    for bad in ({"cbar": 0.0}, {"kappa": 1.0}, {"convergence_tol": 0.0}, {"max_iterations": -1},
                {"tim_chain": "ring"}):
        with pytest.raises(ValueError):
            GncConfig(**bad)
