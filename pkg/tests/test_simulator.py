import math

import numpy as np
import pytest
from scipy import stats

from pppcov.coverage import CoverageQuery, NetworkConfig, coverage_closed_form, db_to_linear
from pppcov.errors import InvalidArgumentError
from pppcov.fading import DoubleShadowedParams, KappaMuShadowedParams
from pppcov.interference import Rayleigh
from pppcov.simulator import (BLOCK_SIZE, CoverageEstimate, SimConfig, block_rng, draw_realizations,
                              sample_sir, simulate_coverage, simulate_coverage_sweep, simulate_sir,
                              sir_from_layout)

NET = NetworkConfig()
RAYLEIGH_DESIRED = DoubleShadowedParams(KappaMuShadowedParams(1.0, 1, 1), 0.0)


def test_sim_config_validation():
    with pytest.raises(InvalidArgumentError):
        SimConfig(realizations=0)
    with pytest.raises(InvalidArgumentError):
        SimConfig(window_radius_factor=4.0)
    with pytest.raises(InvalidArgumentError):
        SimConfig(seed=-1)
    with pytest.raises(InvalidArgumentError):
        SimConfig(workers=0)
    assert SimConfig(window_radius_factor=15.0).window_radius(1e-7) == pytest.approx(15.0 / math.sqrt(math.pi * 1e-7))


def test_half_width_formula():
    est = CoverageEstimate.from_counts(300, 1000)
    assert est.p_hat == 0.3
    assert est.half_width_95 == pytest.approx(1.96 * math.sqrt(0.3 * 0.7 / 1000))
    assert est.realizations_used == 1000


def test_single_station_is_infinite_sir():
    assert sir_from_layout([120.0], 1.0, [], 4.0) == math.inf


def test_two_station_layout():
    r1, r2, alpha = 40.0, 100.0, 3.7
    assert sir_from_layout([r2, r1], 1.0, [1.0], alpha) == pytest.approx((r2 / r1) ** alpha, rel=1e-14)
    assert sir_from_layout([r1, r2], 1.0, [1.0], alpha, tx_power=7.0) == pytest.approx((r2 / r1) ** alpha, rel=1e-14)


def test_layout_validation():
    with pytest.raises(InvalidArgumentError):
        sir_from_layout([], 1.0, [], 4.0)
    with pytest.raises(InvalidArgumentError):
        sir_from_layout([1.0, 2.0], 1.0, [1.0, 1.0], 4.0)


def test_serving_distance_law():
    q = CoverageQuery(1.0, RAYLEIGH_DESIRED, Rayleigh())
    _, r = draw_realizations(NET, q, SimConfig(), block_rng(1, 0), 100_000)
    d = stats.kstest(r, lambda x: -np.expm1(-math.pi * NET.density * x * x)).statistic
    assert d <= 0.01


def test_sample_sir_scalar():
    q = CoverageQuery(1.0, RAYLEIGH_DESIRED, Rayleigh())
    assert sample_sir(NET, q, SimConfig(), np.random.default_rng(3)) > 0


def test_tiny_threshold_always_covered():
    q = CoverageQuery(1e-9, RAYLEIGH_DESIRED, Rayleigh())
    assert simulate_coverage(NET, q, SimConfig(realizations=10_000, seed=4)).p_hat >= 0.999


def test_rayleigh_baseline_mc():
    q = CoverageQuery(1.0, RAYLEIGH_DESIRED, Rayleigh())
    est = simulate_coverage(NET, q, SimConfig(realizations=100_000, seed=8))
    assert abs(est.p_hat - 1.0 / (1.0 + math.pi / 4)) <= 0.01


def test_double_shadowed_mc_matches_closed_form():
    d = DoubleShadowedParams(KappaMuShadowedParams(1.0, 2, 1), 4.0)
    q = CoverageQuery(1.0, d, Rayleigh())
    est = simulate_coverage(NET, q, SimConfig(realizations=100_000, seed=9))
    assert abs(est.p_hat - coverage_closed_form(NET, q)) <= max(0.01, 3 * est.half_width_95)


def test_density_invariance_same_seed():
    q = CoverageQuery(1.0, RAYLEIGH_DESIRED, Rayleigh())
    sim = SimConfig(realizations=100_000, seed=12)
    a = simulate_coverage(NetworkConfig(density=1e-7), q, sim)
    b = simulate_coverage(NetworkConfig(density=1e-6), q, sim)
    assert abs(a.p_hat - b.p_hat) < a.half_width_95 + b.half_width_95


@pytest.mark.parametrize("theta_db", [-5.0, 0.0, 5.0])
def test_window_truncation(theta_db):
    q = CoverageQuery(float(db_to_linear(theta_db)), RAYLEIGH_DESIRED, Rayleigh())
    small = simulate_coverage(NET, q, SimConfig(realizations=100_000, window_radius_factor=10.0, seed=21))
    large = simulate_coverage(NET, q, SimConfig(realizations=100_000, window_radius_factor=20.0, seed=21))
    assert abs(small.p_hat - large.p_hat) < small.half_width_95


def test_deterministic_across_worker_counts():
    q = CoverageQuery(1.0, RAYLEIGH_DESIRED, Rayleigh())
    n = 3 * BLOCK_SIZE + 17
    one = simulate_sir(NET, q, SimConfig(realizations=n, seed=5, workers=1))
    many = simulate_sir(NET, q, SimConfig(realizations=n, seed=5, workers=4))
    np.testing.assert_array_equal(one, many)
    assert one.size == n
    other = simulate_sir(NET, q, SimConfig(realizations=n, seed=6))
    assert not np.array_equal(one, other)


def test_sweep_shares_realizations():
    q = CoverageQuery(1.0, RAYLEIGH_DESIRED, Rayleigh())
    sim = SimConfig(realizations=20_000, seed=3)
    thetas = [0.5, 1.0, 2.0]
    sweep = simulate_coverage_sweep(NET, q, sim, thetas)
    single = simulate_coverage(NET, CoverageQuery(2.0, RAYLEIGH_DESIRED, Rayleigh()), sim)
    assert sweep[2] == single
    assert sweep[0].p_hat >= sweep[1].p_hat >= sweep[2].p_hat
