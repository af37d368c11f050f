"""Monte Carlo ground truth for SIR coverage in a Poisson network.

Each realization drops a Poisson number of base stations uniformly in a disk
of radius ``R = window_radius_factor / sqrt(pi * lambda)`` around the typical
user, serves the user from the nearest one and sums the rest as interference.
Only distances to the origin enter the SIR, so angles are never drawn.

Realizations are cut into fixed blocks of ``BLOCK_SIZE``; block ``k`` draws
from its own stream seeded by ``SeedSequence(seed, spawn_key=(k,))``. The
estimate therefore does not depend on how many workers process the blocks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .coverage import CoverageQuery, NetworkConfig
from .errors import InvalidArgumentError
from .fading import sample_double_shadowed

BLOCK_SIZE = 5_000
MIN_WINDOW_FACTOR = 5.0


@dataclass(frozen=True)
class SimConfig:
    realizations: int = 100_000
    window_radius_factor: float = 15.0
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if int(self.realizations) != self.realizations or self.realizations < 1:
            raise InvalidArgumentError(f"realizations must be a positive integer, got {self.realizations!r}")
        if not self.window_radius_factor >= MIN_WINDOW_FACTOR:
            raise InvalidArgumentError(
                f"window_radius_factor must be >= {MIN_WINDOW_FACTOR}, got {self.window_radius_factor!r}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2 ** 64:
            raise InvalidArgumentError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if int(self.workers) != self.workers or self.workers < 1:
            raise InvalidArgumentError(f"workers must be a positive integer, got {self.workers!r}")

    def window_radius(self, density: float) -> float:
        return self.window_radius_factor / math.sqrt(math.pi * density)


@dataclass(frozen=True)
class CoverageEstimate:
    p_hat: float
    half_width_95: float
    realizations_used: int

    @classmethod
    def from_counts(cls, successes: int, n: int) -> "CoverageEstimate":
        p = successes / n
        return cls(p, 1.96 * math.sqrt(p * (1.0 - p) / n), n)


def block_rng(seed: int, block: int) -> np.random.Generator:
    """Independent generator for block ``block`` of a run seeded with ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(block),)))


def sir_from_layout(distances, desired_gain: float, interferer_gains, alpha: float,
                    tx_power: float = 1.0) -> float:
    """SIR at the origin for explicit base-station distances and fading gains.

    The nearest station serves with ``desired_gain``; ``interferer_gains``
    lists the gains of the remaining stations in the order they appear in
    ``distances`` with the serving entry removed. Returns ``inf`` when there is
    no interferer.
    """
    d = np.asarray(distances, dtype=float)
    if d.size == 0:
        raise InvalidArgumentError("at least one base station is required")
    k = int(np.argmin(d))
    others = np.delete(d, k)
    gains = np.asarray(interferer_gains, dtype=float)
    if gains.shape != others.shape:
        raise InvalidArgumentError("need one interferer gain per non-serving station")
    signal = tx_power * desired_gain * d[k] ** -alpha
    interference = float(np.sum(tx_power * gains * others ** -alpha))
    return math.inf if interference == 0.0 else signal / interference


def draw_realizations(net: NetworkConfig, q: CoverageQuery, sim: SimConfig,
                      rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``n`` independent realizations; returns (SIR, serving distance) arrays."""
    alpha = net.path_loss_exponent
    radius = sim.window_radius(net.density)
    mean_count = net.density * math.pi * radius * radius
    counts = rng.poisson(mean_count, n)
    # empty windows are redrawn
    empty = counts == 0
    while empty.any():
        counts[empty] = rng.poisson(mean_count, int(empty.sum()))
        empty = counts == 0
    total = int(counts.sum())
    radii = radius * np.sqrt(rng.random(total))
    desired = np.asarray(sample_double_shadowed(q.desired, rng, n))
    gains = np.asarray(q.interferer.sample(rng, total), dtype=float)

    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    serving_r = np.minimum.reduceat(radii, starts)
    seg = np.repeat(np.arange(n), counts)
    is_serving = radii == serving_r[seg]
    contrib = np.where(is_serving, 0.0, net.tx_power * gains * radii ** -alpha)
    interference = np.bincount(seg, weights=contrib, minlength=n)
    signal = net.tx_power * desired * serving_r ** -alpha
    with np.errstate(divide="ignore"):
        sir = np.where(interference > 0, signal / np.where(interference > 0, interference, 1.0), np.inf)
    return sir, serving_r


def sample_sir(net: NetworkConfig, q: CoverageQuery, sim: SimConfig, rng: np.random.Generator) -> float:
    """One SIR realization."""
    sir, _ = draw_realizations(net, q, sim, rng, 1)
    return float(sir[0])


def _blocks(total: int):
    n_blocks = -(-total // BLOCK_SIZE)
    return [(k, min(BLOCK_SIZE, total - k * BLOCK_SIZE)) for k in range(n_blocks)]


def simulate_sir(net: NetworkConfig, q: CoverageQuery, sim: SimConfig) -> np.ndarray:
    """All ``sim.realizations`` SIR draws, in block order."""

    def run(block):
        k, n = block
        return draw_realizations(net, q, sim, block_rng(sim.seed, k), n)[0]

    blocks = _blocks(sim.realizations)
    if sim.workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=sim.workers) as pool:
            parts = list(pool.map(run, blocks))
    else:
        parts = [run(b) for b in blocks]
    return np.concatenate(parts)


def coverage_from_sir(sir: np.ndarray, theta: float) -> CoverageEstimate:
    return CoverageEstimate.from_counts(int(np.count_nonzero(sir > theta)), int(sir.size))


def simulate_coverage(net: NetworkConfig, q: CoverageQuery, sim: SimConfig) -> CoverageEstimate:
    """Fraction of realizations with ``SIR > q.theta``."""
    return coverage_from_sir(simulate_sir(net, q, sim), q.theta)


def simulate_coverage_sweep(net: NetworkConfig, q: CoverageQuery, sim: SimConfig, thetas) -> list[CoverageEstimate]:
    """Coverage at several thresholds from one shared set of realizations."""
    sir = simulate_sir(net, q, sim)
    return [coverage_from_sir(sir, float(t)) for t in np.atleast_1d(thetas)]
