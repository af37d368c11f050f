"""Downlink SIR coverage of a Poisson network with double shadowed desired fading.

The typical user sits at the origin and is served by the nearest base
station; noise is ignored. Two evaluations are provided:

``coverage_closed_form``
    Finite sum over mixture components, Gauss-Hermite terms and integer
    partitions, with one ``e_h0`` and a handful of ``e_hq`` values per
    distinct ``Omega_i * b_l``.

``coverage_radial_integral``
    Conditions on the serving distance ``r`` and integrates numerically
    against its Rayleigh density. The ``j``-th derivative of the conditional
    Laplace functional is formed with complete Bell polynomials rather than
    partition sums, so the two routes share only the interference functionals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InconsistencyError, InvalidArgumentError
from .fading import DEFAULT_GHQ_ORDER, DoubleShadowedParams, GhqMixture, build_ghq_mixture
from .interference import DEFAULT_TOL, FadingModel, Rayleigh, e_h0, e_hq
from .mathkit import integrate_semi_infinite
from .partitions import a_coefficient, b_coefficient, enumerate_tj

# closed-form excursions outside [0, 1] larger than this are treated as bugs
CLAMP_SLACK = 1e-6


@dataclass(frozen=True)
class NetworkConfig:
    density: float = 1e-7
    path_loss_exponent: float = 4.0
    tx_power: float = 1.0

    def __post_init__(self):
        if not (self.density > 0 and math.isfinite(self.density)):
            raise InvalidArgumentError(f"density must be > 0, got {self.density!r}")
        if not (self.path_loss_exponent > 2 and math.isfinite(self.path_loss_exponent)):
            raise InvalidArgumentError("path_loss_exponent must exceed 2")
        if not (self.tx_power > 0 and math.isfinite(self.tx_power)):
            raise InvalidArgumentError(f"tx_power must be > 0, got {self.tx_power!r}")


@dataclass(frozen=True)
class CoverageQuery:
    """SIR threshold (linear) plus the fading laws of the desired and interfering links."""

    theta: float
    desired: DoubleShadowedParams
    interferer: FadingModel = field(default_factory=Rayleigh)
    ghq_order: int = DEFAULT_GHQ_ORDER

    def __post_init__(self):
        if not (self.theta > 0 and math.isfinite(self.theta)):
            raise InvalidArgumentError(f"theta must be finite and > 0, got {self.theta!r}")
        if isinstance(self.ghq_order, bool) or int(self.ghq_order) != self.ghq_order or self.ghq_order < 1:
            raise InvalidArgumentError(f"ghq_order must be a positive integer, got {self.ghq_order!r}")


def db_to_linear(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


@dataclass
class _Functionals:
    """Interference functionals for one effective scale ``x = Omega_i * b_l``."""

    ratio: float        # theta / x
    ratio_pow: float    # (theta / x)**(2/alpha)
    e0: float
    eq: list[float]     # eq[q-1] = E_{h_q}, q = 1 .. max_q


class _FunctionalCache:
    """Sweep-local memo of ``e_h0`` / ``e_hq`` keyed on ``Omega_i * b_l``."""

    def __init__(self, model: FadingModel, theta: float, alpha: float, tol: float):
        self.model = model
        self.theta = theta
        self.alpha = alpha
        self.tol = tol
        self._store: dict[float, _Functionals] = {}

    def get(self, x: float, max_q: int) -> _Functionals:
        f = self._store.get(x)
        if f is None:
            ratio = self.theta / x
            delta = 2.0 / self.alpha
            e0 = e_h0(self.model, (x / self.theta) ** delta, self.alpha, self.tol)
            f = _Functionals(ratio, ratio ** delta, e0, [])
            self._store[x] = f
        while len(f.eq) < max_q:
            f.eq.append(e_hq(self.model, len(f.eq) + 1, f.ratio, self.alpha, self.tol))
        return f


def _check_range(value: float) -> float:
    if value < -CLAMP_SLACK or value > 1.0 + CLAMP_SLACK:
        raise InconsistencyError(f"coverage probability {value!r} is outside [0, 1] beyond slack")
    return min(1.0, max(0.0, value))


def coverage_from_mixture(theta: float, mix: GhqMixture, interferer: FadingModel, alpha: float,
                          tol: float = DEFAULT_TOL, clamp: bool = True) -> float:
    """Closed-form coverage for an explicit desired-signal scale mixture."""
    cache = _FunctionalCache(interferer, theta, alpha, tol)
    scale_factor = 2.0 / alpha
    terms = []
    for comp in mix.base.components:
        max_j = comp.shape - 1
        for a_l, b_l in zip(mix.a, mix.b):
            f = cache.get(comp.scale * b_l, max_j)
            g = 1.0 + f.ratio_pow * f.e0
            scale = scale_factor * f.ratio_pow
            inner = []
            for j in range(max_j + 1):
                sign = -1.0 if j % 2 else 1.0
                for p in enumerate_tj(j):
                    b = b_coefficient(p)
                    a = a_coefficient(p, f.eq, scale)
                    inner.append(a * math.gamma(b) / (sign * g ** b))
            terms.append(a_l * comp.weight * math.fsum(inner))
    value = math.fsum(terms)
    return _check_range(value) if clamp else value


def coverage_closed_form(net: NetworkConfig, q: CoverageQuery, tol: float = DEFAULT_TOL) -> float:
    """Coverage probability ``P(SIR > theta)`` from the finite-sum closed form.

    Independent of ``net.density`` and ``net.tx_power``, which cancel from an
    interference-limited SIR under nearest-BS association.
    """
    mix = build_ghq_mixture(q.desired, q.ghq_order)
    return coverage_from_mixture(q.theta, mix, q.interferer, net.path_loss_exponent, tol)


def _complete_bell(xs: list[np.ndarray], n: int) -> np.ndarray:
    """Complete Bell polynomial ``B_n(x_1, ..., x_n)`` by the binomial recurrence."""
    bell = [np.ones_like(xs[0]) if xs else np.ones(1)]
    for k in range(n):
        bell.append(sum(math.comb(k, i) * bell[k - i] * xs[i] for i in range(k + 1)))
    return bell[n]


def coverage_radial_integral(net: NetworkConfig, q: CoverageQuery, tol: float = 1e-11) -> float:
    """Coverage probability by numerical integration over the serving distance.

    Conditioned on ``r``, the coverage is
    ``sum_i sum_l C_i a_l sum_j (-1)**j / j! * d^j/dz^j exp(g(z; r))`` at
    ``z = 1``, where ``g`` is the log-Laplace functional of the interference
    beyond ``r``. Its ``z``-derivatives at one are
    ``g_0 = -pi*lam*r^2 (theta/x)^(2/alpha) E_h0`` and
    ``g_q = 2*pi*lam*r^2/alpha (-1)^q (theta/x)^(2/alpha) E_hq``, and
    ``d^j exp(g) = exp(g_0) * B_j(g_1, ..., g_j)``.
    """
    alpha = net.path_loss_exponent
    lam = net.density
    mix = build_ghq_mixture(q.desired, q.ghq_order)
    cache = _FunctionalCache(q.interferer, q.theta, alpha, DEFAULT_TOL)
    plan = []
    for comp in mix.base.components:
        max_j = comp.shape - 1
        for a_l, b_l in zip(mix.a, mix.b):
            f = cache.get(comp.scale * b_l, max_j)
            plan.append((comp.weight * a_l, max_j, f))

    def integrand(r):
        area = math.pi * lam * r * r
        density = 2.0 * math.pi * lam * r * np.exp(-area)
        total = np.zeros_like(r)
        for weight, max_j, f in plan:
            g0 = -area * f.ratio_pow * f.e0
            derivs = [(2.0 * area / alpha) * (-1.0) ** qq * f.ratio_pow * f.eq[qq - 1]
                      for qq in range(1, max_j + 1)]
            cond = np.zeros_like(r)
            for j in range(max_j + 1):
                cond = cond + (-1.0) ** j / math.factorial(j) * _complete_bell(derivs, j)
            total = total + weight * np.exp(g0) * cond
        return density * total

    value = integrate_semi_infinite(integrand, 0.0, tol=tol, scale=1.0 / math.sqrt(math.pi * lam))
    return _check_range(value)


def coverage_sweep(net: NetworkConfig, thetas, desired: DoubleShadowedParams,
                   interferer: FadingModel, ghq_order: int = DEFAULT_GHQ_ORDER,
                   radial: bool = False, workers: int = 1) -> np.ndarray:
    """Closed-form (or radial-integral) coverage over an array of linear thresholds."""
    thetas = [float(t) for t in np.atleast_1d(thetas)]
    fn = coverage_radial_integral if radial else coverage_closed_form

    def one(theta):
        return fn(net, CoverageQuery(theta, desired, interferer, ghq_order))

    if workers > 1 and len(thetas) > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return np.array(list(pool.map(one, thetas)))
    return np.array([one(t) for t in thetas])
