"""Kappa-mu shadowed and double shadowed (lognormal x kappa-mu shadowed) fading.

With integer ``mu`` and ``m`` the kappa-mu shadowed power distribution is a
finite, possibly signed, mixture of Gamma laws. Multiplying by an independent
median-one lognormal gain and discretising the lognormal with a Gauss-Hermite
rule turns the double shadowed law into a finite scale mixture of kappa-mu
shadowed laws; both representations live here together with samplers that
use the physical cluster construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError, InconsistencyError, InvalidArgumentError
from .mathkit import binomial, gauss_hermite_rule, integrate_real_line

DEFAULT_GHQ_ORDER = 32
# rounding slack tolerated before a negative density/probability is an error
ROUNDING_SLACK = 1e-12

DB_TO_NEPER = math.log(10.0) / 10.0


def _as_int(name: str, value) -> int:
    if isinstance(value, bool) or int(value) != value:
        raise InvalidArgumentError(f"{name} must be an integer, got {value!r}")
    return int(value)


@dataclass(frozen=True)
class KappaMuShadowedParams:
    """Parameters of a unit-mean kappa-mu shadowed power distribution.

    Attributes
    ----------
    kappa : float
        Ratio of dominant to scattered power, ``>= 0``.
    mu : int
        Number of multipath clusters, ``>= 1``.
    m : int
        Shadowing severity of the dominant components, ``>= 1``.
    """

    kappa: float
    mu: int
    m: int

    def __post_init__(self):
        object.__setattr__(self, "kappa", float(self.kappa))
        object.__setattr__(self, "mu", _as_int("mu", self.mu))
        object.__setattr__(self, "m", _as_int("m", self.m))
        if not (self.kappa >= 0 and math.isfinite(self.kappa)):
            raise InvalidArgumentError(f"kappa must be finite and >= 0, got {self.kappa!r}")
        if self.mu < 1:
            raise InvalidArgumentError(f"mu must be >= 1, got {self.mu}")
        if self.m < 1:
            raise InvalidArgumentError(f"m must be >= 1, got {self.m}")

    @property
    def omega1(self) -> float:
        return self.m / (self.kappa * self.mu + self.m)

    @property
    def omega2(self) -> float:
        return self.kappa * self.mu / (self.kappa * self.mu + self.m)

    @property
    def omega3(self) -> float:
        return 1.0 / (self.mu * (self.kappa + 1.0))


@dataclass(frozen=True)
class GammaComponent:
    weight: float
    shape: int
    scale: float


@dataclass(frozen=True)
class GammaMixture:
    """Signed mixture ``sum_i C_i Gamma(m_i, Omega_i)``."""

    components: tuple[GammaComponent, ...]

    @property
    def weights(self) -> np.ndarray:
        return np.array([c.weight for c in self.components])

    @property
    def shapes(self) -> np.ndarray:
        return np.array([c.shape for c in self.components])

    @property
    def scales(self) -> np.ndarray:
        return np.array([c.scale for c in self.components])

    def total_weight(self) -> float:
        return math.fsum(c.weight for c in self.components)

    def mean(self) -> float:
        return math.fsum(c.weight * c.shape * c.scale for c in self.components)


def build_gamma_mixture(params: KappaMuShadowedParams) -> GammaMixture:
    """Expand the kappa-mu shadowed law with integer ``mu``, ``m`` into Gamma components.

    For ``mu > m`` the weights alternate in sign and contain negative powers of
    ``omega2``, so ``kappa`` must be strictly positive in that branch.
    """
    kappa, mu, m = params.kappa, params.mu, params.m
    w1, w2, w3 = params.omega1, params.omega2, params.omega3
    comps = []
    if mu > m:
        if kappa == 0:
            raise DomainError("kappa must be > 0 when mu > m (the mixture weights diverge at kappa = 0)")
        for i in range(1, mu - m + 1):
            c = binomial(m + i - 2, i - 1) * (-w1) ** m * w2 ** (1 - m - i)
            comps.append(GammaComponent(c, mu - m - i + 1, w3))
        for i in range(mu - m + 1, mu + 1):
            c = binomial(i - 2, i - mu + m - 1) * (-w1) ** (i - mu + m - 1) * w2 ** (1 - i)
            comps.append(GammaComponent(c, mu - i + 1, w3 / w1))
    else:
        for i in range(0, m - mu + 1):
            c = binomial(m - mu, i) * w1 ** i * w2 ** (m - mu - i)
            comps.append(GammaComponent(c, m - i, w3 / w1))
    return GammaMixture(tuple(comps))


def _signed_sum(terms) -> np.ndarray:
    """Neumaier-compensated sum over the first axis."""
    total = np.zeros_like(terms[0], dtype=float)
    comp = np.zeros_like(total)
    for t in terms:
        s = total + t
        comp += np.where(np.abs(total) >= np.abs(t), (total - s) + t, (t - s) + total)
        total = s
    return total + comp


def _check_nonneg_arg(h) -> np.ndarray:
    h_arr = np.asarray(h, dtype=float)
    if np.any(~(h_arr >= 0)):
        raise DomainError("fading power argument must be >= 0")
    return h_arr


def _clamp(value: np.ndarray, hi: float | None, what: str):
    if np.any(value < -ROUNDING_SLACK) or (hi is not None and np.any(value > hi + ROUNDING_SLACK)):
        raise InconsistencyError(f"{what} left its valid range beyond rounding slack")
    value = np.clip(value, 0.0, hi)
    return float(value) if value.ndim == 0 else value


def kms_pdf(mix: GammaMixture, h):
    """Density of the mixture at ``h`` (scalar or array)."""
    h_arr = _check_nonneg_arg(h)
    terms = []
    for c in mix.components:
        log_kernel = (special.xlogy(c.shape - 1, h_arr) - h_arr / c.scale
                      - special.gammaln(c.shape) - c.shape * math.log(c.scale))
        terms.append(c.weight * np.exp(log_kernel))
    return _clamp(_signed_sum(terms), None, "kappa-mu shadowed pdf")


def kms_ccdf(mix: GammaMixture, h):
    """Complementary CDF ``P(H > h)`` of the mixture."""
    h_arr = _check_nonneg_arg(h)
    terms = []
    for c in mix.components:
        x = h_arr / c.scale
        tail = np.zeros_like(x)
        for j in range(c.shape):
            tail = tail + np.exp(special.xlogy(j, x) - x - special.gammaln(j + 1))
        terms.append(c.weight * tail)
    return _clamp(_signed_sum(terms), 1.0, "kappa-mu shadowed ccdf")


@dataclass(frozen=True)
class DoubleShadowedParams:
    """Lognormal shadowing (SD in dB) on top of a kappa-mu shadowed law."""

    base: KappaMuShadowedParams
    sigma_s_db: float

    def __post_init__(self):
        if not (self.sigma_s_db >= 0 and math.isfinite(self.sigma_s_db)):
            raise InvalidArgumentError(f"sigma_s_db must be finite and >= 0, got {self.sigma_s_db!r}")

    @property
    def sigma_tilde(self) -> float:
        """Lognormal SD in nepers."""
        return self.sigma_s_db * DB_TO_NEPER


@dataclass(frozen=True)
class GhqMixture:
    """Scale mixture ``sum_l a_l * law(b_l * H_S)`` from a Gauss-Hermite rule."""

    a: np.ndarray
    b: np.ndarray
    base: GammaMixture
    ghq_order: int

    @property
    def terms(self) -> list[tuple[float, float]]:
        return list(zip(self.a.tolist(), self.b.tolist()))


def build_ghq_mixture(params: DoubleShadowedParams, ghq_order: int = DEFAULT_GHQ_ORDER) -> GhqMixture:
    rule = gauss_hermite_rule(ghq_order)
    a = rule.weights / math.fsum(rule.weights)
    b = np.exp(math.sqrt(2.0) * params.sigma_tilde * rule.nodes)
    a.setflags(write=False)
    b.setflags(write=False)
    return GhqMixture(a, b, build_gamma_mixture(params.base), rule.order)


def single_term_mixture(base: GammaMixture) -> GhqMixture:
    """Degenerate one-term mixture (a=1, b=1): the law of ``H_S`` itself."""
    one = np.ones(1)
    one.setflags(write=False)
    return GhqMixture(one, one, base, 1)


def double_shadowed_pdf_ghq(mix: GhqMixture, h):
    """Gauss-Hermite approximation of the double shadowed density.

    Each term is the density of ``b_l * H_S``, hence the ``1/b_l`` Jacobian.
    """
    h_arr = _check_nonneg_arg(h)
    total = np.zeros_like(h_arr)
    for a_l, b_l in zip(mix.a, mix.b):
        total = total + (a_l / b_l) * np.asarray(kms_pdf(mix.base, h_arr / b_l))
    return float(total) if total.ndim == 0 else total


def double_shadowed_ccdf(mix: GhqMixture, h):
    h_arr = _check_nonneg_arg(h)
    total = np.zeros_like(h_arr)
    for a_l, b_l in zip(mix.a, mix.b):
        total = total + a_l * np.asarray(kms_ccdf(mix.base, h_arr / b_l))
    return _clamp(total, 1.0, "double shadowed ccdf")


def double_shadowed_pdf_exact(params: DoubleShadowedParams, h: float, tol: float = 1e-10) -> float:
    """Exact double shadowed density at ``h > 0`` by numerical quadrature.

    Integrates the product density over the kappa-mu shadowed factor ``h_S``
    component by component. The integral is taken in ``y = ln h_S``, folded
    about ``ln h`` where the lognormal kernel peaks, with the quadrature map
    scaled by the lognormal SD.
    """
    if not h > 0:
        raise DomainError("double_shadowed_pdf_exact requires h > 0")
    sig = params.sigma_tilde
    if sig <= 0:
        raise InvalidArgumentError("double_shadowed_pdf_exact requires sigma_s_db > 0; use kms_pdf")
    mix = build_gamma_mixture(params.base)
    log_h = math.log(h)
    norm = math.log(math.sqrt(2.0 * math.pi) * sig) + log_h
    weight_sum = math.fsum(abs(c.weight) for c in mix.components)
    parts = []
    for c in mix.components:
        const = norm + math.lgamma(c.shape) + c.shape * math.log(c.scale)

        def integrand(y, c=c, const=const):
            y = np.asarray(y, dtype=float)
            with np.errstate(over="ignore"):
                expo = c.shape * y - np.exp(y) / c.scale - (log_h - y) ** 2 / (2.0 * sig * sig) - const
                return np.exp(expo)

        parts.append(c.weight * integrate_real_line(integrand, log_h, tol=tol / weight_sum, scale=sig))
    value = math.fsum(parts)
    return _clamp(np.asarray(value), None, "double shadowed pdf")


def sample_kms(params: KappaMuShadowedParams, rng: np.random.Generator, size=None):
    """Draw kappa-mu shadowed powers from the cluster model.

    Shadowing ``xi**2 ~ Gamma(m, 1/m)`` scales the line-of-sight amplitude
    ``d/sqrt(2*mu)`` (with ``d**2 = kappa/(1+kappa)``) shared by ``2*mu`` real
    Gaussian dimensions of variance ``1/(2*mu*(1+kappa))``; the power is the
    sum of squares.
    """
    n = 1 if size is None else int(np.prod(size))
    dims = 2 * params.mu
    xi = np.sqrt(rng.gamma(params.m, 1.0 / params.m, size=n))
    p = math.sqrt(params.kappa / (1.0 + params.kappa) / dims)
    sd = math.sqrt(1.0 / (dims * (1.0 + params.kappa)))
    x = rng.standard_normal((n, dims)) * sd + (xi * p)[:, None]
    power = np.einsum("ij,ij->i", x, x)
    if size is None:
        return float(power[0])
    return power.reshape(size)


def sample_double_shadowed(params: DoubleShadowedParams, rng: np.random.Generator, size=None):
    """Kappa-mu shadowed power times an independent median-one lognormal gain."""
    hs = sample_kms(params.base, rng, size)
    shadow = np.exp(params.sigma_tilde * rng.standard_normal(np.shape(hs)))
    out = hs * shadow
    return float(out) if size is None else out
