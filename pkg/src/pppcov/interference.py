"""Interferer fading models and the expectation functionals they feed.

Interference enters the coverage expression only through two scalar
functionals of the interferer power law ``H``:

* ``e_h0(a)  = int_a^inf (1 - E[exp(-H t**(-alpha/2))]) dt``
* ``e_hq(s)  = E[H**(2/alpha) * gamma(q - 2/alpha, s*H)]``

Each model supplies ``expect(g)`` computed with a fixed Gaussian rule matched
to its law (refined by order doubling, falling back to adaptive quadrature
when the rule does not settle) and may override ``one_minus_laplace`` with a
closed form.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .errors import ConvergenceError, DomainError, InvalidArgumentError
from .fading import (DB_TO_NEPER, GammaMixture, KappaMuShadowedParams, build_gamma_mixture,
                     kms_pdf, sample_kms)
from .mathkit import (gauss_hermite_rule, gauss_laguerre_rule, integrate_interval, integrate_real_line,
                      integrate_semi_infinite, lower_incomplete_gamma)

DEFAULT_TOL = 1e-11
# relative accuracy demanded of the adaptive fallbacks on top of the absolute tol
_FALLBACK_RTOL = 1e-12
# beyond this many SDs the Gaussian weight is below 1e-300
_Z_CUTOFF = 37.0


class FadingModel:
    """Base class for i.i.d. interferer power laws.

    Subclasses implement ``_rule(order)`` returning nodes and weights so that
    ``E[g(H)] ~= sum(weights * g(nodes))``, ``_orders`` (the refinement ladder),
    ``_expect_adaptive`` and ``sample``.
    """

    name = "fading"
    mean = 1.0
    _orders: tuple[int, ...] = (32, 64, 128, 256)

    def _rule(self, order: int) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def _expect_adaptive(self, g, tol: float) -> float:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size=None):
        raise NotImplementedError

    def _apply(self, g, order: int) -> np.ndarray:
        nodes, weights = self._rule(order)
        return np.asarray(g(nodes), dtype=float) @ weights

    def expect(self, g, tol: float = DEFAULT_TOL):
        """``E[g(H)]``.

        ``g`` maps a 1-D array of powers (shape ``(n,)``) to an array of shape
        ``(..., n)``; the expectation is taken over the last axis, so one call
        can evaluate a batch of functionals sharing the nodes.
        """
        orders = self._orders
        prev = self._apply(g, orders[0])
        for order in orders[1:]:
            cur = self._apply(g, order)
            bad = np.abs(cur - prev) > tol
            if not np.any(bad):
                return float(cur) if np.ndim(cur) == 0 else cur
            prev = cur
        out = np.array(prev, dtype=float)
        if out.ndim == 0:
            return self._expect_adaptive(g, tol)
        for idx in zip(*np.nonzero(bad)):
            out[idx] = self._expect_adaptive(lambda h, idx=idx: np.asarray(g(h))[(*idx, Ellipsis)], tol)
        return out

    def tail_moment(self, delta: float, x):
        """``E[H**delta ; H > x]`` for ``x >= 0`` (array-valued in ``x``)."""
        raise NotImplementedError

    def one_minus_laplace(self, s, tol: float = DEFAULT_TOL):
        """``E[1 - exp(-s*H)]`` evaluated without cancellation; ``s`` may be an array."""
        s = np.asarray(s, dtype=float)
        return self.expect(lambda h: -np.expm1(-np.multiply.outer(s, h)), tol)

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Deterministic(FadingModel):
    """Unit gain with probability one (useful for geometry-only checks)."""

    name = "deterministic"
    _orders = (1, 1)

    def _rule(self, order):
        return np.ones(1), np.ones(1)

    def _expect_adaptive(self, g, tol):
        return float(np.asarray(g(np.ones(1)))[..., 0])

    def tail_moment(self, delta, x):
        return np.where(np.asarray(x, dtype=float) < 1.0, 1.0, 0.0)

    def sample(self, rng, size=None):
        return 1.0 if size is None else np.ones(size)


@dataclass(frozen=True)
class Rayleigh(FadingModel):
    """Unit-mean exponential power."""

    name = "rayleigh"

    def _rule(self, order):
        r = gauss_laguerre_rule(order)
        return r.nodes, r.weights

    def _expect_adaptive(self, g, tol):
        return integrate_semi_infinite(lambda h: np.asarray(g(h)) * np.exp(-h), 0.0, tol=tol,
                                       rtol=_FALLBACK_RTOL)

    def one_minus_laplace(self, s, tol=DEFAULT_TOL):
        s = np.asarray(s, dtype=float)
        return s / (1.0 + s)

    def tail_moment(self, delta, x):
        return special.gammaincc(1.0 + delta, x) * special.gamma(1.0 + delta)

    def sample(self, rng, size=None):
        return rng.exponential(1.0, size)


@dataclass(frozen=True)
class Nakagami(FadingModel):
    """Unit-mean Gamma power with integer shape ``m``."""

    m: int = 1

    def __post_init__(self):
        if isinstance(self.m, bool) or int(self.m) != self.m or self.m < 1:
            raise InvalidArgumentError(f"Nakagami m must be a positive integer, got {self.m!r}")

    @property
    def name(self):
        return f"nakagami:m={self.m}"

    def _rule(self, order):
        r = gauss_laguerre_rule(order, float(self.m - 1))
        return r.nodes / self.m, r.weights / math.gamma(self.m)

    def _expect_adaptive(self, g, tol):
        m = self.m

        def f(h):
            dens = np.exp(special.xlogy(m - 1, h) + m * math.log(m) - m * h - math.lgamma(m))
            return np.asarray(g(h)) * dens

        return integrate_semi_infinite(f, 0.0, tol=tol, rtol=_FALLBACK_RTOL)

    def one_minus_laplace(self, s, tol=DEFAULT_TOL):
        s = np.asarray(s, dtype=float)
        return -np.expm1(-self.m * np.log1p(s / self.m))

    def tail_moment(self, delta, x):
        m = self.m
        return special.gammaincc(m + delta, m * np.asarray(x, dtype=float)) * math.exp(
            math.lgamma(m + delta) - math.lgamma(m) - delta * math.log(m))

    def sample(self, rng, size=None):
        return rng.gamma(self.m, 1.0 / self.m, size)


@dataclass(frozen=True)
class Lognormal(FadingModel):
    """Median-one lognormal power, SD given in dB (mean ``exp(sigma**2/2)``)."""

    sigma_db: float = 0.0
    _orders = (32, 64, 128)

    def __post_init__(self):
        if not (self.sigma_db >= 0 and math.isfinite(self.sigma_db)):
            raise InvalidArgumentError(f"sigma_db must be finite and >= 0, got {self.sigma_db!r}")

    @property
    def name(self):
        return f"lognormal:sigma_db={self.sigma_db:g}"

    @property
    def sigma_tilde(self) -> float:
        return self.sigma_db * DB_TO_NEPER

    @property
    def mean(self):
        return math.exp(0.5 * self.sigma_tilde ** 2)

    def _rule(self, order):
        r = gauss_hermite_rule(order)
        return np.exp(math.sqrt(2.0) * self.sigma_tilde * r.nodes), r.weights / math.sqrt(math.pi)

    def _expect_adaptive(self, g, tol):
        sig = self.sigma_tilde
        if sig == 0:
            return float(np.asarray(g(np.ones(1)))[..., 0])

        def f(z):
            z = np.asarray(z, dtype=float)
            inside = np.abs(z) < _Z_CUTOFF
            zi = z[inside]
            vals = np.asarray(g(np.exp(sig * zi))) * np.exp(-0.5 * zi * zi) / math.sqrt(2.0 * math.pi)
            out = np.zeros(vals.shape[:-1] + z.shape)
            out[..., inside] = vals
            return out

        return integrate_real_line(f, 0.0, tol=tol, rtol=_FALLBACK_RTOL)

    def tail_moment(self, delta, x):
        x = np.asarray(x, dtype=float)
        sig = self.sigma_tilde
        if sig == 0:
            return np.where(x < 1.0, 1.0, 0.0)
        with np.errstate(divide="ignore"):
            z = delta * sig - np.log(x) / sig
        return math.exp(0.5 * (delta * sig) ** 2) * special.ndtr(z)

    def sample(self, rng, size=None):
        return np.exp(self.sigma_tilde * rng.standard_normal(size))


@dataclass(frozen=True)
class RayleighLognormal(FadingModel):
    """Product of independent unit-mean exponential and median-one lognormal powers."""

    sigma_db: float = 0.0
    _orders = (32, 64, 128)

    def __post_init__(self):
        object.__setattr__(self, "_shadow", Lognormal(self.sigma_db))

    @property
    def name(self):
        return f"rayleigh*lognormal:sigma_db={self.sigma_db:g}"

    @property
    def mean(self):
        return self._shadow.mean

    def _rule(self, order):
        x, wx = Rayleigh()._rule(order)
        ell, wl = self._shadow._rule(order)
        return np.outer(ell, x).ravel(), np.outer(wl, wx).ravel()

    def _expect_adaptive(self, g, tol):
        rayleigh = Rayleigh()

        def outer(ell):
            # inner Rayleigh expectation for each shadowing node; adaptive so
            # that features narrower than the first Laguerre node are seen
            return np.array([rayleigh._expect_adaptive(lambda h, e=e: g(e * h), tol)
                             for e in np.atleast_1d(ell)])

        return self._shadow._expect_adaptive(outer, tol)

    def tail_moment(self, delta, x):
        x = np.asarray(x, dtype=float)
        rayleigh = Rayleigh()
        return self._shadow.expect(
            lambda ell: ell ** delta * rayleigh.tail_moment(delta, np.divide.outer(x, ell)))

    def one_minus_laplace(self, s, tol=DEFAULT_TOL):
        s = np.asarray(s, dtype=float)
        return self._shadow.expect(lambda ell: (lambda x: x / (1.0 + x))(np.multiply.outer(s, ell)), tol)

    def sample(self, rng, size=None):
        return rng.exponential(1.0, size) * self._shadow.sample(rng, size)


@dataclass(frozen=True)
class KappaMuShadowedModel(FadingModel):
    """Interferers with a unit-mean kappa-mu shadowed power law."""

    params: KappaMuShadowedParams = field(default_factory=lambda: KappaMuShadowedParams(1.0, 1, 1))

    def __post_init__(self):
        object.__setattr__(self, "_mix", build_gamma_mixture(self.params))

    @property
    def name(self):
        p = self.params
        return f"kms:kappa={p.kappa:g},mu={p.mu},m={p.m}"

    @property
    def mixture(self) -> GammaMixture:
        return self._mix

    def _rule(self, order):
        nodes, weights = [], []
        for c in self._mix.components:
            r = gauss_laguerre_rule(order, float(c.shape - 1))
            nodes.append(r.nodes * c.scale)
            weights.append(c.weight * r.weights / math.gamma(c.shape))
        return np.concatenate(nodes), np.concatenate(weights)

    def _expect_adaptive(self, g, tol):
        return integrate_semi_infinite(lambda h: np.asarray(g(h)) * kms_pdf(self._mix, h), 0.0, tol=tol,
                                       rtol=_FALLBACK_RTOL)

    def one_minus_laplace(self, s, tol=DEFAULT_TOL):
        s = np.asarray(s, dtype=float)
        total = np.zeros_like(s)
        for c in self._mix.components:
            total = total + c.weight * -np.expm1(-c.shape * np.log1p(s * c.scale))
        return total

    def tail_moment(self, delta, x):
        x = np.asarray(x, dtype=float)
        total = np.zeros_like(x)
        for c in self._mix.components:
            total = total + c.weight * special.gammaincc(c.shape + delta, x / c.scale) * math.exp(
                math.lgamma(c.shape + delta) - math.lgamma(c.shape) + delta * math.log(c.scale))
        return total

    def sample(self, rng, size=None):
        return sample_kms(self.params, rng, size)


def _check_alpha(alpha: float):
    if not alpha > 2:
        raise DomainError(f"path_loss_exponent must exceed 2 (got {alpha!r}); mean interference is infinite")


def e_h0(model: FadingModel, a: float, alpha: float, tol: float = DEFAULT_TOL) -> float:
    """``int_a^inf E[1 - exp(-H t**(-alpha/2))] dt``.

    The tail beyond ``c = max(a, 1)`` decays like ``t**(-alpha/2)``, which a
    rational map to ``[0, 1)`` turns into an endpoint singularity for
    ``alpha < 4``. There ``x = t**(-beta)`` with ``beta = alpha/2 - 1`` is used
    instead: the tail becomes ``(1/beta) int_0^{c**-beta} L(s)/s dx`` with
    ``s = x**(1 + 1/beta)`` and ``L(s) = 1 - E[exp(-s H)]``, a bounded integrand
    tending to ``E[H]`` at ``x = 0``.
    """
    _check_alpha(alpha)
    if not a > 0:
        raise DomainError(f"lower limit a must be > 0, got {a!r}")
    half = alpha / 2.0
    beta = half - 1.0
    c = max(a, 1.0)

    def tail(x):
        x = np.asarray(x, dtype=float)
        s = x ** (1.0 + 1.0 / beta)
        safe = np.where(s > 0, s, 1.0)
        ratio = np.asarray(model.one_minus_laplace(safe, tol), dtype=float) / safe
        return np.where(s > 0, ratio, model.mean)

    total = integrate_interval(tail, 0.0, c ** -beta, tol=tol * beta) / beta
    if a < c:
        total += integrate_interval(lambda t: model.one_minus_laplace(t ** -half, tol), a, c, tol=tol)
    return max(0.0, total)


def e_hq(model: FadingModel, q: int, s: float, alpha: float, tol: float = DEFAULT_TOL,
         method: str = "auto") -> float:
    """``E[H**(2/alpha) * gamma(q - 2/alpha, s*H)]`` with the lower incomplete Gamma.

    ``method="direct"`` integrates the functional against the law of ``H``.
    ``method="swapped"`` exchanges the two integrals,
    ``int_0^inf u**(a-1) e**-u E[H**(2/alpha); H > u/s] du`` with
    ``a = q - 2/alpha``, and applies a generalised Gauss-Laguerre rule in ``u``.
    The direct form resolves small ``s``; the swapped form resolves large ``s``,
    where the direct integrand varies on a scale ``1/s`` below the first node.
    ``"auto"`` picks by ``s``.
    """
    _check_alpha(alpha)
    if isinstance(q, bool) or int(q) != q or q < 1:
        raise DomainError(f"q must be a positive integer, got {q!r}")
    if not s > 0:
        raise DomainError(f"s must be > 0, got {s!r}")
    delta = 2.0 / alpha
    shape = q - delta
    if method == "auto":
        if isinstance(model, Rayleigh):
            return max(0.0, float(_rayleigh_e_hq(q, s, alpha, tol)))
        if isinstance(model, RayleighLognormal):
            # Rayleigh inner expectation in closed rule form, lognormal outer
            value = model._shadow.expect(lambda ell: ell ** delta * _rayleigh_e_hq(q, s * ell, alpha, tol), tol)
            return max(0.0, float(value))
        method = "swapped" if s >= 1.0 else "direct"
    if method == "direct":
        value = model.expect(lambda h: h ** delta * lower_incomplete_gamma(shape, s * h), tol)
    elif method == "swapped":
        value = _swapped_e_hq(model, delta, shape, s, tol)
    else:
        raise InvalidArgumentError(f"unknown e_hq method {method!r}")
    return max(0.0, float(value))


def _rayleigh_e_hq(q: int, s, alpha: float, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Vectorised ``e_hq`` for unit-mean exponential interferers, in closed form.

    With ``a = q - delta`` the functional equals
    ``s**a q! / (a (1+s)**(q+1)) 2F1(1, q+1; a+1; s/(1+s))``. That argument
    tends to one as ``s`` grows, so for ``s >= q`` the complement
    ``Gamma(a) Gamma(1+delta)`` minus the upper incomplete part is used, whose
    hypergeometric argument ``1/(1+s)`` stays below ``1/(1+q)``.
    ``tol`` is accepted for signature symmetry; the result is accurate to a
    few ulps times ``q``.
    """
    s = np.asarray(s, dtype=float)
    delta = 2.0 / alpha
    shape = q - delta
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        lead = np.exp(shape * np.log(s) - (q + 1) * np.log1p(s) + math.lgamma(q + 1))
        low = lead / shape * special.hyp2f1(1.0, q + 1.0, shape + 1.0, s / (1.0 + s))
        up = lead / (1.0 + delta) * special.hyp2f1(1.0, q + 1.0, delta + 2.0, 1.0 / (1.0 + s))
        full = math.gamma(shape) * math.gamma(1.0 + delta)
        out = np.where(s < q, low, np.where(np.isinf(s), full, full - up))
    return np.maximum(out, 0.0)


def _swapped_e_hq(model: FadingModel, delta: float, shape: float, s: float, tol: float) -> float:
    prev = None
    for order in (32, 64, 128):
        rule = gauss_laguerre_rule(order, shape - 1.0)
        cur = float(np.dot(rule.weights, model.tail_moment(delta, rule.nodes / s)))
        if prev is not None and abs(cur - prev) <= tol:
            return cur
        prev = cur

    def integrand(u):
        return np.exp(special.xlogy(shape - 1.0, u) - u) * model.tail_moment(delta, u / s)

    return integrate_semi_infinite(integrand, 0.0, tol=tol, rtol=_FALLBACK_RTOL)


_MODEL_RE = re.compile(r"^\s*([a-z*]+)\s*(?::\s*(.*))?$")


def _kv(body: str | None, spec: str) -> dict[str, str]:
    out: dict[str, str] = {}
    if not body:
        return out
    for item in body.split(","):
        if "=" not in item:
            raise InvalidArgumentError(f"malformed parameter {item!r} in fading spec {spec!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _take(kv: dict, key: str, conv, spec: str):
    if key not in kv:
        raise InvalidArgumentError(f"fading spec {spec!r} is missing {key}")
    try:
        return conv(kv.pop(key))
    except ValueError as exc:
        raise InvalidArgumentError(f"bad value for {key} in fading spec {spec!r}") from exc


def _int(text: str) -> int:
    value = float(text)
    if value != int(value):
        raise ValueError(text)
    return int(value)


def parse_fading_model(spec: str) -> FadingModel:
    """Build an interferer model from its CLI spelling.

    Accepted forms::

        rayleigh
        nakagami:m=<int>
        lognormal:sigma_db=<real>
        rayleigh*lognormal:sigma_db=<real>
        kms:kappa=<real>,mu=<int>,m=<int>
        deterministic
    """
    match = _MODEL_RE.match(spec.lower())
    if not match:
        raise InvalidArgumentError(f"unrecognised fading spec {spec!r}")
    kind, body = match.groups()
    kv = _kv(body, spec)
    if kind == "rayleigh":
        model = Rayleigh()
    elif kind == "deterministic":
        model = Deterministic()
    elif kind == "nakagami":
        model = Nakagami(_take(kv, "m", _int, spec))
    elif kind == "lognormal":
        model = Lognormal(_take(kv, "sigma_db", float, spec))
    elif kind == "rayleigh*lognormal":
        model = RayleighLognormal(_take(kv, "sigma_db", float, spec))
    elif kind == "kms":
        model = KappaMuShadowedModel(KappaMuShadowedParams(
            _take(kv, "kappa", float, spec), _take(kv, "mu", _int, spec), _take(kv, "m", _int, spec)))
    else:
        raise InvalidArgumentError(f"unknown fading model {kind!r} in {spec!r}")
    if kv:
        raise InvalidArgumentError(f"unexpected parameters {sorted(kv)} in fading spec {spec!r}")
    return model


__all__ = [
    "FadingModel", "Deterministic", "Rayleigh", "Nakagami", "Lognormal", "RayleighLognormal",
    "KappaMuShadowedModel", "e_h0", "e_hq", "parse_fading_model", "ConvergenceError",
]
