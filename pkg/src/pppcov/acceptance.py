"""Acceptance suite: the analytic, sampling and Monte Carlo checks the package must pass.

Each check returns a :class:`CheckResult` with the worst observed discrepancy
and the bound it was held to. ``run_suite`` drives them all and is shared by
the ``pppcov validate`` command and the test suite.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .coverage import (CoverageQuery, NetworkConfig, coverage_closed_form, coverage_from_mixture,
                       coverage_radial_integral, db_to_linear)
from .errors import DomainError
from .fading import (DoubleShadowedParams, KappaMuShadowedParams, build_gamma_mixture,
                     build_ghq_mixture, double_shadowed_ccdf, double_shadowed_pdf_exact,
                     double_shadowed_pdf_ghq, kms_ccdf, kms_pdf, sample_double_shadowed, sample_kms,
                     single_term_mixture)
from .interference import Rayleigh, RayleighLognormal
from .mathkit import integrate_semi_infinite
from .simulator import SimConfig, block_rng, simulate_coverage, simulate_coverage_sweep

KAPPAS = (0.5, 1.0, 2.0, 5.3)
INT_RANGE = range(1, 7)
COVERAGE_THETAS_DB = (-5.0, 0.0, 5.0, 10.0)
COVERAGE_DESIRED = ((1.0, 2, 1), (1.0, 1, 2))
COVERAGE_SIGMAS_DB = (0.0, 4.0)
PDF_GRID = np.geomspace(0.01, 20.0, 241)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    worst: float
    bound: float
    seconds: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"{status}  {self.name:<24} worst={self.worst:.3e} bound={self.bound:.1e} ({self.seconds:.1f} s)"
        return f"{text}  {self.detail}" if self.detail else text


def _kms_grid():
    for kappa in KAPPAS:
        for mu in INT_RANGE:
            for m in INT_RANGE:
                yield KappaMuShadowedParams(kappa, mu, m)


def _interferers():
    return (Rayleigh(), RayleighLognormal(4.0))


def _coverage_grid():
    """(desired, interferer) pairs of the coverage grid; thresholds are swept separately."""
    for kappa, mu, m in COVERAGE_DESIRED:
        for sigma in COVERAGE_SIGMAS_DB:
            desired = DoubleShadowedParams(KappaMuShadowedParams(kappa, mu, m), sigma)
            for interferer in _interferers():
                yield desired, interferer


def _label(desired: DoubleShadowedParams, interferer=None, theta_db=None) -> str:
    b = desired.base
    text = f"kappa={b.kappa:g},mu={b.mu},m={b.m},sigma_db={desired.sigma_s_db:g}"
    if interferer is not None:
        text += f" vs {interferer}"
    if theta_db is not None:
        text += f" @ {theta_db:g} dB"
    return text


def _result(name, worst, bound, start, detail="", passed=None) -> CheckResult:
    ok = worst <= bound if passed is None else passed
    return CheckResult(name, bool(ok), float(worst), float(bound), time.perf_counter() - start, detail)


def check_mixture_identities() -> CheckResult:
    start = time.perf_counter()
    worst, where = 0.0, ""
    for p in _kms_grid():
        mix = build_gamma_mixture(p)
        err = max(abs(mix.total_weight() - 1.0), abs(mix.mean() - 1.0))
        if err > worst:
            worst, where = err, f"at kappa={p.kappa:g},mu={p.mu},m={p.m}"
    return _result("mixture_identities", worst, 1e-10, start, where)


def check_ccdf_consistency() -> CheckResult:
    start = time.perf_counter()
    worst, where = 0.0, ""
    for p in _kms_grid():
        mix = build_gamma_mixture(p)
        for h in (0.5, 1.0, 2.0, 5.0):
            tail = integrate_semi_infinite(lambda x: np.asarray(kms_pdf(mix, x)), h, tol=1e-12,
                                           scale=max(mix.scales))
            err = abs(float(kms_ccdf(mix, h)) - tail)
            if err > worst:
                worst, where = err, f"at kappa={p.kappa:g},mu={p.mu},m={p.m},h={h:g}"
    return _result("ccdf_consistency", worst, 1e-8, start, where)


def check_ghq_fidelity() -> CheckResult:
    start = time.perf_counter()
    worst, where, failing = 0.0, "", []
    for kappa, mu, m in ((1.0, 2, 1), (2.0, 2, 4)):
        for sigma in (2.0, 4.0, 8.0):
            params = DoubleShadowedParams(KappaMuShadowedParams(kappa, mu, m), sigma)
            approx = double_shadowed_pdf_ghq(build_ghq_mixture(params, 32), PDF_GRID)
            exact = np.array([double_shadowed_pdf_exact(params, h) for h in PDF_GRID])
            err = np.abs(approx - exact)
            k = int(np.argmax(err))
            if err[k] > 1e-3:
                failing.append(_label(params))
            if err[k] > worst:
                worst, where = float(err[k]), f"at {_label(params)}, h={PDF_GRID[k]:.4g}"
    detail = where + (f"; exceeded for {', '.join(failing)}" if failing else "")
    return _result("ghq_fidelity", worst, 1e-3, start, detail)


def _ks_distance(samples: np.ndarray, cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    x = np.sort(samples)
    n = x.size
    f = cdf(x)
    upper = np.arange(1, n + 1) / n - f
    lower = f - np.arange(0, n) / n
    return float(max(upper.max(), lower.max()))


def check_sampler(draws: int = 1_000_000, seed: int = 2024) -> CheckResult:
    start = time.perf_counter()
    worst, where = 0.0, ""
    cases = []
    for k, (kappa, mu, m) in enumerate(((1.0, 2, 1), (1.0, 1, 2))):
        p = KappaMuShadowedParams(kappa, mu, m)
        mix = build_gamma_mixture(p)
        samples = sample_kms(p, block_rng(seed, k), draws)
        cases.append((f"kms kappa={kappa:g},mu={mu},m={m}", samples,
                      lambda x, mix=mix: 1.0 - np.asarray(kms_ccdf(mix, x))))
    ds = DoubleShadowedParams(KappaMuShadowedParams(1.0, 2, 1), 4.0)
    ghq = build_ghq_mixture(ds)
    cases.append(("double shadowed " + _label(ds), sample_double_shadowed(ds, block_rng(seed, 2), draws),
                  lambda x: 1.0 - np.asarray(double_shadowed_ccdf(ghq, x))))
    for label, samples, cdf in cases:
        d = _ks_distance(np.asarray(samples), cdf)
        if d > worst:
            worst, where = d, label
    return _result("sampler_ks", worst, 0.002, start, where)


def check_rayleigh_baseline() -> CheckResult:
    start = time.perf_counter()
    desired = DoubleShadowedParams(KappaMuShadowedParams(1.0, 1, 1), 0.0)
    value = coverage_closed_form(NetworkConfig(), CoverageQuery(1.0, desired, Rayleigh()))
    target = 1.0 / (1.0 + math.pi / 4.0)
    return _result("rayleigh_baseline", abs(value - target), 1e-6, start, f"p_c={value:.10f}")


def check_internal_equivalence() -> CheckResult:
    start = time.perf_counter()
    net = NetworkConfig()
    worst, where = 0.0, ""
    for desired, interferer in _coverage_grid():
        for theta_db in COVERAGE_THETAS_DB:
            q = CoverageQuery(float(db_to_linear(theta_db)), desired, interferer)
            err = abs(coverage_closed_form(net, q) - coverage_radial_integral(net, q))
            if err >= worst:
                worst, where = err, _label(desired, interferer, theta_db)
    return _result("internal_equivalence", worst, 1e-8, start, where)


def check_monte_carlo(realizations: int = 100_000, seed: int = 7, workers: int = 1) -> CheckResult:
    """Closed form against simulation; the score is the largest ratio of error to its allowance."""
    start = time.perf_counter()
    net = NetworkConfig(density=1e-7, path_loss_exponent=4.0, tx_power=1.0)
    sim = SimConfig(realizations=realizations, seed=seed, workers=workers)
    thetas = db_to_linear(COVERAGE_THETAS_DB)
    worst, where = 0.0, ""
    for desired, interferer in _coverage_grid():
        q = CoverageQuery(float(thetas[0]), desired, interferer)
        estimates = simulate_coverage_sweep(net, q, sim, thetas)
        for theta_db, theta, est in zip(COVERAGE_THETAS_DB, thetas, estimates):
            closed = coverage_closed_form(net, CoverageQuery(float(theta), desired, interferer))
            allowance = max(0.01, 3.0 * est.half_width_95)
            ratio = abs(closed - est.p_hat) / allowance
            if ratio >= worst:
                worst = ratio
                where = f"{_label(desired, interferer, theta_db)}: closed={closed:.5f} mc={est.p_hat:.5f}"
    return _result("monte_carlo", worst, 1.0, start, "error/allowance, " + where)


def check_sigma_zero_reduction() -> CheckResult:
    start = time.perf_counter()
    worst, where = 0.0, ""
    for kappa, mu, m in ((1.0, 2, 1), (1.0, 1, 2), (2.0, 2, 4), (0.5, 3, 1)):
        desired = DoubleShadowedParams(KappaMuShadowedParams(kappa, mu, m), 0.0)
        single = single_term_mixture(build_gamma_mixture(desired.base))
        for interferer in _interferers():
            for theta_db in COVERAGE_THETAS_DB:
                theta = float(db_to_linear(theta_db))
                a = coverage_closed_form(NetworkConfig(), CoverageQuery(theta, desired, interferer))
                b = coverage_from_mixture(theta, single, interferer, 4.0)
                if abs(a - b) >= worst:
                    worst, where = abs(a - b), _label(desired, interferer, theta_db)
    return _result("sigma_zero_reduction", worst, 1e-12, start, where)


def check_trends() -> CheckResult:
    """Strict monotonicity in m, mu and sigma; the score is the smallest step in the expected direction."""
    start = time.perf_counter()
    net = NetworkConfig()

    def pc(kappa, mu, m, sigma):
        desired = DoubleShadowedParams(KappaMuShadowedParams(kappa, mu, m), sigma)
        return coverage_closed_form(net, CoverageQuery(1.0, desired, Rayleigh()))

    series = {
        "m 1..4": [pc(1.0, 2, m, 0.0) for m in range(1, 5)],
        "mu 1..3": [pc(1.0, mu, 2, 0.0) for mu in range(1, 4)],
        "-sigma 2..8 dB": [-pc(1.0, 2, 1, s) for s in (2.0, 4.0, 6.0, 8.0)],
    }
    smallest, where = math.inf, ""
    for label, values in series.items():
        step = float(np.min(np.diff(values)))
        if step < smallest:
            smallest, where = step, label
    return CheckResult("trends", smallest > 0.0, smallest, 0.0, time.perf_counter() - start,
                       f"smallest increase in {where}")


def check_invariance(include_mc: bool = True, realizations: int = 100_000, workers: int = 1) -> CheckResult:
    start = time.perf_counter()
    desired = DoubleShadowedParams(KappaMuShadowedParams(1.0, 2, 1), 4.0)
    q = CoverageQuery(1.0, desired, RayleighLognormal(4.0))
    nets = [NetworkConfig(density=lam, tx_power=p) for lam in (1e-7, 1e-6) for p in (1.0, 10.0)]
    closed = [coverage_closed_form(net, q) for net in nets]
    spread = max(closed) - min(closed)
    passed = spread == 0.0
    detail = f"closed-form spread={spread:.1e}"
    if include_mc:
        # common random numbers: any difference comes from how lambda and P enter the simulator
        sim = SimConfig(realizations=realizations, seed=100, workers=workers)
        est = [simulate_coverage(net, q, sim) for net in nets]
        ratio = max(abs(e.p_hat - est[0].p_hat) / (e.half_width_95 + est[0].half_width_95) for e in est[1:])
        passed = passed and ratio < 1.0
        detail += f", worst MC difference / summed half-widths={ratio:.3f}"
    return CheckResult("lambda_power_invariance", passed, spread, 0.0, time.perf_counter() - start, detail)


@dataclass(frozen=True)
class Check:
    name: str
    run: Callable[..., CheckResult]
    uses_mc: bool = False


def checks(quick: bool = False, workers: int = 1) -> list[Check]:
    """The suite in run order; ``quick`` drops the simulation-based parts."""
    out = [
        Check("mixture_identities", check_mixture_identities),
        Check("ccdf_consistency", check_ccdf_consistency),
        Check("ghq_fidelity", check_ghq_fidelity),
        Check("sampler_ks", check_sampler),
        Check("rayleigh_baseline", check_rayleigh_baseline),
        Check("internal_equivalence", check_internal_equivalence),
        Check("monte_carlo", lambda: check_monte_carlo(workers=workers), uses_mc=True),
        Check("sigma_zero_reduction", check_sigma_zero_reduction),
        Check("trends", check_trends),
        Check("lambda_power_invariance", lambda: check_invariance(not quick, workers=workers)),
    ]
    return [c for c in out if not (quick and c.uses_mc)]


def run_suite(quick: bool = False, workers: int = 1, report=None) -> list[CheckResult]:
    """Run every check, calling ``report(result)`` as each finishes; errors count as failures."""
    results = []
    for check in checks(quick, workers):
        start = time.perf_counter()
        try:
            res = check.run()
        except (ArithmeticError, ValueError, DomainError) as exc:
            res = CheckResult(check.name, False, math.nan, math.nan, time.perf_counter() - start,
                              f"{type(exc).__name__}: {exc}")
        results.append(res)
        if report is not None:
            report(res)
    return results
