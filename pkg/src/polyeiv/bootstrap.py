"""Bootstrap calibration of the polynomial goodness-of-fit test.

The observed statistic is compared with statistics recomputed on data
simulated from the fitted null model: latent covariates from the
deconvolved CDF, regression errors from a moment-matching law and covariate
noise from the noise model.  All of these are fitted once on the observed
data and shared by every resample.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import deconvolution as dc
from . import moments as mo
from .errors import DegenerateDesignError
from .statistic import WeightFunction, _prepare, _stat_batch, gauss_legendre_rule
from .wild import make_match_dist

__all__ = [
    "TestConfig",
    "TestReport",
    "critical_point",
    "bootstrap_p_value",
    "run_test",
    "seed_sequence",
    "child_seed",
    "reject_at",
]

CHUNK = 50


@dataclass(frozen=True)
class TestConfig:
    """Settings of one bootstrap test."""

    degree: int = 1
    B: int = 100
    alpha: float = 0.05
    moment_order: int = 4
    support: Optional[tuple] = None
    bandwidth: Optional[float] = None
    supersmooth_bandwidth: float = dc.SUPERSMOOTH_BANDWIDTH
    weight_scale: float = 1.0
    t_max: float = 8.0
    nodes: int = 512
    grid_size: int = 1024
    omega_floor: float = mo.OMEGA_FLOOR
    seed: int = 0

    __test__ = False

    def __post_init__(self):
        if self.B < 1:
            raise ValueError("B must be >= 1")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.moment_order not in (2, 3, 4):
            raise ValueError("moment_order must be 2, 3 or 4")
        if self.support is not None:
            c1, c2 = self.support
            object.__setattr__(self, "support", (float(c1), float(c2)))

    @classmethod
    def from_dict(cls, d: dict) -> "TestConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown test config keys: {sorted(unknown)}")
        return cls(**d)

    def replace(self, **kw) -> "TestConfig":
        d = asdict(self)
        d.update(kw)
        return TestConfig(**d)


@dataclass
class TestReport:
    """Outcome of ``run_test``."""

    S: float
    beta_hat: np.ndarray
    omega_hat: np.ndarray
    s_alpha: float
    p_value: float
    boot_stats: np.ndarray
    reject: bool
    alpha: float
    diagnostics: dict = field(default_factory=dict)

    __test__ = False

    def to_dict(self) -> dict:
        return {
            "S": self.S,
            "beta_hat": [float(v) for v in self.beta_hat],
            "omega_hat": [float(v) for v in self.omega_hat],
            "s_alpha": self.s_alpha,
            "p_value": self.p_value,
            "reject": bool(self.reject),
            "alpha": self.alpha,
            "B": int(self.boot_stats.size),
            "boot_stats": [float(v) for v in self.boot_stats],
            "diagnostics": self.diagnostics,
        }


def critical_point(boot_stats, alpha: float) -> float:
    """Order statistic ``ceil((1 - alpha) B)`` (1-based) of the replicates."""
    s = np.sort(np.asarray(boot_stats, dtype=float))
    if s.size == 0:
        raise ValueError("boot_stats is empty")
    k = math.ceil((1.0 - alpha) * s.size - 1e-9)
    return float(s[min(max(k, 1), s.size) - 1])


def bootstrap_p_value(S: float, boot_stats) -> float:
    """``(#{S*_b >= S} + 1) / (B + 1)``."""
    b = np.asarray(boot_stats, dtype=float)
    return float((np.count_nonzero(b >= S) + 1) / (b.size + 1))


def seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def child_seed(ss: np.random.SeedSequence, *keys: int) -> np.random.SeedSequence:
    """Stream for index ``keys`` below ``ss``; independent of spawn order."""
    return np.random.SeedSequence(ss.entropy, spawn_key=tuple(ss.spawn_key) + tuple(keys))


def _generator(ss):
    return np.random.Generator(np.random.PCG64(ss))


def run_test(sample: mo.RegressionSample, noise, cfg: TestConfig | None = None,
             seed=None) -> TestReport:
    """Bootstrap test of the degree-``cfg.degree`` polynomial null hypothesis.

    Parameters
    ----------
    sample : RegressionSample
    noise : NoiseModel
        Covariate-noise model, known or estimated.
    cfg : TestConfig
    seed : int or SeedSequence, optional
        Overrides ``cfg.seed``.  Resample ``b`` draws from the child stream
        with key ``b``.
    """
    cfg = cfg or TestConfig()
    ss = seed_sequence(cfg.seed if seed is None else seed)
    p, q, n = cfg.degree, cfg.moment_order, sample.n

    # (a) fit on the observed data
    fit = mo.fit_polynomial(sample, noise, p, q, omega_floor=cfg.omega_floor)
    if cfg.support is None:
        c1, c2 = dc.default_support(sample.w, noise)
    else:
        c1, c2 = cfg.support
    if cfg.bandwidth is None:
        h = dc.select_bandwidth(sample.w, noise, fallback=cfg.supersmooth_bandwidth)
    else:
        h = float(cfg.bandwidth)
    cdf = dc.estimate_cdf(sample.w, h, c1, c2, noise, cfg.grid_size)
    dist = make_match_dist(fit.error_moments[2:], q)

    weight = WeightFunction(cfg.weight_scale)
    quad = gauss_legendre_rule(cfg.nodes, cfg.t_max)
    t, phi, qw = _prepare(noise, p, weight, quad, fold=True)
    S = float(_stat_batch(sample.w, sample.y, fit.beta, phi, t, qw))

    P = mo.deconv_weights(noise.moments(2 * p))
    boot = np.empty(cfg.B)
    for start in range(0, cfg.B, CHUNK):
        idx = range(start, min(start + CHUNK, cfg.B))
        W = np.empty((len(idx), n))
        Y = np.empty((len(idx), n))
        for i, b in enumerate(idx):
            # (b) simulate from the fitted null model
            rng = _generator(child_seed(ss, b))
            x = cdf.sample(rng, n)
            eps = dist.sample(rng, n)
            u = noise.sample(rng, n)
            Y[i] = fit.predict(x) + eps
            W[i] = x + u
        # (c) refit, (d) recompute the statistic
        bb, BB = mo._moments_batch(W, Y, P, 2 * p)
        beta, cond = mo._solve_batch(bb, BB, p)
        bad = ~(np.isfinite(cond) & (cond <= mo.MAX_COND))
        if np.any(bad):
            b = idx[int(np.argmax(bad))]
            err = DegenerateDesignError(
                f"resample {b}: moment matrix is numerically singular"
            )
            err.resample = b
            raise err
        boot[start:start + len(idx)] = _stat_batch(W, Y, beta, phi, t, qw)

    # (e) critical point, (f) decision
    s_alpha = critical_point(boot, cfg.alpha)
    report = TestReport(
        S=S,
        beta_hat=fit.beta,
        omega_hat=fit.error_moments[2:],
        s_alpha=s_alpha,
        p_value=bootstrap_p_value(S, boot),
        boot_stats=boot,
        reject=bool(S > s_alpha),
        alpha=cfg.alpha,
        diagnostics={
            "n": n,
            "bandwidth": h,
            "support": [c1, c2],
            "cond_M": fit.cond_M,
            "omega2_clipped": fit.omega_clipped,
            "error_law": dist.kind,
            "error_law_fallback": dist.fallback,
            "noise": noise.to_dict(),
        },
    )
    return report


def reject_at(report: TestReport, alpha: float) -> bool:
    """Decision at another level using the same bootstrap replicates."""
    return bool(report.S > critical_point(report.boot_stats, alpha))

