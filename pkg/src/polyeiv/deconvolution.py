"""Deconvolution estimate of the latent covariate distribution.

The raw estimate is ``F(x) = mean_j L1(x - W_j)`` with

    L1(u) = 1/2 + (1/2pi) int sin(tu)/t * K(ht)/f_U(t) dt,

where ``K(t) = (1 - t^2)^3`` on ``|t| <= 1`` is the Fourier transform of
the deconvolution kernel.  The raw curve is made monotone by a running
maximum and rescaled to run from 0 at ``c1`` to 1 at ``c2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DegenerateCdfError, DegenerateVarianceError

__all__ = [
    "kernel_ft",
    "kappa_alpha",
    "PluginCriterion",
    "plugin_criterion",
    "select_bandwidth",
    "l1_value",
    "raw_cdf",
    "SmoothedCdf",
    "estimate_cdf",
    "sample_latent",
    "default_support",
    "SUPERSMOOTH_BANDWIDTH",
]

SUPERSMOOTH_BANDWIDTH = 5.0
PANEL_NODES = 8
MAX_PANEL_WIDTH = 0.5
# below this rise on [c1, c2] renormalization would only amplify rounding
MIN_CDF_RANGE = 1e-6

_GL_X, _GL_W = np.polynomial.legendre.leggauss(PANEL_NODES)


def kernel_ft(t):
    """``(1 - t^2)^3`` on ``[-1, 1]``, zero outside."""
    t = np.asarray(t, dtype=float)
    return np.where(np.abs(t) <= 1.0, (1.0 - t * t) ** 3, 0.0)


def kappa_alpha(alpha: float) -> float:
    """``int_0^1 t^(2 alpha - 2) K(t)^2 dt`` for the compact kernel.

    The algebraic endpoint weight is handled by QAWS, so values of
    ``alpha`` just above 1/2 stay accurate.
    """
    if not alpha > 0.5:
        raise ValueError("kappa(alpha) diverges for alpha <= 1/2")
    # (1 - t^2)^6 = (1 - t)^6 (1 + t)^6; put (1 - t)^6 in the weight too
    val, _ = integrate.quad(
        lambda t: (1.0 + t) ** 6, 0.0, 1.0,
        weight="alg", wvar=(2.0 * alpha - 2.0, 6.0),
        epsabs=0.0, epsrel=1e-11, limit=200,
    )
    return float(val)


@dataclass(frozen=True)
class PluginCriterion:
    """Normal-reference estimate of asymptotic integrated squared error.

    ``criterion(h) = C1 / n * h^(1 - 2 alpha) + C2 * h^4``.
    """

    C1: float
    C2: float
    alpha: float
    C: float
    n: int
    sigma_x2: float

    def __call__(self, h):
        h = np.asarray(h, dtype=float)
        return self.C1 / self.n * h ** (1.0 - 2.0 * self.alpha) + self.C2 * h**4

    def minimizer(self) -> float:
        a = self.alpha
        return ((2 * a - 1) * self.C1 / (4 * self.C2 * self.n)) ** (1.0 / (2 * a + 3))


def plugin_criterion(w, noise, n: int | None = None) -> PluginCriterion:
    """Build the plug-in criterion for a noise model with polynomial CF decay."""
    tail = noise.tail
    if tail is None:
        raise ValueError("plug-in bandwidth needs a characteristic function "
                         "with polynomial decay")
    w = np.asarray(w, dtype=float)
    if n is None:
        n = w.size
    s2 = float(np.var(w, ddof=1)) - noise.variance
    if not s2 > 0:
        raise DegenerateVarianceError(
            f"var(W) - var(U) = {s2:.4g} is not positive"
        )
    J = 1.0 / (4.0 * math.sqrt(math.pi) * s2**1.5)
    C1 = tail.C**2 * kappa_alpha(tail.alpha) / math.pi
    return PluginCriterion(C1=C1, C2=9.0 * J, alpha=tail.alpha, C=tail.C,
                           n=int(n), sigma_x2=s2)


def select_bandwidth(w, noise, n: int | None = None,
                     fallback: float = SUPERSMOOTH_BANDWIDTH) -> float:
    """Plug-in bandwidth, or ``fallback`` for supersmooth or unknown noise."""
    if noise.tail is None:
        return float(fallback)
    return plugin_criterion(w, noise, n).minimizer()


def _panel_rule(h, umax, noise):
    """Composite Gauss-Legendre rule on ``(0, 1/h]`` for the L1 integral.

    Returns the nodes and the weights already multiplied by
    ``K(ht) / (f_U(t) t) / pi``.
    """
    T = 1.0 / h
    width = min(MAX_PANEL_WIDTH, math.pi / (4.0 * umax + 1e-12))
    m = max(1, math.ceil(T / width))
    edges = np.linspace(0.0, T, m + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    t = (mid[:, None] + half[:, None] * _GL_X).ravel()
    wt = (half[:, None] * _GL_W).ravel()
    f = np.asarray(noise.cf(t), dtype=float)
    return t, wt * kernel_ft(h * t) / (f * t) / math.pi


def l1_value(u, h: float, noise):
    """Integrated deconvolution kernel ``L1(u)``; vectorized over ``u``."""
    u = np.asarray(u, dtype=float)
    umax = float(np.max(np.abs(u))) if u.size else 0.0
    t, wt = _panel_rule(h, umax, noise)
    # integrand is even in t, so (1/2pi) int_{-T}^{T} = (1/pi) int_0^T
    return 0.5 + np.sin(np.multiply.outer(u, t)) @ wt


def raw_cdf(x, w, h: float, noise):
    """Unnormalized estimate ``mean_j L1(x - W_j)`` at points ``x``.

    Uses ``sin(t(x - W)) = sin(tx) cos(tW) - cos(tx) sin(tW)`` so the sample
    enters only through its empirical characteristic function.
    """
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    umax = float(max(abs(x.max() - w.min()), abs(x.min() - w.max())))
    t, wt = _panel_rule(h, umax, noise)
    tw = np.multiply.outer(t, w)
    cw = np.cos(tw).mean(axis=1)
    sw = np.sin(tw).mean(axis=1)
    tx = np.multiply.outer(x, t)
    return 0.5 + np.sin(tx) @ (wt * cw) - np.cos(tx) @ (wt * sw)


@dataclass(frozen=True)
class SmoothedCdf:
    """Monotone, renormalized distribution function tabulated on a grid."""

    grid_x: np.ndarray
    grid_F: np.ndarray
    c1: float
    c2: float
    h: float

    def __post_init__(self):
        F = self.grid_F
        if F[0] != 0.0 or F[-1] != 1.0 or np.any(np.diff(F) < 0):
            raise ValueError("grid_F must be nondecreasing from 0 to 1")

    def __call__(self, x):
        return np.interp(x, self.grid_x, self.grid_F, left=0.0, right=1.0)

    def quantile(self, u):
        """Generalized inverse ``inf{x : F(x) >= u}`` of the interpolant."""
        u = np.asarray(u, dtype=float)
        F, x = self.grid_F, self.grid_x
        # the segment ending at the first node with F >= u is strictly rising,
        # so flat stretches of F receive no mass
        i = np.clip(np.searchsorted(F, u, side="left"), 1, F.size - 1)
        F0, F1 = F[i - 1], F[i]
        frac = np.clip((u - F0) / (F1 - F0), 0.0, 1.0)
        return x[i - 1] + frac * (x[i] - x[i - 1])

    def sample(self, rng, n):
        return self.quantile(rng.random(n))


def estimate_cdf(w, h: float, c1: float, c2: float, noise,
                 grid_size: int = 1024) -> SmoothedCdf:
    """Deconvolved, monotonized and renormalized CDF of the latent covariate."""
    if not c1 < c2:
        raise ValueError("need c1 < c2")
    if grid_size < 64:
        raise ValueError("grid_size must be at least 64")
    x = np.linspace(c1, c2, grid_size)
    Fbar = np.maximum.accumulate(raw_cdf(x, w, h, noise))
    lo, hi = Fbar[0], Fbar[-1]
    if not hi - lo > MIN_CDF_RANGE:
        raise DegenerateCdfError(
            f"deconvolved CDF rises by only {hi - lo:.3g} on [c1, c2]"
        )
    F = (Fbar - lo) / (hi - lo)
    F[0], F[-1] = 0.0, 1.0
    return SmoothedCdf(x, np.clip(F, 0.0, 1.0), float(c1), float(c2), float(h))


def sample_latent(cdf: SmoothedCdf, rng, n: int) -> np.ndarray:
    """Inverse-CDF draws from ``cdf``."""
    return cdf.sample(rng, n)


def default_support(w, noise):
    """``(min W - 2 sd(U), max W + 2 sd(U))``."""
    w = np.asarray(w, dtype=float)
    sd = math.sqrt(noise.variance)
    return float(w.min() - 2 * sd), float(w.max() + 2 * sd)

