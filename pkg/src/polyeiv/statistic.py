"""Weighted characteristic-function discrepancy statistic.

For coefficients ``beta`` the statistic is

    S = int |D(t)|^2 w(t) dt,
    D(t) = mean(Y e^{itW})
           - sum_k beta_k sum_l C(k, l) mean(W^l e^{itW}) phi_{k-l}(t),

i.e. the squared distance between the empirical transforms of the response
curve and of the fitted polynomial, after multiplying through by the noise
characteristic function so that it never appears in a denominator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

__all__ = [
    "WeightFunction",
    "QuadratureRule",
    "gauss_legendre_rule",
    "empirical_cf_y",
    "empirical_cf_w_pow",
    "test_stat",
    "stat_scale",
]


@dataclass(frozen=True)
class WeightFunction:
    """Even, positive weight ``w(t)``.

    Either Gaussian, ``exp(-t^2 / (2 scale^2))``, or tabulated on
    ``t >= 0`` and interpolated log-linearly in ``|t|`` (zero past the
    last tabulated point).
    """

    scale: float = 1.0
    table_t: Optional[np.ndarray] = None
    table_w: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.table_t is None:
            if not self.scale > 0:
                raise ValueError("weight scale must be positive")
        else:
            tt = np.asarray(self.table_t, dtype=float)
            ww = np.asarray(self.table_w, dtype=float)
            if tt.shape != ww.shape or np.any(ww <= 0) or np.any(np.diff(tt) <= 0):
                raise ValueError("tabulated weight must be positive on an increasing grid")
            object.__setattr__(self, "table_t", tt)
            object.__setattr__(self, "table_w", ww)

    @classmethod
    def tabulated(cls, t, w):
        return cls(table_t=t, table_w=w)

    def __call__(self, t):
        t = np.abs(np.asarray(t, dtype=float))
        if self.table_t is None:
            return np.exp(-0.5 * (t / self.scale) ** 2)
        # log-linear interpolation keeps the tail decaying and positive
        return np.exp(np.interp(t, self.table_t, np.log(self.table_w),
                                right=-np.inf))

    @property
    def effective_support(self) -> float:
        """Smallest ``T`` with ``w(T) < 1e-12``."""
        if self.table_t is None:
            return self.scale * math.sqrt(2.0 * math.log(1e12))
        below = np.nonzero(self.table_w < 1e-12)[0]
        return float(self.table_t[below[0]] if below.size else self.table_t[-1])


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights on ``[-t_max, t_max]``."""

    nodes: np.ndarray
    weights: np.ndarray
    t_max: float

    def fold(self) -> "QuadratureRule":
        """Positive half of a symmetric rule with doubled weights.

        Valid for integrands that are even in ``t``; a node at zero keeps
        its weight.
        """
        pos = self.nodes > 0
        nodes = self.nodes[pos]
        weights = 2.0 * self.weights[pos]
        zero = self.nodes == 0
        if np.any(zero):
            nodes = np.concatenate([self.nodes[zero], nodes])
            weights = np.concatenate([self.weights[zero], weights])
        return QuadratureRule(nodes, weights, self.t_max)


def gauss_legendre_rule(nodes: int = 512, t_max: float = 8.0) -> QuadratureRule:
    x, wx = np.polynomial.legendre.leggauss(nodes)
    return QuadratureRule(t_max * x, t_max * wx, float(t_max))


def empirical_cf_y(sample, t):
    """``mean_j Y_j exp(i t W_j)``."""
    t = np.asarray(t, dtype=float)
    return np.exp(1j * np.multiply.outer(t, sample.w)) @ sample.y / sample.n


def empirical_cf_w_pow(sample, ell: int, t):
    """``mean_j W_j^ell exp(i t W_j)``."""
    if ell < 0:
        raise ValueError("ell must be >= 0")
    t = np.asarray(t, dtype=float)
    return np.exp(1j * np.multiply.outer(t, sample.w)) @ sample.w**ell / sample.n


def _phi_table(noise, p, t):
    return np.stack([np.asarray(noise.phi(r, t), dtype=complex) for r in range(p + 1)])


def _coef_table(beta, phi):
    # c[..., l, m] = sum_{k>=l} beta_k C(k, l) phi_{k-l}(t_m)
    p = beta.shape[-1] - 1
    M = phi.shape[-1]
    c = np.zeros(beta.shape[:-1] + (p + 1, M), dtype=complex)
    for ell in range(p + 1):
        for k in range(ell, p + 1):
            c[..., ell, :] += (math.comb(k, ell) * beta[..., k])[..., None] * phi[k - ell]
    return c


def _stat_batch(w, y, beta, phi, t, qw):
    """Statistic for stacked samples ``w, y`` of shape ``(..., n)``.

    ``phi`` has shape ``(p + 1, M)`` on nodes ``t``; ``qw`` already includes
    the weight function.
    """
    p = beta.shape[-1] - 1
    n = w.shape[-1]
    # rows: Y, W^0, ..., W^p
    V = np.empty(w.shape[:-1] + (p + 2, n))
    V[..., 0, :] = y
    V[..., 1, :] = 1.0
    for ell in range(1, p + 1):
        V[..., ell + 1, :] = V[..., ell, :] * w
    tw = w[..., :, None] * t
    re = V @ np.cos(tw) / n
    im = V @ np.sin(tw) / n
    c = _coef_table(beta, phi)
    Dre = re[..., 0, :] - np.sum(re[..., 1:, :] * c.real - im[..., 1:, :] * c.imag, axis=-2)
    Dim = im[..., 0, :] - np.sum(re[..., 1:, :] * c.imag + im[..., 1:, :] * c.real, axis=-2)
    return (Dre * Dre + Dim * Dim) @ qw


def _prepare(noise, p, weight, quad, fold):
    rule = quad.fold() if fold else quad
    t = rule.nodes
    return t, _phi_table(noise, p, t), rule.weights * weight(t)


def test_stat(sample, noise, beta, weight: WeightFunction | None = None,
              quad: QuadratureRule | None = None, fold: bool = True) -> float:
    """Discrepancy statistic ``S`` for coefficients ``beta``.

    With ``fold=True`` only the positive nodes are evaluated; this is exact
    for symmetric rules because ``D(-t)`` is the conjugate of ``D(t)`` for
    real data and a real, even noise characteristic function.
    """
    weight = weight or WeightFunction()
    quad = quad or gauss_legendre_rule()
    beta = np.asarray(beta, dtype=float)
    t, phi, qw = _prepare(noise, beta.size - 1, weight, quad, fold)
    return float(_stat_batch(sample.w, sample.y, beta, phi, t, qw))


def stat_scale(sample, weight: WeightFunction | None = None,
               quad: QuadratureRule | None = None) -> float:
    """``int |mean(Y e^{itW})|^2 w(t) dt``, a natural magnitude for ``S``."""
    weight = weight or WeightFunction()
    quad = quad or gauss_legendre_rule()
    psi = empirical_cf_y(sample, quad.nodes)
    return float(np.sum(quad.weights * weight(quad.nodes) * np.abs(psi) ** 2))


# keep pytest from collecting the library function when it is imported
test_stat.__test__ = False
