"""Moment-corrected polynomial fitting under covariate measurement error.

With ``W = X + U`` and known noise moments ``nu_j``, latent moments of ``X``
are recovered from moments of ``W`` through the weights ``P_j`` defined by

    nu_0 P_0 = 1,    nu_0 P_j = -sum_{k<j} C(j, k) nu_{j-k} P_k,

and the polynomial coefficients solve the Hankel system ``M beta = B`` with
``M[j, k] = b_{j+k}``.  The moments of the regression error are then
peeled off ``E(Y^r)`` recursively.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDesignError

__all__ = [
    "RegressionSample",
    "PolyFit",
    "deconv_weights",
    "sample_moments",
    "latent_moments",
    "fit_polynomial",
    "error_moments",
    "polynomial_power_moments",
    "MAX_COND",
]

MAX_COND = 1e12
OMEGA_FLOOR = 1e-8


@dataclass(frozen=True)
class RegressionSample:
    """Observed pairs ``(W_i, Y_i)``."""

    w: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float).ravel()
        y = np.asarray(self.y, dtype=float).ravel()
        if w.shape != y.shape:
            raise ValueError("w and y must have the same length")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(y))):
            raise ValueError("sample contains non-finite values")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.w.size

    def __len__(self):
        return self.w.size


@dataclass(frozen=True)
class PolyFit:
    """Fitted coefficients together with the moment estimates behind them.

    ``error_moments[r]`` holds the estimate of ``E(eps^r)`` for
    ``r = 0..q`` (entries 0 and 1 are fixed at 1 and 0); it has length 2
    when error moments were not requested.
    """

    degree: int
    beta: np.ndarray
    latent_moments: np.ndarray
    error_moments: np.ndarray
    cond_M: float
    omega_clipped: bool = False
    diagnostics: dict = field(default_factory=dict)

    def predict(self, x):
        return np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), self.beta)


def deconv_weights(nu) -> np.ndarray:
    """Weights ``P_0..P_J`` that map moments of ``W`` to moments of ``X``.

    Examples
    --------
    >>> deconv_weights([1, 0, 1, 0, 3]).tolist()
    [1.0, -0.0, -1.0, -0.0, 3.0]
    """
    nu = np.asarray(nu, dtype=float)
    if nu.size == 0 or nu[0] == 0:
        raise ValueError("nu_0 must be nonzero")
    J = nu.size - 1
    out = np.zeros(J + 1)
    out[0] = 1.0 / nu[0]
    for j in range(1, J + 1):
        acc = 0.0
        for k in range(j):
            acc += math.comb(j, k) * nu[j - k] * out[k]
        out[j] = -acc / nu[0]
    return out


def sample_moments(sample: RegressionSample, J: int):
    """Return ``(a, A)`` with ``a_j = mean(W^j)`` and ``A_j = mean(Y W^j)``."""
    if J < 0:
        raise ValueError("J must be >= 0")
    if sample.n == 0:
        raise ValueError("empty sample")
    powers = _powers(sample.w, J)
    a = powers.mean(axis=-1)
    A = (powers * sample.y).mean(axis=-1)
    a[0] = 1.0
    return a, A


def _powers(w, J):
    # (..., n) -> (..., J+1, n) with W^0..W^J
    w = np.asarray(w, dtype=float)
    out = np.empty(w.shape[:-1] + (J + 1, w.shape[-1]))
    out[..., 0, :] = 1.0
    for j in range(1, J + 1):
        out[..., j, :] = out[..., j - 1, :] * w
    return out


def _binomial_table(J):
    C = np.zeros((J + 1, J + 1))
    for j in range(J + 1):
        for k in range(j + 1):
            C[j, k] = math.comb(j, k)
    return C


def latent_moments(a, A, P):
    """Corrected moments ``b_j = sum_k C(j,k) a_{j-k} P_k`` (and ``B_j``).

    Works along the last axis, so stacked moment arrays are accepted.
    """
    a = np.asarray(a, dtype=float)
    A = np.asarray(A, dtype=float)
    P = np.asarray(P, dtype=float)
    J = a.shape[-1] - 1
    if A.shape[-1] != J + 1 or P.shape[-1] < J + 1:
        raise ValueError("moment arrays are not conformable")
    C = _binomial_table(J)
    # T[j, m] = C(j, j-m) P_{j-m} for m <= j
    T = np.zeros((J + 1, J + 1))
    for j in range(J + 1):
        for m in range(j + 1):
            T[j, m] = C[j, j - m] * P[j - m]
    return a @ T.T, A @ T.T


def _required_order(p, q):
    return max(2 * p, p * q if q else 0, 1)


def _moments_batch(w, y, P, J):
    pw = _powers(w, J)
    a = pw.mean(axis=-1)
    A = (pw * y[..., None, :]).mean(axis=-1)
    return latent_moments(a, A, P)


def _solve_batch(b, Bv, p):
    idx = np.add.outer(np.arange(p + 1), np.arange(p + 1))
    M = b[..., idx]
    rhs = Bv[..., : p + 1]
    with np.errstate(all="ignore"):
        cond = np.linalg.cond(M)
    ok = np.isfinite(cond) & (cond <= MAX_COND)
    beta = np.full(rhs.shape, np.nan)
    if np.all(ok):
        beta = np.linalg.solve(M, rhs[..., None])[..., 0]
    elif np.any(ok):
        beta[ok] = np.linalg.solve(M[ok], rhs[ok][..., None])[..., 0]
    return beta, cond


def fit_polynomial(sample: RegressionSample, noise, p: int, q: int | None = None,
                   omega_floor: float = OMEGA_FLOOR) -> PolyFit:
    """Moment-corrected degree-``p`` polynomial fit.

    Parameters
    ----------
    sample : RegressionSample
    noise : NoiseModel
        Supplies the moments ``nu_j`` of the covariate noise.
    p : int
        Polynomial degree.
    q : int, optional
        If given, error moments ``E(eps^2..eps^q)`` are estimated too and
        latent moments are computed up to order ``max(2p, p q)``.
    omega_floor : float
        Relative floor (times ``var(Y)``) for the error variance estimate.

    Raises
    ------
    DegenerateDesignError
        If the condition number of the moment matrix exceeds ``MAX_COND``.
    """
    if p < 0:
        raise ValueError("degree must be >= 0")
    if sample.n < p + 2:
        raise ValueError(f"need at least p + 2 = {p + 2} observations, got {sample.n}")
    J = _required_order(p, q)
    P = deconv_weights(noise.moments(J))
    b, Bv = _moments_batch(sample.w, sample.y, P, J)
    beta, cond = _solve_batch(b, Bv, p)
    cond = float(cond)
    if not np.isfinite(cond) or cond > MAX_COND:
        raise DegenerateDesignError(
            f"moment matrix is numerically singular (condition number {cond:.3g})"
        )
    fit = PolyFit(p, beta, b, np.array([1.0, 0.0]), cond)
    if q is None:
        return fit
    omega = np.concatenate([[1.0, 0.0], error_moments(sample, fit, q)])
    floor = omega_floor * max(float(np.var(sample.y)), np.finfo(float).tiny)
    clipped = False
    if q >= 2 and omega[2] <= 0:
        warnings.warn("estimated error variance is not positive; clipping", RuntimeWarning)
        omega[2] = floor
        clipped = True
    return PolyFit(p, beta, b, omega, cond, clipped)


def _compositions(m, parts):
    """All tuples of ``parts`` nonnegative integers summing to ``m``."""
    for cuts in itertools.combinations_with_replacement(range(m + 1), parts - 1):
        prev = 0
        out = []
        for c in cuts:
            out.append(c - prev)
            prev = c
        out.append(m - prev)
        yield tuple(out)


def _multinomial(m, ts):
    out = math.factorial(m)
    for t in ts:
        out //= math.factorial(t)
    return out


def polynomial_power_moments(beta, b, m_max):
    """Estimates of ``E[g(X)^m]`` for ``m = 0..m_max`` where ``g`` has
    coefficients ``beta`` and ``b`` holds the moments of ``X``.

    Expands ``(beta_0 + beta_1 X + ... + beta_p X^p)^m`` by the multinomial
    theorem, summing over compositions ``t_0 + ... + t_p = m``.
    """
    beta = np.asarray(beta, dtype=float)
    b = np.asarray(b, dtype=float)
    p = beta.shape[-1] - 1
    if b.shape[-1] < p * m_max + 1:
        raise ValueError(f"latent moments needed up to order {p * m_max}")
    out = np.zeros(beta.shape[:-1] + (m_max + 1,))
    for m in range(m_max + 1):
        for ts in _compositions(m, p + 1):
            order = sum(j * t for j, t in enumerate(ts))
            term = _multinomial(m, ts) * b[..., order]
            for j, t in enumerate(ts):
                if t:
                    term = term * beta[..., j] ** t
            out[..., m] += term
    return out


def _error_moments_core(y, beta, b, q):
    ybar = _powers(y, q).mean(axis=-1)
    G = polynomial_power_moments(beta, b, q)
    omega = np.zeros(y.shape[:-1] + (q + 1,))
    omega[..., 0] = 1.0
    for r in range(2, q + 1):
        acc = ybar[..., r].copy()
        for s in range(r):
            if s == 1:
                continue
            acc -= math.comb(r, s) * omega[..., s] * G[..., r - s]
        omega[..., r] = acc
    return omega


def error_moments(sample: RegressionSample, fit: PolyFit, q: int) -> np.ndarray:
    """Recursive estimates of ``E(eps^r)`` for ``r = 2..q``."""
    if q < 2:
        raise ValueError("q must be >= 2")
    return _error_moments_core(sample.y, fit.beta, fit.latent_moments, q)[2:]
