"""Noise models estimated from auxiliary data.

Two settings are supported: direct observations of the noise ``U``, and
replicated covariate measurements ``W_ik = X_i + U_ik``.  In the second
case within-group differences ``V = U_1 - U_2`` have every cumulant equal
to twice the corresponding cumulant of ``U`` (for symmetric ``U``), and
``|E cos(tV)| = f_U(t)^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InsufficientReplicationError, UnsupportedOperationError
from .moments import RegressionSample
from .noise import NoiseModel

__all__ = [
    "ReplicatedSample",
    "EmpiricalNoise",
    "moments_from_direct",
    "cumulants_from_moments",
    "moments_from_cumulants",
    "moments_from_replicates",
    "empirical_cf_direct",
    "empirical_cf_replicates",
    "build_empirical_noise",
    "MAX_CUMULANT_ORDER",
]

MAX_CUMULANT_ORDER = 8
LOW_CONFIDENCE_FRACTION = 0.9


class ReplicatedSample:
    """Groups of repeated measurements sharing one latent covariate."""

    def __init__(self, w_groups: Sequence, y_groups: Optional[Sequence] = None):
        self.w_groups = [np.asarray(g, dtype=float).ravel() for g in w_groups]
        if y_groups is None:
            self.y_groups = None
        else:
            self.y_groups = [np.asarray(g, dtype=float).ravel() for g in y_groups]
            if [g.size for g in self.y_groups] != [g.size for g in self.w_groups]:
                raise ValueError("W and Y groups must have matching sizes")
        if any(g.size == 0 for g in self.w_groups):
            raise ValueError("every group needs at least one measurement")

    @classmethod
    def from_long(cls, group, w, y=None) -> "ReplicatedSample":
        """Build from long-format columns with repeated group ids."""
        group = np.asarray(group)
        w = np.asarray(w, dtype=float)
        keys, inverse = np.unique(group, return_inverse=True)
        order = np.argsort(inverse, kind="stable")
        splits = np.cumsum(np.bincount(inverse))[:-1]
        wg = np.split(w[order], splits)
        yg = None if y is None else np.split(np.asarray(y, dtype=float)[order], splits)
        return cls(wg, yg)

    @property
    def n_groups(self) -> int:
        return len(self.w_groups)

    @property
    def n_pairs(self) -> int:
        """``N = sum_i N_i (N_i - 1)``, the number of ordered pairs."""
        return sum(g.size * (g.size - 1) for g in self.w_groups)

    def differences(self) -> np.ndarray:
        """``W_ik1 - W_ik2`` over unordered within-group pairs ``k1 < k2``."""
        if self.n_pairs == 0:
            raise InsufficientReplicationError("no group has two or more replicates")
        out = []
        for g in self.w_groups:
            if g.size >= 2:
                i, j = np.triu_indices(g.size, k=1)
                out.append(g[i] - g[j])
        return np.concatenate(out)

    def pooled(self) -> RegressionSample:
        """All ``(W_ik, Y_ik)`` pairs stacked into one sample."""
        if self.y_groups is None:
            raise ValueError("replicated sample has no responses")
        return RegressionSample(np.concatenate(self.w_groups), np.concatenate(self.y_groups))


def moments_from_direct(u, J: int) -> np.ndarray:
    """Centered empirical moments ``mean((U - mean U)^j)``, ``j = 0..J``."""
    u = np.asarray(u, dtype=float).ravel()
    if u.size < 2:
        raise ValueError("need at least two noise observations")
    d = u - u.mean()
    out = np.array([np.mean(d**j) for j in range(J + 1)])
    out[0] = 1.0
    return out


def cumulants_from_moments(mu):
    """Cumulants ``k_1..k_J`` from raw moments ``m_1..m_J``.

    ``k_r = m_r - sum_{k=1}^{r-1} C(r-1, k-1) k_k m_{r-k}``.  Pure Python
    arithmetic, so ``Fraction`` inputs give exact results.
    """
    mu = list(mu)
    if len(mu) > MAX_CUMULANT_ORDER:
        raise ValueError(f"supported up to order {MAX_CUMULANT_ORDER}")
    m = [1] + mu
    kappa = [0] * (len(mu) + 1)
    for r in range(1, len(mu) + 1):
        acc = m[r]
        for k in range(1, r):
            acc -= math.comb(r - 1, k - 1) * kappa[k] * m[r - k]
        kappa[r] = acc
    return kappa[1:]


def moments_from_cumulants(kappa):
    """Inverse of :func:`cumulants_from_moments`."""
    kappa = [0] + list(kappa)
    if len(kappa) - 1 > MAX_CUMULANT_ORDER:
        raise ValueError(f"supported up to order {MAX_CUMULANT_ORDER}")
    m = [1] + [0] * (len(kappa) - 1)
    for r in range(1, len(kappa)):
        acc = kappa[r]
        for k in range(1, r):
            acc += math.comb(r - 1, k - 1) * kappa[k] * m[r - k]
        m[r] = acc
    return m[1:]


def moments_from_replicates(reps: ReplicatedSample, J: int) -> np.ndarray:
    """Moments ``nu_0..nu_J`` of symmetric ``U`` from replicate differences."""
    if J % 2:
        raise ValueError("J must be even")
    d = reps.differences()
    # both orderings of a pair give the same even power; odd powers cancel
    mv = [0.0 if j % 2 else float(np.mean(d**j)) for j in range(1, J + 1)]
    ku = [0.5 * k for k in cumulants_from_moments(mv)]
    mu = moments_from_cumulants(ku)
    out = np.array([1.0] + [float(v) for v in mu])
    out[1::2] = 0.0
    return out


def _mean_cos_sin(d, t, block=256):
    # chunked over t to bound the size of the outer product
    t = np.asarray(t, dtype=float)
    flat = t.ravel()
    c = np.empty(flat.size)
    s = np.empty(flat.size)
    for i in range(0, flat.size, block):
        td = np.multiply.outer(flat[i:i + block], d)
        c[i:i + block] = np.cos(td).mean(axis=-1)
        s[i:i + block] = np.sin(td).mean(axis=-1)
    return c.reshape(t.shape), s.reshape(t.shape)


def empirical_cf_direct(u, t, ridge: float = 0.0):
    """``max(|mean exp(itU)|, ridge)``."""
    c, s = _mean_cos_sin(np.asarray(u, dtype=float).ravel(), t)
    return np.maximum(np.hypot(c, s), ridge)


def empirical_cf_replicates(reps: ReplicatedSample, t, ridge: float = 0.0):
    """``max(|mean cos(t (W_ik1 - W_ik2))|^(1/2), ridge)``."""
    c, _ = _mean_cos_sin(reps.differences(), t)
    return np.maximum(np.sqrt(np.abs(c)), ridge)


@dataclass(frozen=True, eq=False)
class EmpiricalNoise(NoiseModel):
    """Noise model backed by estimated moments and a tabulated CF.

    ``tab_t`` is a symmetric equispaced grid and ``tab_f`` the (floored)
    CF estimate on it.  ``phi`` differentiates ``1 / f`` by repeated central
    differences on that grid.
    """

    nu_hat: np.ndarray
    tab_t: np.ndarray
    tab_f: np.ndarray
    ridge: float = 0.0
    source: str = "direct"
    u_data: Optional[np.ndarray] = None
    surrogate: Optional[str] = None
    family = "empirical"

    def __post_init__(self):
        nu = np.array(self.nu_hat, dtype=float)
        nu[0] = 1.0
        nu[1::2] = 0.0
        object.__setattr__(self, "nu_hat", nu)
        t = np.asarray(self.tab_t, dtype=float)
        f = np.asarray(self.tab_f, dtype=float)
        if t.shape != f.shape or t.size < 5 or not np.allclose(t, -t[::-1]):
            raise ValueError("tab_t must be a symmetric grid matching tab_f")
        object.__setattr__(self, "tab_t", t)
        object.__setattr__(self, "tab_f", f)
        if self.surrogate not in (None, "resample", "gaussian"):
            raise ValueError("surrogate must be None, 'resample' or 'gaussian'")
        if self.surrogate == "resample" and self.u_data is None:
            raise ValueError("resampling surrogate needs direct noise data")
        g = 1.0 / f
        derivs = [g]
        dt = t[1] - t[0]
        for _ in range(MAX_CUMULANT_ORDER):
            derivs.append(np.gradient(derivs[-1], dt))
        object.__setattr__(self, "_recip_derivs", derivs)

    @property
    def max_moment_order(self):
        return self.nu_hat.size - 1

    @property
    def low_confidence(self) -> bool:
        """True when the ridge floor binds almost everywhere on ``t > 0``."""
        pos = self.tab_t > 0
        floored = self.tab_f[pos] <= self.ridge * (1 + 1e-12)
        return bool(np.mean(floored) >= LOW_CONFIDENCE_FRACTION)

    def moment(self, j):
        self._check_order(j)
        return float(self.nu_hat[j])

    def cf(self, t):
        t = np.asarray(t, dtype=float)
        return np.interp(t, self.tab_t, self.tab_f)

    def phi(self, r, t):
        if r > MAX_CUMULANT_ORDER:
            raise ValueError(f"phi_r available for r <= {MAX_CUMULANT_ORDER}")
        t = np.asarray(t, dtype=float)
        d = np.interp(t, self.tab_t, self._recip_derivs[r])
        return self.cf(t) * (-1j) ** r * d

    def sample(self, rng, n):
        if self.surrogate == "resample":
            centered = self.u_data - self.u_data.mean()
            return centered[rng.integers(0, centered.size, size=n)]
        if self.surrogate == "gaussian":
            return rng.normal(0.0, math.sqrt(max(self.variance, 0.0)), size=n)
        raise UnsupportedOperationError(
            "empirical noise has no surrogate sampler configured"
        )

    def to_dict(self):
        return {"family": "empirical", "source": self.source,
                "variance": self.variance, "ridge": self.ridge,
                "low_confidence": self.low_confidence}


def build_empirical_noise(source, J: int = 8, ridge: float | None = None,
                          t_max: float = 10.0, dt: float = 0.01,
                          surrogate: str | None = None) -> EmpiricalNoise:
    """Estimated noise model from direct data or replicates.

    Parameters
    ----------
    source : array_like or ReplicatedSample
        Direct observations of ``U``, or replicated measurements.
    J : int
        Highest (even) moment order to estimate.
    ridge : float, optional
        Floor for the CF estimate; defaults to ``m^(-1/4)`` with ``m`` the
        number of noise observations (or of distinct replicate pairs).
    t_max, dt : float
        Extent and spacing of the CF tabulation.
    surrogate : {None, 'resample', 'gaussian'}
        How the bootstrap draws noise.  ``'resample'`` needs direct data.
    """
    m = int(round(t_max / dt))
    t = dt * np.arange(-m, m + 1)
    if isinstance(source, ReplicatedSample):
        nu = moments_from_replicates(source, J + (J % 2))[: J + 1]
        count = source.differences().size
        ridge = count ** -0.25 if ridge is None else float(ridge)
        f = empirical_cf_replicates(source, np.abs(t), ridge)
        return EmpiricalNoise(nu, t, f, ridge, "replicates", None, surrogate)
    u = np.asarray(source, dtype=float).ravel()
    nu = moments_from_direct(u, J)
    ridge = u.size ** -0.25 if ridge is None else float(ridge)
    f = empirical_cf_direct(u, np.abs(t), ridge)
    return EmpiricalNoise(nu, t, f, ridge, "direct", u, surrogate)
