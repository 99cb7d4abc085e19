"""Measurement-error (covariate noise) distributions.

Each model exposes what the pipeline needs to know about the noise ``U``:
raw moments, the characteristic function, the functions

    phi_r(t) = f(t) * (-i d/dt)^r [1 / f(t)]

used by the test statistic, the polynomial tail decay of ``f`` (if any) and
a sampler.  The built-in families are symmetric, so ``f`` is real and even.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from numpy.polynomial import polynomial as P

__all__ = [
    "TailDecay",
    "NoiseModel",
    "GaussianNoise",
    "LaplaceNoise",
    "noise_from_spec",
]

DEFAULT_MAX_MOMENT_ORDER = 16


@dataclass(frozen=True)
class TailDecay:
    """Polynomial decay ``f(t) ~ C |t|^-alpha`` of a characteristic function."""

    C: float
    alpha: float

    def __post_init__(self):
        if not self.C > 0:
            raise ValueError("tail constant C must be positive")
        if not self.alpha > 0.5:
            raise ValueError("decay exponent alpha must exceed 1/2")


class NoiseModel:
    """Interface shared by all noise models.

    Subclasses implement ``moment``, ``cf``, ``phi`` and ``sample``.
    """

    family: str = ""
    max_moment_order: int = DEFAULT_MAX_MOMENT_ORDER

    @property
    def tail(self) -> Optional[TailDecay]:
        return None

    @property
    def variance(self) -> float:
        return self.moment(2)

    def moment(self, j: int) -> float:
        raise NotImplementedError

    def moments(self, J: int) -> np.ndarray:
        """Raw moments ``nu_0, ..., nu_J`` as an array."""
        return np.array([self.moment(j) for j in range(J + 1)], dtype=float)

    def cf(self, t):
        raise NotImplementedError

    def phi(self, r: int, t):
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        raise NotImplementedError

    def _check_order(self, j):
        if j < 0 or j > self.max_moment_order:
            raise ValueError(
                f"moment order {j} outside available range "
                f"0..{self.max_moment_order}"
            )

    def to_dict(self) -> dict:
        return {"family": self.family, "variance": self.variance}


@lru_cache(maxsize=None)
def _gaussian_phi_poly(r: int, var: float) -> np.ndarray:
    # p_0 = 1, p_{r+1} = -i (var * t * p_r + p_r')
    p = np.array([1.0 + 0j])
    for _ in range(r):
        p = -1j * P.polyadd(var * P.polymulx(p), P.polyder(p))
    return p


@dataclass(frozen=True)
class GaussianNoise(NoiseModel):
    """Normal ``N(0, variance)`` noise.

    ``variance = 0`` is accepted and gives the point mass at zero (no noise).
    The characteristic function decays faster than any polynomial, so
    ``tail`` is ``None``.
    """

    var: float
    max_moment_order: int = DEFAULT_MAX_MOMENT_ORDER
    family = "gaussian"

    def __post_init__(self):
        if not (self.var >= 0 and math.isfinite(self.var)):
            raise ValueError("Gaussian noise variance must be finite and >= 0")

    @property
    def variance(self):
        return float(self.var)

    def moment(self, j):
        self._check_order(j)
        if j % 2:
            return 0.0
        # (j - 1)!! sigma^j
        return float(math.prod(range(j - 1, 0, -2))) * self.var ** (j // 2)

    def cf(self, t):
        t = np.asarray(t, dtype=float)
        return np.exp(-0.5 * self.var * t * t)

    def phi(self, r, t):
        t = np.asarray(t, dtype=float)
        return P.polyval(t, _gaussian_phi_poly(int(r), float(self.var)))

    def sample(self, rng, n):
        if self.var == 0:
            return np.zeros(n)
        return rng.normal(0.0, math.sqrt(self.var), size=n)


@dataclass(frozen=True)
class LaplaceNoise(NoiseModel):
    """Laplace noise parameterized by its variance.

    The scale is ``b = sqrt(variance / 2)`` and the characteristic function
    is ``1 / (1 + b^2 t^2)``, which decays like ``(2 / variance) t^-2``.
    """

    var: float
    max_moment_order: int = DEFAULT_MAX_MOMENT_ORDER
    family = "laplace"

    def __post_init__(self):
        if not (self.var > 0 and math.isfinite(self.var)):
            raise ValueError("Laplace noise variance must be finite and > 0")

    @property
    def variance(self):
        return float(self.var)

    @property
    def scale(self):
        return math.sqrt(self.var / 2.0)

    @property
    def tail(self):
        return TailDecay(C=2.0 / self.var, alpha=2.0)

    def moment(self, j):
        self._check_order(j)
        if j % 2:
            return 0.0
        return float(math.factorial(j)) * self.scale**j

    def cf(self, t):
        t = np.asarray(t, dtype=float)
        return 1.0 / (1.0 + 0.5 * self.var * t * t)

    def phi(self, r, t):
        # 1/f = 1 + (var/2) t^2 is a quadratic, so phi_r vanishes for r >= 3
        t = np.asarray(t, dtype=float)
        f = self.cf(t)
        if r == 0:
            return np.ones_like(t, dtype=complex)
        if r == 1:
            return -1j * self.var * t * f
        if r == 2:
            return (-self.var * f).astype(complex)
        return np.zeros_like(t, dtype=complex)

    def sample(self, rng, n):
        return rng.laplace(0.0, self.scale, size=n)


def noise_from_spec(spec) -> NoiseModel:
    """Build a built-in noise model from a config mapping or ``family:var``.

    >>> noise_from_spec("laplace:0.5").variance
    0.5
    >>> noise_from_spec({"family": "gaussian", "variance": 1.0}).family
    'gaussian'
    """
    if isinstance(spec, NoiseModel):
        return spec
    if isinstance(spec, str):
        family, _, value = spec.partition(":")
        spec = {"family": family, "variance": float(value) if value else 1.0}
    family = str(spec["family"]).lower()
    var = float(spec["variance"])
    if family in ("gaussian", "normal"):
        return GaussianNoise(var)
    if family == "laplace":
        return LaplaceNoise(var)
    raise ValueError(f"unknown noise family {spec['family']!r}")
