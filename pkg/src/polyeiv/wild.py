"""Moment-matching surrogate distributions for the regression error."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["MomentMatchDist", "make_match_dist", "sample_errors"]


@dataclass(frozen=True)
class MomentMatchDist:
    """Zero-mean law matching the leading estimated moments of the error.

    ``kind`` is ``"normal"`` (variance only), ``"three_point"`` (atoms
    ``0, +-a`` matching the second and fourth moments) or ``"two_point"``
    (two atoms matching the second and third moments).  For the discrete
    kinds ``atoms`` and ``probs`` describe the law exactly.
    """

    kind: str
    omega2: float
    atoms: np.ndarray
    probs: np.ndarray
    matched_order: int
    fallback: bool = False

    def moment(self, r: int) -> float:
        """Exact ``r``-th moment."""
        if self.kind == "normal":
            if r % 2:
                return 0.0
            return float(math.prod(range(r - 1, 0, -2))) * self.omega2 ** (r // 2)
        return float(np.sum(self.probs * self.atoms**r))

    def sample(self, rng, n):
        if self.kind == "normal":
            return rng.normal(0.0, math.sqrt(self.omega2), size=n)
        return self.atoms[rng.choice(self.atoms.size, size=n, p=self.probs)]


def make_match_dist(omega, q: int) -> MomentMatchDist:
    """Surrogate error law from ``omega = (omega_2, ..., omega_q)``.

    Parameters
    ----------
    omega : sequence of float
        Estimated error moments starting at order 2.
    q : {2, 3, 4}
        Number of moments to match.  ``q = 4`` falls back to the normal
        law (with ``fallback=True``) when ``omega_4 <= omega_2^2``.

    Examples
    --------
    >>> d = make_match_dist([1.0, 0.0, 2.0], 4)
    >>> d.atoms, d.probs
    (array([ 0.        , -1.41421356,  1.41421356]), array([0.5 , 0.25, 0.25]))
    """
    omega = [float(v) for v in omega]
    if q not in (2, 3, 4):
        raise ValueError("moment order must be 2, 3 or 4")
    if len(omega) < q - 1:
        raise ValueError(f"need omega_2..omega_{q}")
    w2 = omega[0]
    if not w2 > 0:
        raise ValueError("omega_2 must be positive")
    empty = np.zeros(0)
    if q == 2:
        return MomentMatchDist("normal", w2, empty, empty, 2)
    if q == 3:
        s = math.sqrt(w2)
        g = omega[1] / s**3
        root = math.sqrt(0.25 * g * g + 1.0)
        v1 = s * (0.5 * g - root)
        v2 = s * (0.5 * g + root)
        p1 = v2 / (v2 - v1)
        return MomentMatchDist("two_point", w2, np.array([v1, v2]),
                               np.array([p1, 1.0 - p1]), 3)
    w4 = omega[2]
    if not w4 > w2 * w2:
        return MomentMatchDist("normal", w2, empty, empty, 2, fallback=True)
    pi = w2 * w2 / w4
    a = math.sqrt(w2 / pi)
    return MomentMatchDist("three_point", w2, np.array([0.0, -a, a]),
                           np.array([1.0 - pi, 0.5 * pi, 0.5 * pi]), 4)


def sample_errors(dist: MomentMatchDist, rng, n: int) -> np.ndarray:
    return dist.sample(rng, n)
