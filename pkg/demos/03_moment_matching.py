"""
Moment-matching surrogates for the regression error
===================================================

The bootstrap never resamples residuals.  It draws errors from a small
discrete law whose leading moments equal the estimated error moments.
"""

import numpy as np

from polyeiv import make_match_dist

rng = np.random.default_rng(0)

# symmetric, heavy-ish tails: three atoms at 0 and +-a
d = make_match_dist([1.0, 0.0, 4.0], 4)
print(d.kind, "atoms", np.round(d.atoms, 4), "probs", np.round(d.probs, 4))
z = d.sample(rng, 200_000)
print("E Z^2, E Z^4 exact:", d.moment(2), d.moment(4), " sampled:",
      round(np.mean(z**2), 3), round(np.mean(z**4), 3))

# skewed errors: two atoms matching variance and third moment
d = make_match_dist([2.0, 3.0], 3)
print(d.kind, "atoms", np.round(d.atoms, 4), "probs", np.round(d.probs, 4))
print("E Z^3 exact:", round(d.moment(3), 12))

# platykurtic estimates (omega_4 <= omega_2^2) cannot be matched; normal is used
print(make_match_dist([1.0, 0.0, 0.8], 4))
