"""
How much does the assumed noise variance matter?
================================================

With real data the noise variance is itself an estimate.  Re-running the
fit and test over a range of assumed variances shows how the corrected
slope and the p-value move.  Larger assumed noise means a larger
attenuation correction.
"""

import numpy as np

from polyeiv import RegressionSample, TestConfig, sensitivity_sweep
from polyeiv.harness import rows_to_csv
from polyeiv.noise import GaussianNoise

rng = np.random.default_rng(62)
n = 62
x = rng.normal(5.5, 0.6, n)
w = x + rng.normal(0, np.sqrt(0.035), n)
y = -0.8 + 1.2 * x + rng.normal(0, 0.35, n)

rows = sensitivity_sweep(RegressionSample(w, y), GaussianNoise(0.035),
                         [0.0049, 0.035, 0.065], TestConfig(B=100, moment_order=3),
                         B_values=[100, 200, 300], seed=3)
print(rows_to_csv(rows))
