"""
Monte Carlo level and power
===========================

A small version of the level and power studies: uniform covariates on
[-3, 4], N(0, 1) errors, N(0, 1) covariate noise, and a 1.5 cos(X)
departure for power.  The full-size tables use 500 and 200 datasets per
cell; ``polyeiv simulate-level`` and ``simulate-power`` run them.
"""

from polyeiv import ScenarioConfig, TestConfig, run_level_table, run_power_table

cfg = TestConfig(B=100)
null = ScenarioConfig(noise="gaussian:1.0", test=cfg)
alt = ScenarioConfig(noise="gaussian:1.0", departure="cos", c=1.5, test=cfg)

level = run_level_table(null, [50, 100], reps=60, seed=1)
power = run_power_table(alt, [50, 100], reps=60, seed=1)
print("level\n" + level.to_csv())
print("power\n" + power.to_csv())
