"""Scenario-driven Monte Carlo harness and CSV input/output.

A scenario describes a data-generating model: latent covariate law,
covariate noise, regression error variance, true coefficients and an
optional departure from the polynomial null.  Level and power tables run
independent datasets through :func:`polyeiv.bootstrap.run_test` and
tabulate rejection frequencies against the nominal level.
"""

from __future__ import annotations

import configparser
import csv
import io
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from typing import Optional

import numpy as np

from .bootstrap import TestConfig, child_seed, reject_at, run_test, seed_sequence
from .errors import EIVError
from .moments import RegressionSample
from .noise import NoiseModel, noise_from_spec

__all__ = [
    "ScenarioConfig",
    "MonteCarloTable",
    "CsvParseError",
    "generate_dataset",
    "run_level_table",
    "run_power_table",
    "analyze_csv",
    "sensitivity_sweep",
    "read_pairs_csv",
    "read_replicates_csv",
    "read_column_csv",
    "rows_to_csv",
    "load_scenario",
    "DEFAULT_ALPHAS",
    "THREADS_ENV",
]

DEFAULT_ALPHAS = (0.05, 0.06, 0.07, 0.08, 0.09, 0.10)
LEVEL_REPS = 500
POWER_REPS = 200
FULL_SCALE_REPS = 2000
THREADS_ENV = "POLYEIV_THREADS"


class CsvParseError(ValueError):
    """Malformed input file; the message carries the offending line number."""


@dataclass(frozen=True)
class ScenarioConfig:
    """Data-generating model for simulation studies.

    The latent covariate is uniform on ``[x_low, x_high]`` unless
    ``x_table = (x, F)`` tabulates its CDF.  ``departure`` is ``"none"``,
    ``"cos"`` (adds ``c cos(X)``) or ``"local"`` (adds
    ``n^(-1/2) c gamma(X)`` with ``gamma = (x, values)`` interpolated and
    zero outside the table).
    """

    x_low: float = -3.0
    x_high: float = 4.0
    x_table: Optional[tuple] = None
    noise: object = "gaussian:1.0"
    error_variance: float = 1.0
    beta: tuple = (0.0, 1.0)
    departure: str = "none"
    c: float = 0.0
    gamma: Optional[tuple] = None
    n: int = 100
    reps: int = LEVEL_REPS
    test: TestConfig = field(default_factory=TestConfig)
    output: Optional[str] = None

    def __post_init__(self):
        if self.departure not in ("none", "cos", "local"):
            raise ValueError("departure must be 'none', 'cos' or 'local'")
        if self.departure == "local" and self.gamma is None:
            raise ValueError("local departure needs a tabulated gamma")
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        object.__setattr__(self, "noise", noise_from_spec(self.noise))
        object.__setattr__(self, "beta", tuple(float(b) for b in self.beta))

    @property
    def support(self):
        if self.x_table is not None:
            x = np.asarray(self.x_table[0], dtype=float)
            return float(x[0]), float(x[-1])
        return float(self.x_low), float(self.x_high)

    def test_config(self) -> TestConfig:
        """Test settings, with the declared covariate support filled in."""
        if self.test.support is None:
            return self.test.replace(support=self.support)
        return self.test

    def metadata(self) -> dict:
        return {
            "beta": list(self.beta),
            "noise": self.noise.to_dict(),
            "error_variance": self.error_variance,
            "departure": self.departure,
            "c": self.c,
            "support": list(self.support),
        }


def generate_dataset(scenario: ScenarioConfig, rng, n: int | None = None) -> RegressionSample:
    """Draw ``(W, Y)`` from the scenario; draws ``X``, then ``eps``, then ``U``."""
    n = scenario.n if n is None else n
    if scenario.x_table is None:
        x = rng.uniform(scenario.x_low, scenario.x_high, size=n)
    else:
        xs, Fs = (np.asarray(a, dtype=float) for a in scenario.x_table)
        x = np.interp(rng.random(n), Fs, xs)
    if scenario.error_variance > 0:
        eps = rng.normal(0.0, math.sqrt(scenario.error_variance), size=n)
    else:
        eps = np.zeros(n)
    u = scenario.noise.sample(rng, n)
    y = np.polynomial.polynomial.polyval(x, np.asarray(scenario.beta)) + eps
    if scenario.departure == "cos":
        y = y + scenario.c * np.cos(x)
    elif scenario.departure == "local":
        gx, gy = (np.asarray(a, dtype=float) for a in scenario.gamma)
        y = y + scenario.c / math.sqrt(n) * np.interp(x, gx, gy, left=0.0, right=0.0)
    return RegressionSample(x + u, y)


@dataclass
class MonteCarloTable:
    """Rejection frequencies, one row per sample size and one column per level."""

    n_values: list
    alphas: list
    rates: np.ndarray
    reps: list
    failures: list
    seed: int
    metadata: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["n", "reps", "failures", "seed"] + [repr(float(a)) for a in self.alphas])
        for i, n in enumerate(self.n_values):
            wr.writerow([n, self.reps[i], self.failures[i], self.seed]
                        + [repr(float(v)) for v in self.rates[i]])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "MonteCarloTable":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0][:4] != ["n", "reps", "failures", "seed"]:
            raise CsvParseError("line 1: expected header n,reps,failures,seed,<alphas>")
        alphas = [float(a) for a in rows[0][4:]]
        n_values, reps, failures, rates = [], [], [], []
        seed = 0
        for lineno, row in enumerate(rows[1:], start=2):
            if len(row) != 4 + len(alphas):
                raise CsvParseError(f"line {lineno}: expected {4 + len(alphas)} fields")
            n_values.append(int(row[0]))
            reps.append(int(row[1]))
            failures.append(int(row[2]))
            seed = int(row[3])
            rates.append([float(v) for v in row[4:]])
        return cls(n_values, alphas, np.array(rates, dtype=float).reshape(len(n_values), len(alphas)),
                   reps, failures, seed)

    def __eq__(self, other):
        if not isinstance(other, MonteCarloTable):
            return NotImplemented
        return (list(self.n_values) == list(other.n_values)
                and list(self.alphas) == list(other.alphas)
                and np.array_equal(self.rates, other.rates)
                and list(self.reps) == list(other.reps)
                and list(self.failures) == list(other.failures)
                and self.seed == other.seed)

    def rate(self, n: int, alpha: float) -> float:
        i = list(self.n_values).index(n)
        j = int(np.argmin(np.abs(np.asarray(self.alphas) - alpha)))
        return float(self.rates[i, j])


def _workers():
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _one_rep(args):
    scenario, cfg, alphas, n, ss, r = args
    data = generate_dataset(scenario, np.random.Generator(np.random.PCG64(child_seed(ss, n, r, 0))), n)
    try:
        report = run_test(data, scenario.noise, cfg, seed=child_seed(ss, n, r, 1))
    except (EIVError, np.linalg.LinAlgError):
        return None
    return [reject_at(report, a) for a in alphas]


def _run_table(scenario, n_values, alphas, reps, seed, workers):
    ss = seed_sequence(seed)
    cfg = scenario.test_config()
    tasks = [(scenario, cfg, tuple(alphas), int(n), ss, r)
             for n in n_values for r in range(reps)]
    workers = _workers() if workers is None else workers
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_one_rep, tasks, chunksize=max(1, len(tasks) // (8 * workers))))
    else:
        results = [_one_rep(t) for t in tasks]
    rates, ok_counts, fails = [], [], []
    for i, _ in enumerate(n_values):
        block = results[i * reps:(i + 1) * reps]
        ok = [b for b in block if b is not None]
        ok_counts.append(len(ok))
        fails.append(reps - len(ok))
        rates.append(np.mean(ok, axis=0) if ok else np.full(len(alphas), np.nan))
    return MonteCarloTable(list(map(int, n_values)), [float(a) for a in alphas],
                           np.array(rates, dtype=float), ok_counts, fails, int(seed),
                           scenario.metadata())


def _check_reps(reps):
    if reps > LEVEL_REPS:
        warnings.warn(f"{reps} replications per cell; this can take a long time",
                      RuntimeWarning, stacklevel=3)


def run_level_table(scenario: ScenarioConfig, n_values=(50, 60, 70, 80, 90, 100),
                    alphas=DEFAULT_ALPHAS, reps: int | None = None, seed: int = 0,
                    workers: int | None = None) -> MonteCarloTable:
    """Rejection rates under the null for each ``n`` and nominal level."""
    if scenario.departure != "none":
        raise ValueError("level table needs a scenario without departure")
    reps = LEVEL_REPS if reps is None else reps
    _check_reps(reps)
    return _run_table(scenario, n_values, alphas, reps, seed, workers)


def run_power_table(scenario: ScenarioConfig, n_values=(50, 60, 70, 80, 90, 100),
                    alphas=DEFAULT_ALPHAS, reps: int | None = None, seed: int = 0,
                    workers: int | None = None) -> MonteCarloTable:
    """Rejection rates under a departure from the polynomial model."""
    if scenario.departure == "none":
        raise ValueError("power table needs a departure ('cos' or 'local')")
    reps = POWER_REPS if reps is None else reps
    _check_reps(reps)
    return _run_table(scenario, n_values, alphas, reps, seed, workers)


def _open_rows(path):
    with open(path, newline="") as fh:
        text = fh.read()
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or not any(cell.strip() for cell in rows[0]):
        raise CsvParseError(f"{path}: line 1: file is empty")
    header = [h.strip() for h in rows[0]]
    return header, rows[1:]


def _floats(row, lineno, want):
    if len(row) != want:
        raise CsvParseError(f"line {lineno}: expected {want} fields, got {len(row)}")
    try:
        return [float(v) for v in row]
    except ValueError:
        raise CsvParseError(f"line {lineno}: non-numeric value in {row!r}") from None


def read_pairs_csv(path) -> RegressionSample:
    """Read a ``W,Y`` CSV file into a sample."""
    header, rows = _open_rows(path)
    if [h.upper() for h in header] != ["W", "Y"]:
        raise CsvParseError(f"line 1: expected header 'W,Y', got {','.join(header)!r}")
    data = [_floats(r, i, 2) for i, r in enumerate(rows, start=2) if r]
    if not data:
        raise CsvParseError("line 2: no data rows")
    arr = np.array(data)
    return RegressionSample(arr[:, 0], arr[:, 1])


def read_replicates_csv(path):
    """Read a long-format ``group,W,Y`` CSV into a replicated sample."""
    from .unknown_noise import ReplicatedSample

    header, rows = _open_rows(path)
    if [h.lower() for h in header] != ["group", "w", "y"]:
        raise CsvParseError(f"line 1: expected header 'group,W,Y', got {','.join(header)!r}")
    groups, w, y = [], [], []
    for i, r in enumerate(rows, start=2):
        if not r:
            continue
        if len(r) != 3:
            raise CsvParseError(f"line {i}: expected 3 fields, got {len(r)}")
        vals = _floats(r[1:], i, 2)
        groups.append(r[0].strip())
        w.append(vals[0])
        y.append(vals[1])
    if not groups:
        raise CsvParseError("line 2: no data rows")
    return ReplicatedSample.from_long(groups, w, y)


def read_column_csv(path) -> np.ndarray:
    """Read a one-column CSV (with header) of direct noise observations."""
    header, rows = _open_rows(path)
    if len(header) != 1:
        raise CsvParseError("line 1: expected a single-column header")
    vals = [_floats(r, i, 1)[0] for i, r in enumerate(rows, start=2) if r]
    if not vals:
        raise CsvParseError("line 2: no data rows")
    return np.array(vals)


def _with_variance(noise: NoiseModel, var: float) -> NoiseModel:
    if noise.family not in ("gaussian", "laplace"):
        raise ValueError("variance sweep needs a Gaussian or Laplace noise model")
    return noise_from_spec({"family": noise.family, "variance": var})


def sensitivity_sweep(sample: RegressionSample, noise: NoiseModel, variances,
                      cfg: TestConfig | None = None, B_values=None, seed: int = 0) -> list:
    """Refit and retest for each assumed noise variance.

    Returns one row per variance with the coefficient estimates and the
    p-value for every bootstrap size in ``B_values``.
    """
    cfg = cfg or TestConfig()
    B_values = [cfg.B] if B_values is None else list(B_values)
    rows = []
    for var in variances:
        nz = _with_variance(noise, float(var))
        row = {"variance": float(var)}
        for B in B_values:
            rep = run_test(sample, nz, cfg.replace(B=int(B)), seed=seed)
            for k, b in enumerate(rep.beta_hat):
                row[f"beta_{k}"] = float(b)
            row[f"p({B})"] = rep.p_value
        rows.append(row)
    return rows


def analyze_csv(path, cfg: TestConfig | None = None, noise="gaussian:1.0",
                sweep=None, B_values=None, seed: int | None = None):
    """Run the test on a ``W,Y`` file; with ``sweep`` run a variance sweep.

    Returns a :class:`TestReport` or, with ``sweep``, a list of rows.
    """
    cfg = cfg or TestConfig()
    seed = cfg.seed if seed is None else seed
    sample = read_pairs_csv(path)
    noise = noise_from_spec(noise)
    if sweep:
        return sensitivity_sweep(sample, noise, sweep, cfg, B_values, seed)
    return run_test(sample, noise, cfg, seed=seed)


def rows_to_csv(rows: list) -> str:
    buf = io.StringIO()
    if rows:
        wr = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        wr.writeheader()
        wr.writerows(rows)
    return buf.getvalue()


_LIST_FIELDS = {"beta", "support", "n_values", "alphas"}


def _parse_value(key, raw):
    raw = raw.strip()
    if key in _LIST_FIELDS or "," in raw:
        return [float(v) for v in raw.split(",") if v.strip()]
    low = raw.lower()
    if low in ("none", ""):
        return None
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        return raw


def load_scenario(path_or_text: str, is_text: bool = False):
    """Parse a flat ``key = value`` scenario file.

    Keys are :class:`ScenarioConfig` fields, :class:`TestConfig` fields, and
    the table keys ``n_values`` and ``alphas``.  Tabulated laws use
    ``x_table_x``/``x_table_F`` and ``gamma_x``/``gamma_y``.  Returns
    ``(scenario, extras)`` where ``extras`` holds the table keys.
    """
    text = path_or_text if is_text else open(path_or_text).read()
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    if not text.lstrip().startswith("["):
        text = "[scenario]\n" + text
    parser.read_string(text)
    items = {}
    for section in parser.sections():
        items.update(parser.items(section))
    values = {k: _parse_value(k, v) for k, v in items.items()}
    scen_keys = {f.name for f in fields(ScenarioConfig)}
    test_keys = {f.name for f in fields(TestConfig)}
    scen, test, extras = {}, {}, {}
    for k, v in values.items():
        if k in ("x_table_x", "x_table_F", "gamma_x", "gamma_y"):
            continue
        if k in ("n_values", "alphas"):
            extras[k] = v
        elif k in scen_keys and k != "test":
            scen[k] = v
        elif k in test_keys:
            test[k] = v
        else:
            raise ValueError(f"unknown scenario key {k!r}")
    if "x_table_x" in values:
        scen["x_table"] = (values["x_table_x"], values["x_table_F"])
    if "gamma_x" in values:
        scen["gamma"] = (values["gamma_x"], values["gamma_y"])
    if "support" in test and test["support"] is not None:
        test["support"] = tuple(test["support"])
    if "beta" in scen:
        scen["beta"] = tuple(scen["beta"])
    scen["test"] = TestConfig.from_dict(test)
    if "n_values" in extras:
        extras["n_values"] = [int(v) for v in extras["n_values"]]
    return ScenarioConfig(**scen), extras

