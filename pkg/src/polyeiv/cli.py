"""Command-line interface.

Subcommands: ``test``, ``simulate-level``, ``simulate-power``,
``bandwidth`` and ``analyze``.  Reports are JSON on standard output, tables
are CSV (standard output or ``--out``).
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings

from . import deconvolution as dc
from .bootstrap import TestConfig, run_test
from .errors import EIVError
from .harness import (
    DEFAULT_ALPHAS,
    FULL_SCALE_REPS,
    CsvParseError,
    load_scenario,
    read_column_csv,
    read_pairs_csv,
    read_replicates_csv,
    rows_to_csv,
    run_level_table,
    run_power_table,
    sensitivity_sweep,
)
from .noise import noise_from_spec
from .unknown_noise import build_empirical_noise


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text):
    return [int(v) for v in text.split(",") if v.strip()]


def _load_data_and_noise(args):
    """Resolve ``--data``/``--noise`` into a sample and a noise model."""
    spec = args.noise
    if spec == "replicates":
        reps = read_replicates_csv(args.data)
        noise = build_empirical_noise(reps, J=8, ridge=args.ridge, surrogate="gaussian")
        return reps.pooled(), noise
    sample = read_pairs_csv(args.data)
    if spec.startswith("direct:"):
        u = read_column_csv(spec.split(":", 1)[1])
        noise = build_empirical_noise(u, J=8, ridge=args.ridge, surrogate=args.surrogate)
        return sample, noise
    return sample, noise_from_spec(spec)


def _test_config(args, **extra):
    base = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            conf = json.load(fh)
        conf.pop("family", None)
        conf.pop("variance", None)
        base.update(conf)
    for key in ("degree", "alpha", "moment_order", "bandwidth", "seed"):
        val = getattr(args, key, None)
        if val is not None:
            base[key] = val
    if getattr(args, "support", None):
        base["support"] = tuple(args.support)
    base.update(extra)
    return TestConfig.from_dict(base)


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_test(args):
    sample, noise = _load_data_and_noise(args)
    cfg = _test_config(args, B=args.B)
    report = run_test(sample, noise, cfg)
    _emit(json.dumps(report.to_dict(), indent=2) + "\n", args.out)


def cmd_bandwidth(args):
    sample, noise = _load_data_and_noise(args)
    out = {"n": sample.n, "noise": noise.to_dict()}
    if noise.tail is None:
        out.update(h=float(args.fallback), plug_in=False)
    else:
        crit = dc.plugin_criterion(sample.w, noise)
        out.update(h=crit.minimizer(), plug_in=True, C1=crit.C1, C2=crit.C2,
                   alpha=crit.alpha, C=crit.C, sigma_x2=crit.sigma_x2)
    _emit(json.dumps(out, indent=2) + "\n", args.out)


def cmd_analyze(args):
    sample, noise = _load_data_and_noise(args)
    Bs = _ints(args.B)
    cfg = _test_config(args, B=Bs[0])
    if args.sweep:
        rows = sensitivity_sweep(sample, noise, _floats(args.sweep), cfg, Bs, seed=cfg.seed)
        _emit(rows_to_csv(rows), args.out)
    else:
        report = run_test(sample, noise, cfg)
        _emit(json.dumps(report.to_dict(), indent=2) + "\n", args.out)


def _simulate(args, power):
    if args.scenario:
        scenario, extras = load_scenario(args.scenario)
    else:
        from .harness import ScenarioConfig

        scenario, extras = ScenarioConfig(
            departure="cos" if power else "none", c=1.5 if power else 0.0,
            noise=args.noise or "gaussian:1.0"), {}
    if args.noise and args.scenario:
        scenario = _replace_noise(scenario, args.noise)
    test_over = {}
    if args.B is not None:
        test_over["B"] = args.B
    if args.bandwidth is not None:
        test_over["bandwidth"] = args.bandwidth
    if test_over:
        scenario = _replace_test(scenario, **test_over)
    n_values = _ints(args.n) if args.n else extras.get("n_values", [scenario.n])
    alphas = _floats(args.alpha) if args.alpha else extras.get("alphas", list(DEFAULT_ALPHAS))
    reps = args.reps
    if args.full_scale:
        warnings.warn(f"running at full scale ({FULL_SCALE_REPS} datasets per row)", RuntimeWarning)
        reps = FULL_SCALE_REPS
    runner = run_power_table if power else run_level_table
    table = runner(scenario, n_values, alphas, reps=reps, seed=args.seed)
    _emit(table.to_csv(), args.out or scenario.output)


def _replace_noise(scenario, spec):
    from dataclasses import replace

    return replace(scenario, noise=noise_from_spec(spec))


def _replace_test(scenario, **kw):
    from dataclasses import replace

    return replace(scenario, test=scenario.test.replace(**kw))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="polyeiv", description="Goodness-of-fit test for polynomial errors-in-variables regression.")
    sub = ap.add_subparsers(dest="command", required=True)

    def data_opts(p):
        p.add_argument("--data", required=True, help="CSV with header W,Y (or group,W,Y)")
        p.add_argument("--noise", default="gaussian:1.0",
                       help="gaussian:<var>, laplace:<var>, direct:<csv of U> or replicates")
        p.add_argument("--ridge", type=float, default=None)
        p.add_argument("--surrogate", choices=("resample", "gaussian"), default="resample",
                       help="bootstrap noise draws for direct noise data")
        p.add_argument("--out", default=None)

    def test_opts(p):
        p.add_argument("--degree", type=int, default=None)
        p.add_argument("--alpha", type=float, default=None)
        p.add_argument("--moment-order", dest="moment_order", type=int, choices=(2, 3, 4),
                       default=None)
        p.add_argument("--support", type=float, nargs=2, default=None, metavar=("C1", "C2"))
        p.add_argument("--bandwidth", type=float, default=None)
        p.add_argument("--config", default=None, help="JSON file with test settings")
        p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("test", help="bootstrap goodness-of-fit test on a W,Y file")
    data_opts(p)
    test_opts(p)
    p.add_argument("-B", type=int, default=100)
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("analyze", help="test a data file, optionally sweeping the noise variance")
    data_opts(p)
    test_opts(p)
    p.add_argument("-B", default="100", help="bootstrap size(s), comma separated")
    p.add_argument("--sweep", default=None, help="comma-separated noise variances")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("bandwidth", help="plug-in bandwidth and criterion components")
    data_opts(p)
    p.add_argument("--fallback", type=float, default=dc.SUPERSMOOTH_BANDWIDTH)
    p.set_defaults(func=cmd_bandwidth)

    for name, power in (("simulate-level", False), ("simulate-power", True)):
        p = sub.add_parser(name, help=f"Monte Carlo {'power' if power else 'level'} table")
        p.add_argument("--scenario", default=None, help="flat key = value scenario file")
        p.add_argument("--noise", default=None)
        p.add_argument("--n", default=None, help="comma-separated sample sizes")
        p.add_argument("--alpha", default=None, help="comma-separated nominal levels")
        p.add_argument("--reps", type=int, default=None)
        p.add_argument("-B", type=int, default=None)
        p.add_argument("--bandwidth", type=float, default=None)
        p.add_argument("--full-scale", action="store_true")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None)
        p.set_defaults(func=lambda a, _power=power: _simulate(a, _power))
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (CsvParseError, EIVError, OSError, ValueError) as exc:
        print(f"polyeiv: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
