"""Command-line entry point: simulate / sweep / theory / verify."""

import argparse
import dataclasses
import os
import sys

from . import harness, kernels, obs_model


def _add_common(parser):
    parser.add_argument("--config", type=str, default=None, help="experiment config file")
    parser.add_argument("--seed", type=int, default=None, help="override base seed")
    parser.add_argument("--trials", type=int, default=None, help="override trials per point")
    parser.add_argument("--workers", type=int, default=1, help="worker processes")
    parser.add_argument("--out", type=str, default=None, help="output directory")


def _load(args, required=True):
    if args.config is None:
        if required:
            sys.exit("error: --config is required for this command")
        return None
    cfg = harness.load_config(args.config)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, base_seed=args.seed)
    if args.trials is not None:
        cfg = dataclasses.replace(cfg, trials_per_point=args.trials)
    if args.out is not None:
        cfg = dataclasses.replace(cfg, output_dir=args.out)
    return cfg


def _outdir(args, cfg=None, default="out"):
    out = args.out or (cfg.output_dir if cfg else default)
    os.makedirs(out, exist_ok=True)
    return out


def cmd_simulate(args):
    cfg = _load(args)
    n = cfg.n_grid[-1]
    result = harness.run_trial(cfg, n, 0)
    for field in dataclasses.fields(result):
        print(f"{field.name} = {getattr(result, field.name)}")
    return 0


def cmd_sweep(args):
    trials = args.trials or 50
    seed = args.seed if args.seed is not None else 20200322
    if args.target == "figure1":
        out = _outdir(args)
        summary = harness.sweep_figure1(trials=trials, base_seed=seed, workers=args.workers)
        path = os.path.join(out, "figure1.csv")
        harness.write_sweep_csv(summary, path, "k")
        cfgs = [harness.figure1_config(k, trials=trials, base_seed=seed) for k in (3, 4, 5)]
    elif args.target == "figure2":
        out = _outdir(args)
        summary = harness.sweep_figure2(trials=trials, base_seed=seed, workers=args.workers)
        path = os.path.join(out, "figure2.csv")
        harness.write_sweep_csv(summary, path, "radius_spec")
        cfgs = [harness.figure2_config(r, trials=trials, base_seed=seed)
                for r in harness.FIGURE2_RADII]
    elif args.target == "custom":
        cfg = _load(args)
        out = _outdir(args, cfg)
        summary = harness.sweep_custom(cfg, workers=args.workers)
        path = os.path.join(out, "sweep.csv")
        harness.write_sweep_csv(summary, path, "radius_spec")
        cfgs = [cfg]
    else:
        sys.exit(f"unknown sweep target {args.target!r}")
    harness.write_manifest(os.path.join(out, "manifest.json"), cfgs, seed)
    print(f"wrote {path}")
    for row in summary.rows:
        print(f"  {row.label} n={row.n}: mean_T={row.mean_T:.3f} "
              f"fail={row.empirical_failure_rate:.3f}")
    return 0


def cmd_theory(args):
    cfg = _load(args)
    out = _outdir(args, cfg)
    rows = harness.theory_table(cfg)
    path = os.path.join(out, "theory.csv")
    harness.write_theory_csv(rows, path)
    model = harness.build_model_for(cfg)
    harness.write_divergence_csv([model], os.path.join(out, "divergence.csv"))
    print(f"wrote {path}")
    for row in rows:
        print(f"  n={row['n']} R={row['R']}: lower={row['lower_T']} upper={row['upper_T']}")
    return 0


def cmd_verify(args):
    names = [args.suite] if args.suite != "all" else sorted(harness._VERIFY_SUITES)
    failed = False
    for name in names:
        report = harness.verify(name)
        status = "PASS" if report.passed else "FAIL"
        print(f"{status} {report.suite}: max deviation {report.max_deviation:.3e} "
              f"(tolerance {report.tolerance:.3e})")
        if report.details:
            print(f"     {report.details}")
        failed = failed or not report.passed
    return 1 if failed else 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="cascade-msprt",
        description="Noisy-cascade source localization: simulator, MSPRT, theory bounds.",
    )
    parser.add_argument("--backend", action="store_true", help="print kernel backend and exit")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("simulate", help="run one trial and print the result")
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="Monte Carlo sweep")
    p.add_argument("target", choices=["figure1", "figure2", "custom"])
    _add_common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("theory", help="bound tables for a config")
    _add_common(p)
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("verify", help="run an oracle verification suite")
    p.add_argument("suite", choices=sorted(harness._VERIFY_SUITES) + ["all"])
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    args = parser.parse_args(argv)
    if args.backend:
        print(kernels.BACKEND)
        return 0
    if not getattr(args, "command", None):
        parser.print_help()
        return 2
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
