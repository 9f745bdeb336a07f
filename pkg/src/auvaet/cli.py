"""Command line entry point: ``auvaet <subcommand> --config FILE --seed N --out DIR``."""
import argparse
import logging
import sys
from pathlib import Path

from . import harness

log = logging.getLogger("auvaet")


def _config(args):
    cfg = harness.load_config(args.config)
    if args.seed is not None:
        cfg = cfg.replace(seeds=(args.seed,))
    return cfg


def _out(args, cfg):
    return Path(args.out) if args.out else harness.default_output_dir(cfg)


def cmd_train(args):
    cfg = _config(args)
    out = _out(args, cfg)
    out.mkdir(parents=True, exist_ok=True)
    artifacts = []
    for seed in cfg.seeds:
        ckpt = out / f"ppo_{cfg.mode.value}_seed{seed}.npz"
        result = harness.train_agent(cfg, seed, checkpoint_path=ckpt)
        artifacts.append(harness.write_csv(out / f"train_log_{cfg.mode.value}_seed{seed}.csv",
                                           result.log, harness.TRAIN_LOG_COLUMNS))
        artifacts.append(ckpt)
        last = result.log[-1]
        print(f"seed {seed}: {len(result.log)} episodes, last reward {last['cumulative_reward']:.1f}, "
              f"mean AoI {last['mean_aoi']:.2f}")
    harness.write_manifest(out / "train_manifest.json", cfg, artifacts)
    return 0


def cmd_eval(args):
    cfg = _config(args)
    if args.policy:
        cfg = cfg.replace(policies=tuple(args.policy.split(",")))
    checkpoints = {}
    if args.checkpoint:
        checkpoints = {s: args.checkpoint for s in cfg.seeds}
    out = _out(args, cfg)
    rows = harness.run_experiment(cfg, out_dir=out, checkpoints=checkpoints, n_jobs=args.jobs)
    for name, agg in harness.summarize(rows).items():
        print(f"{name:>4}  AoI {agg['mean_aoi']:7.2f}  harvested {agg['total_harvested']:9.1f} J  "
              f"Jain {agg['jain']:.3f}  reward {agg['cumulative_reward']:9.1f}")
    flagged = sum(r["below_jain_min"] for r in rows)
    if flagged:
        print(f"{flagged} row(s) below the fairness floor {cfg.jain_min}")
    print(f"wrote {out / 'metrics.csv'}")
    return 0


def cmd_beta_curves(args):
    cfg = _config(args)
    out = _out(args, cfg)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "beta_curves.csv"
    harness.beta_curves(cfg, out=path)
    print(f"wrote {path}")
    return 0


def cmd_energy_curves(args):
    cfg = _config(args)
    out = _out(args, cfg)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "energy_curves.csv"
    harness.energy_curves(cfg, out=path)
    print(f"wrote {path}")
    return 0


def cmd_table3(args):
    cfg = _config(args)
    rows, k, ok = harness.table3(cfg)
    print(f"kappa = {k:.4f} (reference {harness.TABLE3_KAPPA})")
    print(f"{'d':>5} {'approx':>10} {'b=0.1':>10} {'b=0.5':>10} {'b=0.9':>10} {'max err':>9}")
    for r in rows:
        print(f"{r['d_m']:>5} {r['approx']:10.4f} {r['exact_b0.1']:10.4f} {r['exact_b0.5']:10.4f} "
              f"{r['exact_b0.9']:10.4f} {100 * r['max_rel_err']:8.4f}%")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        harness.write_csv(out / "table3.csv", rows, harness.TABLE3_COLUMNS)
    print("PASS" if ok else "FAIL")
    return 0 if ok else 1


def build_parser():
    parser = argparse.ArgumentParser(prog="auvaet", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {
        "train": (cmd_train, "train PPO agents, one per seed"),
        "eval": (cmd_eval, "evaluate baselines and/or PPO, write metrics.csv"),
        "beta-curves": (cmd_beta_curves, "optimal splitting factor vs distance per frequency"),
        "energy-curves": (cmd_energy_curves, "harvested vs required energy vs distance"),
        "table3": (cmd_table3, "exact vs approximate uplink energy check"),
    }
    for name, (fn, help_text) in commands.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="YAML experiment file (defaults used when omitted)")
        p.add_argument("--seed", type=int, help="run this single seed instead of the configured list")
        p.add_argument("--out", help=f"output directory (default: ${harness.OUTPUT_ENV_VAR} or ./runs)")
        if name == "eval":
            p.add_argument("--policy", help="comma-separated subset of rw,rr,ga,ppo")
            p.add_argument("--checkpoint", help="PPO checkpoint to evaluate instead of training")
            p.add_argument("--jobs", type=int, default=1)
        p.set_defaults(func=fn)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
