"""Experiment runner CLI: run / sweep / eval / dump-env.

Metrics land in one JSONL file per (method, seed); a manifest.json with the
fully resolved config is written before any run starts. Exit codes:
0 success, 2 config error, 3 training abort.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, parse_config
from .errors import ConfigError, NotEnumerableError, TrainingAborted, UsageError
from .mcmc import McmcConfig, run_mcmc
from .policy import make_policy
from .trainer import train, evaluate_tick, _EvalState

EXIT_OK, EXIT_CONFIG, EXIT_ABORT = 0, 2, 3


def _output_root(args):
    return args.out or os.environ.get("STOCHGFN_OUT") or "runs"


def _load_config(args):
    overrides = list(args.set or [])
    if args.seed is not None:
        overrides.append(f"seeds={args.seed}")
    cfg = parse_config(args.config, overrides)
    if args.out:
        cfg.out = args.out
    elif cfg.out == "runs" and os.environ.get("STOCHGFN_OUT"):
        cfg.out = os.environ["STOCHGFN_OUT"]
    if getattr(args, "oracle_dynamics", False):
        cfg.train.dynamics_mode = "oracle"
    return cfg


def _run_one(cfg: ExperimentConfig, seed, out_dir: Path):
    env = cfg.env.build()
    name = f"{cfg.method}_{env.fingerprint}_{seed}"
    path = out_dir / f"{name}.jsonl"
    with open(path, "w") as fh:
        def sink(rec):
            fh.write(rec.to_json() + "\n")

        if cfg.method == "mcmc":
            mcfg = McmcConfig(chains=cfg.train.rollouts,
                              steps=cfg.train.iterations,
                              beta=cfg.train.beta, seed=seed)
            run_mcmc(env, mcfg, eval_every=cfg.train.eval_every,
                     window=cfg.train.window, topk=cfg.train.topk, sink=sink)
        else:
            tcfg = dataclasses.replace(cfg.train, seed=seed)
            run = train(env, tcfg, sink=sink, method=cfg.method)
            run.policy.save(out_dir / f"{name}.npz")
    return path


def cmd_run(args):
    cfg = _load_config(args)
    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = out_dir / "manifest.json"
    with open(manifest, "w") as fh:
        json.dump(cfg.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    for seed in cfg.seeds:
        path = _run_one(cfg, seed, out_dir)
        print(f"wrote {path}")
    return EXIT_OK


def cmd_sweep(args):
    if not args.values:
        raise ConfigError("sweep requires a non-empty --values list")
    base_overrides = list(args.set or [])
    for value in args.values.split(","):
        value = value.strip()
        if not value:
            raise ConfigError("sweep --values contains an empty entry")
        sub = argparse.Namespace(
            config=args.config, set=base_overrides + [f"{args.axis}={value}"],
            seed=args.seed, out=None, oracle_dynamics=False)
        cfg = _load_config(sub)
        root = Path(args.out or cfg.out)
        cfg.out = str(root / f"{args.axis.replace('.', '_')}={value}")
        out_dir = Path(cfg.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "manifest.json", "w") as fh:
            json.dump(cfg.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        for seed in cfg.seeds:
            path = _run_one(cfg, seed, out_dir)
            print(f"wrote {path}")
    return EXIT_OK


def cmd_eval(args):
    cfg = _load_config(args)
    env = cfg.env.build()
    rng = np.random.default_rng(cfg.seeds[0])
    policy = make_policy(env, cfg.train.param_kind, beta=cfg.train.beta,
                         rng=rng, hidden=cfg.train.hidden,
                         activation=cfg.train.activation,
                         uniform_backward=cfg.train.uniform_backward)
    policy.load(args.checkpoint)
    state = _EvalState(env, cfg.train)
    rec = evaluate_tick(env, policy, None, state, iteration=0, wall_ms=0,
                        loss=None, mloss=None, clamped=0, grad_norm_val=None,
                        seed=cfg.seeds[0], method=cfg.method)
    print(rec.to_json())
    return EXIT_OK


def cmd_dump_env(args):
    cfg = _load_config(args)
    env = cfg.env.build()
    try:
        states = env.enumerate_states()
    except NotEnumerableError as e:
        print(str(e), file=sys.stderr)
        return EXIT_CONFIG
    for s in states:
        if isinstance(s, tuple) and hasattr(s, "even"):  # OddState
            support = env.kernel_support(s.even, s.action)
            outs = ", ".join(f"{nxt!r}: {p:.6g}" for nxt, p in support)
            print(f"odd ({s.even!r}, a={s.action}) -> {outs}")
        elif env.is_terminal(s):
            print(f"terminal {s!r} reward={env.reward(s):.6g}")
        else:
            print(f"even {s!r} actions={env.actions(s)}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="stochgfn",
        description="GFlowNet training in stochastic environments")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key=value config file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="config override (repeatable)")
        p.add_argument("--seed", help="comma-separated seed list override")
        p.add_argument("--out", help="output directory (default $STOCHGFN_OUT or ./runs)")

    p_run = sub.add_parser("run", help="train and write metrics JSONL per seed")
    common(p_run)
    p_run.add_argument("--oracle-dynamics", action="store_true",
                       help="substitute the true kernel for the learned model")
    p_run.set_defaults(fn=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a config axis cross product")
    common(p_sweep)
    p_sweep.add_argument("--axis", required=True, help="dotted config key")
    p_sweep.add_argument("--values", required=True, help="comma-separated values")
    p_sweep.set_defaults(fn=cmd_sweep)

    p_eval = sub.add_parser("eval", help="recompute metrics from a checkpoint")
    common(p_eval)
    p_eval.add_argument("--checkpoint", required=True)
    p_eval.set_defaults(fn=cmd_eval)

    p_dump = sub.add_parser("dump-env", help="print kernel tables of an enumerable env")
    common(p_dump)
    p_dump.set_defaults(fn=cmd_dump_env)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except TrainingAborted as e:
        snap_path = Path(_output_root(args)) / "abort_snapshot.json"
        try:
            snap_path.parent.mkdir(parents=True, exist_ok=True)
            with open(snap_path, "w") as fh:
                json.dump(e.snapshot, fh, indent=2)
            print(f"training aborted: {e} (snapshot: {snap_path})", file=sys.stderr)
        except OSError:
            print(f"training aborted: {e}", file=sys.stderr)
        return EXIT_ABORT


if __name__ == "__main__":
    sys.exit(main())
