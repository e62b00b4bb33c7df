"""Plain-text key=value experiment configuration with dotted paths.

The same `key=value` syntax is accepted from a config file and from CLI
overrides. Every resolved field is written to the manifest, so a run is
fully reproducible from its manifest alone.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

from .envs import EnvSpec
from .errors import ConfigError, UsageError
from .trainer import TrainConfig

METHODS = ("db", "tb", "stoch_db", "stoch_tb", "mcmc")


def _parse_bool(v):
    if v.lower() in ("true", "1", "yes"):
        return True
    if v.lower() in ("false", "0", "no"):
        return False
    raise ValueError(f"expected a boolean, got {v!r}")


def _parse_int_tuple(v):
    if isinstance(v, (list, tuple)):
        return tuple(int(x) for x in v)
    return tuple(int(x) for x in str(v).split(",") if x != "")


def _parse_int_list(v):
    return list(_parse_int_tuple(v))


def _opt(parser):
    def inner(v):
        if v is None or (isinstance(v, str) and v.lower() == "none"):
            return None
        return parser(v)
    return inner


# dotted key -> (section, field, parser)
ENV_KEYS = {
    "kind": str, "H": int, "ndim": int, "n": int, "k": int, "alpha": float,
    "R0": float, "R1": float, "R2": float, "noisy_stop": _parse_bool,
    "n_modes": int, "mode_seed": int, "reward_table": _opt(str),
    "mode_threshold": _opt(float),
}
TRAIN_KEYS = {
    "objective": str, "param_kind": str, "dynamics_mode": str,
    "dynamics_kind": str, "iterations": int, "rollouts": int,
    "model_batch": int, "lr": float, "lr_logz": float, "lr_model": float,
    "epsilon": float, "beta": float, "buffer_capacity": int, "eval_every": int,
    "hidden": _parse_int_tuple, "activation": str,
    "model_hidden": _parse_int_tuple, "model_activation": str,
    "uniform_backward": _parse_bool, "logz_init": float, "warmup": int,
    "window": int,
    "topk": int, "dp_cap": int, "smoothing": float,
}
TOP_KEYS = {"method": str, "seeds": _parse_int_list, "out": str}

# per-environment defaults for fields the generic TrainConfig leaves open
KIND_TRAIN_DEFAULTS = {
    "figure1": dict(iterations=5000, lr=0.01, lr_model=1e-3, epsilon=0.0,
                    eval_every=250, param_kind="tabular", beta=1.0,
                    model_hidden=(64, 64)),
    "hypergrid": dict(iterations=20000, lr=1e-3, lr_model=1e-4, epsilon=0.01,
                      eval_every=500, param_kind="neural", beta=1.0,
                      model_batch=16),
    "bitseq": dict(iterations=5000, rollouts=64, lr=5e-3, lr_model=5e-3,
                   epsilon=0.002, eval_every=250, param_kind="neural",
                   beta=3.0, model_batch=128, activation="relu",
                   model_activation="relu"),
    "external": dict(iterations=5000, lr=5e-3, lr_model=5e-4, epsilon=0.0005,
                     eval_every=250, param_kind="neural", beta=3.0,
                     model_batch=128, activation="relu",
                     model_activation="relu"),
}


@dataclass
class ExperimentConfig:
    env: EnvSpec
    train: TrainConfig
    method: str = "stoch_db"
    seeds: list = field(default_factory=lambda: [0])
    out: str = "runs"

    def validate(self):
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, "
                              f"got {self.method!r}")
        if not self.seeds:
            raise ConfigError("seeds must be non-empty")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds must be distinct")
        try:
            self.env.build()
        except UsageError as e:
            raise ConfigError(f"env: {e}") from e
        return self

    def to_dict(self):
        return {
            "env": dataclasses.asdict(self.env),
            "train": {k: (list(v) if isinstance(v, tuple) else v)
                      for k, v in dataclasses.asdict(self.train).items()},
            "method": self.method,
            "seeds": list(self.seeds),
            "out": self.out,
        }

    @classmethod
    def from_dict(cls, d):
        train = dict(d["train"])
        for k in ("hidden", "model_hidden"):
            train[k] = tuple(train[k])
        return cls(env=EnvSpec(**d["env"]), train=TrainConfig(**train),
                   method=d["method"], seeds=list(d["seeds"]),
                   out=d["out"]).validate()


def parse_kv_lines(text, source="<config>"):
    """key=value lines (and `#` comments) -> ordered dict of raw strings."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key] = value
    return out


def resolve_config(kv):
    """Raw key->string map to a fully validated ExperimentConfig."""
    kind = kv.get("env.kind", "hypergrid")
    if kind not in ("figure1", "hypergrid", "bitseq", "external"):
        raise ConfigError(f"env.kind: unknown kind {kind!r}")
    env_args = {}
    train_args = dict(KIND_TRAIN_DEFAULTS[kind])
    top_args = {}
    for key, raw in kv.items():
        section, _, name = key.partition(".")
        try:
            if section == "env":
                if name not in ENV_KEYS:
                    raise ConfigError(f"unknown config key {key!r}")
                env_args[name] = ENV_KEYS[name](raw)
            elif section == "train":
                if name not in TRAIN_KEYS:
                    raise ConfigError(f"unknown config key {key!r}")
                train_args[name] = TRAIN_KEYS[name](raw)
            elif key in TOP_KEYS:
                top_args[key] = TOP_KEYS[key](raw)
            else:
                raise ConfigError(f"unknown config key {key!r}")
        except (ValueError, TypeError) as e:
            raise ConfigError(f"config key {key!r}: {e}") from e
    method = top_args.get("method", "stoch_db")
    if method in ("db", "tb", "stoch_db", "stoch_tb"):
        train_args.setdefault("objective", method)
        if train_args["objective"] != method:
            raise ConfigError(
                f"method {method!r} conflicts with train.objective "
                f"{train_args['objective']!r}")
    try:
        env = EnvSpec(**env_args)
        train = TrainConfig(**train_args)
    except ConfigError:
        raise
    except (TypeError, UsageError) as e:
        raise ConfigError(str(e)) from e
    return ExperimentConfig(env=env, train=train, method=method,
                            seeds=top_args.get("seeds", [0]),
                            out=top_args.get("out", "runs")).validate()


def parse_config(path=None, overrides=()):
    """Load a config file (optional) and apply key=value overrides in order."""
    kv = {}
    if path is not None:
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
        kv.update(parse_kv_lines(text, source=str(path)))
    for item in overrides:
        kv.update(parse_kv_lines(item, source="<override>"))
    return resolve_config(kv)
