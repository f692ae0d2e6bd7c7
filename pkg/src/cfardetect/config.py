"""Flat dotted-key configuration files.

A config is a UTF-8 text file of ``key = value`` lines; ``#`` starts a
comment. Unknown keys are rejected with the offending line number. All
defaults reproduce the reference simulation protocol, so an empty file is a
valid config. ``evaluate`` also accepts a ``manifest.json`` written by
``simulate``, which embeds the fully resolved key/value map.

Keys and defaults:

    scenario.family        = gaussian        # or compound_gaussian
    scenario.m             = 16
    scenario.k             = 32
    scenario.rho           = 0.5
    scenario.texture_shape = 1.0
    scenario.noise_power   = 1.0
    scenario.pfa           = 0.01
    scenario.snr_db        = 0:20:1          # start:stop:step, or comma list
    scenario.doppler_bins  = all             # or comma list of bins
    scenario.n_train       = 5000
    scenario.n_cal         = 5000
    scenario.n_test        = 5000
    scenario.seed          = 20250826
    scenario.shared_texture = true
    detectors              = mf_true,amf_scm,anmf_tyler,svdd,dsvdd
    svdd.nu                = 0.01
    svdd.tol               = 1e-6
    svdd.max_updates       = 100000
    train.epochs           = 15
    train.batch_size       = 64
    train.lr               = 0.001
    train.milestones       = 5,10
    train.lr_decay         = 0.1
    train.weight_decay     = 0.001
    train.seed             = 7
    output.plots           = false
    output.write_test      = false
"""

import json

from .dsvdd import TrainConfig
from .sim import Scenario

__all__ = ["ConfigError", "RunConfig", "load_config", "DEFAULTS"]


class ConfigError(ValueError):
    """Invalid configuration file or value."""


DEFAULTS = {
    "scenario.family": "gaussian",
    "scenario.m": "16",
    "scenario.k": "32",
    "scenario.rho": "0.5",
    "scenario.texture_shape": "1.0",
    "scenario.noise_power": "1.0",
    "scenario.pfa": "0.01",
    "scenario.snr_db": "0:20:1",
    "scenario.doppler_bins": "all",
    "scenario.n_train": "5000",
    "scenario.n_cal": "5000",
    "scenario.n_test": "5000",
    "scenario.seed": "20250826",
    "scenario.shared_texture": "true",
    "detectors": "mf_true,amf_scm,anmf_tyler,svdd,dsvdd",
    "svdd.nu": "0.01",
    "svdd.tol": "1e-6",
    "svdd.max_updates": "100000",
    "train.epochs": "15",
    "train.batch_size": "64",
    "train.lr": "0.001",
    "train.milestones": "5,10",
    "train.lr_decay": "0.1",
    "train.weight_decay": "0.001",
    "train.seed": "7",
    "output.plots": "false",
    "output.write_test": "false",
}

_FAMILY_ALIASES = {"gaussian": "gaussian", "compound": "compound_gaussian",
                   "compound_gaussian": "compound_gaussian"}


def _parse_bool(raw, key):
    low = raw.lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {raw!r}")


def _parse_snr(raw):
    if ":" in raw:
        parts = raw.split(":")
        if len(parts) != 3:
            raise ConfigError(f"scenario.snr_db: range must be start:stop:step, got {raw!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ConfigError("scenario.snr_db: step must be positive")
        vals = []
        v = start
        while v <= stop + 1e-9:
            vals.append(round(v, 9))
            v += step
        return tuple(vals)
    return tuple(float(tok) for tok in raw.split(","))


class RunConfig:
    """Resolved configuration; field types are validated on construction."""

    def __init__(self, values):
        unknown = set(values) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown keys: {', '.join(sorted(unknown))}")
        kv = dict(DEFAULTS)
        kv.update(values)
        self.raw = kv
        try:
            family = _FAMILY_ALIASES.get(kv["scenario.family"].lower())
            if family is None:
                raise ConfigError(
                    f"scenario.family: unknown family {kv['scenario.family']!r}")
            m = int(kv["scenario.m"])
            bins_raw = kv["scenario.doppler_bins"]
            bins = (tuple(range(m)) if bins_raw.strip().lower() == "all"
                    else tuple(int(tok) for tok in bins_raw.split(",")))
            self.scenario = Scenario(
                clutter_family=family,
                m=m,
                k_secondary=int(kv["scenario.k"]),
                rho=float(kv["scenario.rho"]),
                texture_shape=float(kv["scenario.texture_shape"]),
                noise_power=float(kv["scenario.noise_power"]),
                pfa=float(kv["scenario.pfa"]),
                snr_grid_db=_parse_snr(kv["scenario.snr_db"]),
                doppler_bins=bins,
                n_train=int(kv["scenario.n_train"]),
                n_cal=int(kv["scenario.n_cal"]),
                n_test=int(kv["scenario.n_test"]),
                master_seed=int(kv["scenario.seed"]),
                shared_texture=_parse_bool(kv["scenario.shared_texture"],
                                           "scenario.shared_texture"),
            )
            self.detectors = tuple(t.strip() for t in kv["detectors"].split(",") if t.strip())
            self.svdd_nu = float(kv["svdd.nu"])
            self.svdd_tol = float(kv["svdd.tol"])
            self.svdd_max_updates = int(kv["svdd.max_updates"])
            self.train_config = TrainConfig(
                epochs=int(kv["train.epochs"]),
                batch_size=int(kv["train.batch_size"]),
                lr=float(kv["train.lr"]),
                milestones=tuple(int(t) for t in kv["train.milestones"].split(",") if t.strip()),
                lr_decay=float(kv["train.lr_decay"]),
                weight_decay=float(kv["train.weight_decay"]),
                seed=int(kv["train.seed"]),
            )
            self.plots = _parse_bool(kv["output.plots"], "output.plots")
            self.write_test = _parse_bool(kv["output.write_test"], "output.write_test")
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def with_seed(self, seed):
        kv = dict(self.raw)
        kv["scenario.seed"] = str(int(seed))
        return RunConfig(kv)

    def resolved(self):
        """The fully resolved flat key/value map (embedded in manifests)."""
        return dict(self.raw)


def load_config(path):
    """Load a key=value config file, or a manifest.json with a config map."""
    text = open(path, encoding="utf-8").read()
    if str(path).endswith(".json"):
        doc = json.loads(text)
        return RunConfig(doc["config"])
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, _, val = stripped.partition("=")
        values[key.strip()] = val.strip()
    return RunConfig(values)
