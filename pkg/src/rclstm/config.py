"""Typed INI run configuration.

Every hyperparameter has a named key with its conventional default (cell
size 300, window 100, 9:1 split, and so on); unknown sections or keys are
rejected outright so typos fail fast.
"""

import configparser
import hashlib
import json
from dataclasses import asdict, dataclass, field, fields

from .errors import ConfigError
from .training import TrainingConfig


def _bool(text):
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _int_list(text):
    return tuple(int(v) for v in text.split(",") if v.strip())


def _float_list(text):
    return tuple(float(v) for v in text.split(",") if v.strip())


@dataclass
class RunSection:
    task: str = "synthetic"  # traffic | mobility | synthetic
    data: str = ""
    output_dir: str = "runs"


@dataclass
class SyntheticSection:
    kind: str = "sine"  # sine | ar | longrange
    n: int = 800
    period: float = 25.0
    amplitude: float = 0.4
    offset: float = 0.5
    noise: float = 0.0
    lag: int = 25
    growth: float = 3.9
    mix: float = 0.0
    mix_period: float = 40.0
    ar_coeffs: tuple = (0.3, -0.2, 0.15, -0.1, 0.05)
    ar_intercept: float = 0.0
    ar_noise: float = 0.1
    ar_integrate: int = 1
    seed: int = 0


@dataclass
class ModelSection:
    hidden: tuple = (300, 300, 300)
    density: float = 1.0
    mask_mode: str = "probabilistic"
    kernel_threshold: float = 0.2
    seed: int = 0


@dataclass
class DataSection:
    window: int = 100
    train_fraction: float = 0.9
    normalize_scope: str = "full"  # full | train


@dataclass
class SweepSection:
    axis: str = "connectivity"
    points: tuple = (0.01, 0.05, 0.1, 0.2, 0.5, 1.0)
    seeds: tuple = (0, 1, 2)
    include_baselines: bool = False
    timing_reps: int = 10


@dataclass
class BenchSection:
    hidden: int = 300
    window: int = 100
    density: float = 0.01
    reps: int = 100
    warmup: int = 5
    compare_kernels: bool = True


@dataclass
class RunConfig:
    run: RunSection = field(default_factory=RunSection)
    synthetic: SyntheticSection = field(default_factory=SyntheticSection)
    model: ModelSection = field(default_factory=ModelSection)
    data: DataSection = field(default_factory=DataSection)
    training: TrainingConfig = field(default_factory=TrainingConfig)
    sweep: SweepSection = field(default_factory=SweepSection)
    bench: BenchSection = field(default_factory=BenchSection)

    def to_dict(self):
        out = {}
        for name in ("run", "synthetic", "model", "data", "training", "sweep", "bench"):
            section = getattr(self, name)
            out[name] = {f.name: getattr(section, f.name) for f in fields(section)}
        return out

    def digest(self):
        blob = json.dumps(self.to_dict(), sort_keys=True, default=list).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


_CHOICES = {
    ("run", "task"): ("traffic", "mobility", "synthetic"),
    ("synthetic", "kind"): ("sine", "ar", "longrange"),
    ("model", "mask_mode"): ("probabilistic", "exact"),
    ("data", "normalize_scope"): ("full", "train"),
    ("training", "optimizer"): ("adam", "sgd"),
    ("sweep", "axis"): ("connectivity", "train_fraction", "window_length"),
}

_CONVERTERS = {
    ("synthetic", "ar_coeffs"): _float_list,
    ("model", "hidden"): _int_list,
    ("sweep", "points"): _float_list,
    ("sweep", "seeds"): _int_list,
}


def _convert(section_name, key, text, current):
    converter = _CONVERTERS.get((section_name, key))
    if converter is None:
        kind = type(current)
        if kind is bool:
            converter = _bool
        elif kind is int:
            converter = int
        elif kind is float:
            converter = float
        else:
            converter = str
    try:
        value = converter(text)
    except ValueError as err:
        raise ConfigError(f"[{section_name}] {key}: {err}") from None
    choices = _CHOICES.get((section_name, key))
    if choices and value not in choices:
        raise ConfigError(f"[{section_name}] {key} must be one of {choices}")
    return value


def load_config(path=None):
    """Parse an INI file into a RunConfig; ``None`` gives pure defaults."""
    cfg = RunConfig()
    if path is None:
        return cfg
    parser = configparser.ConfigParser(interpolation=None)
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config file not found: {path}")
    for section_name in parser.sections():
        if not hasattr(cfg, section_name):
            raise ConfigError(f"unknown config section [{section_name}]")
        section = getattr(cfg, section_name)
        known = {f.name for f in fields(section)}
        for key, text in parser.items(section_name):
            if key not in known:
                raise ConfigError(f"unknown key {key!r} in section [{section_name}]")
            setattr(section, key, _convert(section_name, key, text, getattr(section, key)))
    try:
        # re-run the invariant checks with the parsed values
        cfg.training = TrainingConfig(**asdict(cfg.training))
    except ValueError as err:
        raise ConfigError(str(err)) from None
    if not 0.0 <= cfg.model.density <= 1.0:
        raise ConfigError("[model] density must lie in [0, 1]")
    if not 0.0 < cfg.data.train_fraction < 1.0:
        raise ConfigError("[data] train_fraction must lie in (0, 1)")
    if cfg.data.window < 1:
        raise ConfigError("[data] window must be >= 1")
    return cfg


def apply_overrides(cfg, seed=None, density=None, window=None, train_fraction=None):
    """Apply CLI flag overrides; ``seed`` overrides every per-section seed."""
    if seed is not None:
        cfg.model.seed = seed
        cfg.training.seed = seed
        cfg.synthetic.seed = seed
    if density is not None:
        if not 0.0 <= density <= 1.0:
            raise ConfigError("--density must lie in [0, 1]")
        cfg.model.density = density
    if window is not None:
        if window < 1:
            raise ConfigError("--window must be >= 1")
        cfg.data.window = window
    if train_fraction is not None:
        if not 0.0 < train_fraction < 1.0:
            raise ConfigError("--train-fraction must lie in (0, 1)")
        cfg.data.train_fraction = train_fraction
    return cfg
