"""Declarative benchmark configuration (TOML).

Schema (all sections optional except at least one toy and one method):

    master_seed = 42          # integer
    resolution = 64           # lattice resolution for 2-D confidence grids
    colormap = "linear"       # "linear" or "gray"
    profile = false           # measure fit/score wall-clock times

    [counts]
    train = 1000
    valid = 1000
    test = 2000

    [[toys]]
    name = "line"             # "line" | "circle" | "haystack"
    # line/circle accept noise_sigma, haystack accepts dim

    [[detectors]]
    name = "gp"               # see DETECTOR_SCHEMAS for names and params
    subsample_fraction = 0.1

    [[synthesisers]]
    name = "fgsm_uniform"     # see SYNTHESISER_SCHEMAS
    step_hi = 1.0
    weighted = false

Unknown keys anywhere are configuration errors.
"""

import sys
from dataclasses import dataclass, field

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..toys import TOY_NAMES
from .colormap import COLORMAPS
from .methods import DETECTOR_SCHEMAS, SYNTHESISER_SCHEMAS

__all__ = [
    "ConfigError",
    "MethodConfig",
    "ToyConfig",
    "BenchConfig",
    "load_config",
    "parse_config",
    "default_config",
    "resolved_params",
]

_TOY_OVERRIDES = {
    "line": {"noise_sigma"},
    "circle": {"noise_sigma"},
    "haystack": {"dim"},
}

_TOP_KEYS = {
    "master_seed",
    "resolution",
    "colormap",
    "profile",
    "counts",
    "toys",
    "detectors",
    "synthesisers",
}


class ConfigError(Exception):
    """Invalid benchmark configuration."""


@dataclass(frozen=True)
class ToyConfig:
    name: str
    overrides: dict = field(default_factory=dict)


@dataclass(frozen=True)
class MethodConfig:
    name: str
    params: dict = field(default_factory=dict)
    group: str = "detector"  # "detector" | "synthesiser"

    @property
    def label(self) -> str:
        """Unique row label; parameter overrides are folded in so two
        variants of one method stay distinguishable."""
        if not self.params:
            return self.name
        parts = [f"{k}={v}" for k, v in sorted(self.params.items())]
        return self.name + "[" + ",".join(parts) + "]"


@dataclass(frozen=True)
class BenchConfig:
    master_seed: int = 42
    n_train: int = 1000
    n_valid: int = 1000
    n_test: int = 2000
    toys: tuple = ()
    detectors: tuple = ()
    synthesisers: tuple = ()
    resolution: int = 64
    colormap: str = "linear"
    profile: bool = False

    def __post_init__(self):
        if not self.toys:
            raise ConfigError("at least one toy is required")
        if not (self.detectors or self.synthesisers):
            raise ConfigError("at least one detector or synthesiser is required")
        if self.resolution < 2:
            raise ConfigError("resolution must be >= 2")
        if self.colormap not in COLORMAPS:
            raise ConfigError(f"unknown colormap {self.colormap!r}")
        for n, nm in ((self.n_train, "train"), (self.n_valid, "valid"), (self.n_test, "test")):
            if n < 1:
                raise ConfigError(f"counts.{nm} must be >= 1")

    @property
    def methods(self) -> tuple:
        return tuple(self.detectors) + tuple(self.synthesisers)


def _check_keys(mapping: dict, allowed, where: str) -> None:
    unknown = set(mapping) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in {where}")


def _parse_methods(entries, schemas, group: str) -> tuple:
    out = []
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict) or "name" not in entry:
            raise ConfigError(f"{group} entry {i} must be a table with a 'name'")
        name = entry["name"]
        if name not in schemas:
            raise ConfigError(f"unknown {group} {name!r}; available: {sorted(schemas)}")
        params = {k: v for k, v in entry.items() if k != "name"}
        _check_keys(params, schemas[name], f"{group} {name!r}")
        out.append(MethodConfig(name=name, params=params, group=group))
    return tuple(out)


def parse_config(data: dict) -> BenchConfig:
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a table")
    _check_keys(data, _TOP_KEYS, "configuration")

    counts = data.get("counts", {})
    _check_keys(counts, {"train", "valid", "test"}, "counts")

    toys = []
    for i, entry in enumerate(data.get("toys", [])):
        if not isinstance(entry, dict) or "name" not in entry:
            raise ConfigError(f"toys entry {i} must be a table with a 'name'")
        name = entry["name"]
        if name not in TOY_NAMES:
            raise ConfigError(f"unknown toy {name!r}; available: {list(TOY_NAMES)}")
        overrides = {k: v for k, v in entry.items() if k != "name"}
        _check_keys(overrides, _TOY_OVERRIDES[name], f"toy {name!r}")
        toys.append(ToyConfig(name=name, overrides=overrides))

    try:
        return BenchConfig(
            master_seed=int(data.get("master_seed", 42)),
            n_train=int(counts.get("train", 1000)),
            n_valid=int(counts.get("valid", 1000)),
            n_test=int(counts.get("test", 2000)),
            toys=tuple(toys),
            detectors=_parse_methods(data.get("detectors", []), DETECTOR_SCHEMAS, "detector"),
            synthesisers=_parse_methods(
                data.get("synthesisers", []), SYNTHESISER_SCHEMAS, "synthesiser"
            ),
            resolution=int(data.get("resolution", 64)),
            colormap=str(data.get("colormap", "linear")),
            profile=bool(data.get("profile", False)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> BenchConfig:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
    return parse_config(data)


def default_config() -> BenchConfig:
    """The full benchmark: every detector and synthesiser on all three toys."""
    return parse_config(
        {
            "master_seed": 42,
            "resolution": 64,
            "counts": {"train": 1000, "valid": 1000, "test": 2000},
            "toys": [{"name": "line"}, {"name": "circle"}, {"name": "haystack"}],
            "detectors": [
                {"name": "reference"},
                {"name": "ocsvm"},
                {"name": "mahalanobis"},
                {"name": "lof"},
                {"name": "gp"},
                {"name": "ncgp"},
                {"name": "pca"},
                {"name": "autoassoc"},
                {"name": "md_aa"},
                {"name": "aa_gp"},
            ],
            "synthesisers": [
                {"name": "uniform"},
                {"name": "fgsm_constant", "step": 1.0},
                {"name": "fgsm_uniform", "step_lo": 0.0, "step_hi": 1.0},
                {"name": "fgsm_tpoke"},
                {"name": "uniform", "weighted": True},
                {"name": "fgsm_uniform", "step_lo": 0.0, "step_hi": 1.0, "weighted": True},
            ],
        }
    )


def resolved_params(method: MethodConfig) -> dict:
    """Method parameters with schema defaults filled in."""
    schemas = DETECTOR_SCHEMAS if method.group == "detector" else SYNTHESISER_SCHEMAS
    params = dict(schemas[method.name])
    params.update(method.params)
    return params
