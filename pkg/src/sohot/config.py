"""Run configuration loading and management for sohot

Configuration comes from four layers, highest priority first: command-line
flags, a config file, ``SOHOT_*`` environment variables (a ``.env``
file is loaded first) and built-in defaults. All layers use the same flat
keys as the CLI flags (``max-depth`` or ``max_depth``); a key can feed
several models, e.g. ``gamma`` sets the gate width of both soft models.
A config file holds flat ``key = value`` lines with ``#`` comments, or
the same keys as a YAML mapping; YAML may also contain the nested sections
written by the config echo of a previous run.
"""

import os
import re
from collections.abc import Callable, Mapping
from pathlib import Path
from typing import Any

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError

from sohot.models import (
    DriftKind,
    HoeffdingParams,
    ModelKind,
    PoolParams,
    PrequentialConfig,
    SoftTreeParams,
    SoHoTParams,
    StreamKind,
    StreamSpec,
)

CONFIG_FILE_NAME = ".sohot.yaml"
ENV_PREFIX = "SOHOT_"
FLAT_LINE = re.compile(r"^\s*[A-Za-z_][\w-]*\s*=")


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending setting"""

    def __init__(self, message: str, key: str | None = None):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


class OutputConfig(BaseModel):
    """Where a run writes its files"""

    report: Path = Field(Path("report.csv"), description="Report CSV path")
    dump_tree: Path | None = Field(None, description="Tree dump path")
    plot: Path | None = Field(None, description="Plot prefix (.dat and .gp)")

    @property
    def config_echo(self) -> Path:
        return self.report.with_suffix(".config.yaml")


class RunConfig(BaseModel):
    """Everything needed to reproduce one run"""

    model: ModelKind = Field(ModelKind.SOHOT, description="Learner")
    sohot: SoHoTParams = Field(default_factory=SoHoTParams)
    hoeffding: HoeffdingParams = Field(default_factory=HoeffdingParams)
    soft_tree: SoftTreeParams = Field(default_factory=SoftTreeParams)
    pool: PoolParams = Field(default_factory=PoolParams)
    stream: StreamSpec = Field(default_factory=StreamSpec)
    prequential: PrequentialConfig = Field(default_factory=PrequentialConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)
    workers: int = Field(4, ge=1, description="Worker threads")


def _split_list(value: Any) -> Any:
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    if isinstance(value, int | float):
        return [value]
    return value


def _negate(value: Any) -> Any:
    if isinstance(value, str):
        return value.strip().lower() not in {"1", "true", "yes", "on"}
    return not value


# flat key -> (dotted paths, value converter)
FLAT_KEYS: dict[str, tuple[tuple[str, ...], Callable[[Any], Any] | None]] = {
    "model": (("model",), None),
    "alpha": (("sohot.alpha",), None),
    "gamma": (("sohot.gamma", "soft_tree.gamma"), None),
    "max_depth": (("sohot.max_depth", "soft_tree.depth"), None),
    "delta": (("sohot.delta", "hoeffding.delta"), None),
    "tau": (("sohot.tau", "hoeffding.tau"), None),
    "epsilon_s": (("sohot.epsilon_s",), None),
    "grace": (("sohot.grace_period", "hoeffding.grace_period"), None),
    "learning_rate": (("sohot.learning_rate", "soft_tree.learning_rate"), None),
    "normalize": (("sohot.normalize", "soft_tree.normalize"), None),
    "leaf_prediction": (("hoeffding.leaf_prediction",), None),
    "node_limit": (("hoeffding.internal_node_limit",), None),
    "pool_model": (("pool.model",), None),
    "pool_size": (("pool.size",), None),
    "pool_decay": (("pool.decay",), None),
    "stream": (("stream.kind",), None),
    "csv": (("stream.csv_path",), None),
    "label_column": (("stream.label_column",), str),
    "shuffle": (("stream.shuffle",), None),
    "no_shuffle": (("stream.shuffle",), _negate),
    "noise": (("stream.noise",), None),
    "instances": (("stream.n_instances", "prequential.n_instances"), None),
    "window": (("prequential.window",), None),
    "reps": (("prequential.repetitions",), None),
    "seed": (("stream.seed", "prequential.base_seed"), None),
    "drift_kind": (("stream.drift.kind",), None),
    "drift_at": (("stream.drift.positions",), _split_list),
    "drift_width": (("stream.drift.width",), None),
    "perturbation": (("stream.drift.perturbation",), None),
    "contexts": (("stream.drift.contexts",), None),
    "agrawal_functions": (("stream.agrawal_functions",), _split_list),
    "sea_thresholds": (("stream.sea_thresholds",), _split_list),
    "hyperplane_features": (("stream.hyperplane_features",), None),
    "hyperplane_magnitude": (("stream.hyperplane_magnitude",), None),
    "rbf_features": (("stream.rbf_features",), None),
    "rbf_classes": (("stream.rbf_classes",), None),
    "rbf_centroids": (("stream.rbf_centroids",), None),
    "rbf_speed": (("stream.rbf_speed",), None),
    "auroc_capacity": (("prequential.auroc_capacity",), None),
    "out": (("output.report",), None),
    "dump_tree": (("output.dump_tree",), None),
    "plot": (("output.plot",), None),
    "workers": (("workers",), None),
}

SECTIONS = frozenset(RunConfig.model_fields)


def normalize_key(key: str) -> str:
    return key.strip().lstrip("-").replace("-", "_").lower()


def _set_path(target: dict[str, Any], dotted: str, value: Any) -> None:
    *parents, leaf = dotted.split(".")
    node = target
    for part in parents:
        node = node.setdefault(part, {})
    node[leaf] = value


def _deep_update(target: dict[str, Any], updates: Mapping[str, Any]) -> None:
    for key, value in updates.items():
        if isinstance(value, Mapping) and isinstance(target.get(key), dict):
            _deep_update(target[key], value)
        elif isinstance(value, Mapping):
            target[key] = {}
            _deep_update(target[key], value)
        else:
            target[key] = value


def apply_flat(target: dict[str, Any], flat: Mapping[str, Any]) -> None:
    """Write flat settings into a nested config mapping

    Raises:
        ConfigError: If a key is unknown
    """
    for raw_key, value in flat.items():
        key = normalize_key(raw_key)
        if key not in FLAT_KEYS:
            msg = "unknown configuration key"
            raise ConfigError(msg, key=raw_key)
        if value is None:
            continue
        paths, convert = FLAT_KEYS[key]
        converted = convert(value) if convert else value
        for dotted in paths:
            _set_path(target, dotted, converted)


def env_settings(environ: Mapping[str, str] | None = None) -> dict[str, str]:
    """``SOHOT_*`` variables as flat settings (loads ``.env`` when reading os.environ)"""
    if environ is None:
        load_dotenv()
        environ = os.environ
    settings = {}
    for name, value in environ.items():
        if name.startswith(ENV_PREFIX):
            key = normalize_key(name[len(ENV_PREFIX) :])
            if key in FLAT_KEYS:
                settings[key] = value
    return settings


def find_config_file() -> Path | None:
    """Find .sohot.yaml in the current or up to five parent directories"""
    current = Path.cwd()

    for _ in range(6):
        config_path = current / CONFIG_FILE_NAME
        if config_path.exists():
            return config_path

        # Stop at root directory
        if current.parent == current:
            break
        current = current.parent

    return None


def _is_flat_text(text: str) -> bool:
    return any(FLAT_LINE.match(line) for line in text.splitlines())


def parse_flat_text(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment

    Raises:
        ConfigError: Naming the first line without a ``key = value`` pair
    """
    settings: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            msg = f"Line {lineno}: expected 'key = value', got {raw.strip()!r}"
            raise ConfigError(msg, key="config")
        settings[key.strip()] = value.strip()
    return settings


def load_config_file(config_path: Path) -> tuple[dict[str, Any], dict[str, Any]]:
    """Read a config file

    Flat ``key = value`` files are read line by line; anything else must be
    a YAML mapping of flat keys or nested sections.

    Returns:
        (nested sections, flat settings)

    Raises:
        ConfigError: If the file cannot be read or parsed
    """
    try:
        text = Path(config_path).read_text()
    except OSError as e:
        msg = f"Cannot read config file: {e}"
        raise ConfigError(msg, key="config") from e

    if _is_flat_text(text):
        return {}, parse_flat_text(text)

    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        msg = f"Invalid YAML in config file: {e}"
        raise ConfigError(msg, key="config") from e

    if data is None:
        return {}, {}
    if not isinstance(data, dict):
        msg = "Config file must contain 'key = value' lines or a YAML mapping"
        raise ConfigError(msg, key="config")

    nested = {k: v for k, v in data.items() if k in SECTIONS and isinstance(v, dict)}
    flat = {k: v for k, v in data.items() if k not in nested}
    return nested, flat


def _offending_key(error: ValidationError) -> str:
    first = error.errors()[0]
    dotted = ".".join(str(part) for part in first["loc"])
    for key, (paths, _) in FLAT_KEYS.items():
        if any(dotted == p or dotted.startswith(p + ".") for p in paths):
            return key.replace("_", "-")
    return dotted or "config"


def build_run_config(nested: Mapping[str, Any]) -> RunConfig:
    """Validate a nested mapping

    Raises:
        ConfigError: Naming the first offending key
    """
    try:
        return RunConfig.model_validate(nested)
    except ValidationError as e:
        first = e.errors()[0]
        raise ConfigError(first["msg"], key=_offending_key(e)) from e


def resolve_run_config(
    cli: Mapping[str, Any] | None = None,
    config_path: Path | None = None,
    *,
    environ: Mapping[str, str] | None = None,
    discover: bool = True,
) -> RunConfig:
    """Merge defaults, environment, config file and CLI flags

    Args:
        cli: Flat settings from the command line; ``None`` values are unset
        config_path: Explicit config file; otherwise ``.sohot.yaml`` is
            searched for when ``discover`` is set
        environ: Environment to read instead of ``os.environ``

    Raises:
        ConfigError: If any layer holds an unknown or invalid key
    """
    cli = {k: v for k, v in (cli or {}).items() if v is not None}
    if config_path is None and discover:
        config_path = find_config_file()

    nested: dict[str, Any] = {}
    apply_flat(nested, env_settings(environ))
    if config_path is not None:
        file_nested, file_flat = load_config_file(config_path)
        _deep_update(nested, file_nested)
        apply_flat(nested, file_flat)
    apply_flat(nested, cli)

    stream = nested.setdefault("stream", {})
    flat_keys = {normalize_key(k) for k in cli}
    if "csv" in flat_keys and "stream" not in flat_keys:
        stream["kind"] = StreamKind.CSV.value
    drift = stream.get("drift", {})
    if drift.get("positions") and drift.get("kind", DriftKind.NONE.value) in (
        DriftKind.NONE,
        DriftKind.NONE.value,
    ):
        drift["kind"] = DriftKind.ABRUPT.value

    return build_run_config(nested)


def write_config_echo(config: RunConfig, path: Path | None = None) -> Path:
    """Write every resolved value beside the outputs"""
    path = path or config.output.config_echo
    with open(path, "w") as f:
        yaml.safe_dump(config.model_dump(mode="json"), f, sort_keys=False)
    return path
