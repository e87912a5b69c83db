"""Configuration loading: presets, config files, environment and overrides.

Sources are merged lowest to highest precedence:

1. Model defaults (``RunConfig``)
2. A bundled preset (``--preset paper-sec5``)
3. A config file: flat ``key = value`` text, or nested ``.yaml``/``.yml``/``.json``
4. Environment variables with the ``CONTACTHVI_`` prefix
5. Explicit overrides (CLI flags), as dotted keys

Flat keys are either short aliases (``lambda``, ``eta``, ``f0``, ``fN``,
``ny``, ``eps``, ``law``, ``m_alpha``, ...) or dotted paths into the nested
model (``solver.powell.x_tol``). Vector values are comma separated.
"""

from __future__ import annotations

import copy
import json
import logging
from collections.abc import Collection, Iterator, Mapping
from pathlib import Path
from typing import Any

import yaml
from pydantic import ValidationError as PydanticValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from .config import RunConfig

logger = logging.getLogger(__name__)


class ConfigError(ValueError):
    """Invalid configuration, with the 1-based line and key when known."""

    def __init__(self, message: str, *, line: int | None = None, key: str | None = None):
        self.message = message
        self.line = line
        self.key = key
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(f"{prefix}{message}")


ALIASES: dict[str, str] = {
    # material
    "lambda": "material.lambda",
    "lam": "material.lambda",
    "eta": "material.eta",
    # loads
    "f0": "loads.f0",
    "fN": "loads.fN",
    "f_n": "loads.fN",
    # mesh
    "ny": "mesh.ny",
    "levels": "mesh.levels",
    "ref_level": "mesh.ref_level",
    # solver
    "eps": "solver.eps",
    "max_outer": "solver.max_outer",
    "start": "solver.start",
    "warm_start": "solver.warm_start",
    "x_tol": "solver.powell.x_tol",
    "f_tol": "solver.powell.f_tol",
    "max_sweeps": "solver.powell.max_sweeps",
    # contact laws
    "law": "law.name",
    "frozen_bound": "law.frozen_bound",
    "c_nu0": "law.constants.c_nu0",
    "c_nu1": "law.constants.c_nu1",
    "alpha_nu": "law.constants.alpha_nu",
    "c_tau": "law.constants.c_tau",
    "alpha_tau": "law.constants.alpha_tau",
    "h_tau_bar": "law.constants.h_tau_bar",
    "L_htau": "law.constants.L_htau",
    "m_alpha": "law.constants.m_alpha",
    "m_L": "law.constants.m_L",
    # diagnostics
    "seed": "diagnostics.seed",
    "n_dirs": "diagnostics.n_dirs",
    "residual_tolerance": "diagnostics.residual_tolerance",
    "deltas": "diagnostics.deltas",
    # output
    "out_dir": "output.out_dir",
    "csv": "output.csv",
    "vtk": "output.vtk",
    "gnuplot": "output.gnuplot",
    "displacement_scale": "output.displacement_scale",
    # runtime
    "deterministic": "runtime.deterministic",
    "workers": "runtime.workers",
}

# dotted spellings that resolve to the alias-named field
_CANONICAL = {"material.lam": "material.lambda", "loads.f_n": "loads.fN"}

VECTOR_KEYS = frozenset({"loads.f0", "loads.fN", "diagnostics.deltas"})
REQUIRED_KEYS = ("material.lambda", "material.eta")

PRESETS: dict[str, dict[str, Any]] = {
    "paper-sec5": {
        "material": {"lambda": 4.0, "eta": 4.0},
        "loads": {"f0": [-1.2, -0.9], "fN": [0.0, 0.0]},
        "law": {"name": "normal-compliance"},
        "solver": {"start": "zero"},
    },
}


class EnvSettings(BaseSettings):
    """Environment overrides (``CONTACTHVI_LOG_LEVEL``, ``CONTACTHVI_WORKERS``, ...)."""

    model_config = SettingsConfigDict(env_prefix="CONTACTHVI_", extra="ignore")

    log_level: str = "WARNING"
    workers: int | None = None
    out_dir: Path | None = None
    deterministic: bool | None = None

    def overrides(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        if self.workers is not None:
            out["runtime.workers"] = self.workers
        if self.out_dir is not None:
            out["output.out_dir"] = str(self.out_dir)
        if self.deterministic is not None:
            out["runtime.deterministic"] = self.deterministic
        return out


def canonical_key(key: str) -> str:
    """Resolve a short alias or dotted path to its dotted path."""
    key = key.strip()
    if key in ALIASES:
        return ALIASES[key]
    if "." in key:
        return _CANONICAL.get(key, key)
    raise ConfigError(f"Unknown key '{key}'", key=key)


def _parse_value(path: str, raw: str) -> Any:
    raw = raw.strip()
    if path in VECTOR_KEYS:
        return [part.strip() for part in raw.split(",") if part.strip()]
    if raw.lower() in ("none", "null"):
        return None
    return raw


def _set_path(data: dict[str, Any], path: str, value: Any) -> None:
    keys = path.split(".")
    target = data
    for k in keys[:-1]:
        nxt = target.get(k)
        if not isinstance(nxt, dict):
            nxt = {}
            target[k] = nxt
        target = nxt
    target[keys[-1]] = value


def deep_merge(base: dict[str, Any], overlay: Mapping[str, Any]) -> dict[str, Any]:
    out = copy.deepcopy(base)
    for k, v in overlay.items():
        if isinstance(v, Mapping) and isinstance(out.get(k), dict):
            out[k] = deep_merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def parse_flat_text(text: str) -> tuple[dict[str, Any], dict[str, int]]:
    """Parse ``key = value`` lines into a nested dict and a dotted-key -> line map.

    Raises:
        ConfigError: malformed line, unknown or duplicate key.
    """
    data: dict[str, Any] = {}
    lines: dict[str, int] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"Expected 'key = value', got '{stripped}'", line=lineno)
        key, raw = stripped.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError("Missing key before '='", line=lineno)
        try:
            path = canonical_key(key)
        except ConfigError as e:
            raise ConfigError(e.message, line=lineno, key=key) from None
        if path in lines:
            raise ConfigError(
                f"Duplicate key '{key}' (first set on line {lines[path]})", line=lineno, key=key
            )
        if not raw.strip():
            raise ConfigError(f"Missing value for key '{key}'", line=lineno, key=key)
        _set_path(data, path, _parse_value(path, raw))
        lines[path] = lineno
    return data, lines


def _line_for(loc: tuple[Any, ...], lines: Mapping[str, int]) -> tuple[int | None, str]:
    parts = [str(p) for p in loc]
    for n in range(len(parts), 0, -1):
        path = ".".join(parts[:n])
        if path in lines:
            return lines[path], path
    return None, ".".join(parts)


def build_config(data: Mapping[str, Any], lines: Mapping[str, int] | None = None) -> RunConfig:
    """Validate a nested dict, mapping the first pydantic error back to its line.

    Raises:
        ConfigError: on any validation failure.
    """
    try:
        return RunConfig(**data)
    except PydanticValidationError as e:
        err = e.errors()[0]
        line, key = _line_for(tuple(err.get("loc", ())), lines or {})
        raise ConfigError(f"Invalid value for '{key}': {err['msg']}", line=line, key=key) from e


def preset_data(preset: str | None) -> dict[str, Any]:
    if preset is None:
        return {}
    if preset not in PRESETS:
        raise ConfigError(f"Unknown preset '{preset}'; available: {sorted(PRESETS)}")
    return copy.deepcopy(PRESETS[preset])


def _check_required(provided: Collection[str]) -> None:
    for path in REQUIRED_KEYS:
        if path not in provided:
            short = path.rsplit(".", 1)[-1]
            raise ConfigError(f"Missing required key '{short}'", key=short)


def parse_config(text: str, preset: str | None = None) -> RunConfig:
    """Parse flat ``key = value`` text on top of an optional preset.

    Without a preset, ``lambda`` and ``eta`` must be given.

    Raises:
        ConfigError: unknown key, unparseable value or missing required key.
    """
    data, lines = parse_flat_text(text)
    if preset is None:
        _check_required(lines)
    return build_config(deep_merge(preset_data(preset), data), lines)


def load_yaml_config(path: Path) -> dict[str, Any]:
    """Load a nested configuration mapping from YAML.

    Raises:
        FileNotFoundError: If file doesn't exist
        yaml.YAMLError: If YAML is malformed
    """
    if not path.exists():
        raise FileNotFoundError(f"Configuration file not found: {path}")

    with open(path, encoding="utf-8") as f:
        data = yaml.safe_load(f)

    if data is None:
        return {}

    if not isinstance(data, dict):
        raise ConfigError(f"Configuration must be a mapping, got {type(data).__name__}")

    return data


def load_json_config(path: Path) -> dict[str, Any]:
    if not path.exists():
        raise FileNotFoundError(f"Configuration file not found: {path}")

    with open(path, encoding="utf-8") as f:
        data = json.load(f)

    if not isinstance(data, dict):
        raise ConfigError(f"Configuration must be a mapping, got {type(data).__name__}")

    return data


def _flat_paths(data: Mapping[str, Any], prefix: str = "") -> Iterator[str]:
    for k, v in data.items():
        path = f"{prefix}{k}"
        if isinstance(v, Mapping):
            yield from _flat_paths(v, f"{path}.")
        else:
            yield path


def read_config_file(path: Path) -> tuple[dict[str, Any], dict[str, int]]:
    """Nested data and line map of a config file (line map empty for YAML/JSON)."""
    if path.suffix in (".yaml", ".yml"):
        return load_yaml_config(path), {}
    if path.suffix == ".json":
        return load_json_config(path), {}
    if not path.exists():
        raise FileNotFoundError(f"Configuration file not found: {path}")
    return parse_flat_text(path.read_text(encoding="utf-8"))


def load_run_config(
    config_path: Path | None = None,
    preset: str | None = None,
    overrides: Mapping[str, Any] | None = None,
    *,
    use_env: bool = True,
) -> RunConfig:
    """Resolve the run configuration from every source.

    ``overrides`` maps dotted keys or short aliases to values; ``None`` values
    are skipped so unset CLI flags leave lower sources alone.

    Raises:
        ConfigError: invalid or incomplete configuration.
        FileNotFoundError: missing config file.
    """
    data = preset_data(preset)
    lines: dict[str, int] = {}
    if config_path is not None:
        file_data, lines = read_config_file(Path(config_path))
        if preset is None:
            provided = set(lines) if lines else set(_flat_paths(_canonical_tree(file_data)))
            _check_required(provided)
        data = deep_merge(data, file_data)
        logger.debug(f"Loaded configuration file {config_path}")

    merged: dict[str, Any] = {}
    if use_env:
        merged.update(EnvSettings().overrides())
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
    for key, value in merged.items():
        _set_path(data, canonical_key(key), value)
    return build_config(data, lines)


def _canonical_tree(data: Mapping[str, Any]) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for path in _flat_paths(data):
        _set_path(out, _CANONICAL.get(path, path), True)
    return out


def config_to_dict(cfg: RunConfig) -> dict[str, Any]:
    return cfg.model_dump(mode="json", by_alias=True)


def flatten_config(cfg: RunConfig) -> list[tuple[str, Any]]:
    """(dotted key, value) pairs in model order."""
    pairs: list[tuple[str, Any]] = []

    def walk(node: Mapping[str, Any], prefix: str) -> None:
        for k, v in node.items():
            if isinstance(v, Mapping):
                walk(v, f"{prefix}{k}.")
            else:
                pairs.append((f"{prefix}{k}", v))

    walk(config_to_dict(cfg), "")
    return pairs


def _format_flat_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return ", ".join(repr(float(v)) if isinstance(v, float) else str(v) for v in value)
    return str(value)


def render_flat_config(cfg: RunConfig) -> str:
    """Flat ``key = value`` text that parses back to ``cfg``."""
    out = ["# contacthvi run configuration"]
    for key, value in flatten_config(cfg):
        if value is None:
            out.append(f"# {key} =")
        else:
            out.append(f"{key} = {_format_flat_value(value)}")
    return "\n".join(out) + "\n"


def save_config_to_yaml(cfg: RunConfig, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        yaml.safe_dump(config_to_dict(cfg), f, default_flow_style=False, sort_keys=False)


def save_config_to_json(cfg: RunConfig, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(config_to_dict(cfg), f, indent=2)


def export_default_config(
    format: str = "conf", path: Path | None = None, preset: str | None = None
) -> Path:
    """Write the default (or preset) configuration as conf, yaml or json.

    Example:
        >>> export_default_config("yaml", Path("run.yaml"))
        PosixPath('run.yaml')
    """
    if format not in ("conf", "yaml", "json"):
        raise ValueError(f"Unsupported format: {format}. Use 'conf', 'yaml' or 'json'")
    cfg = build_config(preset_data(preset))
    if path is None:
        path = Path(f"contacthvi.{format}")
    if format == "yaml":
        save_config_to_yaml(cfg, path)
    elif format == "json":
        save_config_to_json(cfg, path)
    else:
        path.write_text(render_flat_config(cfg), encoding="utf-8")
    return path
