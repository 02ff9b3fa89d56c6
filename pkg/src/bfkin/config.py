"""Line-based run configuration files.

Grammar: one ``key = value`` pair per line; ``#`` starts a comment (full line
or trailing); blank lines are ignored. Keys are dotted paths into the run
namespace; the flat solver fields live at the top level and a few grouped
keys (``sweep.gamma_max_values``, ``potential.form``, ``transport.order``,
``domain.blast_unit``) address experiment machinery. Numbers accept decimal
or scientific notation; booleans are ``true``/``false``; lists are
comma-separated. Unknown keys are errors.
"""

from __future__ import annotations

from .driver import RunConfig, make_config
from .errors import ConfigError

_STR_KEYS = {
    "model": "model",
    "preset": "preset",
    "mode": "mode",
    "diagnostics": "diagnostics",
    "stepper": "stepper",
    "bc": "bc",
    "potential.form": "potential_form",
}
_FLOAT_KEYS = {
    "epsilon": "epsilon",
    "dt": "dt",
    "t_final": "t_final",
    "delta": "delta",
    "x_left": "x_left",
    "x_right": "x_right",
    "l_v": "l_v",
    "b0": "b0",
}
_INT_KEYS = {
    "gamma_max": "gamma_max",
    "n_x": "n_x",
    "n_v": "n_v",
    "diag_interval": "diag_interval",
    "transport.order": "transport_order",
}
_BOOL_KEYS = {
    "domain.blast_unit": "blast_unit_domain",
}
_LIST_KEYS = {
    "sweep.gamma_max_values": "gamma_max_values",
    "snapshot_times": "snapshot_times",
}

KNOWN_KEYS = sorted({*_STR_KEYS, *_FLOAT_KEYS, *_INT_KEYS, *_BOOL_KEYS, *_LIST_KEYS})


def _parse_scalar(key: str, raw: str):
    if key in _STR_KEYS:
        return _STR_KEYS[key], raw
    if key in _FLOAT_KEYS:
        try:
            return _FLOAT_KEYS[key], float(raw)
        except ValueError:
            raise ConfigError(f"value for {key!r} is not a number: {raw!r}") from None
    if key in _INT_KEYS:
        try:
            return _INT_KEYS[key], int(raw)
        except ValueError:
            raise ConfigError(f"value for {key!r} is not an integer: {raw!r}") from None
    if key in _BOOL_KEYS:
        low = raw.lower()
        if low not in ("true", "false"):
            raise ConfigError(f"value for {key!r} must be true or false: {raw!r}")
        return _BOOL_KEYS[key], low == "true"
    if key in _LIST_KEYS:
        try:
            items = tuple(float(part) for part in raw.split(",") if part.strip())
        except ValueError:
            raise ConfigError(f"value for {key!r} is not a number list: {raw!r}") from None
        return _LIST_KEYS[key], items
    raise ConfigError(f"unknown config key {key!r}")


def parse_config_text(text: str) -> dict:
    """Parse config text into an override mapping (not yet a RunConfig)."""
    values: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected key=value, got {stripped!r}")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        field_name, value = _parse_scalar(key, raw)
        values[field_name] = value
    return values


def parse_config(path, flag_overrides: dict | None = None) -> tuple[RunConfig, dict]:
    """Read a config file and return (RunConfig, extras).

    `flag_overrides` wins over file values. Keys addressing experiment
    machinery rather than the solver (sweep lists) are returned in `extras`.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            values = parse_config_text(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    if flag_overrides:
        values.update(flag_overrides)
    return config_from_mapping(values)


def config_from_mapping(values: dict) -> tuple[RunConfig, dict]:
    values = dict(values)
    extras = {}
    if "gamma_max_values" in values:
        extras["gamma_max_values"] = tuple(int(v) for v in values.pop("gamma_max_values"))
    preset = values.pop("preset", None)
    if preset is None and "model" not in values:
        raise ConfigError("config must set at least 'preset' or 'model'")
    cfg = make_config(preset, **values)
    return cfg, extras
