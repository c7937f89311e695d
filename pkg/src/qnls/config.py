"""Run configuration: flat ``key = value`` files with soliton sections, overridden by flags."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .analysis import STANDARD_K, STANDARD_Q
from .model import SINGLE_SOLITON, TWO_SOLITONS, SolitonParams

COMMANDS = ("single-soliton", "two-solitons", "table", "probe", "consistency", "dump-field")
EXPERIMENTS = ("single-soliton", "two-solitons")
SOLITON_KEYS = ("a", "qs", "c", "varphi", "phi")
SECTIONS = {"soliton": "single-soliton", "soliton1": "two-solitons", "soliton2": "two-solitons"}

DEFAULT_OUT = {
    "single-soliton": "errors.csv",
    "two-solitons": "errors.csv",
    "table": "table.csv",
    "probe": "probe.json",
    "consistency": "consistency.csv",
    "dump-field": "field.txt",
}


class ConfigError(ValueError):
    pass


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(",") if v.strip())


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(",") if v.strip())


# top-level key -> parser
KEYS = {
    "experiment": str,
    "q": _float_list,
    "N": int,
    "K": _int_list,
    "k0": int,
    "out": str,
    "seed": int,
    "eta": float,
    "trials": int,
    "ceiling": float,
    "n_min": int,
    "n_max": int,
}


@dataclass(frozen=True)
class RunConfig:
    command: str
    experiment: str
    q: tuple
    N: int
    K: tuple
    solitons: tuple
    out: str
    seed: int = 0
    k0: int = 0
    eta: float = 1.0
    trials: int = 100
    ceiling: float = 10.0
    n_min: int = 2
    n_max: int = 9


def read_config_file(path: str | Path) -> dict:
    """Parse a config file into ``{"": {...}, "soliton1": {...}, ...}`` of raw strings.

    Errors carry ``file:line`` positions.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config file ({exc.strerror})") from exc
    sections: dict[str, dict[str, tuple[str, int]]] = {"": {}}
    current = ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{path}:{lineno}"
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"{where}: malformed section header {raw.strip()!r}")
            current = line[1:-1].strip()
            if current not in SECTIONS:
                raise ConfigError(f"{where}: unknown section [{current}]")
            sections.setdefault(current, {})
            continue
        if "=" not in line:
            raise ConfigError(f"{where}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        allowed = SOLITON_KEYS if current else KEYS
        if key not in allowed:
            scope = f"section [{current}]" if current else "top level"
            raise ConfigError(f"{where}: unknown key {key!r} at {scope}")
        sections[current][key] = (value, lineno)
    return {"path": str(path), "sections": sections}


def _convert(parser, key: str, value: str, where: str):
    try:
        return parser(value)
    except ValueError:
        raise ConfigError(f"{where}: invalid value {value!r} for {key}") from None


def build_config(command: str, file_data: Optional[dict], flags: dict) -> RunConfig:
    """Merge defaults, file values and flags (in increasing precedence) and validate.

    ``flags`` maps key names to raw strings; soliton flags use ``a``, ``a1``, ``a2``... names.
    """
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}; choose from {', '.join(COMMANDS)}")
    values: dict = {}
    origin: dict = {}
    blocks: dict[str, dict] = {name: {} for name in SECTIONS}

    if file_data is not None:
        path = file_data["path"]
        for section, entries in file_data["sections"].items():
            for key, (raw, lineno) in entries.items():
                where = f"{path}:{lineno}"
                if section:
                    blocks[section][key] = _convert(float, key, raw, where)
                    origin[(section, key)] = where
                else:
                    values[key] = _convert(KEYS[key], key, raw, where)
                    origin[key] = where
            if section:
                origin.setdefault(section, f"{path}: section [{section}]")

    for name, raw in flags.items():
        if raw is None:
            continue
        where = f"--{name}"
        if name in KEYS:
            values[name] = _convert(KEYS[name], name, raw, where)
            origin[name] = where
            continue
        base, suffix = name.rstrip("12"), name[len(name.rstrip("12")):]
        if base not in SOLITON_KEYS or suffix not in ("", "1", "2"):
            raise ConfigError(f"{where}: unknown option")
        section = "soliton" + suffix
        blocks[section][base] = _convert(float, name, raw, where)
        origin[(section, base)] = where
        origin.setdefault(section, where)

    if command in EXPERIMENTS:
        if "experiment" in values and values["experiment"] != command:
            raise ConfigError(
                f"{origin['experiment']}: experiment {values['experiment']!r} "
                f"conflicts with command {command!r}"
            )
        experiment = command
    else:
        experiment = values.get("experiment", "single-soliton")
        if experiment not in EXPERIMENTS:
            raise ConfigError(
                f"{origin['experiment']}: experiment must be one of {', '.join(EXPERIMENTS)}"
            )

    for section, used_by in SECTIONS.items():
        if blocks[section] and used_by != experiment:
            raise ConfigError(
                f"{origin[section]}: soliton block [{section}] does not apply to {experiment}"
            )

    def soliton(section: str, default: SolitonParams) -> SolitonParams:
        try:
            return dataclasses.replace(default, **blocks[section])
        except ValueError as exc:
            where = origin.get(section, f"[{section}]")
            raise ConfigError(f"{where}: {exc}") from None

    if experiment == "single-soliton":
        solitons = (soliton("soliton", SINGLE_SOLITON),)
    else:
        solitons = (soliton("soliton1", TWO_SOLITONS[0]), soliton("soliton2", TWO_SOLITONS[1]))

    if command == "table":
        q_default, K_default = STANDARD_Q, STANDARD_K
    elif command == "consistency":
        # at q = 1/8 the diagonal line reaches h ~ 1e-8, where rounding swamps the fit
        q_default, K_default = (0.5,), (10,)
    else:
        q_default, K_default = (STANDARD_Q[0],), (10,)
    q = values.get("q", q_default)
    K = values.get("K", K_default)
    N = values.get("N", 20)

    def fail(key: str, message: str):
        raise ConfigError(f"{origin.get(key, key)}: {message}")

    if not q:
        fail("q", "at least one q value is required")
    for qv in q:
        if not 0.0 < qv < 1.0:
            fail("q", f"q must lie strictly between 0 and 1, got {qv}")
    if not K or any(k < 0 for k in K):
        fail("K", "K values must be nonnegative integers")
    if N < 2:
        fail("N", f"N must be >= 2, got {N}")
    if values.get("k0", 0) < 0:
        fail("k0", "k0 must be >= 0")
    if values.get("trials", 1) < 1:
        fail("trials", "trials must be >= 1")
    if values.get("eta", 1.0) <= 0:
        fail("eta", "eta must be positive")
    n_min, n_max = values.get("n_min", 2), values.get("n_max", 9)
    if n_min < 1 or n_max - n_min < 3:
        fail("n_max" if "n_max" in values else "n_min", "need 1 <= n_min and at least 4 indices")

    extras = {k: values[k] for k in ("seed", "k0", "eta", "trials", "ceiling") if k in values}
    return RunConfig(
        command=command,
        experiment=experiment,
        q=tuple(q),
        N=N,
        K=tuple(K),
        solitons=solitons,
        out=values.get("out", DEFAULT_OUT[command]),
        n_min=n_min,
        n_max=n_max,
        **extras,
    )


def parse_config(command: str, config_file: Optional[str] = None, **flags) -> RunConfig:
    file_data = read_config_file(config_file) if config_file else None
    return build_config(command, file_data, flags)
