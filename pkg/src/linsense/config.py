"""TOML run configurations: loading, dotted overrides, network (de)serialization.

Complex numbers are written as ``[re, im]`` pairs; plain numbers are accepted
wherever a complex value is expected.

A minimal analyze config::

    command = "analyze"

    [preset]
    name = "single_passive"
    params = { kappa_0 = 1.0, kappa_ex = 1.0, n_target = 100.0 }

    [measurement]
    tau = 1e4
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
from pathlib import Path
from typing import Any

import numpy as np
import tomli
import tomlkit

from .errors import ValidationError
from .model import DriveSpec, ModeParams, SensorNetwork, build_network
from .scenarios import Preset, preset

COMMANDS = ("analyze", "sweep", "simulate", "phase", "verify")
SECTIONS = ("network", "preset", "drive", "measurement", "simulation", "sweep", "phase", "verify", "output")


def load(path: str | Path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomli.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc.strerror}") from exc
    except tomli.TOMLDecodeError as exc:
        raise ValidationError(f"malformed config {path}: {exc}") from exc


def loads(text: str) -> dict:
    try:
        return tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ValidationError(f"malformed config: {exc}") from exc


def dumps(cfg: dict) -> str:
    return tomlkit.dumps(cfg)


def _literal(text: str) -> Any:
    try:
        return tomli.loads(f"v = {text}")["v"]
    except tomli.TOMLDecodeError:
        return text


def apply_overrides(cfg: dict, overrides: list[str]) -> dict:
    """Apply ``section.key=value`` overrides; values parse as TOML literals."""
    cfg = copy.deepcopy(cfg)
    for item in overrides:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ValidationError(f"override {item!r} is not of the form section.key=value")
        parts = key.strip().split(".")
        node = cfg
        for p in parts[:-1]:
            nxt = node.setdefault(p, {})
            if not isinstance(nxt, dict):
                raise ValidationError(f"override {item!r}: {p} is not a section")
            node = nxt
        node[parts[-1]] = _literal(value.strip())
    return cfg


def validate(cfg: dict) -> None:
    unknown = set(cfg) - set(SECTIONS) - {"command", "units"}
    if unknown:
        raise ValidationError(f"unknown config section(s): {sorted(unknown)}")
    cmd = cfg.get("command")
    if cmd not in COMMANDS:
        raise ValidationError(f"command must be one of {COMMANDS}, got {cmd!r}")
    if "network" in cfg and "preset" in cfg:
        raise ValidationError("config has both [network] and [preset]; give exactly one")


def digest(cfg: dict) -> str:
    return hashlib.sha256(canonical_json(cfg).encode()).hexdigest()


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=_json_default)


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o).__name__}")


# ---------------------------------------------------------- complex helpers


def _complex(v, where: str) -> complex:
    if isinstance(v, bool):
        raise ValidationError(f"{where}: expected a number, got {v!r}")
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v):
        return complex(v[0], v[1])
    raise ValidationError(f"{where}: expected a number or [re, im], got {v!r}")


def _encode(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _number(section: dict, key: str, where: str, default=None) -> float:
    v = section.get(key, default)
    if v is None:
        raise ValidationError(f"{where}.{key} is required")
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValidationError(f"{where}.{key} must be a number, got {v!r}")
    return float(v)


# ---------------------------------------------------- network and drive I/O


def network_to_config(net: SensorNetwork, drive: DriveSpec) -> dict:
    return {
        "network": {
            "modes": [
                {"w0": m.w0, "kappa_ex": m.kappa_ex, "kappa_0": m.kappa_0, "g": m.g} for m in net.modes
            ],
            "mu": [[_encode(z) for z in row] for row in net.mu],
        },
        "drive": {"w_in": drive.w_in, "a_in": [_encode(z) for z in drive.a_in]},
    }


def preset_to_config(p: Preset) -> dict:
    """Inline network + drive section for a preset; loads back to the same objects."""
    cfg = network_to_config(p.network, p.drive)
    cfg["measurement"] = {"target": p.target}
    return cfg


def _network_from_section(sec: dict) -> SensorNetwork:
    modes_raw = sec.get("modes")
    if not isinstance(modes_raw, list) or not modes_raw:
        raise ValidationError("network.modes must be a non-empty array of tables")
    modes = []
    for i, m in enumerate(modes_raw):
        if not isinstance(m, dict):
            raise ValidationError(f"network.modes[{i}] must be a table")
        extra = set(m) - {"w0", "kappa_ex", "kappa_0", "g"}
        if extra:
            raise ValidationError(f"network.modes[{i}] has unknown keys {sorted(extra)}")
        where = f"network.modes[{i}]"
        modes.append(
            ModeParams(
                w0=_number(m, "w0", where),
                kappa_ex=_number(m, "kappa_ex", where),
                kappa_0=_number(m, "kappa_0", where),
                g=_number(m, "g", where, 0.0),
            )
        )
    mu_raw = sec.get("mu")
    mu = None
    if mu_raw is not None:
        if not isinstance(mu_raw, list) or not all(isinstance(r, list) for r in mu_raw):
            raise ValidationError("network.mu must be a matrix (array of rows)")
        mu = [[_complex(v, f"network.mu[{i}][{j}]") for j, v in enumerate(row)] for i, row in enumerate(mu_raw)]
        if any(len(r) != len(modes) for r in mu) or len(mu) != len(modes):
            raise ValidationError(f"network.mu must be {len(modes)}x{len(modes)}")
    return build_network(modes, mu)


def resolve_system(cfg: dict) -> tuple[SensorNetwork, DriveSpec, Any, dict]:
    """Network, drive, default target and a plain-data description of both."""
    from .analytic import normalize_drive

    if "preset" in cfg:
        sec = cfg["preset"]
        name = sec.get("name")
        if not isinstance(name, str):
            raise ValidationError("preset.name must be a string")
        params = sec.get("params", {})
        if not isinstance(params, dict):
            raise ValidationError("preset.params must be a table")
        p = preset(name, **params)
        net, drive, target = p.network, p.drive, p.target
    elif "network" in cfg:
        net = _network_from_section(cfg["network"])
        dsec = cfg.get("drive")
        if not isinstance(dsec, dict):
            raise ValidationError("an inline [network] needs a [drive] section")
        a_in = dsec.get("a_in")
        if not isinstance(a_in, list):
            raise ValidationError("drive.a_in must be an array")
        drive = DriveSpec(_number(dsec, "w_in", "drive"), [_complex(v, f"drive.a_in[{i}]") for i, v in enumerate(a_in)])
        if drive.a_in.size != net.n:
            raise ValidationError(f"drive.a_in has {drive.a_in.size} entries, network has {net.n} modes")
        if "n_target" in dsec:
            mode = int(dsec.get("normalize_mode", 0))
            drive = normalize_drive(net, drive, mode, _number(dsec, "n_target", "drive"))
        target = 0
    else:
        raise ValidationError("config needs a [network] or a [preset] section")
    return net, drive, target, network_to_config(net, drive)


def parse_target(v, n: int):
    if isinstance(v, bool):
        raise ValidationError(f"measurement.target must be an index or a pair, got {v!r}")
    if isinstance(v, int):
        t = v
        ok = 0 <= t < n
    elif isinstance(v, list) and len(v) == 2 and all(isinstance(x, int) and not isinstance(x, bool) for x in v):
        t = (v[0], v[1])
        ok = all(0 <= x < n for x in t) and t[0] != t[1]
    else:
        raise ValidationError(f"measurement.target must be an index or a pair, got {v!r}")
    if not ok:
        raise ValidationError(f"measurement.target {v!r} out of range for {n} modes")
    return t


def grid_from_section(sec: dict) -> list[float]:
    if "grid" in sec:
        grid = sec["grid"]
        if not isinstance(grid, list) or not grid:
            raise ValidationError("sweep.grid must be a non-empty array")
        return [_number({"v": g}, "v", "sweep.grid") for g in grid]
    start = _number(sec, "start", "sweep")
    stop = _number(sec, "stop", "sweep")
    num = sec.get("num")
    if not isinstance(num, int) or num < 1:
        raise ValidationError("sweep.num must be a positive integer")
    spacing = sec.get("spacing", "linear")
    if spacing == "log":
        if start <= 0 or stop <= 0:
            raise ValidationError("log spacing needs positive start and stop")
        return [float(x) for x in np.geomspace(start, stop, num)]
    if spacing == "linear":
        return [float(x) for x in np.linspace(start, stop, num)]
    raise ValidationError(f"sweep.spacing must be 'linear' or 'log', got {spacing!r}")


def fmt(x) -> str:
    """Deterministic text form of a report value (12 significant digits)."""
    if isinstance(x, bool) or isinstance(x, np.bool_):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        out = format(x, ".12g")
        return "0" if out == "-0" else out
    if isinstance(x, tuple):
        return ";".join(fmt(v) for v in x)
    return str(x)
