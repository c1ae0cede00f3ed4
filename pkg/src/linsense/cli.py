"""Batch command-line front end.

Examples::

    linsense analyze --config run.toml --out results/
    linsense verify --seed 1 --out results/
    linsense --config sweep.toml --set measurement.tau=1e5 --format json

Exit codes: 0 success, 2 invalid input or config, 3 physics error
(instability or singular response), 4 bound violation found by ``verify``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

from . import analytic, config, scenarios, stochastic
from .errors import LinsenseError, PhysicsError, ValidationError

EXIT_OK, EXIT_VALIDATION, EXIT_PHYSICS, EXIT_BOUND = 0, 2, 3, 4


class BoundViolation(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="linsense", description="Sensing limits of linear bosonic sensor networks.")
    p.add_argument("command", nargs="?", choices=config.COMMANDS, help="overrides the config's command")
    p.add_argument("--config", help="TOML run configuration")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE")
    p.add_argument("--seed", type=int, help="seed for simulate, phase and verify")
    p.add_argument("--out", help="output directory (default: output.path or .)")
    p.add_argument("--format", choices=("csv", "json"), help="json also writes report.json")
    return p


def _section(cfg: dict, name: str) -> dict:
    sec = cfg.get(name, {})
    if not isinstance(sec, dict):
        raise ValidationError(f"[{name}] must be a table")
    return sec


def _ports(meas: dict, n: int, default: int) -> list[int]:
    if "ports" in meas:
        ports = meas["ports"]
    elif "port" in meas:
        ports = [meas["port"]]
    else:
        ports = [default]
    if not isinstance(ports, list) or not all(isinstance(p, int) and not isinstance(p, bool) for p in ports):
        raise ValidationError("measurement.ports must be an array of integers")
    for p in ports:
        if not 0 <= p < n:
            raise ValidationError(f"port {p} out of range for {n} modes")
    return ports


def _default_port(target) -> int:
    return target if isinstance(target, int) else target[0]


def _measurement(cfg, net, target_default):
    meas = _section(cfg, "measurement")
    target = config.parse_target(meas.get("target", target_default), net.n)
    tau = config._number(meas, "tau", "measurement")
    return meas, target, tau


def cmd_analyze(cfg: dict) -> tuple[list[str], list[dict]]:
    net, drive, t0, system = config.resolve_system(cfg)
    meas, target, tau = _measurement(cfg, net, t0)
    rows = []
    for port in _ports(meas, net.n, _default_port(target)):
        rep = analytic.sensing_limit(net, drive, port, target, tau)
        rows.append(
            dict(
                port=rep.port,
                target=rep.target,
                tau=rep.tau,
                response_mag=rep.response_mag,
                noise_std=rep.noise_std,
                snr_coeff=rep.snr_coeff,
                limit=rep.limit,
                bound=rep.bound,
                margin=rep.margin,
                n_target=rep.n_photons[target] if isinstance(target, int) else rep.n_photons[target[0]],
                params=config.canonical_json(system),
            )
        )
    return list(rows[0]), rows


def cmd_sweep(cfg: dict) -> tuple[list[str], list[dict]]:
    if "preset" not in cfg:
        raise ValidationError("sweep needs a [preset] section naming the family")
    psec = _section(cfg, "preset")
    sw = _section(cfg, "sweep")
    parameter = sw.get("parameter")
    if not isinstance(parameter, str):
        raise ValidationError("sweep.parameter must be a string")
    grid = config.grid_from_section(sw)
    meas = _section(cfg, "measurement")
    tau = config._number(meas, "tau", "measurement")
    port = meas.get("port")
    base = dict(psec.get("params", {}))
    base.pop(parameter, None)
    table = scenarios.sweep(psec.get("name"), parameter, grid, tau, port=port, **base)
    fields = ["parameter", "value", "limit", "bound", "margin", "response_mag", "n_target", "skipped", "reason", "params"]
    rows = []
    for r in table:
        rows.append(
            dict(
                parameter=parameter,
                value=r.value,
                limit=r.limit,
                bound=r.bound,
                margin=r.margin,
                response_mag=r.response_mag,
                n_target=r.n_photons,
                skipped=r.skipped,
                reason=r.reason,
                params=config.canonical_json({"preset": psec.get("name"), "params": {**base, parameter: r.value}, "tau": tau}),
            )
        )
    return fields, rows


def _sim_config(cfg: dict, seed: int | None) -> stochastic.SimConfig:
    sec = _section(cfg, "simulation")
    allowed = {"dt", "t_total", "burn_in", "n_traj", "seed", "record_interval", "noise_substeps"}
    extra = set(sec) - allowed
    if extra:
        raise ValidationError(f"unknown simulation key(s) {sorted(extra)}")
    kw = {k: sec[k] for k in allowed if k in sec}
    if seed is not None:
        kw["seed"] = seed
    try:
        return stochastic.SimConfig(**kw)
    except TypeError as exc:
        raise ValidationError(f"simulation section: {exc}") from exc


def cmd_simulate(cfg: dict, seed: int | None) -> tuple[list[str], list[dict]]:
    net, drive, t0, system = config.resolve_system(cfg)
    meas, target, tau = _measurement(cfg, net, t0)
    sim = _sim_config(cfg, seed)
    phase = config._number(meas, "phase", "measurement", 0.0)
    ports = _ports(meas, net.n, _default_port(target))
    ens = stochastic.simulate(net, drive, sim)
    rows = []
    for port in ports:
        est = stochastic.homodyne_estimate(ens, phase, tau, port)
        noise = analytic.output_noise_pair(net, port, drive.w_in)
        expected = noise.total / tau
        row = dict(
            port=port,
            phase=phase,
            tau=tau,
            mean=est.mean,
            variance=est.variance,
            n_samples=est.n_samples,
            stderr_of_variance=est.stderr_of_variance,
            analytic_variance=expected,
            z_score=(est.variance - expected) / est.stderr_of_variance,
            params=config.canonical_json({**system, "simulation": sim.__dict__}),
        )
        rows.append(row)
    return list(rows[0]), rows


def cmd_phase(cfg: dict, seed: int | None) -> tuple[list[str], list[dict]]:
    sec = _section(cfg, "phase")
    kappa = config._number(sec, "kappa", "phase")
    kappa_ex = config._number(sec, "kappa_ex", "phase", 0.0)
    n = config._number(sec, "n", "phase")
    tau = config._number(sec, "tau", "phase")
    trials = sec.get("trials", 10_000)
    steps = sec.get("steps", 256)
    s = seed if seed is not None else sec.get("seed", 0)
    res = stochastic.phase_diffusion(kappa, kappa_ex, n, tau, trials, seed=s, steps=steps)
    resolved = dict(kappa=kappa, kappa_ex=kappa_ex, n=n, tau=tau, trials=trials, steps=steps, seed=s)
    row = dict(
        var_phase=res.var_phase,
        freq_std=res.freq_std,
        delta_w=res.delta_w,
        expected_var_phase=res.delta_w * tau,
        expected_freq_std=math.sqrt(res.delta_w / tau),
        params=config.canonical_json(resolved),
    )
    return list(row), [row]


def cmd_verify(cfg: dict, seed: int | None) -> tuple[list[str], list[dict]]:
    sec = _section(cfg, "verify")
    s = seed if seed is not None else sec.get("seed", 1)
    count = sec.get("count", 500)
    kinds = sec.get("kinds", ["frequency", "coupling"])
    if not isinstance(count, int) or count < 1:
        raise ValidationError("verify.count must be a positive integer")
    rows = []
    for kind in kinds:
        for chk in scenarios.verify_bounds(s, count, kind):
            inst = chk.instance
            rep = chk.report
            rows.append(
                dict(
                    kind=kind,
                    index=chk.index,
                    n_modes=inst.network.n,
                    reciprocal=inst.network.reciprocal,
                    port=inst.port,
                    target=inst.target,
                    tau=inst.tau,
                    limit=rep.limit if rep else math.nan,
                    bound=rep.bound if rep else math.nan,
                    margin=rep.margin if rep else math.nan,
                    relative_margin=chk.relative_margin,
                    passed=chk.passed,
                    skipped=chk.skipped,
                    reason=chk.reason,
                    params=config.canonical_json(config.network_to_config(inst.network, inst.drive)),
                )
            )
    fields = ["kind", "index", "n_modes", "reciprocal", "port", "target", "tau", "limit", "bound",
              "margin", "relative_margin", "passed", "skipped", "reason", "params"]
    return fields, rows


def render_csv(command: str, resolved: dict, fields: list[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    buf.write("# linsense report\n")
    buf.write(f"# command: {command}\n")
    buf.write(f"# config_sha256: {config.digest(resolved)}\n")
    buf.write(f"# config: {config.canonical_json(resolved)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for r in rows:
        w.writerow([config.fmt(r[f]) for f in fields])
    return buf.getvalue()


def render_json(command: str, resolved: dict, fields: list[str], rows: list[dict]) -> str:
    doc = {
        "command": command,
        "config_sha256": config.digest(resolved),
        "config": resolved,
        "fields": fields,
        "rows": [{f: config.fmt(r[f]) for f in fields} for r in rows],
    }
    return json.dumps(doc, indent=1, sort_keys=False) + "\n"


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config.load(args.config) if args.config else {}
        cfg = config.apply_overrides(cfg, args.overrides)
        if args.command:
            cfg["command"] = args.command
        if args.seed is not None:
            cfg.setdefault("seed", args.seed)
            cfg["seed"] = args.seed
        seed = cfg.pop("seed", None)
        config.validate(cfg)
        out_sec = _section(cfg, "output")
        out_dir = Path(args.out or out_sec.get("path", "."))
        fmt = args.format or out_sec.get("format", "csv")
        if fmt not in ("csv", "json"):
            raise ValidationError(f"output.format must be csv or json, got {fmt!r}")
        command = cfg["command"]
        if command == "analyze":
            fields, rows = cmd_analyze(cfg)
        elif command == "sweep":
            fields, rows = cmd_sweep(cfg)
        elif command == "simulate":
            fields, rows = cmd_simulate(cfg, seed)
        elif command == "phase":
            fields, rows = cmd_phase(cfg, seed)
        else:
            fields, rows = cmd_verify(cfg, seed)
        resolved = dict(cfg)
        if seed is not None:
            resolved["seed"] = seed
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "report.csv").write_text(render_csv(command, resolved, fields, rows))
        if fmt == "json":
            (out_dir / "report.json").write_text(render_json(command, resolved, fields, rows))
        if command == "verify":
            bad = [r for r in rows if not r["passed"]]
            if bad:
                raise BoundViolation(f"{len(bad)} of {len(rows)} instances violate the bound")
    except BoundViolation as exc:
        print(f"error: bound: {exc}", file=sys.stderr)
        return EXIT_BOUND
    except ValidationError as exc:
        print(f"error: validation: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except PhysicsError as exc:
        print(f"error: physics: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except LinsenseError as exc:
        print(f"error: validation: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (TypeError, KeyError) as exc:
        print(f"error: validation: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def main() -> None:
    sys.exit(run())
