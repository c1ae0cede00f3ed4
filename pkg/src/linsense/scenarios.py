"""Named network configurations, parameter sweeps and randomized bound checks."""

from __future__ import annotations

import inspect
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import analytic
from .errors import LinsenseError, PhysicsError, ValidationError
from .model import DriveSpec, ModeParams, SensorNetwork, build_network, stability


@dataclass(frozen=True)
class Preset:
    name: str
    network: SensorNetwork
    drive: DriveSpec
    notes: str
    params: dict = field(default_factory=dict)
    target: int = 0


def _finish(name, net, drive_ports, mode, n_target, notes, params) -> Preset:
    diag = stability(net)
    if not diag.below_threshold:
        raise ValidationError(f"preset {name} with {params} is not below threshold (decay_margin={diag.decay_margin:.4g})")
    w_in = net.modes[mode].w0
    drive = analytic.normalize_drive(net, DriveSpec(w_in, drive_ports), mode, n_target)
    return Preset(name=name, network=net, drive=drive, notes=notes, params=dict(params), target=mode)


def single_passive(kappa_0: float = 1.0, kappa_ex: float = 1.0, n_target: float = 100.0, w0: float = 0.0) -> Preset:
    net = build_network([ModeParams(w0, kappa_ex, kappa_0, 0.0)])
    return _finish(
        "single_passive", net, [1.0], 0, n_target,
        "one lossy cavity driven on resonance",
        dict(kappa_0=kappa_0, kappa_ex=kappa_ex, n_target=n_target, w0=w0),
    )


def single_active(
    g: float = 0.5, kappa_0: float = 1.0, kappa_ex: float = 1.0, n_target: float = 100.0, w0: float = 0.0
) -> Preset:
    net = build_network([ModeParams(w0, kappa_ex, kappa_0, g)])
    return _finish(
        "single_active", net, [1.0], 0, n_target,
        "one cavity with linear gain below threshold, driven on resonance",
        dict(g=g, kappa_0=kappa_0, kappa_ex=kappa_ex, n_target=n_target, w0=w0),
    )


def two_mode_ep(
    epsilon: float = 0.05,
    gamma: float = 0.65,
    kappa_ex: float = 1.0,
    kappa_0: float = 1.0,
    kappa_ex2: float = 0.5,
    kappa_02: float = 0.5,
    n_target: float = 100.0,
    w0: float = 0.0,
) -> Preset:
    """PT-like pair at distance ``epsilon`` above its exceptional point.

    Mode 1 is passive with net half-width ``(kappa_ex + kappa_0) / 2 = gamma0 + gamma``;
    the gain on mode 2 is set so its net half-width is ``gamma0 - gamma``. The
    eigenvalues are ``w0 - i gamma0 +- sqrt(mu^2 - gamma^2)`` and coalesce at
    ``mu = gamma``; the coupling is ``mu = gamma + epsilon``.
    """
    if not epsilon > 0:
        raise ValidationError(f"epsilon must be > 0, got {epsilon!r}")
    half1 = 0.5 * (kappa_ex + kappa_0)
    gamma0 = half1 - gamma
    if not gamma0 > 0:
        raise ValidationError(f"gamma={gamma!r} leaves no net loss on average (need gamma < {half1})")
    g2 = kappa_ex2 + kappa_02 - 2.0 * (gamma0 - gamma)
    if g2 < 0:
        raise ValidationError("mode-2 losses too large for the requested gamma; lower kappa_ex2 or kappa_02")
    mu = gamma + epsilon
    net = build_network(
        [ModeParams(w0, kappa_ex, kappa_0, 0.0), ModeParams(w0, kappa_ex2, kappa_02, g2)],
        [[0, mu], [mu, 0]],
    )
    return _finish(
        "two_mode_ep", net, [1.0, 0.0], 0, n_target,
        "gain-loss pair near an exceptional point, driven at port 1",
        dict(epsilon=epsilon, gamma=gamma, kappa_ex=kappa_ex, kappa_0=kappa_0,
             kappa_ex2=kappa_ex2, kappa_02=kappa_02, n_target=n_target, w0=w0),
    )


def two_mode_nonreciprocal(
    mu12: float = 1.0,
    mu21: float = 0.0,
    kappa_ex: float = 1.0,
    kappa_0: float = 1.0,
    detuning: float = 0.0,
    n_target: float = 100.0,
    w0: float = 0.0,
) -> Preset:
    """Two identical cavities with one-way (|mu12| != |mu21|) coupling, both ports driven."""
    net = build_network(
        [ModeParams(w0, kappa_ex, kappa_0, 0.0), ModeParams(w0 + detuning, kappa_ex, kappa_0, 0.0)],
        [[0, mu12], [mu21, 0]],
    )
    return _finish(
        "two_mode_nonreciprocal", net, [1.0, 1.0], 0, n_target,
        "non-reciprocal coupled pair",
        dict(mu12=mu12, mu21=mu21, kappa_ex=kappa_ex, kappa_0=kappa_0, detuning=detuning, n_target=n_target, w0=w0),
    )


def chain(
    n: int = 4, coupling: float = 0.5, kappa_ex: float = 1.0, kappa_0: float = 1.0, n_target: float = 100.0, w0: float = 0.0
) -> Preset:
    if int(n) != n or n < 1:
        raise ValidationError(f"chain length must be a positive integer, got {n!r}")
    n = int(n)
    mu = np.zeros((n, n))
    for i in range(n - 1):
        mu[i, i + 1] = mu[i + 1, i] = coupling
    net = build_network([ModeParams(w0, kappa_ex, kappa_0, 0.0) for _ in range(n)], mu)
    drive = np.zeros(n)
    drive[0] = 1.0
    return _finish(
        "chain", net, drive, 0, n_target,
        "nearest-neighbour chain of identical cavities, driven at port 1",
        dict(n=n, coupling=coupling, kappa_ex=kappa_ex, kappa_0=kappa_0, n_target=n_target, w0=w0),
    )


PRESETS: dict[str, Callable[..., Preset]] = {
    "single_passive": single_passive,
    "single_active": single_active,
    "two_mode_ep": two_mode_ep,
    "two_mode_nonreciprocal": two_mode_nonreciprocal,
    "chain": chain,
}


def _factory(name: str, params) -> Callable[..., Preset]:
    try:
        factory = PRESETS[name]
    except KeyError:
        raise ValidationError(f"unknown preset {name!r}; known: {', '.join(PRESETS)}") from None
    unknown = set(params) - set(inspect.signature(factory).parameters)
    if unknown:
        raise ValidationError(f"preset {name} has no parameter(s) {sorted(unknown)}")
    return factory


def preset(name: str, **params) -> Preset:
    return _factory(name, params)(**params)


# ---------------------------------------------------------------------- sweeps


@dataclass(frozen=True)
class SweepRow:
    value: float
    limit: float = math.nan
    bound: float = math.nan
    margin: float = math.nan
    response_mag: float = math.nan
    n_photons: float = math.nan
    skipped: bool = False
    reason: str = ""


def sweep(
    family: str,
    parameter: str,
    grid: Sequence[float],
    tau: float,
    port: int | None = None,
    **base,
) -> list[SweepRow]:
    """Evaluate the sensing limit of the preset's target across a parameter grid.

    Grid points where the preset is unstable or the response is singular come
    back as skipped rows carrying the reason.
    """
    _factory(family, {**base, parameter: None})
    rows = []
    for v in grid:
        params = dict(base)
        params[parameter] = float(v)
        try:
            p = preset(family, **params)
            rep = analytic.sensing_limit(p.network, p.drive, p.target if port is None else port, p.target, tau)
        except (PhysicsError, ValidationError) as exc:
            rows.append(SweepRow(value=float(v), skipped=True, reason=str(exc)))
            continue
        rows.append(
            SweepRow(
                value=float(v),
                limit=rep.limit,
                bound=rep.bound,
                margin=rep.margin,
                response_mag=rep.response_mag,
                n_photons=rep.n_photons[p.target],
            )
        )
    return rows


# ------------------------------------------------------ randomized bound suite


@dataclass(frozen=True)
class Instance:
    network: SensorNetwork
    drive: DriveSpec
    port: int
    target: int | tuple[int, int]
    tau: float
    kind: str


def _random_modes(rng: np.random.Generator, n: int, with_gain: bool) -> list[ModeParams]:
    modes = []
    for _ in range(n):
        g = rng.uniform(0.0, 1.5) if with_gain and rng.random() < 0.6 else 0.0
        modes.append(
            ModeParams(
                w0=rng.uniform(-2.0, 2.0),
                kappa_ex=rng.uniform(0.05, 2.0),
                kappa_0=10 ** rng.uniform(-2.0, 0.5),
                g=g,
            )
        )
    return modes


def _random_mu(rng: np.random.Generator, n: int, style: str) -> np.ndarray:
    scale = 10 ** rng.uniform(-1.0, 0.3)
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) * scale / math.sqrt(2)
    if style == "reciprocal":
        mu = np.triu(z, 1)
        mu = mu + mu.conj().T
    elif style == "one_way":
        mu = np.triu(z, 1)
    else:
        mu = z
    if rng.random() < 0.3:
        mu = mu * (rng.random((n, n)) < 0.5)
    return mu


def _near_ep_network(rng: np.random.Generator) -> SensorNetwork:
    eps = 10 ** rng.uniform(-6.0, -1.0)
    kex, k0 = rng.uniform(0.2, 2.0), rng.uniform(0.05, 1.0)
    half1 = 0.5 * (kex + k0)
    gamma0 = half1 * rng.uniform(0.02, 0.5)
    gamma = half1 - gamma0
    kex2, k02 = rng.uniform(0.1, 1.0), rng.uniform(0.05, 1.0)
    g2 = kex2 + k02 - 2.0 * (gamma0 - gamma)
    mu = gamma + eps * rng.choice([-1.0, 1.0])
    return build_network(
        [ModeParams(0.0, kex, k0, 0.0), ModeParams(0.0, kex2, k02, g2)],
        [[0, mu], [mu, 0]],
    )


def random_instance(rng: np.random.Generator, kind: str = "frequency", max_tries: int = 200) -> Instance:
    """Draw a stable random network, drive, probe port and perturbation target."""
    for _ in range(max_tries):
        n_min = 2 if kind == "coupling" else 1
        roll = rng.random()
        if roll < 0.15:
            net = _near_ep_network(rng)
        else:
            n = int(rng.integers(n_min, 9))
            style = rng.choice(["reciprocal", "general", "one_way"])
            net = build_network(_random_modes(rng, n, with_gain=rng.random() < 0.6), _random_mu(rng, n, style))
        diag = stability(net)
        if not diag.below_threshold or diag.decay_margin < 1e-6:
            continue
        n = net.n
        ports = rng.random(n) < 0.5
        ports[rng.integers(n)] = True
        a_in = np.where(ports, (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * 10 ** rng.uniform(0, 2), 0.0)
        w_in = float(rng.uniform(-2.5, 2.5)) if rng.random() < 0.7 else float(rng.choice(net.rates("w0")))
        drive = DriveSpec(w_in, a_in)
        if kind == "frequency":
            target = int(rng.integers(n))
        else:
            i, j = rng.choice(n, size=2, replace=False)
            target = (int(i), int(j))
        tau = max(1e4, 2 * analytic.AVERAGING_FACTOR / diag.decay_margin)
        try:
            ss = analytic.steady_state(net, drive)
        except PhysicsError:
            continue
        idx = [target] if kind == "frequency" else list(target)
        if np.min(ss.n_photons[idx]) < 1e-12:
            continue
        resp = np.abs(analytic.response(net, drive, target).per_port)
        sensitive = np.flatnonzero(resp > analytic.INSENSITIVE_ATOL)
        if sensitive.size == 0:
            continue
        port = int(rng.choice(sensitive))
        return Instance(network=net, drive=drive, port=port, target=target, tau=tau, kind=kind)
    raise RuntimeError("could not draw a stable random instance")


@dataclass(frozen=True)
class BoundCheck:
    index: int
    instance: Instance
    report: analytic.SensingReport | None
    passed: bool
    skipped: bool
    reason: str = ""

    @property
    def relative_margin(self) -> float:
        if self.report is None:
            return math.nan
        return self.report.margin / self.report.bound


def verify_bounds(seed: int, count: int = 500, kind: str = "frequency", rtol: float = 1e-9) -> list[BoundCheck]:
    """Check the sensing-limit floor on ``count`` random instances.

    ``kind="frequency"`` checks against the frequency-shift floor,
    ``kind="coupling"`` against the coupling-shift floor.
    """
    if kind not in ("frequency", "coupling"):
        raise ValidationError(f"kind must be 'frequency' or 'coupling', got {kind!r}")
    ss = np.random.SeedSequence(int(seed), spawn_key=(0 if kind == "frequency" else 1,))
    rng = np.random.Generator(np.random.PCG64(ss))
    out = []
    for idx in range(int(count)):
        inst = random_instance(rng, kind)
        try:
            rep = analytic.sensing_limit(inst.network, inst.drive, inst.port, inst.target, inst.tau)
        except LinsenseError as exc:
            out.append(BoundCheck(idx, inst, None, passed=True, skipped=True, reason=str(exc)))
            continue
        ok = rep.margin >= -rtol * rep.bound
        out.append(BoundCheck(idx, inst, rep, passed=bool(ok), skipped=False))
    return out
