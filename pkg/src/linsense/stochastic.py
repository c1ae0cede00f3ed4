"""Monte-Carlo oracle: Langevin trajectories and phase diffusion.

The trajectory simulator integrates the same linear network as
:mod:`linsense.analytic`, but in the time domain and with sampled noise, so
its homodyne statistics give an independent check of the closed-form noise
and SNR formulas.

Noise model. Every channel (port input, intrinsic loss, gain) is a classical
complex white noise with ``<xi(t) xi*(t')> = delta(t - t') / 2``, the
symmetrized vacuum level. A homodyne quadrature then picks up exactly
``sum_c |T_c|^2`` per unit bandwidth, which is ``s_plus + s_minus``.

Integration is Euler-Maruyama in the frame rotating at the drive frequency.
Each trajectory owns a PCG64 stream seeded by ``SeedSequence(seed,
spawn_key=(index,))``, so a trajectory's noise does not depend on how many
trajectories run alongside it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from . import analytic
from .errors import ValidationError
from .model import DriveSpec, SensorNetwork, perturbed

DT_FACTOR = 0.01
BURN_IN_FACTOR = 10.0
_CHUNK_ELEMENTS = 4_000_000


@dataclass(frozen=True)
class SimConfig:
    """Time grid and ensemble settings.

    ``t_total`` includes ``burn_in``. Output is stored as block averages over
    ``record_interval`` (rounded to whole steps). ``noise_substeps`` sums that
    many Gaussian draws into each step's increment; a run at ``dt`` with
    ``noise_substeps=2`` follows the same Brownian path as a run at ``dt / 2``.
    """

    dt: float
    t_total: float
    burn_in: float
    n_traj: int
    seed: int = 0
    record_interval: float = 1.0
    noise_substeps: int = 1

    def __post_init__(self):
        for name in ("dt", "t_total", "record_interval"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValidationError(f"{name} must be positive and finite, got {v!r}")
        if not (self.burn_in >= 0 and math.isfinite(self.burn_in)):
            raise ValidationError(f"burn_in must be >= 0, got {self.burn_in!r}")
        if self.burn_in >= self.t_total:
            raise ValidationError("burn_in must be shorter than t_total")
        if int(self.n_traj) != self.n_traj or self.n_traj < 1:
            raise ValidationError(f"n_traj must be a positive integer, got {self.n_traj!r}")
        if int(self.noise_substeps) != self.noise_substeps or self.noise_substeps < 1:
            raise ValidationError(f"noise_substeps must be a positive integer, got {self.noise_substeps!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValidationError(f"seed must fit in 64 unsigned bits, got {self.seed!r}")

    @property
    def record_steps(self) -> int:
        return max(1, round(self.record_interval / self.dt))

    @property
    def burn_steps(self) -> int:
        r = self.record_steps
        return math.ceil(self.burn_in / self.dt / r - 1e-9) * r

    @property
    def n_records(self) -> int:
        total = round(self.t_total / self.dt)
        return (total - self.burn_steps) // self.record_steps


def rate_scale(net: SensorNetwork, w_in: float) -> float:
    """Fastest rate in the rotating frame: loss + gain + coupling + detuning."""
    row = np.abs(net.mu).sum(axis=1)
    rates = net.rates("kappa_ex") + net.rates("kappa_0") + net.rates("g") + row
    return float(np.max(rates + np.abs(net.rates("w0") - w_in)))


def check_config(net: SensorNetwork, drive: DriveSpec, cfg: SimConfig):
    diag = analytic._require_stable(net)
    rho = rate_scale(net, drive.w_in)
    if cfg.dt > DT_FACTOR / rho * (1 + 1e-12):
        raise ValidationError(f"dt={cfg.dt:.6g} exceeds 0.01/rho = {DT_FACTOR / rho:.6g}")
    if cfg.burn_in < BURN_IN_FACTOR / diag.decay_margin * (1 - 1e-12):
        raise ValidationError(
            f"burn_in={cfg.burn_in:.6g} shorter than 10/decay_margin = {BURN_IN_FACTOR / diag.decay_margin:.6g}"
        )
    if cfg.n_records < 1:
        raise ValidationError("t_total leaves no room for a record after burn-in")


def trajectory_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(int(index),))))


@dataclass(frozen=True)
class Ensemble:
    """Output of :func:`simulate`.

    ``records[t, r, i]`` is the mean rotating-frame output amplitude at port
    ``i`` over record block ``r`` of trajectory ``t``. ``occupation[t, i]`` is
    the post-burn-in time average of ``|a_i|^2``.
    """

    network: SensorNetwork
    drive: DriveSpec
    config: SimConfig
    records: NDArray[np.complex128]
    occupation: NDArray[np.float64]
    final_state: NDArray[np.complex128]
    record_dt: float
    noise: bool = field(default=True)


def simulate(
    net: SensorNetwork,
    drive: DriveSpec,
    cfg: SimConfig,
    perturbation: tuple | None = None,
    noise: bool = True,
) -> Ensemble:
    """Integrate ``n_traj`` Langevin trajectories of the driven network.

    ``perturbation=(target, delta)`` simulates the network with ``w_k`` (or
    ``mu_ij`` and ``mu_ji``) shifted by ``delta``. Trajectories start from the
    vacuum, ``a = 0``.
    """
    if perturbation is not None:
        target, delta = perturbation
        net = perturbed(net, target, delta)
    if drive.a_in.shape != (net.n,):
        raise ValidationError(f"drive has {drive.a_in.size} ports, network has {net.n} modes")
    check_config(net, drive, cfg)

    n, T, dt = net.n, int(cfg.n_traj), cfg.dt
    sub = int(cfg.noise_substeps)
    rs = cfg.record_steps
    burn = cfg.burn_steps
    n_rec = cfg.n_records
    total = burn + n_rec * rs

    # rotating frame: da/dt = M a + sqrt(K_ex) a_in + noise,  M = i (w_in - H)
    H = net.H
    Mt = (1j * (drive.w_in * np.eye(n) - H)).T
    sq_ex = np.sqrt(net.rates("kappa_ex"))
    sq_int = np.sqrt(net.rates("kappa_0") + net.rates("g"))
    force = sq_ex * drive.a_in * dt
    out_mean = drive.a_in * dt

    rngs = [trajectory_rng(cfg.seed, t) for t in range(T)]
    # Re and Im of each complex increment have variance dt / 4
    sigma = math.sqrt(dt / sub / 4.0)
    prop = np.eye(n) + Mt * dt

    chunk = max(1, _CHUNK_ELEMENTS // (T * n * 4 * sub) // rs) * rs
    a = np.zeros((T, n), dtype=complex)
    records = np.empty((T, n_rec, n), dtype=complex)
    occ = np.zeros((T, n))
    buf = np.empty((chunk, T, n), dtype=complex)
    raw = np.empty((T, chunk * sub, 4 * n))

    step = 0
    while step < total:
        S = min(chunk, total - step)
        if noise:
            for t, g in enumerate(rngs):
                g.standard_normal(out=raw[t, : S * sub])
            inc = raw[:, : S * sub].reshape(T, S, sub, 4 * n).sum(axis=2).transpose(1, 0, 2) * sigma
            d_in = inc[..., :n] + 1j * inc[..., n : 2 * n]
            d_int = inc[..., 2 * n : 3 * n] + 1j * inc[..., 3 * n :]
            kick = force + sq_ex * d_in + sq_int * d_int
        else:
            d_in = np.zeros((S, T, n), dtype=complex)
            kick = np.broadcast_to(force, (S, T, n))
        for s in range(S):
            buf[s] = a
            a = a @ prop + kick[s]
        # a_out dt = a_in dt + dW_in - sqrt(kappa_ex) a dt, with a at step start
        out = out_mean + d_in - sq_ex * buf[:S] * dt
        lo = max(burn - step, 0)
        if lo < S:
            post = out[lo:]
            first = (step + lo - burn) // rs
            # contiguous last-axis reduction: summation order independent of n_traj
            blocks = np.ascontiguousarray(post.reshape(-1, rs, T, n).transpose(2, 0, 3, 1)).sum(axis=-1)
            records[:, first : first + blocks.shape[1], :] = blocks / (rs * dt)
            occ += np.sum(np.abs(buf[lo:S]) ** 2, axis=0)
        step += S

    return Ensemble(
        network=net,
        drive=drive,
        config=cfg,
        records=records,
        occupation=occ / (n_rec * rs),
        final_state=a,
        record_dt=rs * dt,
        noise=noise,
    )


@dataclass(frozen=True)
class HomodyneEstimate:
    mean: float
    variance: float
    n_samples: int
    stderr_of_variance: float


def window_means(ensemble: Ensemble, tau: float, port: int = 0) -> NDArray[np.complex128]:
    """Complex output means over non-overlapping windows of length ``tau``.

    Shape ``(n_traj, windows_per_traj)``.
    """
    if not 0 <= port < ensemble.network.n:
        raise ValidationError(f"port {port} out of range")
    span = ensemble.records.shape[1] * ensemble.record_dt
    if tau > span * (1 + 1e-12):
        raise ValidationError(f"insufficient trajectory length: tau={tau:.6g} > recorded span {span:.6g}")
    m = round(tau / ensemble.record_dt)
    if m < 1 or abs(m * ensemble.record_dt - tau) > 1e-9 * tau:
        raise ValidationError(
            f"tau={tau:.6g} is not a whole number of record blocks ({ensemble.record_dt:.6g})"
        )
    k = ensemble.records.shape[1] // m
    rec = ensemble.records[:, : k * m, port]
    return rec.reshape(rec.shape[0], k, m).mean(axis=2)


def _estimate(samples: NDArray[np.float64]) -> HomodyneEstimate:
    N = samples.size
    if N < 2:
        raise ValidationError("need at least two windows to estimate a variance")
    var = float(np.var(samples, ddof=1))
    return HomodyneEstimate(
        mean=float(np.mean(samples)),
        variance=var,
        n_samples=int(N),
        stderr_of_variance=var * math.sqrt(2.0 / (N - 1)),
    )


def homodyne_estimate(ensemble: Ensemble, phase: float, tau: float, port: int = 0) -> HomodyneEstimate:
    """Statistics of the time-averaged quadrature ``exp(i phase) a_out + c.c.``.

    Windows of length ``tau`` tile each trajectory after burn-in and are
    pooled over trajectories.
    """
    analytic._check_tau(ensemble.network, tau)
    w = window_means(ensemble, tau, port)
    q = 2.0 * (np.exp(1j * phase) * w).real
    return _estimate(q.ravel())


@dataclass(frozen=True)
class MCSNR:
    snr: float
    analytic_snr: float
    mean_shift: float
    pooled_std: float
    phase: float
    n_samples: int


def mc_snr(
    net: SensorNetwork,
    drive: DriveSpec,
    target,
    delta: float,
    cfg: SimConfig,
    tau: float,
    port: int = 0,
) -> MCSNR:
    """Empirical homodyne SNR for a perturbation ``delta`` of ``target``.

    Both ensembles share the same seed (common random numbers), so the mean
    shift is resolved far below the single-shot noise. The quadrature angle is
    chosen from the data: along the empirical complex mean shift.
    """
    margin = analytic._require_stable(net).decay_margin
    if abs(delta) > 0.01 * margin:
        raise ValidationError(f"|delta|={abs(delta):.3g} outside the linear regime (0.01*decay_margin={0.01 * margin:.3g})")
    base = simulate(net, drive, cfg)
    shifted = simulate(net, drive, cfg, perturbation=(target, delta))
    w0 = window_means(base, tau, port)
    w1 = window_means(shifted, tau, port)
    shift = np.mean(w1) - np.mean(w0)
    phase = -float(np.angle(shift)) if shift != 0 else 0.0
    q0 = (2.0 * (np.exp(1j * phase) * w0).real).ravel()
    q1 = (2.0 * (np.exp(1j * phase) * w1).real).ravel()
    pooled = math.sqrt(0.5 * (np.var(q0, ddof=1) + np.var(q1, ddof=1)))
    dq = float(np.mean(q1) - np.mean(q0))
    return MCSNR(
        snr=abs(dq) / pooled,
        analytic_snr=analytic.homodyne_snr(net, drive, port, target, tau, delta),
        mean_shift=dq,
        pooled_std=pooled,
        phase=phase,
        n_samples=int(q0.size),
    )


# --------------------------------------------------------- phase diffusion


@dataclass(frozen=True)
class PhaseDiffusionResult:
    var_phase: float
    freq_std: float
    delta_w: float


def schawlow_townes_linewidth(kappa: float, n: float) -> float:
    """Phase-diffusion linewidth ``kappa / (2 n)`` of a self-sustained mode."""
    if not (kappa > 0 and n > 0):
        raise ValidationError("kappa and n must be positive")
    return kappa / (2.0 * n)


def above_threshold_frequency_error(kappa: float, n: float, tau: float) -> float:
    """Std of the frequency read from the total phase over ``tau``: sqrt(dw / tau)."""
    if not tau > 0:
        raise ValidationError("tau must be positive")
    return math.sqrt(schawlow_townes_linewidth(kappa, n) / tau)


def phase_diffusion(
    kappa: float,
    kappa_ex: float,
    n: float,
    tau: float,
    trials: int,
    seed: int = 0,
    steps: int = 256,
) -> PhaseDiffusionResult:
    """Sample ``trials`` phase random walks over ``tau`` and estimate frequency noise.

    The phase is a driftless Wiener process with diffusion constant
    ``dw = kappa / (2 n)``, built from ``steps`` Gaussian increments. The
    frequency estimate of a trial is ``phi(tau) / tau``.
    """
    for name, v in (("kappa", kappa), ("n", n), ("tau", tau)):
        if not (v > 0 and math.isfinite(v)):
            raise ValidationError(f"{name} must be positive and finite, got {v!r}")
    if not 0 <= kappa_ex <= kappa:
        raise ValidationError(f"need 0 <= kappa_ex <= kappa, got kappa_ex={kappa_ex!r}, kappa={kappa!r}")
    if int(trials) != trials or trials < 2:
        raise ValidationError(f"trials must be an integer >= 2, got {trials!r}")
    dw = schawlow_townes_linewidth(kappa, n)
    rng = np.random.default_rng(seed)
    inc = rng.standard_normal((int(trials), int(steps))) * math.sqrt(dw * tau / steps)
    phi = inc.sum(axis=1)
    return PhaseDiffusionResult(
        var_phase=float(np.var(phi, ddof=1)),
        freq_std=float(np.std(phi / tau, ddof=1)),
        delta_w=dw,
    )
