"""Closed-form steady states, responses, noise spectra and sensing limits.

Conventions: the mean field oscillates as ``a(t) = a_tilde exp(-i w_in t)``
and satisfies ``chi(w_in) a_tilde = i sqrt(K_ex) a_in``; outputs follow
``a_out = a_in - sqrt(kappa_ex) a``. All noise inputs are vacuum shot noise
with unit spectral density.

Perturbation responses come from cofactors of ``chi(w_in)``: for a shift of
``w_k`` the output at port ``i`` moves by ``-sqrt(kappa_ex_i) A_ki a_k / Det``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from numpy.typing import NDArray
from scipy import linalg

from .errors import (
    AveragingTimeError,
    InsensitivePortError,
    SingularResponseError,
    ThresholdError,
    ValidationError,
)
from .model import DriveSpec, SensorNetwork, chi, stability, with_mode

SINGULARITY_RTOL = 1e-12
INSENSITIVE_ATOL = 1e-30
AVERAGING_FACTOR = 100.0

Target = Union[int, tuple[int, int]]


@dataclass(frozen=True)
class Factorization:
    """LU factorization of a square complex matrix plus derived quantities."""

    lu: tuple
    det: complex
    log_abs_det: float
    log_hadamard: float

    def solve(self, b):
        return linalg.lu_solve(self.lu, b)

    def inverse(self) -> NDArray[np.complex128]:
        return self.solve(np.eye(self.lu[0].shape[0], dtype=complex))

    def cofactors(self) -> NDArray[np.complex128]:
        """Cofactor matrix, ``A[i, j] = Det * inv[j, i]``."""
        return self.det * self.inverse().T

    @property
    def relative_det(self) -> float:
        """|Det| divided by the Hadamard bound (product of row norms)."""
        return math.exp(self.log_abs_det - self.log_hadamard)


def factorize(m: NDArray) -> Factorization:
    m = np.asarray(m, dtype=complex)
    lu, piv = linalg.lu_factor(m, check_finite=True)
    d = np.diag(lu)
    swaps = np.count_nonzero(piv != np.arange(piv.size))
    with np.errstate(divide="ignore"):
        log_abs = float(np.sum(np.log(np.abs(d))))
        log_had = float(np.sum(np.log(np.linalg.norm(m, axis=1))))
    det = complex((-1) ** swaps * np.prod(d))
    return Factorization(lu=(lu, piv), det=det, log_abs_det=log_abs, log_hadamard=log_had)


def cofactor_matrix(m: NDArray) -> NDArray[np.complex128]:
    return factorize(m).cofactors()


def _require_stable(net: SensorNetwork):
    diag = stability(net)
    if not diag.below_threshold:
        raise ThresholdError(
            f"network is not below threshold (decay_margin={diag.decay_margin:.6g}, "
            f"tolerance={diag.tolerance:.3g})"
        )
    return diag


def _factor_chi(net: SensorNetwork, w: float) -> Factorization:
    fac = factorize(chi(net, w))
    if not (fac.log_abs_det - fac.log_hadamard > math.log(SINGULARITY_RTOL)):
        raise SingularResponseError(
            f"near-singular response: |Det chi({w:.6g})| is {fac.relative_det:.3g} of its Hadamard bound"
        )
    return fac


def _check_port(net: SensorNetwork, port: int) -> int:
    if not isinstance(port, (int, np.integer)) or not 0 <= port < net.n:
        raise ValidationError(f"port {port!r} out of range for {net.n} modes")
    return int(port)


def _check_drive(net: SensorNetwork, drive: DriveSpec):
    if drive.a_in.shape != (net.n,):
        raise ValidationError(f"drive has {drive.a_in.size} ports, network has {net.n} modes")


# ---------------------------------------------------------------- steady state


@dataclass(frozen=True)
class SteadyState:
    a_tilde: NDArray[np.complex128]
    n_photons: NDArray[np.float64]
    a_out_tilde: NDArray[np.complex128]
    det: complex


def _solve_steady(net: SensorNetwork, drive: DriveSpec) -> tuple[SteadyState, Factorization]:
    _check_drive(net, drive)
    _require_stable(net)
    fac = _factor_chi(net, drive.w_in)
    sqrt_ex = np.sqrt(net.rates("kappa_ex"))
    a = fac.solve(1j * sqrt_ex * drive.a_in)
    ss = SteadyState(
        a_tilde=a,
        n_photons=np.abs(a) ** 2,
        a_out_tilde=drive.a_in - sqrt_ex * a,
        det=fac.det,
    )
    return ss, fac


def steady_state(net: SensorNetwork, drive: DriveSpec) -> SteadyState:
    """Mean intracavity and output amplitudes under a coherent drive."""
    return _solve_steady(net, drive)[0]


# ------------------------------------------------------------------- responses


@dataclass(frozen=True)
class ResponseCoefficient:
    """d a_out / d theta at every port, for one perturbation parameter."""

    per_port: NDArray[np.complex128]
    target: Target


def _normalize_target(net: SensorNetwork, target) -> Target:
    if isinstance(target, (int, np.integer)):
        if not 0 <= target < net.n:
            raise ValidationError(f"target mode {target} out of range for {net.n} modes")
        return int(target)
    try:
        i, j = (int(t) for t in target)
    except (TypeError, ValueError):
        raise ValidationError(f"target must be a mode index or a pair of indices, got {target!r}")
    if i == j:
        raise ValidationError(f"coupling target needs two distinct modes, got ({i}, {j})")
    if not (0 <= i < net.n and 0 <= j < net.n):
        raise ValidationError(f"coupling pair ({i}, {j}) out of range for {net.n} modes")
    return (i, j)


def frequency_response(net: SensorNetwork, drive: DriveSpec, k: int) -> ResponseCoefficient:
    """Output response to a shift of the resonance of mode ``k``."""
    k = _normalize_target(net, k)
    if not isinstance(k, int):
        raise ValidationError("frequency_response takes a single mode index")
    ss, fac = _solve_steady(net, drive)
    A = fac.cofactors()
    sqrt_ex = np.sqrt(net.rates("kappa_ex"))
    per_port = -sqrt_ex * A[k, :] * ss.a_tilde[k] / fac.det
    return ResponseCoefficient(per_port=per_port, target=k)


def coupling_response(net: SensorNetwork, drive: DriveSpec, pair: tuple[int, int]) -> ResponseCoefficient:
    """Output response to the same shift added to ``mu[i, j]`` and ``mu[j, i]``.

    chi loses ``dmu`` at (i, j) and (j, i), so ``chi da = dmu (a_j e_i + a_i e_j)``.
    """
    if net.n < 2:
        raise ValidationError("coupling perturbations need at least two modes")
    i, j = _normalize_target(net, tuple(pair))
    ss, fac = _solve_steady(net, drive)
    A = fac.cofactors()
    sqrt_ex = np.sqrt(net.rates("kappa_ex"))
    a = ss.a_tilde
    per_port = -sqrt_ex * (A[i, :] * a[j] + A[j, :] * a[i]) / fac.det
    return ResponseCoefficient(per_port=per_port, target=(i, j))


def response(net: SensorNetwork, drive: DriveSpec, target: Target) -> ResponseCoefficient:
    target = _normalize_target(net, target)
    if isinstance(target, int):
        return frequency_response(net, drive, target)
    return coupling_response(net, drive, target)


# ----------------------------------------------------------------------- noise


@dataclass(frozen=True)
class NoisePair:
    """Output noise spectral densities at one port and frequency.

    ``s_plus`` is S_{a_out a_out}(w), fed by input and intrinsic-loss channels;
    ``s_minus`` is S_{a_out^+ a_out^+}(-w), fed by gain channels.
    ``per_channel`` holds ``((kind, j), |transfer|^2)`` for every channel.
    """

    s_plus: float
    s_minus: float
    per_channel: tuple[tuple[tuple[str, int], float], ...]

    @property
    def total(self) -> float:
        return self.s_plus + self.s_minus


def transfer_row(net: SensorNetwork, port: int, w: float) -> dict[str, NDArray[np.complex128]]:
    """Complex transfer from every noise channel to the output at ``port``.

    Returns arrays keyed ``"input"``, ``"intrinsic"``, ``"gain"``, each indexed by
    the source mode ``j``.
    """
    port = _check_port(net, port)
    fac = _factor_chi(net, w)
    A = fac.cofactors()
    col = A[:, port] / fac.det  # A_ji / Det over source j
    s_port = math.sqrt(net.modes[port].kappa_ex)
    t_in = -1j * s_port * np.sqrt(net.rates("kappa_ex")) * col
    t_in[port] += 1.0
    return {
        "input": t_in,
        "intrinsic": -1j * s_port * np.sqrt(net.rates("kappa_0")) * col,
        "gain": -1j * s_port * np.sqrt(net.rates("g")) * col,
    }


def output_noise_pair(net: SensorNetwork, port: int, w: float) -> NoisePair:
    _require_stable(net)
    rows = transfer_row(net, port, w)
    per_channel = []
    for kind in ("input", "intrinsic", "gain"):
        for j, t in enumerate(rows[kind]):
            per_channel.append(((kind, j), float(abs(t) ** 2)))
    s_plus = math.fsum(v for (kind, _), v in per_channel if kind != "gain")
    s_minus = math.fsum(v for (kind, _), v in per_channel if kind == "gain")
    return NoisePair(s_plus=s_plus, s_minus=s_minus, per_channel=tuple(per_channel))


def commutator_gap(net: SensorNetwork, port: int, w: float) -> float:
    """``s_plus - s_minus - 1``: zero when the output commutator is canonical.

    Reported, not asserted; non-reciprocal networks generally give a nonzero gap.
    """
    pair = output_noise_pair(net, port, w)
    return pair.s_plus - pair.s_minus - 1.0


# ------------------------------------------------------------ SNR and limits


def min_averaging_time(net: SensorNetwork) -> float:
    """Shortest measurement time for which the white-noise variance holds."""
    return AVERAGING_FACTOR / _require_stable(net).decay_margin


def _check_tau(net: SensorNetwork, tau: float):
    if not (tau > 0 and math.isfinite(tau)):
        raise ValidationError(f"tau must be positive and finite, got {tau!r}")
    t_min = min_averaging_time(net)
    if tau < t_min:
        raise AveragingTimeError(
            f"averaging-time contract violated: tau={tau:.6g} < {t_min:.6g} (100/decay_margin)"
        )


def homodyne_snr(
    net: SensorNetwork,
    drive: DriveSpec,
    port: int,
    target: Target,
    tau: float,
    delta: float,
    phase: float | None = None,
) -> float:
    """Homodyne SNR for a perturbation of size ``delta`` (local-oscillator gain C = 1).

    With ``phase=None`` the quadrature angle is optimal, giving
    ``2 |dA_out| / sqrt((s_plus + s_minus) / tau)``; otherwise the signal is
    ``|exp(i phase) dA_out + c.c.|``.
    """
    port = _check_port(net, port)
    _check_tau(net, tau)
    z = response(net, drive, target).per_port[port] * delta
    noise = output_noise_pair(net, port, drive.w_in)
    std = math.sqrt(noise.total / tau)
    if phase is None:
        signal = 2.0 * abs(z)
    else:
        signal = abs(2.0 * (np.exp(1j * phase) * z).real)
    return signal / std


@dataclass(frozen=True)
class SensingReport:
    port: int
    target: Target
    tau: float
    response_mag: float
    noise_std: float
    snr_coeff: float
    limit: float
    bound: float
    margin: float
    n_photons: tuple[float, ...]


def fundamental_bound(kappa_0k: float, n_k: float, tau: float) -> float:
    """Floor on the frequency-shift sensing limit, sqrt(kappa_0) / (2 sqrt(n tau))."""
    for name, v in (("kappa_0k", kappa_0k), ("n_k", n_k), ("tau", tau)):
        if not (v > 0 and math.isfinite(v)):
            raise ValidationError(f"{name} must be positive and finite, got {v!r}")
    return math.sqrt(kappa_0k) / (2.0 * math.sqrt(n_k * tau))


def coupling_limit_bound(kappa_01: float, kappa_02: float, n_1: float, n_2: float, tau: float) -> float:
    """Floor on the sensing limit for a symmetric shift of mu_12 and mu_21.

    ``1 / ((2 sqrt(n_2 / kappa_01) + 2 sqrt(n_1 / kappa_02)) sqrt(tau))``.
    One photon number may be zero; both zero leaves nothing to sense.
    """
    for name, v in (("kappa_01", kappa_01), ("kappa_02", kappa_02), ("tau", tau)):
        if not (v > 0 and math.isfinite(v)):
            raise ValidationError(f"{name} must be positive and finite, got {v!r}")
    for name, v in (("n_1", n_1), ("n_2", n_2)):
        if not (v >= 0 and math.isfinite(v)):
            raise ValidationError(f"{name} must be non-negative and finite, got {v!r}")
    if n_1 == 0 and n_2 == 0:
        raise ValidationError("coupling bound needs n_1 > 0 or n_2 > 0")
    rate = 2.0 * math.sqrt(n_2 / kappa_01) + 2.0 * math.sqrt(n_1 / kappa_02)
    return 1.0 / (rate * math.sqrt(tau))


def symmetric_coupling_bound(kappa_0: float, n: float, tau: float) -> float:
    """``sqrt(kappa_0) / (4 sqrt(n tau))``: the coupling bound with equal modes."""
    return coupling_limit_bound(kappa_0, kappa_0, n, n, tau)


def sensing_limit(net: SensorNetwork, drive: DriveSpec, port: int, target: Target, tau: float) -> SensingReport:
    """Smallest perturbation resolvable at SNR = 1, with its fundamental bound."""
    port = _check_port(net, port)
    target = _normalize_target(net, target)
    _check_tau(net, tau)
    ss = steady_state(net, drive)
    resp = abs(response(net, drive, target).per_port[port])
    if resp < INSENSITIVE_ATOL:
        raise InsensitivePortError(f"insensitive port: |response| at port {port} is {resp:.3g}")
    noise = output_noise_pair(net, port, drive.w_in)
    noise_std = math.sqrt(noise.total / tau)
    limit = noise_std / (2.0 * resp)
    n = ss.n_photons
    if isinstance(target, int):
        bound = fundamental_bound(net.modes[target].kappa_0, float(n[target]), tau)
    else:
        i, j = target
        bound = coupling_limit_bound(net.modes[i].kappa_0, net.modes[j].kappa_0, float(n[i]), float(n[j]), tau)
    return SensingReport(
        port=port,
        target=target,
        tau=float(tau),
        response_mag=resp,
        noise_std=noise_std,
        snr_coeff=1.0 / limit,
        limit=limit,
        bound=bound,
        margin=limit - bound,
        n_photons=tuple(float(x) for x in n),
    )


def normalize_drive(net: SensorNetwork, drive: DriveSpec, mode: int, n_target: float) -> DriveSpec:
    """Rescale the drive so that mode ``mode`` holds ``n_target`` photons."""
    if not n_target > 0:
        raise ValidationError(f"n_target must be positive, got {n_target!r}")
    n_now = steady_state(net, drive).n_photons[mode]
    if n_now <= 0:
        raise InsensitivePortError(f"drive does not reach mode {mode}; cannot normalize photon number")
    return drive.scaled(math.sqrt(n_target / n_now))


def optimize_coupling(
    net: SensorNetwork,
    drive: DriveSpec,
    tau: float,
    grid: Sequence[float],
    k: int = 0,
    port: int | None = None,
    n_target: float | None = None,
) -> tuple[float, float]:
    """Grid search over the coupling loss of mode ``k`` for the lowest sensing limit.

    The drive is held fixed unless ``n_target`` is given, in which case it is
    rescaled at every grid point to keep ``n_target`` photons in mode ``k``.
    Returns ``(kappa_ex_best, limit_best)``.
    """
    grid = list(grid)
    if not grid:
        raise ValidationError("optimize_coupling needs a non-empty grid")
    port = k if port is None else port
    best = None
    for kex in grid:
        if not kex > 0:
            raise ValidationError(f"grid values must be positive, got {kex!r}")
        trial = with_mode(net, k, kappa_ex=float(kex))
        d = drive if n_target is None else normalize_drive(trial, drive, k, n_target)
        rep = sensing_limit(trial, d, port, k, tau)
        if best is None or rep.limit < best[1]:
            best = (float(kex), rep.limit)
    return best
