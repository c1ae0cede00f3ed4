"""Linear bosonic sensor networks.

A network is a set of damped (and possibly amplified) harmonic modes coupled
through a complex matrix ``mu``. Everything downstream works with the
effective non-Hermitian Hamiltonian

    H_ii = w_i - i (kappa_i - g_i) / 2,   H_ij = mu_ij  (i != j)

with ``kappa_i = kappa_ex_i + kappa_0_i``. Units: hbar = 1, every rate and
frequency in one user-chosen unit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import EigenSolverError, ValidationError

RECIPROCITY_RTOL = 1e-12
STABILITY_RTOL = 1e-9


@dataclass(frozen=True)
class ModeParams:
    """Physical rates of one mode.

    Attributes
    ----------
    w0 : resonance angular frequency.
    kappa_ex : coupling (port) loss rate.
    kappa_0 : intrinsic loss rate.
    g : linear gain rate.
    """

    w0: float
    kappa_ex: float
    kappa_0: float
    g: float = 0.0

    def __post_init__(self):
        for name in ("w0", "kappa_ex", "kappa_0", "g"):
            value = getattr(self, name)
            if not isinstance(value, (int, float, np.floating, np.integer)) or isinstance(value, bool):
                raise ValidationError(f"{name} must be a real number, got {value!r}")
            if not math.isfinite(value):
                raise ValidationError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        for name in ("kappa_ex", "kappa_0", "g"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be >= 0, got {getattr(self, name)!r}")

    @property
    def kappa(self) -> float:
        """Total loss rate kappa_ex + kappa_0."""
        return self.kappa_ex + self.kappa_0

    @property
    def net_loss(self) -> float:
        return self.kappa - self.g


def _frozen(a: NDArray) -> NDArray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SensorNetwork:
    """Modes plus their complex coupling matrix.

    Build instances with :func:`build_network`; the constructor assumes its
    inputs are already validated.
    """

    modes: tuple[ModeParams, ...]
    mu: NDArray[np.complex128]
    reciprocal: bool = field(default=False)

    @property
    def n(self) -> int:
        return len(self.modes)

    def rates(self, name: str) -> NDArray[np.float64]:
        """Vector of one per-mode attribute (``"w0"``, ``"kappa_ex"``, ...)."""
        return np.array([getattr(m, name) for m in self.modes], dtype=float)

    @property
    def H(self) -> NDArray[np.complex128]:
        return effective_hamiltonian(self)

    def __eq__(self, other):
        if not isinstance(other, SensorNetwork):
            return NotImplemented
        return self.modes == other.modes and np.array_equal(self.mu, other.mu)

    def __hash__(self):
        return hash((self.modes, self.mu.tobytes()))


@dataclass(frozen=True, eq=False)
class DriveSpec:
    """Coherent drive: carrier frequency and per-port mean input amplitudes."""

    w_in: float
    a_in: NDArray[np.complex128]

    def __init__(self, w_in: float, a_in: ArrayLike):
        if not math.isfinite(float(w_in)):
            raise ValidationError(f"w_in must be finite, got {w_in!r}")
        arr = np.atleast_1d(np.asarray(a_in, dtype=complex))
        if arr.ndim != 1 or arr.size == 0:
            raise ValidationError("a_in must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("a_in entries must be finite")
        if not np.any(arr != 0):
            raise ValidationError("drive needs at least one nonzero input amplitude")
        object.__setattr__(self, "w_in", float(w_in))
        object.__setattr__(self, "a_in", _frozen(arr))

    def __eq__(self, other):
        if not isinstance(other, DriveSpec):
            return NotImplemented
        return self.w_in == other.w_in and np.array_equal(self.a_in, other.a_in)

    def __hash__(self):
        return hash((self.w_in, self.a_in.tobytes()))

    def scaled(self, factor: complex) -> "DriveSpec":
        return DriveSpec(self.w_in, self.a_in * factor)


@dataclass(frozen=True)
class StabilityDiagnosis:
    eigenvalues: NDArray[np.complex128]
    below_threshold: bool
    decay_margin: float
    tolerance: float


def build_network(modes: Sequence[ModeParams], mu: ArrayLike | None = None) -> SensorNetwork:
    """Validate modes and couplings and return an immutable network.

    The diagonal of ``mu`` is zeroed: resonance shifts belong in ``w0``.
    ``mu=None`` means uncoupled modes.
    """
    modes = tuple(modes)
    if len(modes) == 0:
        raise ValidationError("a network needs at least one mode")
    for m in modes:
        if not isinstance(m, ModeParams):
            raise ValidationError(f"expected ModeParams, got {type(m).__name__}")
    n = len(modes)
    if mu is None:
        mu_arr = np.zeros((n, n), dtype=complex)
    else:
        mu_arr = np.array(mu, dtype=complex)
    if mu_arr.shape != (n, n):
        raise ValidationError(f"mu must be {n}x{n} for {n} modes, got shape {mu_arr.shape}")
    if not np.all(np.isfinite(mu_arr)):
        raise ValidationError("mu entries must be finite")
    np.fill_diagonal(mu_arr, 0.0)
    scale = np.max(np.abs(mu_arr)) if mu_arr.size else 0.0
    asym = np.max(np.abs(mu_arr - mu_arr.conj().T)) if mu_arr.size else 0.0
    reciprocal = bool(asym <= RECIPROCITY_RTOL * scale)
    return SensorNetwork(modes=modes, mu=_frozen(mu_arr), reciprocal=reciprocal)


def effective_hamiltonian(net: SensorNetwork) -> NDArray[np.complex128]:
    H = np.array(net.mu, dtype=complex)
    diag = net.rates("w0") - 0.5j * (net.rates("kappa_ex") + net.rates("kappa_0") - net.rates("g"))
    np.fill_diagonal(H, diag)
    return H


def chi(net: SensorNetwork, w: float) -> NDArray[np.complex128]:
    """Susceptibility matrix ``w I - H``."""
    return w * np.eye(net.n) - effective_hamiltonian(net)


def stability_tolerance(net: SensorNetwork) -> float:
    row = np.abs(net.mu).sum(axis=1)
    scale = np.max(net.rates("kappa_ex") + net.rates("kappa_0") + net.rates("g") + row)
    return STABILITY_RTOL * float(scale)


def stability(net: SensorNetwork) -> StabilityDiagnosis:
    """Eigenvalues of the drift matrix ``-iH`` and the below-threshold flag.

    ``decay_margin`` is the slowest decay rate, ``min(-Re(lambda))``; it is
    negative when some mode grows.
    """
    try:
        lam = np.linalg.eigvals(-1j * effective_hamiltonian(net))
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(f"eigenvalue solver failed: {exc}") from exc
    if not np.all(np.isfinite(lam)):
        raise EigenSolverError("eigenvalue solver returned non-finite values")
    margin = float(np.min(-lam.real))
    tol = stability_tolerance(net)
    return StabilityDiagnosis(
        eigenvalues=_frozen(lam),
        below_threshold=bool(margin > tol),
        decay_margin=margin,
        tolerance=tol,
    )


def with_mode(net: SensorNetwork, k: int, **changes) -> SensorNetwork:
    """Copy of ``net`` with fields of mode ``k`` replaced."""
    modes = list(net.modes)
    modes[k] = replace(modes[k], **changes)
    return build_network(modes, net.mu)


def with_couplings(net: SensorNetwork, mu: ArrayLike) -> SensorNetwork:
    return build_network(net.modes, mu)


def permuted(net: SensorNetwork, perm: Sequence[int]) -> SensorNetwork:
    """Relabel modes: new mode ``i`` is old mode ``perm[i]``."""
    perm = np.asarray(perm, dtype=int)
    if sorted(perm.tolist()) != list(range(net.n)):
        raise ValidationError(f"{perm.tolist()} is not a permutation of range({net.n})")
    modes = [net.modes[p] for p in perm]
    return build_network(modes, net.mu[np.ix_(perm, perm)])


def perturbed(net: SensorNetwork, target, delta: float) -> SensorNetwork:
    """Shift ``w_k`` by ``delta`` (``target=k``) or add ``delta`` to both
    ``mu[i, j]`` and ``mu[j, i]`` (``target=(i, j)``)."""
    if isinstance(target, (int, np.integer)):
        k = int(target)
        return with_mode(net, k, w0=net.modes[k].w0 + delta)
    i, j = target
    if i == j:
        raise ValidationError(f"coupling target needs two distinct modes, got ({i}, {j})")
    mu = np.array(net.mu)
    mu[i, j] += delta
    mu[j, i] += delta
    return build_network(net.modes, mu)
