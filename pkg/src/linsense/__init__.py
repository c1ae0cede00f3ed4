"""Sensing limits of linear bosonic sensor networks.

Closed-form responses, output noise spectra and homodyne sensing limits for
n-mode coupled-cavity sensors, with a Langevin Monte-Carlo cross-check and a
phase-diffusion simulator for self-sustained oscillators.
"""

from .analytic import (
    NoisePair,
    ResponseCoefficient,
    SensingReport,
    SteadyState,
    commutator_gap,
    coupling_limit_bound,
    coupling_response,
    frequency_response,
    fundamental_bound,
    homodyne_snr,
    optimize_coupling,
    output_noise_pair,
    sensing_limit,
    steady_state,
    symmetric_coupling_bound,
)
from .errors import (
    AveragingTimeError,
    InsensitivePortError,
    LinsenseError,
    PhysicsError,
    SingularResponseError,
    ThresholdError,
    ValidationError,
)
from .model import (
    DriveSpec,
    ModeParams,
    SensorNetwork,
    StabilityDiagnosis,
    build_network,
    chi,
    effective_hamiltonian,
    stability,
)
from .scenarios import Preset, preset, sweep
from .stochastic import HomodyneEstimate, PhaseDiffusionResult, SimConfig, homodyne_estimate, mc_snr, phase_diffusion, simulate

__version__ = "0.1.0"
