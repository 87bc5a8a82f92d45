"""Compressive-sensing channel recovery for a sub-Nyquist MIMO radar receiver."""

from .analysis import RicEstimate, estimate_ric, ric_concentration_probe
from .channel import (
    PathComponent,
    Scene,
    SparseChannel,
    add_awgn,
    random_scene,
    sample_channel,
    toa_from_support,
)
from .errors import CsRadarError
from .mimo import MimoConfig, Mode, detect_taps, recover_mimo, simulate_receive
from .nbi import (
    NbiSignal,
    TwoStageResult,
    cancel_nbi,
    joint_recover,
    synthesize_nbi,
    two_stage_recover,
)
from .signal import (
    MeasurementOperator,
    OmegaMode,
    SamplingPattern,
    WaveformFrame,
    compose_operator,
    generate_rademacher,
)
from .solver import BpdnProblem, BpdnSolution, epsilon_from_noise, solve_bpdn

__version__ = "0.1.0"
