"""Channel estimation and training-pattern design for practical IRS-aided OFDM links."""

__version__ = "0.1.0"

from .channel import (
    ChannelRealization,
    LinkGeometry,
    dbm_to_watt,
    mean_channel_energy,
    path_gain,
    realize_channels,
    sample_taps,
    taps_to_cfr,
)
from .config import ExperimentConfig, load_config, profile_config
from .design import (
    DesignConfig,
    DesignResult,
    ao_design,
    baseline_design,
    check_feasibility,
    design_objective,
    dft_hadamard_init,
    high_res_design,
    neighbor_set,
)
from .estimation import (
    NoiseModel,
    PilotBlock,
    empirical_nmse,
    estimate_channel,
    generate_pilots,
    ls_solve,
    per_slot_estimate,
    run_estimate,
    run_mismatched_estimate,
    simulate_reception,
    theoretical_nmse,
)
from .exceptions import (
    ConfigError,
    DesignInfeasibleError,
    EstimationInfeasibleError,
    ModelValidityError,
)
from .reflection import (
    DEFAULT_PARAMS,
    CircuitParams,
    ExpandedPattern,
    OfdmGrid,
    PatternMatrix,
    PhaseCodebook,
    amplitude_response,
    build_codebook,
    expand_pattern,
    phase_response,
    subcarrier_frequency,
    validate_params,
)
from .experiments import (
    ExperimentReport,
    design_pattern,
    emit_report,
    run_convergence_trace,
    run_power_sweep,
    run_resolution_sweep,
)
