"""Cavity temperature control by correlated atom pairs and phaseonium beams."""

from .cavity import (
    CavityParams,
    SteadyReport,
    below_threshold,
    carnot_bound,
    coefficients,
    evolve_master,
    extract_temperature,
    heating_condition,
    numeric_steady_state,
    photon_number_trajectory,
    steady_temperature,
    summary_of,
)
from .decoherence import ChannelKind, TransferChannel, evolve_gadc, evolve_pdc, lindblad_dimer_oracle
from .dimer import (
    DimerState,
    DimerSummary,
    is_entangled,
    make_dimer,
    max_coherence,
    maximally_heating_state,
    psi_minus,
    psi_plus,
    rho_mix,
    summarize,
)
from .errors import (
    AboveThresholdError,
    InjectionBoundError,
    IntegrationError,
    InvalidStateError,
    ModelMismatchError,
    TruncationError,
)
from .phaseonium import (
    PhaseoniumParams,
    PhaseoniumState,
    inject_coherence,
    phaseonium_rates,
    phaseonium_steady,
    thermal_phaseonium,
)
from .tc_oracle import OracleConfig, build_propagator, extract_rates, injection_superoperator

__version__ = "0.1.0"
