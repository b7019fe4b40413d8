"""Secure key rates of BB84 and SARG QKD with weak-coherent, heralded
single-photon and heralded pair-coherent sources, with decoy-state
estimators for the pair-coherent case."""

__version__ = "0.1.0"

from .channel import (
    ChannelParams,
    GainPair,
    Protocol,
    gain_closed_form_hpcs,
    gain_series,
    transmittance,
    yield_error_bb84,
    yield_error_sarg,
)
from .decoy import DecoyBounds, DecoyProtocolParams, ObservedStats, estimate_bounds, soundness_oracle
from .errors import (
    CannotBoundError,
    ConfigurationError,
    DomainError,
    NotFoundError,
    QKDError,
    TruncationError,
    UnsupportedFamilyError,
)
from .experiment import RatePoint, SweepSpec, emit_csv, find_crossover, find_threshold, gain_report, run_sweep
from .key_rate import (
    IDENTITY_MAPPINGS,
    RateInputs,
    RateModel,
    SargMappings,
    SearchConfig,
    ideal_scenario_inputs,
    optimize_mu,
    rate_bb84,
    rate_sarg,
)
from .numerics import SeriesConfig, bessel_i0, binary_entropy, weighted_series_sum
from .sources import SourceFamily, SourceModel, TriggerParams, heralded_pn, pcs_pn, wcp_pn
