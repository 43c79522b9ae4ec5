"""jcbath: driven qubit-resonator-bath dynamics at desk scale.

Two engines for the same question ("how hot does the qubit get?"):
a full Lindblad integration of the driven qubit-resonator model, and a
closed-form three-state channel reduction. A small CLI wraps both in
reproducible scenario presets with CSV/JSON/SVG output.
"""

from .report import VERSION as __version__  # noqa: N811

from .channels import (ChannelBasis, ChannelEvolution, channel_p_e_series,
                       channel_rates, channel_states, evolve_channel,
                       steady_state_channel)
from .config import ConfigError, ScenarioConfig, SweepSpec, parse_config
from .fitting import FitResult, calibrate_eta, fit_trace, trace_model
from .lindblad import (EngineError, EvolutionResult, build_liouvillian,
                       evolve_adaptive, expm, ground_density, propagate_expm,
                       steady_state)
from .operators import Operator, annihilation, dagger, herm_eig, kron, pauli
from .scenarios import run_scenario
from .system import (BathSpectrum, SystemParams, bose_occupation,
                     build_h_bare_qubit, build_h_rotating, collapse_set_bare,
                     collapse_set_full, default_params, ghz, mhz)
from .thermal import (ConvergenceError, EffectiveTemperature, StageSplit,
                      detect_stages, effective_temperature,
                      population_from_temperature)

__all__ = [
    "__version__",
    "BathSpectrum", "ChannelBasis", "ChannelEvolution", "ConfigError",
    "ConvergenceError", "EffectiveTemperature", "EngineError",
    "EvolutionResult", "FitResult", "Operator", "ScenarioConfig",
    "StageSplit", "SweepSpec", "SystemParams",
    "annihilation", "bose_occupation", "build_h_bare_qubit",
    "build_h_rotating", "build_liouvillian", "calibrate_eta",
    "channel_p_e_series", "channel_rates", "channel_states",
    "collapse_set_bare", "collapse_set_full", "dagger", "default_params",
    "detect_stages", "effective_temperature", "evolve_adaptive",
    "evolve_channel", "expm", "fit_trace", "ghz", "ground_density",
    "herm_eig", "kron", "mhz", "parse_config", "pauli",
    "population_from_temperature", "propagate_expm", "run_scenario",
    "steady_state", "steady_state_channel", "trace_model",
]
