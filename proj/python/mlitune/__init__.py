"""Firing-angle tuning for cascaded H-bridge multilevel inverters."""

from ._core import (
    ArgumentError,
    ConfigError,
    FiringAngles,
    Fitness,
    HybridOptimizer,
    IdealGrid,
    InverterConfig,
    ObjectiveConfig,
    OpenCircuit,
    ProtocolError,
    ResistiveLoad,
    Scenario,
    ScenarioError,
    SearchExhausted,
    SingularCircuitError,
    UndefinedThdError,
    analytic_spectrum,
    dft_spectrum,
    emit_report,
    evaluate,
    grid_search,
    optimize_static,
    parse_scenario,
    parse_scenario_text,
    rms,
    run_scenario,
    scenario_to_json,
    simulate_period,
    synth_staircase,
    thd,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
