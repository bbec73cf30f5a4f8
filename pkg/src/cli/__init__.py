"""
Qubit-Cavity CLI Module

Contains the scenario-driven front end:
- Scenario: Schema, validation and loading of scenario files
- Observables: Registry of CSV column groups
- Runner: eigen / simulate / sweep orchestration
- Emit: Deterministic CSV and JSON writers
"""

from .scenario import (
    Scenario,
    TimeGrid,
    PropagatorSpec,
    validate_scenario,
    is_valid_scenario,
    load_scenario,
    list_scenarios,
    set_parameter,
    SCENARIO_DIR
)

from .observables import (
    Observation,
    Observable,
    ObservableRegistry,
    registry
)

from .runner import (
    SimulationResult,
    run_eigen,
    run_simulate,
    run_sweep,
    write_simulation
)

from .emit import (
    format_value,
    write_csv,
    write_json
)

from .main import main

__all__ = [
    # Scenario
    "Scenario",
    "TimeGrid",
    "PropagatorSpec",
    "validate_scenario",
    "is_valid_scenario",
    "load_scenario",
    "list_scenarios",
    "set_parameter",
    "SCENARIO_DIR",

    # Observables
    "Observation",
    "Observable",
    "ObservableRegistry",
    "registry",

    # Runner
    "SimulationResult",
    "run_eigen",
    "run_simulate",
    "run_sweep",
    "write_simulation",

    # Emit
    "format_value",
    "write_csv",
    "write_json",

    # Entry point
    "main",
]
