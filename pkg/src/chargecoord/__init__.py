"""Multi-robot charging coordination under drag and wind.

Barrier-constraint safety filtering, single-station mutual exclusion,
closed-form capacity planning, and a deterministic fixed-step simulator.
"""

from .capacity import (
    CapacityInputs,
    CapacityReport,
    check_feasibility,
    delta_t_critical,
    k_c_heuristic,
    k_ch_min,
)
from .params import (
    BroadcastMsg,
    CbfGains,
    ConstraintRow,
    EnergyParams,
    Mode,
    RobotState,
    VelocityHistory,
    WorldParams,
    validate_params,
)
from .qp import QpProblem, QpSolution, solve
from .sim import ScenarioConfig, SimResult, run

__version__ = "0.1.0"

__all__ = [
    "BroadcastMsg",
    "CapacityInputs",
    "CapacityReport",
    "CbfGains",
    "ConstraintRow",
    "EnergyParams",
    "Mode",
    "QpProblem",
    "QpSolution",
    "RobotState",
    "ScenarioConfig",
    "SimResult",
    "VelocityHistory",
    "WorldParams",
    "check_feasibility",
    "delta_t_critical",
    "k_c_heuristic",
    "k_ch_min",
    "run",
    "solve",
    "validate_params",
    "__version__",
]
