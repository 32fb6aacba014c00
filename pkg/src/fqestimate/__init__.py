"""Resource estimates for first-quantized plane-wave quantum chemistry.

Two phase-estimation algorithms are costed in Toffoli gates and logical
qubits: a qubitized walk and an interaction-picture Dyson-series simulation.
"""

from .errors import EstimationError, Infeasible, InvalidInput, Unsupported
from .scenario import NuclearSpecies, System, derive, from_delta, from_rs, get_preset, presets

__all__ = ["EstimationError", "Infeasible", "InvalidInput", "Unsupported", "NuclearSpecies",
           "System", "derive", "from_delta", "from_rs", "get_preset", "presets"]
__version__ = "0.1.0"
