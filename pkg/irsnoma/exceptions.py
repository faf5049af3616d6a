class SimulationError(ValueError):
    code = 'simulation-error'


class InvalidParameter(SimulationError):
    code = 'invalid-parameter'


class LengthMismatch(SimulationError):
    code = 'length-mismatch'


class UnsupportedParameters(SimulationError):
    """Raised by closed-form operations outside the range their asymptotics hold for."""
    code = 'unsupported-parameters'


class InfeasibleAllocation(SimulationError):
    code = 'infeasible-allocation'


class InsufficientData(SimulationError):
    code = 'insufficient-data'


class ConfigError(SimulationError):
    code = 'config-error'
