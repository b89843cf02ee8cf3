"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Malformed or inconsistent input (bad dimensions, invalid probabilities)."""


class InfeasibleModel(Exception):
    """The zone cannot be made stable (e.g. demand exceeds vehicle in-flow)."""


class SolverError(RuntimeError):
    """The simplex solver failed to terminate or lost numerical consistency."""


class VerificationError(AssertionError):
    """A duality or optimality cross-check disagreed beyond tolerance."""


class SimulationError(RuntimeError):
    """Raised on misuse of simulation results or broken invariants."""
