class SimulationError(RuntimeError):
    """A Monte Carlo replication exceeded its safety cap (near-critical parameters)."""


class ParameterCoincidenceError(ValueError):
    """An exponent lands numerically on the resonance without being exactly resonant.

    Perturb ``(a, b)`` slightly and retry.
    """
