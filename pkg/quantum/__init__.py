from .simulator import Circuit, Gate, StateVector  # noqa: F401
