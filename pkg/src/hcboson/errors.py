"""Exception types shared by the engines and the scenario runner."""


class HcbError(Exception):
    """Base class for all package errors."""


class CapacityError(HcbError):
    """A Fock sector is too large for the exact engine."""

    def __init__(self, L, N, dim, cap):
        self.L, self.N, self.dim, self.cap = L, N, dim, cap
        super().__init__(f"sector L={L}, N={N} has dimension {dim} > cap {cap}")


class EngineDomainError(HcbError):
    """An engine was asked to handle a model outside its validity domain."""


class IntegrityError(HcbError):
    """A conserved quantity or physical bound was violated beyond tolerance."""


class ConvergenceError(HcbError):
    """An iterative solver stopped without meeting its tolerance."""

    def __init__(self, message, history=None):
        self.history = list(history) if history is not None else []
        super().__init__(message)


class QuenchError(HcbError):
    """The pair-creation quench annihilated the state."""


class ConfigError(HcbError):
    """A scenario configuration violates one of its invariants."""
