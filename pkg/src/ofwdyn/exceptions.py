"""Exception types shared across the library."""


class ContractError(ValueError):
    """A caller violated a documented precondition or invariant."""


class InvalidInputError(ValueError):
    """An input contains non-finite or otherwise malformed entries."""


class ConfigError(ValueError):
    """An experiment configuration is malformed or inconsistent."""


class ConvergenceError(RuntimeError):
    """An iterative oracle failed to reach its certificate within its cap."""
