"""Exception types shared across the package."""


class ContractViolation(ValueError):
    """Arguments have inconsistent shapes or violate a precondition."""


class InputError(ValueError):
    """Input values are unusable (empty, non-finite, out of range)."""


class NumericError(ArithmeticError):
    """A computation produced non-finite values."""


class ConfigError(ValueError):
    """A run or task configuration is invalid."""


class FormatError(ValueError):
    """A checkpoint or data file is malformed or of an unknown version."""


class ResourceError(RuntimeError):
    """A request exceeds a documented resource bound."""
