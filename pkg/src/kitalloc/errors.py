"""Exception types raised across the package."""


class SchemaError(ValueError):
    """A data file does not have the expected columns or rows."""


class ValidationError(ValueError):
    """Input values violate a documented constraint."""


class ContractViolation(RuntimeError):
    """A caller broke a usage contract (e.g. labelling an untested person)."""


class ConfigError(ValueError):
    """Invalid simulation configuration.

    The first argument is the dotted path of the offending key.
    """

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")
