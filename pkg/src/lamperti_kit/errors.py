"""Exception types shared across the toolkit."""


class LampertiKitError(Exception):
    """Base class for all toolkit errors."""


class DomainError(LampertiKitError):
    """Argument outside a finiteness domain (mgf argument, log of zero coordinate)."""


class SpecError(LampertiKitError):
    """A process description violates its invariants."""


class GridError(LampertiKitError):
    """A path grid is too degenerate to operate on."""


class PartitionError(LampertiKitError):
    """A coordinate partition is not admissible for the given index vector."""


class ReducibleError(LampertiKitError):
    """The chain support graph is not strongly connected."""


class ConditionError(LampertiKitError):
    """A precondition of the asymptotic classifier fails; lists which ones."""

    def __init__(self, failed, message=None):
        self.failed = list(failed)
        super().__init__(message or f"classification conditions failed: {', '.join(self.failed)}")


class ConfigError(LampertiKitError):
    """A run configuration is invalid."""


class ParseError(LampertiKitError):
    """A configuration file cannot be parsed."""
