"""Shared exception types."""


class TranslignError(Exception):
    """Base class for all library errors."""


class ShapeError(TranslignError):
    """Operands have incompatible or unexpected shapes."""


class DomainError(TranslignError):
    """Input is outside the mathematical domain of an operation."""


class ContractError(TranslignError):
    """A documented precondition was violated by the caller."""


class LoadError(TranslignError):
    """A data file (rule table, corpus, config, checkpoint) failed to parse."""


class ConfigError(LoadError):
    """A config file contains an unknown key or a malformed value."""
