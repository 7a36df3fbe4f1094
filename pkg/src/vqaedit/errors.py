class VqaEditError(Exception):
    """Base class for toolkit errors."""


class FormatError(VqaEditError):
    """Input file does not parse as the documented format."""


class IntegrityError(VqaEditError):
    """Cross-references between records are broken (dangling ids etc.)."""


class ConfigError(VqaEditError):
    """Invalid configuration or CLI arguments."""
