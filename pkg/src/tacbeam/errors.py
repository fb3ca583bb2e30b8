"""Exception types shared across the package and mapped to CLI exit codes."""


class ValidationError(ValueError):
    """Bad configuration, manifest, checkpoint or input files (exit code 2)."""


class NumericalError(FloatingPointError):
    """Non-finite loss or activations, failed gradient check (exit code 3)."""
