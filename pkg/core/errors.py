"""Error types surfaced by the CLI as distinct exit codes."""


class ConfigError(ValueError):
    """Run configuration is malformed or names an invalid parameter."""


class NumericError(RuntimeError):
    """A numerical step failed or produced an unusable result."""
