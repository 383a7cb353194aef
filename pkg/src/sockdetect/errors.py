"""Exception types shared across the pipeline."""


class InputError(ValueError):
    """Malformed or inconsistent input data (CLI exit code 1)."""


class ConfigError(ValueError):
    """Invalid parameter combination (CLI exit code 2)."""


class UnfingerprintableError(ValueError):
    """A user has no surviving features and cannot be fingerprinted."""

    def __init__(self, owner: str):
        super().__init__(f"user {owner!r} has an empty feature map")
        self.owner = owner
