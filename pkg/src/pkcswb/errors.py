"""Failure types shared across the scheme and container layers."""

__all__ = [
    "DecryptionError",
    "UnsupportedAlgorithm",
    "IntegrityFailure",
    "MissingCredential",
]


class DecryptionError(Exception):
    """Single uniform failure for every decryption error shape.

    The constructor takes no arguments so that all raise sites produce the
    identical error value: an attacker distinguishing padding failures from
    other failures gets a format oracle for free.
    """

    def __init__(self):
        super().__init__("decryption failed")


class UnsupportedAlgorithm(ValueError):
    """An algorithm identifier this toolkit refuses to process (e.g. legacy PBES1)."""


class IntegrityFailure(Exception):
    """A MAC or signature protecting a container did not verify."""


class MissingCredential(ValueError):
    """The selected protection mode needs a password or key that was not supplied."""
