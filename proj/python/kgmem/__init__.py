"""Python bindings for the kgmem conversational memory engine."""

from ._kgmem import (
    ConfigError,
    CorruptionError,
    Engine,
    KgmemError,
    MockProvider,
    NotFoundError,
    ProviderError,
    StorageError,
    ValidationError,
    count_tokens,
    decay_weights,
    normalize_ages,
    replay,
)

__all__ = [
    "ConfigError",
    "CorruptionError",
    "Engine",
    "KgmemError",
    "MockProvider",
    "NotFoundError",
    "ProviderError",
    "StorageError",
    "ValidationError",
    "count_tokens",
    "decay_weights",
    "normalize_ages",
    "replay",
]
