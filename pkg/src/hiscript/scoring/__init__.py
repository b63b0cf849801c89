"""Model-derived signals behind a single provider interface."""

from .base import BackendConfig, ScoringBackend, cosine, cosine_matrix
from .lm import TrigramLM
from .local import LocalBackend


def make_backend(config: BackendConfig):
    if config.kind == "remote":
        from .remote import RemoteBackend

        return RemoteBackend(config)
    return LocalBackend(dim=config.dim, bigrams=config.bigrams)


__all__ = [
    "BackendConfig", "LocalBackend", "ScoringBackend", "TrigramLM",
    "cosine", "cosine_matrix", "make_backend",
]
