"""Latent voter model on configuration-model random graphs."""

__version__ = "0.1.0"
