"""Procedural dMelodies dataset, disentanglement metrics and a toy VAE benchmark."""
from .factor_space import (
    Arp,
    FactorTuple,
    Scale,
    cardinality,
    enumerate_factors,
    factors_to_index,
    index_to_factors,
)
from .melody import synthesize, to_tokens, token_vocabulary

__version__ = "0.1.0"
MANIFEST_VERSION = "dmelodies-regen/1.0"

__all__ = [
    "Arp",
    "FactorTuple",
    "MANIFEST_VERSION",
    "Scale",
    "cardinality",
    "enumerate_factors",
    "factors_to_index",
    "index_to_factors",
    "synthesize",
    "to_tokens",
    "token_vocabulary",
]
