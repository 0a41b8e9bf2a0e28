"""Serve BERTScore checkpoints over the line-delimited scorer protocol."""

from .scoring import BridgeConfig, DirectScorer, load_scorer

__version__ = "0.1.0"
__all__ = ["BridgeConfig", "DirectScorer", "load_scorer"]
