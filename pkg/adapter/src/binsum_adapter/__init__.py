"""Fine-tuning data adapter for code-summary corpora.

Reads the corpus interchange files (``samples.jsonl`` + ``split.json``),
emits seq2seq pair files sized for a fixed token budget, and collects
model outputs back into ``predictions.jsonl`` for scoring.
"""

from binsum_adapter.config import TrainConfig
from binsum_adapter.data import AdapterError, Pair, PrepareReport, prepare, read_pairs
from binsum_adapter.predict import EchoModel, RetrievalModel, generate_predictions

__all__ = [
    "AdapterError",
    "EchoModel",
    "Pair",
    "PrepareReport",
    "RetrievalModel",
    "TrainConfig",
    "generate_predictions",
    "prepare",
    "read_pairs",
]

__version__ = "0.1.0"
