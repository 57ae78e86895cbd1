"""Prediction collection: turn model outputs into predictions.jsonl.

Two built-in predictors keep the plumbing testable without a trained
model: an echo model that returns the reference (useful only to validate
the file round trip end to end) and a nearest-neighbour retrieval model
over the training pairs.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Protocol, Sequence

from binsum_adapter.data import AdapterError, Pair


class Predictor(Protocol):
    def predict(self, source: str) -> str: ...


class EchoModel:
    """Returns the reference summary for ids seen at fit time.

    A plumbing validator: scoring its output must give perfect exact
    match, which proves the pair/prediction files line up.
    """

    def __init__(self, pairs: Sequence[Pair]) -> None:
        self._by_source: dict[str, str] = {}
        for pair in pairs:
            self._by_source.setdefault(pair.source, pair.target)

    def predict(self, source: str) -> str:
        try:
            return self._by_source[source]
        except KeyError:
            raise AdapterError("echo model saw a source it was not fitted on") from None


class RetrievalModel:
    """Returns the training summary whose source shares the most tokens.

    Similarity is Jaccard over whitespace-token sets; ties break towards
    the earlier training pair, so predictions are deterministic.
    """

    def __init__(self, train_pairs: Sequence[Pair]) -> None:
        if not train_pairs:
            raise AdapterError("retrieval model needs at least one training pair")
        self._entries = [(set(p.source.split()), p.target) for p in train_pairs]

    def predict(self, source: str) -> str:
        query = set(source.split())
        best_score = -1.0
        best_target = self._entries[0][1]
        for tokens, target in self._entries:
            union = len(query | tokens)
            score = (len(query & tokens) / union) if union else 1.0
            if score > best_score:
                best_score = score
                best_target = target
        return best_target


def generate_predictions(
    pairs: Sequence[Pair], model: Predictor, out_path: str | Path
) -> int:
    """Run `model` over `pairs` and write predictions.jsonl; returns the count."""
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with out_path.open("w", encoding="utf-8") as handle:
        for pair in pairs:
            row = {"sample_id": pair.sample_id, "candidate": model.predict(pair.source)}
            handle.write(json.dumps(row, ensure_ascii=False, separators=(",", ":")))
            handle.write("\n")
    return len(pairs)
