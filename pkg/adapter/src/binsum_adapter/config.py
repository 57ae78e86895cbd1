"""Training configuration for the seq2seq adapter."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

# Variant names accepted in samples.jsonl.  Plain C source is denser per
# token than decompiler output, so it gets a tighter source budget.
_C_SOURCE_VARIANT = "source_c"
KNOWN_VARIANTS = ("source_c", "decompiled", "demi_stripped", "no_funname", "stripped")


@dataclass(frozen=True)
class TrainConfig:
    """Knobs for pair preparation and the eventual fine-tuning run.

    Token budgets count whitespace tokens; they are a coarse stand-in for
    the subword budget of whatever tokenizer the trainer uses.
    """

    model_name: str = "Salesforce/codet5-small"
    max_source_tokens: int = 512
    max_source_tokens_c: int = 256
    max_target_tokens: int = 128
    batch_size: int = 2
    grad_accum_steps: int = 24

    @property
    def effective_batch_size(self) -> int:
        return self.batch_size * self.grad_accum_steps

    def source_budget(self, variant: str) -> int:
        """Source-side token budget for one corpus variant."""
        if variant not in KNOWN_VARIANTS:
            raise ValueError(f"unknown variant {variant!r}")
        if variant == _C_SOURCE_VARIANT:
            return self.max_source_tokens_c
        return self.max_source_tokens

    def validate(self) -> None:
        for field in (
            "max_source_tokens",
            "max_source_tokens_c",
            "max_target_tokens",
            "batch_size",
            "grad_accum_steps",
        ):
            value = getattr(self, field)
            if not isinstance(value, int) or value < 1:
                raise ValueError(f"{field} must be a positive integer, got {value!r}")
        if not self.model_name or not self.model_name.strip():
            raise ValueError("model_name must be a non-empty string")

    def to_json(self) -> dict[str, Any]:
        return {
            "model_name": self.model_name,
            "max_source_tokens": self.max_source_tokens,
            "max_source_tokens_c": self.max_source_tokens_c,
            "max_target_tokens": self.max_target_tokens,
            "batch_size": self.batch_size,
            "grad_accum_steps": self.grad_accum_steps,
            "effective_batch_size": self.effective_batch_size,
        }

    @classmethod
    def from_json(cls, d: dict[str, Any]) -> "TrainConfig":
        cfg = cls(
            model_name=d.get("model_name", cls.model_name),
            max_source_tokens=d.get("max_source_tokens", cls.max_source_tokens),
            max_source_tokens_c=d.get("max_source_tokens_c", cls.max_source_tokens_c),
            max_target_tokens=d.get("max_target_tokens", cls.max_target_tokens),
            batch_size=d.get("batch_size", cls.batch_size),
            grad_accum_steps=d.get("grad_accum_steps", cls.grad_accum_steps),
        )
        cfg.validate()
        return cfg
