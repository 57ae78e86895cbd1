"""Pair-file preparation from the corpus interchange files.

The adapter deliberately speaks only the on-disk formats: samples.jsonl
(one JSON object per line with ``id``/``variant``/``code``/``summary``
fields) and split.json (sample-id lists under ``train``/``valid``/``test``).
It never imports the corpus library, so either side can evolve as long as
the files keep their shape.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable

from binsum_adapter.config import KNOWN_VARIANTS, TrainConfig

SET_NAMES = ("train", "valid", "test")

_SAMPLE_FIELDS = ("id", "variant", "code", "summary")


class AdapterError(Exception):
    """Raised for malformed input files or inconsistent arguments."""


@dataclass(frozen=True)
class Pair:
    """One seq2seq example: function text in, summary out."""

    sample_id: str
    source: str
    target: str

    def to_json(self) -> dict[str, Any]:
        return {"sample_id": self.sample_id, "source": self.source, "target": self.target}


@dataclass(frozen=True)
class PrepareReport:
    """Counts from one prepare run, per output set."""

    variant: str
    counts: dict[str, int]
    skipped_unassigned: int

    def to_json(self) -> dict[str, Any]:
        return {
            "variant": self.variant,
            "counts": dict(self.counts),
            "skipped_unassigned": self.skipped_unassigned,
        }


def _read_json_lines(path: Path) -> Iterable[tuple[int, dict[str, Any]]]:
    with path.open("r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise AdapterError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            if not isinstance(obj, dict):
                raise AdapterError(f"{path}:{lineno}: expected a JSON object")
            yield lineno, obj


def read_samples(path: str | Path, *, variant: str) -> list[dict[str, Any]]:
    """Read samples.jsonl rows of one variant, validating the fields we use."""
    if variant not in KNOWN_VARIANTS:
        raise AdapterError(
            f"unknown variant {variant!r}; expected one of {', '.join(KNOWN_VARIANTS)}"
        )
    path = Path(path)
    rows: list[dict[str, Any]] = []
    seen: set[str] = set()
    for lineno, obj in _read_json_lines(path):
        for field in _SAMPLE_FIELDS:
            if not isinstance(obj.get(field), str):
                raise AdapterError(f"{path}:{lineno}: field {field!r} must be a string")
        if obj["variant"] != variant:
            continue
        if obj["id"] in seen:
            raise AdapterError(f"{path}:{lineno}: duplicate sample id {obj['id']!r}")
        seen.add(obj["id"])
        rows.append(obj)
    return rows


def read_split(path: str | Path) -> dict[str, set[str]]:
    """Read split.json into {set name: sample id set}."""
    path = Path(path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise AdapterError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise AdapterError(f"{path}: expected a JSON object")
    sets: dict[str, set[str]] = {}
    for name in SET_NAMES:
        ids = obj.get(name)
        if not isinstance(ids, list) or not all(isinstance(i, str) for i in ids):
            raise AdapterError(f"{path}: field {name!r} must be a list of strings")
        sets[name] = set(ids)
    overlap = (sets["train"] & sets["valid"]) | (sets["train"] & sets["test"]) | (
        sets["valid"] & sets["test"]
    )
    if overlap:
        raise AdapterError(f"{path}: sample ids appear in more than one set: {sorted(overlap)[:3]}")
    return sets


def truncate_tokens(text: str, limit: int) -> str:
    """Keep the first `limit` whitespace tokens of `text`."""
    tokens = text.split()
    if len(tokens) <= limit:
        return " ".join(tokens)
    return " ".join(tokens[:limit])


def _write_pairs(path: Path, pairs: list[Pair]) -> None:
    with path.open("w", encoding="utf-8") as handle:
        for pair in pairs:
            handle.write(json.dumps(pair.to_json(), ensure_ascii=False, separators=(",", ":")))
            handle.write("\n")


def read_pairs(path: str | Path) -> list[Pair]:
    """Read one pair file back, in file order."""
    path = Path(path)
    pairs: list[Pair] = []
    for lineno, obj in _read_json_lines(path):
        for field in ("sample_id", "source", "target"):
            if not isinstance(obj.get(field), str):
                raise AdapterError(f"{path}:{lineno}: field {field!r} must be a string")
        pairs.append(Pair(obj["sample_id"], obj["source"], obj["target"]))
    return pairs


def prepare(
    samples_path: str | Path,
    split_path: str | Path,
    out_dir: str | Path,
    *,
    variant: str,
    config: TrainConfig | None = None,
) -> PrepareReport:
    """Write train/valid/test pair files plus a config snapshot.

    Rows keep samples.jsonl order inside each set.  Sample ids absent from
    every split set are skipped and counted, so a split computed on a
    sibling variant stays usable.
    """
    cfg = config or TrainConfig()
    cfg.validate()
    rows = read_samples(samples_path, variant=variant)
    sets = read_split(split_path)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    source_budget = cfg.source_budget(variant)
    buckets: dict[str, list[Pair]] = {name: [] for name in SET_NAMES}
    skipped = 0
    for row in rows:
        pair = Pair(
            sample_id=row["id"],
            source=truncate_tokens(row["code"], source_budget),
            target=truncate_tokens(row["summary"], cfg.max_target_tokens),
        )
        for name in SET_NAMES:
            if row["id"] in sets[name]:
                buckets[name].append(pair)
                break
        else:
            skipped += 1

    if all(not bucket for bucket in buckets.values()):
        raise AdapterError(
            f"no samples of variant {variant!r} matched the split; "
            "check the variant name and that the files belong together"
        )

    for name in SET_NAMES:
        _write_pairs(out_dir / f"{name}.jsonl", buckets[name])
    snapshot = {"variant": variant, "config": cfg.to_json()}
    (out_dir / "config.json").write_text(
        json.dumps(snapshot, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )

    counts = {name: len(buckets[name]) for name in SET_NAMES}
    return PrepareReport(variant=variant, counts=counts, skipped_unassigned=skipped)
