"""Record types shared by every stage of the corpus pipeline.

All persistent state is line-delimited JSON (one object per line, UTF-8).
Files written by this module are byte-deterministic: records are sorted by
their stable key and serialized with a fixed field order.
"""

from __future__ import annotations

import enum
import hashlib
import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Sequence


class BinsumError(Exception):
    """Base class for data errors surfaced to CLI users."""


class RecordError(BinsumError):
    """A malformed record in a JSONL file."""

    def __init__(self, message: str, *, line: int | None = None, field: str | None = None):
        self.line = line
        self.field = field
        prefix = ""
        if line is not None:
            prefix += f"line {line}: "
        if field is not None:
            prefix += f"field {field!r}: "
        super().__init__(prefix + message)


class Variant(str, enum.Enum):
    SOURCE_C = "source_c"
    DECOMPILED = "decompiled"
    DEMI_STRIPPED = "demi_stripped"
    NO_FUNNAME = "no_funname"
    STRIPPED = "stripped"


class OptLevel(str, enum.Enum):
    O0 = "O0"
    O1 = "O1"
    O2 = "O2"
    O3 = "O3"


class DocStyle(str, enum.Enum):
    SINGLE_LINE = "single_line"
    MULTI_LINE = "multi_line"


# Ghidra-style placeholder for functions whose real name is gone.
PLACEHOLDER_RE = r"FUN_[0-9a-fA-F]+"


def sample_id(project: str, binary: str, name: str, variant: Variant | str) -> str:
    """Stable 64-bit content hash of a sample's provenance, as lowercase hex.

    Equal provenance tuples give equal ids on every platform and run.
    """
    variant_value = variant.value if isinstance(variant, Variant) else variant
    payload = "\x1f".join((project, binary, name, variant_value)).encode("utf-8")
    return hashlib.blake2b(payload, digest_size=8).hexdigest()


# --------------------------------------------------------------------------
# field validation helpers
# --------------------------------------------------------------------------


def _need(d: dict[str, Any], field: str, kinds: type | tuple, *, line: int | None) -> Any:
    if field not in d:
        raise RecordError("missing", line=line, field=field)
    value = d[field]
    if not isinstance(value, kinds) or isinstance(value, bool) and kinds is int:
        raise RecordError(f"wrong type {type(value).__name__}", line=line, field=field)
    return value


def _need_str(d: dict[str, Any], field: str, *, line: int | None, empty_ok: bool = False) -> str:
    value = _need(d, field, str, line=line)
    if not empty_ok and not value:
        raise RecordError("must be non-empty", line=line, field=field)
    return value


def _opt_str(d: dict[str, Any], field: str, *, line: int | None) -> str | None:
    if d.get(field) is None:
        return None
    return _need(d, field, str, line=line)


def _need_enum(d: dict[str, Any], field: str, enum_cls, *, line: int | None):
    value = _need_str(d, field, line=line)
    try:
        return enum_cls(value)
    except ValueError:
        allowed = ", ".join(m.value for m in enum_cls)
        raise RecordError(f"{value!r} not one of {allowed}", line=line, field=field) from None


# --------------------------------------------------------------------------
# record types
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DocComment:
    """A comment block attached to a function, with markers already stripped."""

    raw_text: str
    style: DocStyle
    line_span: tuple[int, int]

    def to_json(self) -> dict[str, Any]:
        return {
            "raw_text": self.raw_text,
            "style": self.style.value,
            "line_span": list(self.line_span),
        }

    @classmethod
    def from_json(cls, d: dict[str, Any], *, line: int | None = None) -> "DocComment":
        raw_text = _need_str(d, "raw_text", line=line)
        style = _need_enum(d, "style", DocStyle, line=line)
        span = _need(d, "line_span", list, line=line)
        if len(span) != 2 or not all(isinstance(v, int) and not isinstance(v, bool) for v in span):
            raise RecordError("must be a pair of ints", line=line, field="line_span")
        start, end = span
        if start > end:
            raise RecordError("start after end", line=line, field="line_span")
        if style is DocStyle.SINGLE_LINE and start != end:
            raise RecordError("single_line span must cover one line", line=line, field="line_span")
        return cls(raw_text=raw_text, style=style, line_span=(start, end))


@dataclass(frozen=True)
class SourceFunction:
    """A function definition found in a C source tree.

    body_text holds the full definition, signature through closing brace,
    exactly as it appears in the file.
    """

    project: str
    file_path: str
    name: str
    signature: str
    body_text: str
    start_line: int
    end_line: int
    doc: DocComment | None = None

    def sort_key(self) -> tuple:
        return (self.project, self.file_path, self.start_line, self.name)

    def to_json(self) -> dict[str, Any]:
        return {
            "project": self.project,
            "file_path": self.file_path,
            "name": self.name,
            "signature": self.signature,
            "body_text": self.body_text,
            "start_line": self.start_line,
            "end_line": self.end_line,
            "doc": self.doc.to_json() if self.doc is not None else None,
        }

    @classmethod
    def from_json(cls, d: dict[str, Any], *, line: int | None = None) -> "SourceFunction":
        start = _need(d, "start_line", int, line=line)
        end = _need(d, "end_line", int, line=line)
        if start < 1 or end < start:
            raise RecordError("need 1 <= start_line <= end_line", line=line, field="start_line")
        doc = d.get("doc")
        return cls(
            project=_need_str(d, "project", line=line),
            file_path=_need_str(d, "file_path", line=line),
            name=_need_str(d, "name", line=line),
            signature=_need_str(d, "signature", line=line),
            body_text=_need_str(d, "body_text", line=line),
            start_line=start,
            end_line=end,
            doc=DocComment.from_json(doc, line=line) if doc is not None else None,
        )


@dataclass(frozen=True)
class DecompiledFunction:
    """One function as emitted by the decompiler export.

    stripped means the binary carried no symbol for it; such functions bear
    a FUN_ placeholder (or no name at all), never a real identifier.
    """

    project: str
    binary: str
    name: str
    pseudo_c: str
    opt_level_raw: str
    opt_level: OptLevel
    stripped: bool = False
    address: str | None = None

    def sort_key(self) -> tuple:
        return (self.project, self.binary, self.name, self.opt_level_raw, self.address or "")

    def to_json(self) -> dict[str, Any]:
        return {
            "project": self.project,
            "binary": self.binary,
            "name": self.name,
            "pseudo_c": self.pseudo_c,
            "opt_level_raw": self.opt_level_raw,
            "opt_level": self.opt_level.value,
            "stripped": self.stripped,
            "address": self.address,
        }

    @classmethod
    def from_json(cls, d: dict[str, Any], *, line: int | None = None) -> "DecompiledFunction":
        name = _need_str(d, "name", line=line, empty_ok=True)
        stripped = _need(d, "stripped", bool, line=line)
        if stripped and name and not re.fullmatch(PLACEHOLDER_RE, name):
            raise RecordError("stripped function carries a real name", line=line, field="name")
        return cls(
            project=_need_str(d, "project", line=line),
            binary=_need_str(d, "binary", line=line),
            name=name,
            pseudo_c=_need_str(d, "pseudo_c", line=line),
            opt_level_raw=_need_str(d, "opt_level_raw", line=line),
            opt_level=_need_enum(d, "opt_level", OptLevel, line=line),
            stripped=stripped,
            address=_opt_str(d, "address", line=line),
        )


@dataclass(frozen=True)
class Sample:
    """One (code, summary) pair of a given corpus variant.

    id is derived from (project, binary, name, variant) alone, so re-running
    a transform re-derives the same ids.
    """

    id: str
    project: str
    binary: str
    name: str
    variant: Variant
    code: str
    summary: str
    opt_level: OptLevel | None = None
    source_file: str | None = None

    @classmethod
    def make(
        cls,
        *,
        project: str,
        binary: str,
        name: str,
        variant: Variant,
        code: str,
        summary: str,
        opt_level: OptLevel | None = None,
        source_file: str | None = None,
    ) -> "Sample":
        return cls(
            id=sample_id(project, binary, name, variant),
            project=project,
            binary=binary,
            name=name,
            variant=variant,
            code=code,
            summary=summary,
            opt_level=opt_level,
            source_file=source_file,
        )

    def sort_key(self) -> tuple:
        return (self.id, self.variant.value)

    def to_json(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "project": self.project,
            "binary": self.binary,
            "name": self.name,
            "variant": self.variant.value,
            "code": self.code,
            "summary": self.summary,
            "opt_level": self.opt_level.value if self.opt_level is not None else None,
            "source_file": self.source_file,
        }

    @classmethod
    def from_json(cls, d: dict[str, Any], *, line: int | None = None) -> "Sample":
        opt = d.get("opt_level")
        return cls(
            id=_need_str(d, "id", line=line),
            project=_need_str(d, "project", line=line),
            binary=_need_str(d, "binary", line=line),
            name=_need_str(d, "name", line=line),
            variant=_need_enum(d, "variant", Variant, line=line),
            code=_need_str(d, "code", line=line),
            summary=_need_str(d, "summary", line=line),
            opt_level=_need_enum(d, "opt_level", OptLevel, line=line) if opt is not None else None,
            source_file=_opt_str(d, "source_file", line=line),
        )


@dataclass(frozen=True)
class Prediction:
    sample_id: str
    candidate: str

    def sort_key(self) -> tuple:
        return (self.sample_id,)

    def to_json(self) -> dict[str, Any]:
        return {"sample_id": self.sample_id, "candidate": self.candidate}

    @classmethod
    def from_json(cls, d: dict[str, Any], *, line: int | None = None) -> "Prediction":
        return cls(
            sample_id=_need_str(d, "sample_id", line=line),
            candidate=_need(d, "candidate", str, line=line),
        )


@dataclass(frozen=True)
class CorpusSplit:
    """Project-level train/valid/test assignment, stored as sample id lists.

    The project lists make the assignment reusable: pin valid/test projects
    when splitting a sibling corpus and the partition carries over.
    """

    seed: int
    ratios: tuple[float, float, float]
    train: tuple[str, ...]
    valid: tuple[str, ...]
    test: tuple[str, ...]
    train_projects: tuple[str, ...]
    valid_projects: tuple[str, ...]
    test_projects: tuple[str, ...]
    pinned_valid: tuple[str, ...] = ()
    pinned_test: tuple[str, ...] = ()

    def to_json(self) -> dict[str, Any]:
        return {
            "seed": self.seed,
            "ratios": list(self.ratios),
            "train": list(self.train),
            "valid": list(self.valid),
            "test": list(self.test),
            "train_projects": list(self.train_projects),
            "valid_projects": list(self.valid_projects),
            "test_projects": list(self.test_projects),
            "pinned_valid": list(self.pinned_valid),
            "pinned_test": list(self.pinned_test),
        }

    @classmethod
    def from_json(cls, d: dict[str, Any], *, line: int | None = None) -> "CorpusSplit":
        ratios = _need(d, "ratios", list, line=line)
        if len(ratios) != 3 or not all(isinstance(r, (int, float)) for r in ratios):
            raise RecordError("must be three numbers", line=line, field="ratios")

        def ids(field: str) -> tuple[str, ...]:
            values = _need(d, field, list, line=line)
            if not all(isinstance(v, str) for v in values):
                raise RecordError("must be a list of strings", line=line, field=field)
            return tuple(values)

        return cls(
            seed=_need(d, "seed", int, line=line),
            ratios=tuple(float(r) for r in ratios),
            train=ids("train"),
            valid=ids("valid"),
            test=ids("test"),
            train_projects=ids("train_projects"),
            valid_projects=ids("valid_projects"),
            test_projects=ids("test_projects"),
            pinned_valid=ids("pinned_valid") if "pinned_valid" in d else (),
            pinned_test=ids("pinned_test") if "pinned_test" in d else (),
        )


# --------------------------------------------------------------------------
# file IO
# --------------------------------------------------------------------------


def dumps_record(d: dict[str, Any]) -> str:
    return json.dumps(d, ensure_ascii=False, separators=(",", ":"))


def read_records(path: str | Path, schema) -> list:
    """Read one JSONL file of `schema` records, in file order.

    Raises RecordError naming the line (1-based) and offending field.
    """
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                d = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise RecordError(f"invalid JSON ({exc.msg})", line=lineno) from None
            if not isinstance(d, dict):
                raise RecordError("record must be an object", line=lineno)
            out.append(schema.from_json(d, line=lineno))
    return out


def write_records(records: Iterable, path: str | Path) -> None:
    """Write records sorted by their stable key; output is byte-deterministic."""
    ordered = sorted(records, key=lambda r: r.sort_key())
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for record in ordered:
            fh.write(dumps_record(record.to_json()))
            fh.write("\n")


def read_split(path: str | Path) -> CorpusSplit:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise RecordError(f"invalid JSON ({exc.msg})") from None
    return CorpusSplit.from_json(d)


def write_split(split: CorpusSplit, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(split.to_json(), fh, ensure_ascii=False, indent=2)
        fh.write("\n")
