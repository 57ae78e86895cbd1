"""Decompiler export ingestion and source/decompiled alignment."""

from __future__ import annotations

import json
import re
from collections import Counter
from pathlib import Path
from typing import Any, Iterable, Sequence

from .records import (
    PLACEHOLDER_RE,
    DecompiledFunction,
    OptLevel,
    RecordError,
    Sample,
    SourceFunction,
    Variant,
)
from .source_docs import ExtractionMode, FilterConfig, extract_summary, filter_summary

# --------------------------------------------------------------------------
# optimization flag normalization
# --------------------------------------------------------------------------

_OPT_TABLE: dict[str, OptLevel] = {
    "-O0": OptLevel.O0,
    "-Oa": OptLevel.O0,
    "-O1": OptLevel.O1,
    "-Of": OptLevel.O1,
    "-Og": OptLevel.O1,
    "-O2": OptLevel.O2,
    "-Os": OptLevel.O2,
    "-O3": OptLevel.O3,
}

_OPT_NUMERIC_RE = re.compile(r"-O([0-9]+)")


def normalize_opt_level(flag: str) -> OptLevel:
    """Map a compiler -O flag onto the four canonical levels.

    Numeric levels above 3 clamp to O3 the way compilers treat them; any
    flag outside the known table is an error rather than a guess.
    """
    level = _OPT_TABLE.get(flag)
    if level is not None:
        return level
    m = _OPT_NUMERIC_RE.fullmatch(flag)
    if m and int(m.group(1)) > 3:
        return OptLevel.O3
    raise ValueError(f"unrecognized optimization flag {flag!r}")


# --------------------------------------------------------------------------
# export ingestion
# --------------------------------------------------------------------------

_PLACEHOLDER = re.compile(PLACEHOLDER_RE)


def _is_placeholder(name: str) -> bool:
    return bool(_PLACEHOLDER.fullmatch(name))


def _iter_raw(source: str | Path | Iterable[dict[str, Any]]) -> Iterable[tuple[int, dict[str, Any]]]:
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                if not raw.strip():
                    continue
                try:
                    d = json.loads(raw)
                except json.JSONDecodeError as e:
                    raise RecordError(f"invalid JSON: {e.msg}", line=lineno) from e
                yield lineno, d
    else:
        for lineno, d in enumerate(source, start=1):
            yield lineno, d


def ingest_decompiled(
    source: str | Path | Iterable[dict[str, Any]],
) -> tuple[list[DecompiledFunction], Counter]:
    """Read a raw decompiler export into validated function records.

    Each input line holds project, binary, name, pseudo_c, opt_level_raw
    and optionally stripped and address. Records without pseudo-C are
    dropped and tallied; a function counts as stripped when the export
    says so, when its name is empty, or when the name is a FUN_ placeholder.
    """
    functions: list[DecompiledFunction] = []
    diag: Counter = Counter()
    for lineno, d in _iter_raw(source):
        if not isinstance(d, dict):
            raise RecordError("record is not an object", line=lineno)
        diag["total"] += 1
        pseudo = d.get("pseudo_c")
        if not isinstance(pseudo, str) or not pseudo.strip():
            diag["missing_pseudo_c"] += 1
            continue

        name = d.get("name", "")
        if not isinstance(name, str):
            raise RecordError("name must be a string", line=lineno, field="name")
        flagged = d.get("stripped", False)
        if not isinstance(flagged, bool):
            raise RecordError("stripped must be a boolean", line=lineno, field="stripped")
        if flagged and name and not _is_placeholder(name):
            raise RecordError("stripped function carries a real name", line=lineno, field="name")
        stripped = flagged or not name or _is_placeholder(name)

        raw_flag = d.get("opt_level_raw")
        if not isinstance(raw_flag, str) or not raw_flag:
            raise RecordError("opt_level_raw must be a non-empty string", line=lineno, field="opt_level_raw")
        try:
            level = normalize_opt_level(raw_flag)
        except ValueError as e:
            raise RecordError(str(e), line=lineno, field="opt_level_raw") from e

        project = d.get("project")
        binary = d.get("binary")
        for field_name, value in (("project", project), ("binary", binary)):
            if not isinstance(value, str) or not value:
                raise RecordError(
                    f"{field_name} must be a non-empty string", line=lineno, field=field_name
                )
        address = d.get("address")
        if address is not None and not isinstance(address, str):
            raise RecordError("address must be a string or null", line=lineno, field="address")

        functions.append(
            DecompiledFunction(
                project=project,
                binary=binary,
                name=name,
                pseudo_c=pseudo,
                opt_level_raw=raw_flag,
                opt_level=level,
                stripped=stripped,
                address=address,
            )
        )
        diag["ingested"] += 1
        if stripped:
            diag["stripped"] += 1
    return functions, diag


# --------------------------------------------------------------------------
# alignment
# --------------------------------------------------------------------------

_ALIGNABLE = (Variant.SOURCE_C, Variant.DECOMPILED)


def align(
    decompiled: Sequence[DecompiledFunction],
    sources: Sequence[SourceFunction],
    *,
    mode: ExtractionMode = ExtractionMode.STRICT_RULES,
    filter_cfg: FilterConfig = FilterConfig(),
    variants: Sequence[Variant] = _ALIGNABLE,
) -> tuple[list[Sample], Counter]:
    """Pair decompiled functions with their documented source by (project, name).

    Every input record lands in exactly one bucket of the returned counter:
    emitted:<variant> (once per requested variant), no_doc, filtered:<reason>,
    unaligned, ambiguous or duplicate_input. Stripped functions cannot be
    aligned by name and count as unaligned here; see attach_stripped.
    """
    for v in variants:
        if v not in _ALIGNABLE:
            raise ValueError(f"variant {v.value} is derived by transforms, not alignment")
    if not variants or len(set(variants)) != len(variants):
        raise ValueError("variants must be a non-empty sequence without repeats")

    index: dict[tuple[str, str], list[SourceFunction]] = {}
    for s in sources:
        index.setdefault((s.project, s.name), []).append(s)

    samples: list[Sample] = []
    diag: Counter = Counter()
    seen: set[tuple[str, str, str]] = set()
    for d in decompiled:
        diag["input"] += 1
        if d.stripped or not d.name or _is_placeholder(d.name):
            diag["unaligned"] += 1
            continue
        key = (d.project, d.binary, d.name)
        if key in seen:
            diag["duplicate_input"] += 1
            continue
        seen.add(key)

        matches = index.get((d.project, d.name), [])
        if not matches:
            diag["unaligned"] += 1
            continue
        if len(matches) > 1:
            documented = [s for s in matches if s.doc is not None]
            if len(documented) != 1:
                diag["ambiguous"] += 1
                continue
            src = documented[0]
        else:
            src = matches[0]
        if src.doc is None:
            diag["no_doc"] += 1
            continue

        summary = extract_summary(src.doc, mode)
        verdict = filter_summary(summary, filter_cfg)
        if not verdict.passed:
            diag[f"filtered:{verdict.reason.value}"] += 1
            continue
        assert summary is not None
        for v in variants:
            samples.append(
                Sample.make(
                    project=d.project,
                    binary=d.binary,
                    name=d.name,
                    variant=v,
                    code=src.body_text if v is Variant.SOURCE_C else d.pseudo_c,
                    summary=summary,
                    opt_level=d.opt_level,
                    source_file=src.file_path,
                )
            )
            diag[f"emitted:{v.value}"] += 1
    return samples, diag


def attach_stripped(
    samples: Sequence[Sample],
    decompiled: Sequence[DecompiledFunction],
) -> tuple[list[Sample], Counter]:
    """Adopt stripped-binary functions into the corpus by address.

    A stripped function whose (project, binary, address) matches a named
    function that produced a decompiled sample is emitted as a stripped
    variant of that sample, inheriting its name and summary. Everything
    else is tallied and dropped.
    """
    named_by_addr: dict[tuple[str, str, str], DecompiledFunction] = {}
    for f in decompiled:
        if not f.stripped and f.address:
            named_by_addr[(f.project, f.binary, f.address)] = f
    sample_index = {
        (s.project, s.binary, s.name): s for s in samples if s.variant is Variant.DECOMPILED
    }

    out: list[Sample] = []
    emitted: set[str] = set()
    diag: Counter = Counter()
    for f in decompiled:
        if not f.stripped:
            continue
        diag["stripped_input"] += 1
        twin = named_by_addr.get((f.project, f.binary, f.address)) if f.address else None
        if twin is None:
            diag["stripped_unmatched"] += 1
            continue
        base = sample_index.get((twin.project, twin.binary, twin.name))
        if base is None:
            diag["stripped_skipped"] += 1
            continue
        derived = Sample.make(
            project=base.project,
            binary=base.binary,
            name=base.name,
            variant=Variant.STRIPPED,
            code=f.pseudo_c,
            summary=base.summary,
            opt_level=f.opt_level,
            source_file=base.source_file,
        )
        if derived.id in emitted:
            diag["stripped_duplicate"] += 1
            continue
        emitted.add(derived.id)
        out.append(derived)
        diag["stripped_attached"] += 1
    return out, diag
