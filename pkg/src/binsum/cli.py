"""Command line interface over the corpus pipeline.

Every option can also come from the environment as BINSUM_<OPTION>
(BINSUM_SEED, BINSUM_MODE, ...); an explicit flag wins over the
environment, which wins over the built-in default. Exit code 2 means the
invocation was wrong, 1 means the data was.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Callable, Sequence, TypeVar

from .corpus import (
    SimilarityConfig,
    compute_stats,
    deduplicate_aligned,
    split_corpus,
    subsample_train,
)
from .ingest import align, attach_stripped, ingest_decompiled
from .metrics import MetricConfig, evaluate
from .records import (
    BinsumError,
    DecompiledFunction,
    Prediction,
    Sample,
    SourceFunction,
    Variant,
    read_records,
    read_split,
    write_records,
    write_split,
)
from .source_docs import ExtractionMode, extract_functions, scan_source_dir
from .transforms import derive_variants

try:
    from importlib.metadata import PackageNotFoundError, version

    VERSION = version("binsum")
except PackageNotFoundError:  # running from a source tree without install
    VERSION = "0.0.0"

_ENV_PREFIX = "BINSUM_"


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# option parsing, shared between flags and environment
# --------------------------------------------------------------------------

T = TypeVar("T")

_MODES = {
    "strict": ExtractionMode.STRICT_RULES,
    "first-sentence": ExtractionMode.FIRST_SENTENCE_ALWAYS,
}


def _parse_mode(raw: str) -> ExtractionMode:
    try:
        return _MODES[raw]
    except KeyError:
        raise ValueError(f"mode must be one of {sorted(_MODES)}, got {raw!r}") from None


def _parse_variants(raw: str) -> tuple[Variant, ...]:
    out = []
    for part in raw.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            out.append(Variant(part))
        except ValueError:
            known = ", ".join(v.value for v in Variant)
            raise ValueError(f"unknown variant {part!r}; choose from {known}") from None
    if not out:
        raise ValueError("variant list is empty")
    return tuple(out)


def _parse_variant(raw: str) -> Variant:
    (v,) = _parse_variants(raw) if raw.count(",") == 0 else (None,)
    if v is None:
        raise ValueError("expected a single variant")
    return v


def _parse_thresholds(raw: str) -> SimilarityConfig:
    parts = raw.split(",")
    if len(parts) != 2:
        raise ValueError(f"thresholds must be 'multiset,set', got {raw!r}")
    return SimilarityConfig(float(parts[0]), float(parts[1]))


def _parse_ratios(raw: str) -> tuple[float, float, float]:
    parts = [p for p in raw.split(",") if p.strip()]
    if len(parts) != 3:
        raise ValueError(f"ratios must be three comma-separated numbers, got {raw!r}")
    a, b, c = (float(p) for p in parts)
    return (a, b, c)


def _parse_projects(raw: str) -> tuple[str, ...]:
    return tuple(p.strip() for p in raw.split(",") if p.strip())


def _parse_fraction(raw: str) -> float:
    return float(raw)


def _parse_jobs(raw: str) -> int:
    jobs = int(raw)
    if jobs < 1:
        raise ValueError(f"jobs must be at least 1, got {jobs}")
    return jobs


_TRUE = frozenset({"1", "true", "yes", "on"})
_FALSE = frozenset({"0", "false", "no", "off"})


def _parse_bool(raw: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in _TRUE:
        return True
    if lowered in _FALSE:
        return False
    raise ValueError(f"boolean must be one of {sorted(_TRUE | _FALSE)}, got {raw!r}")


def _argtype(parse: Callable[[str], T]) -> Callable[[str], T]:
    def wrapped(raw: str) -> T:
        try:
            return parse(raw)
        except ValueError as e:
            raise argparse.ArgumentTypeError(str(e)) from None

    return wrapped


def _resolve(value: T | None, option: str, parse: Callable[[str], T], default: T) -> T:
    """Flag value if given, else BINSUM_<OPTION> from the environment, else default."""
    if value is not None:
        return value
    raw = os.environ.get(_ENV_PREFIX + option.upper().replace("-", "_"))
    if raw is None:
        return default
    try:
        return parse(raw)
    except ValueError as e:
        raise UsageError(f"invalid {_ENV_PREFIX}{option.upper().replace('-', '_')}: {e}") from None


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def _say(message: str) -> None:
    print(message)


def _scan_one(payload: tuple[str, str, str]) -> tuple[list[SourceFunction], Counter]:
    text, rel, project = payload
    tally: Counter = Counter()
    functions = extract_functions(text, rel, project, tally)
    tally["files"] += 1
    return functions, tally


def _scan_tree(root: Path, project: str, jobs: int) -> tuple[list[SourceFunction], Counter]:
    if jobs <= 1:
        tally: Counter = Counter()
        return scan_source_dir(root, project, tally), tally
    payloads = []
    for path in sorted(p for p in root.rglob("*") if p.suffix in (".c", ".h") and p.is_file()):
        payloads.append(
            (path.read_text(encoding="utf-8", errors="replace"), path.relative_to(root).as_posix(), project)
        )
    functions: list[SourceFunction] = []
    total: Counter = Counter()
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        for batch, tally in pool.map(_scan_one, payloads):
            functions.extend(batch)
            total.update(tally)
    functions.sort(key=lambda f: (f.file_path, f.start_line))
    return functions, total


def cmd_extract(args: argparse.Namespace) -> int:
    jobs = _resolve(args.jobs, "jobs", _parse_jobs, 1)
    root = Path(args.src)
    if not root.is_dir():
        raise BinsumError(f"source directory not found: {root}")
    functions: list[SourceFunction] = []
    diag: Counter = Counter()
    if args.project:
        functions, diag = _scan_tree(root, args.project, jobs)
    else:
        projects = sorted(p for p in root.iterdir() if p.is_dir())
        if not projects:
            raise BinsumError(f"no project subdirectories under {root}")
        for proj_dir in projects:
            batch, tally = _scan_tree(proj_dir, proj_dir.name, jobs)
            functions.extend(batch)
            diag.update(tally)
    write_records(functions, args.output)
    documented = sum(1 for f in functions if f.doc is not None)
    _say(
        f"extract: {len(functions)} functions ({documented} documented) "
        f"from {diag['files']} files -> {args.output}"
    )
    return 0


def cmd_ingest(args: argparse.Namespace) -> int:
    functions, diag = ingest_decompiled(args.export)
    write_records(functions, args.output)
    _say(
        f"ingest: {diag['ingested']}/{diag['total']} records "
        f"({diag['stripped']} stripped, {diag['missing_pseudo_c']} without pseudo-C) -> {args.output}"
    )
    return 0


def _counter_line(diag: Counter) -> str:
    return "  ".join(f"{k}:{diag[k]}" for k in sorted(diag))


def cmd_align(args: argparse.Namespace) -> int:
    mode = _resolve(args.mode, "mode", _parse_mode, ExtractionMode.STRICT_RULES)
    variants = _resolve(
        args.variants, "variants", _parse_variants, (Variant.SOURCE_C, Variant.DECOMPILED)
    )
    functions = read_records(args.functions, DecompiledFunction)
    sources = read_records(args.sources, SourceFunction)
    attach = Variant.STRIPPED in variants
    align_variants = tuple(v for v in variants if v is not Variant.STRIPPED)
    try:
        samples, diag = align(functions, sources, mode=mode, variants=align_variants)
    except ValueError as e:
        raise UsageError(str(e)) from None
    if attach:
        if Variant.DECOMPILED not in variants:
            raise UsageError("variant stripped requires decompiled among the variants")
        extra, sdiag = attach_stripped(samples, functions)
        samples.extend(extra)
        diag.update(sdiag)
    write_records(samples, args.output)
    _say(f"align: {_counter_line(diag)}")
    _say(f"align: {len(samples)} samples -> {args.output}")
    return 0


def cmd_transform(args: argparse.Namespace) -> int:
    variants = _resolve(
        args.variants,
        "variants",
        _parse_variants,
        (Variant.DEMI_STRIPPED, Variant.NO_FUNNAME),
    )
    keep_generated = _resolve(args.keep_generated, "keep_generated", _parse_bool, False)
    samples = read_records(args.input, Sample)
    derived = derive_variants(samples, variants, keep_generated=keep_generated)
    write_records(samples + derived, args.output)
    _say(f"transform: derived {len(derived)} samples -> {args.output}")
    return 0


def cmd_dedup(args: argparse.Namespace) -> int:
    cfg = _resolve(args.thresholds, "thresholds", _parse_thresholds, SimilarityConfig())
    seed = _resolve(args.seed, "seed", int, 0)
    reference = _resolve(args.reference, "reference", _parse_variant, Variant.DECOMPILED)
    samples = read_records(args.input, Sample)
    kept, clusters, diag = deduplicate_aligned(samples, cfg, seed=seed, reference=reference)
    write_records(kept, args.output)
    if args.clusters:
        payload = {
            "reference": reference.value,
            "clusters": [
                {"members": list(c.members), "representative": c.representative}
                for c in clusters
            ],
        }
        with open(args.clusters, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(payload, fh, ensure_ascii=False, indent=2)
            fh.write("\n")
    _say(f"dedup: {_counter_line(diag)}")
    _say(f"dedup: kept {len(kept)}/{len(samples)} samples -> {args.output}")
    return 0


def cmd_split(args: argparse.Namespace) -> int:
    ratios = _resolve(args.ratios, "ratios", _parse_ratios, (0.8, 0.1, 0.1))
    seed = _resolve(args.seed, "seed", int, 0)
    pin_valid = _resolve(args.pin_valid, "pin_valid", _parse_projects, ())
    pin_test = _resolve(args.pin_test, "pin_test", _parse_projects, ())
    samples = read_records(args.input, Sample)
    split = split_corpus(samples, ratios=ratios, seed=seed, pin_valid=pin_valid, pin_test=pin_test)
    write_split(split, args.output)
    _say(
        f"split: train {len(split.train)} ({len(split.train_projects)} projects), "
        f"valid {len(split.valid)} ({len(split.valid_projects)}), "
        f"test {len(split.test)} ({len(split.test_projects)}) -> {args.output}"
    )
    return 0


def cmd_subsample(args: argparse.Namespace) -> int:
    fraction = _resolve(args.fraction, "fraction", _parse_fraction, None)
    if fraction is None:
        raise UsageError("--fraction is required (or set BINSUM_FRACTION)")
    seed = _resolve(args.seed, "seed", int, None)
    split = read_split(args.split)
    out = subsample_train(split, fraction, seed)
    write_split(out, args.output)
    _say(f"subsample: train {len(split.train)} -> {len(out.train)} -> {args.output}")
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    samples = read_records(args.input, Sample)
    split = read_split(args.split) if args.split else None
    stats = compute_stats(samples, split)
    _say(stats.render())
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(stats.to_json(), fh, ensure_ascii=False, indent=2, sort_keys=True)
            fh.write("\n")
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    lowercase = _resolve(args.lowercase, "lowercase", _parse_bool, False)
    samples = read_records(args.input, Sample)
    all_ids = {s.id for s in samples}

    subset = args.subset
    if subset and not args.split:
        raise UsageError("--subset requires --split")
    if args.split:
        split = read_split(args.split)
        subset = subset or "test"
        samples = [s for s in samples if s.id in set(getattr(split, subset))]
    if args.variant:
        samples = [s for s in samples if s.variant is args.variant]

    predictions = read_records(args.predictions, Prediction)
    if args.split or args.variant:
        kept_ids = {s.id for s in samples}
        excluded = all_ids - kept_ids
        predictions = [p for p in predictions if p.sample_id not in excluded]

    report = evaluate(samples, predictions, MetricConfig(lowercase=lowercase))
    _say(report.render())
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(report.to_json(), fh, ensure_ascii=False, indent=2, sort_keys=True)
            fh.write("\n")
    return 0


# --------------------------------------------------------------------------
# pipeline
# --------------------------------------------------------------------------

_PIPELINE_DEFAULT_VARIANTS = (
    Variant.SOURCE_C,
    Variant.DECOMPILED,
    Variant.DEMI_STRIPPED,
    Variant.NO_FUNNAME,
    Variant.STRIPPED,
)

_ALIGNABLE = (Variant.SOURCE_C, Variant.DECOMPILED)
_DERIVABLE = (Variant.DEMI_STRIPPED, Variant.NO_FUNNAME)


def cmd_pipeline(args: argparse.Namespace) -> int:
    seed = _resolve(args.seed, "seed", int, 0)
    mode = _resolve(args.mode, "mode", _parse_mode, ExtractionMode.STRICT_RULES)
    variants = _resolve(args.variants, "variants", _parse_variants, _PIPELINE_DEFAULT_VARIANTS)
    ratios = _resolve(args.ratios, "ratios", _parse_ratios, (0.8, 0.1, 0.1))
    thresholds = _resolve(args.thresholds, "thresholds", _parse_thresholds, SimilarityConfig())
    fraction = _resolve(args.fraction, "fraction", _parse_fraction, 1.0)
    pin_valid = _resolve(args.pin_valid, "pin_valid", _parse_projects, ())
    pin_test = _resolve(args.pin_test, "pin_test", _parse_projects, ())
    keep_generated = _resolve(args.keep_generated, "keep_generated", _parse_bool, False)
    jobs = _resolve(args.jobs, "jobs", _parse_jobs, 1)
    workdir = Path(_resolve(args.workdir, "workdir", str, None) or ".")

    align_variants = tuple(v for v in variants if v in _ALIGNABLE)
    derived_variants = tuple(v for v in variants if v in _DERIVABLE)
    want_stripped = Variant.STRIPPED in variants
    if not align_variants:
        raise UsageError("pipeline needs source_c or decompiled among the variants")
    needs_decompiled = want_stripped or derived_variants
    if needs_decompiled and Variant.DECOMPILED not in align_variants:
        raise UsageError("derived and stripped variants require decompiled among the variants")

    workdir.mkdir(parents=True, exist_ok=True)
    counts: dict[str, Any] = {}

    root = Path(args.src)
    if not root.is_dir():
        raise BinsumError(f"source directory not found: {root}")
    sources: list[SourceFunction] = []
    extract_diag: Counter = Counter()
    project_dirs = sorted(p for p in root.iterdir() if p.is_dir())
    if not project_dirs:
        raise BinsumError(f"no project subdirectories under {root}")
    for proj_dir in project_dirs:
        batch, tally = _scan_tree(proj_dir, proj_dir.name, jobs)
        sources.extend(batch)
        extract_diag.update(tally)
    write_records(sources, workdir / "sources.jsonl")
    counts["extract"] = dict(sorted(extract_diag.items()))
    _say(f"pipeline: extracted {len(sources)} functions from {len(project_dirs)} projects")

    functions, ingest_diag = ingest_decompiled(args.export)
    write_records(functions, workdir / "functions.jsonl")
    counts["ingest"] = dict(sorted(ingest_diag.items()))
    _say(f"pipeline: ingested {ingest_diag['ingested']}/{ingest_diag['total']} decompiled records")

    samples, align_diag = align(functions, sources, mode=mode, variants=align_variants)
    if want_stripped:
        extra, attach_diag = attach_stripped(samples, functions)
        samples.extend(extra)
        align_diag.update(attach_diag)
    counts["align"] = dict(sorted(align_diag.items()))
    _say(f"pipeline: aligned {len(samples)} samples")

    if derived_variants:
        derived = derive_variants(samples, derived_variants, keep_generated=keep_generated)
        samples.extend(derived)
        counts["transform"] = {"derived": len(derived)}
        _say(f"pipeline: derived {len(derived)} variant samples")

    reference = Variant.DECOMPILED if Variant.DECOMPILED in align_variants else align_variants[0]
    before = len(samples)
    samples, _, dedup_diag = deduplicate_aligned(samples, thresholds, seed=seed, reference=reference)
    counts["dedup"] = dict(sorted(dedup_diag.items()))
    write_records(samples, workdir / "samples.jsonl")
    _say(f"pipeline: deduplicated {before} -> {len(samples)} samples")

    split = split_corpus(samples, ratios=ratios, seed=seed, pin_valid=pin_valid, pin_test=pin_test)
    if fraction < 1.0:
        split = subsample_train(split, fraction)
    write_split(split, workdir / "split.json")
    counts["split"] = {
        "train": len(split.train),
        "valid": len(split.valid),
        "test": len(split.test),
    }
    _say(
        f"pipeline: split train/valid/test = "
        f"{len(split.train)}/{len(split.valid)}/{len(split.test)}"
    )

    stats = compute_stats(samples, split)
    with open(workdir / "stats.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(stats.to_json(), fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")

    manifest = {
        "tool": {"name": "binsum", "version": VERSION},
        "config": {
            "src": str(args.src),
            "export": str(args.export),
            "seed": seed,
            "mode": mode.value,
            "variants": [v.value for v in variants],
            "ratios": list(ratios),
            "thresholds": {
                "multiset": thresholds.multiset_threshold,
                "set": thresholds.set_threshold,
            },
            "fraction": fraction,
            "pin_valid": list(pin_valid),
            "pin_test": list(pin_test),
            "keep_generated": keep_generated,
            "jobs": jobs,
        },
        "outputs": {
            "sources": "sources.jsonl",
            "functions": "functions.jsonl",
            "samples": "samples.jsonl",
            "split": "split.json",
            "stats": "stats.json",
        },
        "counts": counts,
    }
    with open(workdir / "manifest.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")
    _say(f"pipeline: wrote {workdir / 'manifest.json'}")
    return 0


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="binsum",
        description="Build and evaluate corpora of decompiled functions paired with summaries.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="scan C source trees for documented functions")
    p.add_argument("--src", required=True, help="source root; subdirectories are projects")
    p.add_argument("--project", help="treat --src as a single project with this name")
    p.add_argument("--jobs", type=_argtype(_parse_jobs), default=None)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("ingest", help="validate and normalize a decompiler export")
    p.add_argument("--export", required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("align", help="pair decompiled functions with documented sources")
    p.add_argument("--functions", required=True)
    p.add_argument("--sources", required=True)
    p.add_argument("--mode", type=_argtype(_parse_mode), default=None, help="strict | first-sentence")
    p.add_argument("--variants", type=_argtype(_parse_variants), default=None)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("transform", help="derive anonymized code variants")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--variants", type=_argtype(_parse_variants), default=None)
    p.add_argument("--keep-generated", action="store_const", const=True, default=None)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("dedup", help="drop near-duplicate functions")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--thresholds", type=_argtype(_parse_thresholds), default=None, help="multiset,set")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--reference", type=_argtype(_parse_variant), default=None)
    p.add_argument("--clusters", help="also write the cluster report here")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_dedup)

    p = sub.add_parser("split", help="assign whole projects to train/valid/test")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--ratios", type=_argtype(_parse_ratios), default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--pin-valid", type=_argtype(_parse_projects), default=None)
    p.add_argument("--pin-test", type=_argtype(_parse_projects), default=None)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("subsample", help="shrink the training set of a split")
    p.add_argument("--split", required=True)
    p.add_argument("--fraction", type=_argtype(_parse_fraction), default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_subsample)

    p = sub.add_parser("stats", help="corpus statistics")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--split", default=None)
    p.add_argument("-o", "--output", help="also write stats as JSON")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("evaluate", help="score predictions against reference summaries")
    p.add_argument("-i", "--input", required=True, help="samples.jsonl with references")
    p.add_argument("-p", "--predictions", required=True)
    p.add_argument("--lowercase", action="store_const", const=True, default=None)
    p.add_argument("--split", default=None)
    p.add_argument("--subset", choices=("train", "valid", "test"), default=None)
    p.add_argument("--variant", type=_argtype(_parse_variant), default=None)
    p.add_argument("-o", "--output", help="also write the report as JSON")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("pipeline", help="run extract, ingest, align, transform, dedup, split, stats")
    p.add_argument("--src", required=True)
    p.add_argument("--export", required=True)
    p.add_argument("--workdir", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--mode", type=_argtype(_parse_mode), default=None)
    p.add_argument("--variants", type=_argtype(_parse_variants), default=None)
    p.add_argument("--ratios", type=_argtype(_parse_ratios), default=None)
    p.add_argument("--thresholds", type=_argtype(_parse_thresholds), default=None)
    p.add_argument("--fraction", type=_argtype(_parse_fraction), default=None)
    p.add_argument("--pin-valid", type=_argtype(_parse_projects), default=None)
    p.add_argument("--pin-test", type=_argtype(_parse_projects), default=None)
    p.add_argument("--keep-generated", action="store_const", const=True, default=None)
    p.add_argument("--jobs", type=_argtype(_parse_jobs), default=None)
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 2
    except BinsumError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
