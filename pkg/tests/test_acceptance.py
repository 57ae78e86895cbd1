"""End-to-end acceptance checks, one pass/fail line per criterion.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines; each
criterion also enforces its own wall-clock budget.
"""

from __future__ import annotations

import json
import random
import time
from pathlib import Path

import pytest

from binsum import (
    DocComment,
    DocStyle,
    ExtractionMode,
    FilterConfig,
    FilterReason,
    Sample,
    TokenKind,
    Variant,
    bleu4,
    cluster_items,
    demi_strip,
    exact_match,
    extract_summary,
    filter_summary,
    meteor,
    read_records,
    read_split,
    rouge_l,
    split_corpus,
    tokenize,
)
from binsum.cli import main as cli_main
from testlib import CORPUS_EXPORT, CORPUS_SRC, mk_sample
from oracles import oracle_clusters
from pseudo_gen import make_pseudo

GOLDEN = json.loads((Path(__file__).parent / "data" / "golden_metrics.json").read_text())


def _finish(n: int, desc: str, failures: list[str], started: float, budget: float) -> None:
    elapsed = time.perf_counter() - started
    if elapsed > budget:
        failures.append(f"took {elapsed:.2f}s, budget {budget:.0f}s")
    status = "PASS" if not failures else "FAIL"
    print(f"[{status}] criterion {n}: {desc} ({elapsed:.2f}s)", flush=True)
    assert not failures, "; ".join(failures)


# ---------------------------------------------------------------------------


def test_c1_bleu_zero_without_overlap():
    started = time.perf_counter()
    failures: list[str] = []
    score = bleu4("Toggle usage of SIMD instructions", "Enable or Disable the Simd Channel")
    if abs(score - 0.0) > 0.01:
        failures.append(f"bleu4 {score} not within 0.01 of 0.0")
    _finish(1, "BLEU-4 is 0.00 for sentences with no unigram overlap", failures, started, 1.0)


def test_c2_identity_scores():
    started = time.perf_counter()
    failures: list[str] = []
    vocab = (
        "frees the buffer and resets its cursor reads one packet from socket "
        "clock source select output value table index grows queue node handler"
    ).split()
    rng = random.Random(20240817)
    for k in range(50):
        m = rng.randint(1, 20)
        text = " ".join(rng.choice(vocab) for _ in range(m))
        if exact_match(text, text) != 1:
            failures.append(f"em != 1 for {text!r}")
        b = bleu4(text, text)
        if abs(b - 100.0) > 1e-6:
            failures.append(f"bleu {b} for identity {text!r}")
        r = rouge_l(text, text)
        if abs(r - 100.0) > 1e-6:
            failures.append(f"rouge {r} for identity {text!r}")
        expected = 100.0 * (1.0 - 0.5 / m**3)
        got = meteor(text, text)
        if abs(got - expected) > 1e-6:
            failures.append(f"meteor {got} != {expected} for m={m}")
        if failures:
            break
    _finish(2, "identity scores: EM 1, BLEU/ROUGE 100, METEOR matches penalty formula", failures, started, 5.0)


def test_c3_golden_metric_pairs():
    started = time.perf_counter()
    failures: list[str] = []
    tol = GOLDEN["tolerance"]
    for pair in GOLDEN["pairs"]:
        ref, cand = pair["reference"], pair["candidate"]
        checks = [
            ("em", exact_match(ref, cand), pair["em"]),
            ("bleu4", bleu4(ref, cand), pair["bleu4"]),
            ("rouge_l", rouge_l(ref, cand), pair["rouge_l"]),
            ("meteor", meteor(ref, cand), pair["meteor"]),
        ]
        for metric, got, want in checks:
            if abs(got - want) > tol:
                failures.append(f"{pair['note']}: {metric} {got} != {want} +- {tol}")
    _finish(3, f"{len(GOLDEN['pairs'])} pinned metric pairs within {tol}", failures, started, 5.0)


def test_c4_dedup_matches_bruteforce():
    started = time.perf_counter()
    failures: list[str] = []
    templates = [
        ["buf", "len", "i", "buf", "len", "0"],
        ["ctx", "state", "ctx", "flags"],
        ["a", "b", "c", "d", "e"],
        ["alpha", "beta", "gamma", "delta", "epsilon", "alpha", "beta", "gamma"],
        [],
    ]
    for trial in range(50):
        rng = random.Random(1000 + trial)
        n = rng.randrange(0, 201)
        items = []
        for k in range(n):
            bag = list(rng.choice(templates))
            if bag and rng.random() < 0.5:
                bag[rng.randrange(len(bag))] = rng.choice(["x", "y", "buf", "q"])
            if rng.random() < 0.3:
                bag.append(rng.choice(["buf", "z", "len"]))
            items.append((f"s{k:04d}", bag))
        got = [(list(c.members), c.representative) for c in cluster_items(items, seed=trial)]
        want = oracle_clusters([(i, list(t)) for i, t in items], seed=trial)
        want = [(list(m), r) for m, r in want]
        if got != want:
            failures.append(f"trial {trial} (n={n}): clustering differs from brute force")
            break
    _finish(4, "near-duplicate clusters equal brute-force oracle on 50 random corpora", failures, started, 60.0)


def test_c5_split_properties():
    started = time.perf_counter()
    failures: list[str] = []
    counts = {f"proj_{k:02d}": (k * 13) % 37 + 5 for k in range(25)}

    def corpus(variant: Variant) -> list[Sample]:
        return [
            mk_sample(project=p, name=f"fn_{i}", variant=variant)
            for p, n in counts.items()
            for i in range(n)
        ]

    samples = corpus(Variant.DECOMPILED)
    total = len(samples)
    largest = max(counts.values())
    for ratios in [(0.8, 0.1, 0.1), (0.6, 0.2, 0.2)]:
        split = split_corpus(samples, ratios=ratios, seed=3)
        groups = (set(split.train_projects), set(split.valid_projects), set(split.test_projects))
        if sum(len(g) for g in groups) != len(counts) or len(groups[0] | groups[1] | groups[2]) != len(counts):
            failures.append(f"{ratios}: projects span sets or are lost")
        by_project = {p: g for g, names in zip("TVE", groups) for p in names}
        for s in samples:
            if s.project not in by_project:
                failures.append(f"{ratios}: {s.project} unassigned")
                break
        for size, ratio in zip((len(split.train), len(split.valid), len(split.test)), ratios):
            if abs(size - ratio * total) > largest:
                failures.append(f"{ratios}: set size {size} deviates from quota by more than {largest}")

    pins = {"pin_valid": ("proj_03", "proj_11"), "pin_test": ("proj_07",)}
    split_dec = split_corpus(samples, seed=3, **pins)
    split_src = split_corpus(corpus(Variant.SOURCE_C), seed=3, **pins)
    if not {"proj_03", "proj_11"} <= set(split_dec.valid_projects):
        failures.append("pinned valid projects missing")
    if "proj_07" not in split_dec.test_projects:
        failures.append("pinned test project missing")
    for field in ("train_projects", "valid_projects", "test_projects"):
        if getattr(split_dec, field) != getattr(split_src, field):
            failures.append(f"{field} differs between sibling variant corpora")
    _finish(5, "cross-project split: whole projects, bounded deviation, stable pins", failures, started, 5.0)


_CANON_IN = (
    "ulong rtp_sess_ssrc(long param_1){ uint local_14; if (param_1 == 0){ local_14 = 0; }"
    " else { local_14 = *(uint *)(param_1 + 4);} return (ulong)local_14; }"
)
_CANON_OUT = (
    "ulong FUN_0(long VAR_0){ uint VAR_1; if (VAR_0 == 0){ VAR_1 = 0; }"
    " else { VAR_1 = *(uint *)(VAR_0 + 4);} return (ulong)VAR_1; }"
)


def test_c6_transform_structure():
    started = time.perf_counter()
    failures: list[str] = []
    out, _ = demi_strip(_CANON_IN, "rtp_sess_ssrc")
    if out != _CANON_OUT:
        failures.append("canonical example does not match")
    for seed in range(200):
        code, fn_name = make_pseudo(random.Random(seed))
        stripped, renames = demi_strip(code, fn_name)
        mapping = renames.as_dict()
        before, after = tokenize(code), tokenize(stripped)
        if len(before) != len(after):
            failures.append(f"seed {seed}: token count changed")
            break
        bad = False
        for old, new in zip(before, after):
            if old.kind is not new.kind:
                failures.append(f"seed {seed}: token kind changed at {old.offset}")
                bad = True
                break
            if old.kind is TokenKind.IDENTIFIER:
                if mapping.get(old.text) != new.text:
                    failures.append(f"seed {seed}: inconsistent rename of {old.text}")
                    bad = True
                    break
            elif old.text != new.text:
                failures.append(f"seed {seed}: non-identifier text changed")
                bad = True
                break
        if bad:
            break
        if len(set(mapping.values())) != len(mapping):
            failures.append(f"seed {seed}: rename map not injective")
            break
        if mapping.get(fn_name) != "FUN_0":
            failures.append(f"seed {seed}: function not renamed to FUN_0")
            break
        again, _ = demi_strip(stripped, "FUN_0")
        if again != stripped:
            failures.append(f"seed {seed}: transform not idempotent")
            break
    _finish(6, "anonymization preserves structure on 200 random functions + canonical pair", failures, started, 5.0)


def test_c7_extraction_rules_and_filters():
    started = time.perf_counter()
    failures: list[str] = []
    mode = ExtractionMode.STRICT_RULES

    def doc(text: str, style: DocStyle = DocStyle.MULTI_LINE) -> DocComment:
        span = (1, 1) if style is DocStyle.SINGLE_LINE else (1, 1 + text.count("\n"))
        return DocComment(raw_text=text, style=style, line_span=span)

    rules = [
        ("rule 1", doc("Computes the CRC of a frame. Slow.", DocStyle.SINGLE_LINE), "Computes the CRC of a frame."),
        ("rule 2", doc("@brief Select the source of Microcontroller Clock Output\n@param s id"),
         "Select the source of Microcontroller Clock Output"),
        ("rule 3", doc("Function: x\nDescription: Advances the cursor past whitespace characters. More.\nReturns: y"),
         "Advances the cursor past whitespace characters."),
        ("rule 4", doc("Returns the ssrc of the session\n\n@v session RTP session"),
         "Returns the ssrc of the session"),
        ("rule 5", doc("Copies the cname into the buffer. Must fit."),
         "Copies the cname into the buffer."),
    ]
    for label, d, want in rules:
        got = extract_summary(d, mode)
        if got != want:
            failures.append(f"{label}: {got!r} != {want!r}")

    cfg = FilterConfig()
    rejects = [
        ("See http://example.com for details", FilterReason.SPECIAL_TOKEN),
        ("Renders the <head> element first", FilterReason.SPECIAL_TOKEN),
        ("Loads C://Users/per/config.ini at boot", FilterReason.SPECIAL_TOKEN),
        ("FIXME: handle the overflow case", FilterReason.SPECIAL_TOKEN),
        ("too short", FilterReason.TOO_SHORT),
        (("frees the buffer and then resets it again " * 32).strip() + " x", FilterReason.TOO_LONG),
        ("frees the buffer", FilterReason.OK),
        (("frees the buffer and then resets it again " * 32).strip(), FilterReason.OK),
    ]
    for text, want_reason in rejects:
        got_reason = filter_summary(text, cfg).reason
        if got_reason is not want_reason:
            failures.append(f"filter({text[:32]!r}...): {got_reason.value} != {want_reason.value}")
    _finish(7, "five extraction rules and summary filters behave as documented", failures, started, 5.0)


def test_c8_pipeline_deterministic(tmp_path):
    started = time.perf_counter()
    failures: list[str] = []
    outputs = ("sources.jsonl", "functions.jsonl", "samples.jsonl", "split.json", "stats.json", "manifest.json")
    for run in ("one", "two"):
        code = cli_main(
            [
                "pipeline",
                "--src", str(CORPUS_SRC),
                "--export", str(CORPUS_EXPORT),
                "--seed", "7",
                "--workdir", str(tmp_path / run),
            ]
        )
        if code != 0:
            failures.append(f"pipeline run {run} exited {code}")
    if not failures:
        for name in outputs:
            if (tmp_path / "one" / name).read_bytes() != (tmp_path / "two" / name).read_bytes():
                failures.append(f"{name} differs between identical runs")

    if not failures:
        samples = read_records(tmp_path / "one" / "samples.jsonl", Sample)
        split = read_split(tmp_path / "one" / "split.json")
        stats = json.loads((tmp_path / "one" / "stats.json").read_text())
        recount = {
            "samples": len(samples),
            "projects": len({s.project for s in samples}),
            "binaries": len({(s.project, s.binary) for s in samples}),
            "functions": len({(s.project, s.binary, s.name) for s in samples}),
            "summary_vocab": len({w for s in samples for w in s.summary.split()}),
        }
        for key, want in recount.items():
            if stats[key] != want:
                failures.append(f"stats[{key}] {stats[key]} != recount {want}")
        ids = {s.id for s in samples}
        sizes = {
            "train": len(ids.intersection(split.train)),
            "valid": len(ids.intersection(split.valid)),
            "test": len(ids.intersection(split.test)),
        }
        if stats.get("split_sizes") != sizes:
            failures.append(f"split_sizes {stats.get('split_sizes')} != recount {sizes}")
        for variant, group in _group_by_variant(samples).items():
            vs = stats["variants"][variant]
            mean_tokens = sum(len(tokenize(s.code)) for s in group) / len(group)
            if abs(vs["mean_code_tokens"] - round(mean_tokens, 2)) > 0.01:
                failures.append(f"{variant}: mean_code_tokens {vs['mean_code_tokens']} != {mean_tokens:.2f}")
    _finish(8, "pipeline reruns are byte-identical and stats match an independent recount", failures, started, 30.0)


def _group_by_variant(samples: list[Sample]) -> dict[str, list[Sample]]:
    groups: dict[str, list[Sample]] = {}
    for s in samples:
        groups.setdefault(s.variant.value, []).append(s)
    return groups
