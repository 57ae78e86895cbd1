"""Summary-quality metrics: exact match, BLEU-4, ROUGE-L, METEOR.

All metrics share one tokenization: case-sensitive whitespace splitting.
Pass lowercase=True (the CLI's --lowercase) to fold case first; nothing
else is normalized, so punctuation stays attached to tokens.

Scores are returned on a 0..100 scale, unrounded.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .records import BinsumError, Prediction, Sample
from .stemmer import porter_stem


class EvaluationError(BinsumError):
    """Predictions that cannot be joined against the reference samples."""


def metric_tokens(text: str, lowercase: bool = False) -> list[str]:
    if lowercase:
        text = text.lower()
    return text.split()


def exact_match(reference: str, candidate: str, lowercase: bool = False) -> int:
    return int(metric_tokens(reference, lowercase) == metric_tokens(candidate, lowercase))


# --------------------------------------------------------------------------
# BLEU-4 with method-2 smoothing
# --------------------------------------------------------------------------


def _ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu4(
    reference: str,
    candidate: str,
    *,
    max_n: int = 4,
    smoothing: str = "method2",
    lowercase: bool = False,
) -> float:
    """Sentence BLEU with modified n-gram precision and brevity penalty.

    Smoothing adds one to numerator and denominator for every order above
    unigram; the unigram precision is left alone, so a candidate with no
    token overlap scores exactly 0.
    """
    if smoothing != "method2":
        raise ValueError(f"unsupported smoothing {smoothing!r}")
    ref = metric_tokens(reference, lowercase)
    cand = metric_tokens(candidate, lowercase)
    if not ref or not cand:
        return 0.0
    log_sum = 0.0
    for n in range(1, max_n + 1):
        cand_counts = _ngram_counts(cand, n)
        ref_counts = _ngram_counts(ref, n)
        matched = sum(min(count, ref_counts[g]) for g, count in cand_counts.items())
        total = sum(cand_counts.values())
        if n == 1:
            if matched == 0:
                return 0.0
            precision = matched / total
        else:
            precision = (matched + 1) / (total + 1)
        log_sum += math.log(precision)
    geo_mean = math.exp(log_sum / max_n)
    if len(cand) >= len(ref):
        brevity = 1.0
    else:
        brevity = math.exp(1.0 - len(ref) / len(cand))
    return 100.0 * geo_mean * brevity


# --------------------------------------------------------------------------
# ROUGE-L
# --------------------------------------------------------------------------


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    # single-row DP
    if not a or not b:
        return 0
    row = [0] * (len(b) + 1)
    for i in range(1, len(a) + 1):
        previous_diag = 0
        for j in range(1, len(b) + 1):
            tmp = row[j]
            if a[i - 1] == b[j - 1]:
                row[j] = previous_diag + 1
            else:
                row[j] = max(row[j], row[j - 1])
            previous_diag = tmp
    return row[len(b)]


def rouge_l(
    reference: str,
    candidate: str,
    *,
    beta: float = 1.2,
    lowercase: bool = False,
) -> float:
    """Longest-common-subsequence F-score; beta weighs recall over precision."""
    ref = metric_tokens(reference, lowercase)
    cand = metric_tokens(candidate, lowercase)
    length = _lcs_length(ref, cand)
    if length == 0:
        return 0.0
    precision = length / len(cand)
    recall = length / len(ref)
    f = (1 + beta * beta) * precision * recall / (recall + beta * beta * precision)
    return 100.0 * f


# --------------------------------------------------------------------------
# METEOR
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MeteorParams:
    recall_weight: float = 9.0
    penalty_coeff: float = 0.5
    penalty_exp: float = 3.0


# Alignment objective, in priority order: most matched unigrams, most exact
# matches, most stem matches, fewest chunks. The exact search is guaranteed
# only up to this many matchable candidate positions; beyond it a greedy
# staged alignment is used.
_EXACT_SEARCH_LIMIT = 16

_EXACT, _STEM, _SYN = 0, 1, 2


def _pair_tiers(
    cand: list[str],
    ref: list[str],
    stemmer,
    synonyms: Mapping[str, frozenset[str] | set[str]] | None,
) -> list[list[tuple[int, int]]]:
    """For each candidate position, the (tier, ref position) pairs allowed."""
    stems_c = [stemmer(w) for w in cand] if stemmer is not None else None
    stems_r = [stemmer(w) for w in ref] if stemmer is not None else None
    out: list[list[tuple[int, int]]] = []
    for i, w in enumerate(cand):
        row = []
        for j, v in enumerate(ref):
            if w == v:
                row.append((_EXACT, j))
            elif stems_c is not None and stems_c[i] == stems_r[j]:
                row.append((_STEM, j))
            elif synonyms is not None and (
                v in synonyms.get(w, ()) or w in synonyms.get(v, ())
            ):
                row.append((_SYN, j))
        out.append(row)
    return out


def _chunks_of(pairs: list[tuple[int, int]]) -> int:
    ordered = sorted(pairs)
    chunks = 0
    prev_i = prev_j = -2
    for i, j in ordered:
        if i != prev_i + 1 or j != prev_j + 1:
            chunks += 1
        prev_i, prev_j = i, j
    return chunks


def _greedy_alignment(tiers: list[list[tuple[int, int]]], ref_len: int) -> list[tuple[int, int, int]]:
    """Stage-by-stage greedy: exact, then stem, then synonym matches.

    Within a stage, candidate positions are taken left to right and each
    prefers the ref position continuing its left neighbour's chunk.
    """
    used_ref = [False] * ref_len
    match_of: dict[int, tuple[int, int]] = {}
    for stage in (_EXACT, _STEM, _SYN):
        for i, row in enumerate(tiers):
            if i in match_of:
                continue
            options = [j for tier, j in row if tier == stage and not used_ref[j]]
            if not options:
                continue
            prev = match_of.get(i - 1)
            want = prev[0] + 1 if prev is not None else -1
            j = want if want in options else options[0]
            used_ref[j] = True
            match_of[i] = (j, stage)
    return [(i, j, stage) for i, (j, stage) in sorted(match_of.items())]


def _best_alignment(tiers: list[list[tuple[int, int]]], ref_len: int) -> tuple[int, int]:
    """Returns (matches, chunks) under the alignment objective."""
    matchable = sum(1 for row in tiers if row)
    greedy = _greedy_alignment(tiers, ref_len)
    best = [
        -len(greedy),
        -sum(1 for _, _, s in greedy if s == _EXACT),
        -sum(1 for _, _, s in greedy if s == _STEM),
        _chunks_of([(i, j) for i, j, _ in greedy]),
    ]
    if matchable > _EXACT_SEARCH_LIMIT:
        return -best[0], best[3]

    used = [False] * ref_len
    chosen: list[tuple[int, int]] = []
    # per-tier counts of positions at index >= k that have that tier available,
    # used as an admissible bound for pruning
    n = len(tiers)
    suffix_any = [0] * (n + 1)
    suffix_exact = [0] * (n + 1)
    suffix_stem = [0] * (n + 1)
    for k in range(n - 1, -1, -1):
        row_tiers = {t for t, _ in tiers[k]}
        suffix_any[k] = suffix_any[k + 1] + (1 if tiers[k] else 0)
        suffix_exact[k] = suffix_exact[k + 1] + (1 if _EXACT in row_tiers else 0)
        suffix_stem[k] = suffix_stem[k + 1] + (1 if _STEM in row_tiers else 0)

    def search(pos: int, used_count: int, exact: int, stems: int) -> None:
        free_refs = ref_len - used_count
        optimistic = [
            -(len(chosen) + min(suffix_any[pos], free_refs)),
            -(exact + min(suffix_exact[pos], free_refs)),
            -(stems + min(suffix_stem[pos], free_refs)),
            1,
        ]
        if optimistic >= best:
            return
        if pos == n:
            key = [-len(chosen), -exact, -stems, _chunks_of(chosen)]
            if key < best:
                best[:] = key
            return
        for tier, j in tiers[pos]:
            if not used[j]:
                used[j] = True
                chosen.append((pos, j))
                search(pos + 1, used_count + 1, exact + (tier == _EXACT), stems + (tier == _STEM))
                chosen.pop()
                used[j] = False
        search(pos + 1, used_count, exact, stems)

    search(0, 0, 0, 0)
    return -best[0], best[3]


def meteor(
    reference: str,
    candidate: str,
    *,
    params: MeteorParams = MeteorParams(),
    synonyms: Mapping[str, frozenset[str] | set[str]] | None = None,
    stemmer=porter_stem,
    lowercase: bool = False,
) -> float:
    """Unigram alignment score with a fragmentation penalty.

    Matching runs in stages: exact token equality, then equal Porter stems,
    then an optional synonym table. Among alignments of maximal size the
    least fragmented one is scored. Pass stemmer=None to disable stemming.
    """
    ref = metric_tokens(reference, lowercase)
    cand = metric_tokens(candidate, lowercase)
    if not ref or not cand:
        return 0.0
    tiers = _pair_tiers(cand, ref, stemmer, synonyms)
    matches, chunks = _best_alignment(tiers, len(ref))
    if matches == 0:
        return 0.0
    precision = matches / len(cand)
    recall = matches / len(ref)
    w = params.recall_weight
    fmean = (w + 1.0) * precision * recall / (recall + w * precision)
    penalty = params.penalty_coeff * (chunks / matches) ** params.penalty_exp
    return 100.0 * fmean * (1.0 - penalty)


# --------------------------------------------------------------------------
# corpus-level evaluation
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MetricConfig:
    lowercase: bool = False
    bleu_max_n: int = 4
    bleu_smoothing: str = "method2"
    rouge_beta: float = 1.2
    meteor_params: MeteorParams = field(default_factory=MeteorParams)
    synonyms: Mapping[str, frozenset[str]] | None = None


@dataclass(frozen=True)
class MetricReport:
    n: int
    em: float
    bleu4: float
    rouge_l: float
    meteor: float
    missing_predictions: int

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "em": round(self.em, 2),
            "bleu4": round(self.bleu4, 2),
            "rouge_l": round(self.rouge_l, 2),
            "meteor": round(self.meteor, 2),
            "missing_predictions": self.missing_predictions,
        }

    def render(self) -> str:
        lines = [
            f"samples scored   {self.n}",
            f"missing preds    {self.missing_predictions}",
            f"EM               {self.em:.2f}",
            f"BLEU-4           {self.bleu4:.2f}",
            f"ROUGE-L          {self.rouge_l:.2f}",
            f"METEOR           {self.meteor:.2f}",
        ]
        return "\n".join(lines)


def evaluate(
    samples: Sequence[Sample],
    predictions: Iterable[Prediction],
    cfg: MetricConfig = MetricConfig(),
) -> MetricReport:
    """Score predictions against sample summaries, averaging per sample.

    Samples without a prediction score 0 on every metric and are counted in
    missing_predictions. Predictions whose sample_id is not among the given
    samples, or that target one sample twice, raise EvaluationError.
    """
    by_id: dict[str, str] = {}
    duplicates: list[str] = []
    for p in predictions:
        if p.sample_id in by_id:
            duplicates.append(p.sample_id)
        by_id[p.sample_id] = p.candidate
    if duplicates:
        raise EvaluationError(f"duplicate predictions for sample ids: {sorted(set(duplicates))}")
    known = {s.id for s in samples}
    unresolved = sorted(set(by_id) - known)
    if unresolved:
        raise EvaluationError(f"predictions reference unknown sample ids: {unresolved}")
    if not samples:
        return MetricReport(0, 0.0, 0.0, 0.0, 0.0, 0)

    missing = 0
    sums = {"em": 0.0, "bleu4": 0.0, "rouge_l": 0.0, "meteor": 0.0}
    for s in samples:
        candidate = by_id.get(s.id)
        if candidate is None:
            missing += 1
            continue
        sums["em"] += 100.0 * exact_match(s.summary, candidate, cfg.lowercase)
        sums["bleu4"] += bleu4(
            s.summary,
            candidate,
            max_n=cfg.bleu_max_n,
            smoothing=cfg.bleu_smoothing,
            lowercase=cfg.lowercase,
        )
        sums["rouge_l"] += rouge_l(s.summary, candidate, beta=cfg.rouge_beta, lowercase=cfg.lowercase)
        sums["meteor"] += meteor(
            s.summary,
            candidate,
            params=cfg.meteor_params,
            synonyms=cfg.synonyms,
            lowercase=cfg.lowercase,
        )
    n = len(samples)
    return MetricReport(
        n=n,
        em=sums["em"] / n,
        bleu4=sums["bleu4"] / n,
        rouge_l=sums["rouge_l"] / n,
        meteor=sums["meteor"] / n,
        missing_predictions=missing,
    )
