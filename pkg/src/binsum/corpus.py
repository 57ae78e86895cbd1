"""Corpus curation: near-duplicate removal, project splits, statistics."""

from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

from .records import BinsumError, CorpusSplit, Sample, Variant
from .transforms import TokenKind, tokenize


class CurationError(BinsumError):
    pass


# --------------------------------------------------------------------------
# code similarity
# --------------------------------------------------------------------------

_CONTENT_KINDS = (TokenKind.IDENTIFIER, TokenKind.NUMBER, TokenKind.STRING, TokenKind.CHAR)


def content_tokens(code: str) -> list[str]:
    """Identifier and literal tokens in order; the basis for similarity."""
    return [t.text for t in tokenize(code) if t.kind in _CONTENT_KINDS]


@dataclass(frozen=True)
class SimilarityConfig:
    multiset_threshold: float = 0.8
    set_threshold: float = 0.7

    def __post_init__(self) -> None:
        for name in ("multiset_threshold", "set_threshold"):
            value = getattr(self, name)
            if not 0.0 < value <= 1.0:
                raise ValueError(f"{name} must be in (0, 1], got {value}")


def similarity(tokens_a: Sequence[str], tokens_b: Sequence[str]) -> tuple[float, float]:
    """(multiset Jaccard, set Jaccard) over token bags.

    Two empty bags are identical by convention, not dissimilar: both
    values are 1.0 when there is nothing on either side.
    """
    counts_a = Counter(tokens_a)
    counts_b = Counter(tokens_b)
    inter = sum((counts_a & counts_b).values())
    union = sum((counts_a | counts_b).values())
    multiset = inter / union if union else 1.0
    set_union = len(counts_a.keys() | counts_b.keys())
    set_inter = len(counts_a.keys() & counts_b.keys())
    set_j = set_inter / set_union if set_union else 1.0
    return multiset, set_j


# --------------------------------------------------------------------------
# clustering
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DuplicateCluster:
    members: tuple[str, ...]   # sorted sample ids
    representative: str


class _UnionFind:
    def __init__(self, n: int) -> None:
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]


def cluster_items(
    items: Sequence[tuple[str, Sequence[str]]],
    cfg: SimilarityConfig = SimilarityConfig(),
    *,
    seed: int = 0,
) -> list[DuplicateCluster]:
    """Cluster (id, tokens) items into near-duplicate components.

    Pairs are edges when both Jaccard values clear their thresholds;
    clusters are the connected components. Candidate pairs come from an
    inverted token index plus a length-ratio prefilter, which cannot lose
    an edge: intersection is bounded by the smaller bag and union by the
    larger, so multiset Jaccard never exceeds their ratio.

    Representatives are drawn reproducibly: clusters ordered by smallest
    member id share one Random(seed) stream, singletons keep their only
    member without consuming a draw.
    """
    ids = [item_id for item_id, _ in items]
    if len(set(ids)) != len(ids):
        raise CurationError("duplicate ids in clustering input")
    uf = _UnionFind(len(items))

    by_token: dict[str, list[int]] = {}
    empties: list[int] = []
    for i, (_, tokens) in enumerate(items):
        if not tokens:
            empties.append(i)
            continue
        for token in set(tokens):
            by_token.setdefault(token, []).append(i)

    # empty bags are pairwise identical by convention: one component
    for prev, cur in zip(empties, empties[1:]):
        uf.union(prev, cur)

    checked: set[tuple[int, int]] = set()
    for bucket in by_token.values():
        if len(bucket) < 2:
            continue
        for x in range(len(bucket)):
            for y in range(x + 1, len(bucket)):
                a, b = bucket[x], bucket[y]
                if uf.find(a) == uf.find(b):
                    continue
                pair = (a, b)
                if pair in checked:
                    continue
                checked.add(pair)
                la, lb = len(items[a][1]), len(items[b][1])
                if min(la, lb) / max(la, lb) < cfg.multiset_threshold:
                    continue
                mj, sj = similarity(items[a][1], items[b][1])
                if mj >= cfg.multiset_threshold and sj >= cfg.set_threshold:
                    uf.union(a, b)

    components: dict[int, list[str]] = {}
    for i, item_id in enumerate(ids):
        components.setdefault(uf.find(i), []).append(item_id)
    clusters = sorted((sorted(members) for members in components.values()), key=lambda m: m[0])

    rng = random.Random(seed)
    out = []
    for members in clusters:
        representative = members[0] if len(members) == 1 else rng.choice(members)
        out.append(DuplicateCluster(members=tuple(members), representative=representative))
    return out


def cluster_duplicates(
    samples: Sequence[Sample],
    cfg: SimilarityConfig = SimilarityConfig(),
    *,
    seed: int = 0,
) -> list[DuplicateCluster]:
    return cluster_items([(s.id, content_tokens(s.code)) for s in samples], cfg, seed=seed)


def deduplicate(
    samples: Sequence[Sample],
    cfg: SimilarityConfig = SimilarityConfig(),
    *,
    seed: int = 0,
) -> tuple[list[Sample], list[DuplicateCluster]]:
    """Keep one representative per near-duplicate cluster, in input order."""
    clusters = cluster_duplicates(samples, cfg, seed=seed)
    keep = {c.representative for c in clusters}
    return [s for s in samples if s.id in keep], clusters


def deduplicate_aligned(
    samples: Sequence[Sample],
    cfg: SimilarityConfig = SimilarityConfig(),
    *,
    seed: int = 0,
    reference: Variant = Variant.DECOMPILED,
) -> tuple[list[Sample], list[DuplicateCluster], Counter]:
    """Deduplicate a multi-variant corpus without tearing variants apart.

    Clusters are computed on the reference variant only; when a reference
    sample is dropped, its siblings for the same (project, binary, name)
    go with it, so every function keeps either all of its variants or none.
    Functions without a reference-variant sample pass through untouched.
    """
    ref_samples = [s for s in samples if s.variant is reference]
    clusters = cluster_duplicates(ref_samples, cfg, seed=seed)
    keep_ids = {c.representative for c in clusters}
    dropped_keys = {
        (s.project, s.binary, s.name) for s in ref_samples if s.id not in keep_ids
    }
    kept: list[Sample] = []
    diag: Counter = Counter()
    for s in samples:
        if (s.project, s.binary, s.name) in dropped_keys:
            diag[f"dropped:{s.variant.value}"] += 1
        else:
            kept.append(s)
            diag[f"kept:{s.variant.value}"] += 1
    return kept, clusters, diag


# --------------------------------------------------------------------------
# cross-project split
# --------------------------------------------------------------------------

_SET_NAMES = ("train", "valid", "test")


def split_corpus(
    samples: Sequence[Sample],
    *,
    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1),
    seed: int = 0,
    pin_valid: Sequence[str] = (),
    pin_test: Sequence[str] = (),
) -> CorpusSplit:
    """Assign whole projects to train/valid/test, never splitting one.

    Projects are placed largest first into the set with the largest
    remaining sample deficit, ties resolved in train/valid/test order.
    Once only as many projects remain as there are still-empty sets, the
    empty sets get them, so every set ends up non-empty. Pinned projects
    are placed before any of that.
    """
    if len(ratios) != 3 or any(r <= 0 for r in ratios):
        raise CurationError(f"ratios must be three positive numbers, got {ratios!r}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise CurationError(f"ratios must sum to 1, got {sum(ratios)!r}")

    project_counts: Counter = Counter(s.project for s in samples)
    if len(project_counts) < 3:
        raise CurationError(
            f"cross-project split needs at least 3 projects, got {len(project_counts)}"
        )
    pin_valid = tuple(sorted(set(pin_valid)))
    pin_test = tuple(sorted(set(pin_test)))
    overlap = set(pin_valid) & set(pin_test)
    if overlap:
        raise CurationError(f"projects pinned to both valid and test: {sorted(overlap)}")
    unknown = (set(pin_valid) | set(pin_test)) - set(project_counts)
    if unknown:
        raise CurationError(f"pinned projects not in corpus: {sorted(unknown)}")

    total = len(samples)
    quotas = [r * total for r in ratios]
    assigned = [0.0, 0.0, 0.0]
    members: list[list[str]] = [[], [], []]

    def place(project: str, set_index: int) -> None:
        members[set_index].append(project)
        assigned[set_index] += project_counts[project]

    for project in pin_valid:
        place(project, 1)
    for project in pin_test:
        place(project, 2)

    remaining = sorted(
        (p for p in project_counts if p not in set(pin_valid) | set(pin_test)),
        key=lambda p: (-project_counts[p], p),
    )
    for position, project in enumerate(remaining):
        left = len(remaining) - position
        empty = [i for i in range(3) if not members[i]]
        candidates = empty if empty and left <= len(empty) else [0, 1, 2]
        best = max(candidates, key=lambda i: (quotas[i] - assigned[i], -i))
        place(project, best)

    project_set = {p: i for i, group in enumerate(members) for p in group}
    id_groups: list[list[str]] = [[], [], []]
    for s in samples:
        id_groups[project_set[s.project]].append(s.id)
    return CorpusSplit(
        seed=seed,
        ratios=tuple(float(r) for r in ratios),
        train=tuple(sorted(id_groups[0])),
        valid=tuple(sorted(id_groups[1])),
        test=tuple(sorted(id_groups[2])),
        train_projects=tuple(sorted(members[0])),
        valid_projects=tuple(sorted(members[1])),
        test_projects=tuple(sorted(members[2])),
        pinned_valid=pin_valid,
        pinned_test=pin_test,
    )


def subsample_train(
    split: CorpusSplit,
    fraction: float,
    seed: int | None = None,
) -> CorpusSplit:
    """Shrink the training set to a seeded fraction; valid/test untouched.

    The kept set is the prefix of one seeded permutation, so smaller
    fractions at the same seed are subsets of larger ones.
    """
    if not 0.0 < fraction <= 1.0:
        raise CurationError(f"fraction must be in (0, 1], got {fraction}")
    effective_seed = split.seed if seed is None else seed
    order = sorted(split.train)
    random.Random(effective_seed).shuffle(order)
    keep = math.ceil(fraction * len(order))
    return CorpusSplit(
        seed=effective_seed,
        ratios=split.ratios,
        train=tuple(sorted(order[:keep])),
        valid=split.valid,
        test=split.test,
        train_projects=split.train_projects,
        valid_projects=split.valid_projects,
        test_projects=split.test_projects,
        pinned_valid=split.pinned_valid,
        pinned_test=split.pinned_test,
    )


# --------------------------------------------------------------------------
# statistics
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class VariantStats:
    samples: int
    mean_code_tokens: float
    mean_code_lines: float
    mean_summary_tokens: float

    def to_json(self) -> dict[str, Any]:
        return {
            "samples": self.samples,
            "mean_code_tokens": round(self.mean_code_tokens, 2),
            "mean_code_lines": round(self.mean_code_lines, 2),
            "mean_summary_tokens": round(self.mean_summary_tokens, 2),
        }


@dataclass(frozen=True)
class CorpusStats:
    samples: int
    projects: int
    binaries: int
    functions: int
    summary_vocab: int
    variants: dict[str, VariantStats] = field(default_factory=dict)
    opt_levels: dict[str, int] = field(default_factory=dict)
    split_sizes: dict[str, int] | None = None

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "samples": self.samples,
            "projects": self.projects,
            "binaries": self.binaries,
            "functions": self.functions,
            "summary_vocab": self.summary_vocab,
            "variants": {name: vs.to_json() for name, vs in sorted(self.variants.items())},
            "opt_levels": dict(sorted(self.opt_levels.items())),
        }
        if self.split_sizes is not None:
            out["split_sizes"] = dict(sorted(self.split_sizes.items()))
        return out

    def render(self) -> str:
        lines = [
            f"samples    {self.samples}",
            f"projects   {self.projects}",
            f"binaries   {self.binaries}",
            f"functions  {self.functions}",
            f"summary vocabulary  {self.summary_vocab}",
            "",
            f"{'variant':<14}{'n':>6}{'code tok':>10}{'code loc':>10}{'sum tok':>9}",
        ]
        for name, vs in sorted(self.variants.items()):
            lines.append(
                f"{name:<14}{vs.samples:>6}{vs.mean_code_tokens:>10.2f}"
                f"{vs.mean_code_lines:>10.2f}{vs.mean_summary_tokens:>9.2f}"
            )
        if self.opt_levels:
            lines.append("")
            lines.append("opt levels  " + "  ".join(f"{k}:{v}" for k, v in sorted(self.opt_levels.items())))
        if self.split_sizes is not None:
            lines.append(
                "split sizes  " + "  ".join(f"{k}:{self.split_sizes[k]}" for k in _SET_NAMES)
            )
        return "\n".join(lines)


def compute_stats(samples: Sequence[Sample], split: CorpusSplit | None = None) -> CorpusStats:
    """Descriptive statistics; code size in lexer tokens, summaries in words."""
    per_variant: dict[str, list[Sample]] = {}
    for s in samples:
        per_variant.setdefault(s.variant.value, []).append(s)

    variants = {}
    for name, group in per_variant.items():
        n = len(group)
        variants[name] = VariantStats(
            samples=n,
            mean_code_tokens=sum(len(tokenize(s.code)) for s in group) / n,
            mean_code_lines=sum(len(s.code.splitlines()) for s in group) / n,
            mean_summary_tokens=sum(len(s.summary.split()) for s in group) / n,
        )

    vocabulary: set[str] = set()
    for s in samples:
        vocabulary.update(s.summary.split())

    opt_levels: Counter = Counter(
        s.opt_level.value for s in samples if s.opt_level is not None
    )

    split_sizes = None
    if split is not None:
        present = {s.id for s in samples}
        split_sizes = {
            "train": len(present.intersection(split.train)),
            "valid": len(present.intersection(split.valid)),
            "test": len(present.intersection(split.test)),
        }

    return CorpusStats(
        samples=len(samples),
        projects=len({s.project for s in samples}),
        binaries=len({(s.project, s.binary) for s in samples}),
        functions=len({(s.project, s.binary, s.name) for s in samples}),
        summary_vocab=len(vocabulary),
        variants=variants,
        opt_levels=dict(opt_levels),
        split_sizes=split_sizes,
    )
