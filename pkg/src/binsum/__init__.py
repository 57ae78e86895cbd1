"""Corpora of decompiled C functions paired with natural-language summaries.

The package covers the full round trip: scanning C sources for documented
functions, ingesting decompiler exports, aligning the two into samples,
deriving anonymized code variants, removing near-duplicates, producing
cross-project splits, and scoring summary predictions with reference
metrics. File interchange is newline-delimited JSON throughout, written
byte-deterministically so identical inputs give identical corpora.
"""

from .corpus import (
    CorpusStats,
    CurationError,
    DuplicateCluster,
    SimilarityConfig,
    VariantStats,
    cluster_duplicates,
    cluster_items,
    compute_stats,
    content_tokens,
    deduplicate,
    deduplicate_aligned,
    similarity,
    split_corpus,
    subsample_train,
)
from .ingest import align, attach_stripped, ingest_decompiled, normalize_opt_level
from .lang import (
    HeuristicLanguageDetector,
    LanguageDetector,
    LanguageGuess,
    detect_language,
    is_english,
)
from .metrics import (
    EvaluationError,
    MeteorParams,
    MetricConfig,
    MetricReport,
    bleu4,
    evaluate,
    exact_match,
    meteor,
    metric_tokens,
    rouge_l,
)
from .records import (
    BinsumError,
    CorpusSplit,
    DecompiledFunction,
    DocComment,
    DocStyle,
    OptLevel,
    Prediction,
    RecordError,
    Sample,
    SourceFunction,
    Variant,
    read_records,
    read_split,
    sample_id,
    write_records,
    write_split,
)
from .source_docs import (
    ExtractionMode,
    FilterConfig,
    FilterReason,
    FilterVerdict,
    SummaryRule,
    doc_candidates_in,
    extract_functions,
    extract_summary,
    filter_summary,
    scan_source_dir,
    selected_rule,
    split_sentences,
)
from .stemmer import identity_stem, porter_stem
from .transforms import (
    RenameMap,
    Token,
    TokenKind,
    TransformError,
    demi_strip,
    derive_variants,
    detokenize,
    strip_function_name,
    tokenize,
)

__all__ = [
    "BinsumError",
    "CorpusSplit",
    "CorpusStats",
    "CurationError",
    "DecompiledFunction",
    "DocComment",
    "DocStyle",
    "DuplicateCluster",
    "EvaluationError",
    "ExtractionMode",
    "FilterConfig",
    "FilterReason",
    "FilterVerdict",
    "HeuristicLanguageDetector",
    "LanguageDetector",
    "LanguageGuess",
    "MeteorParams",
    "MetricConfig",
    "MetricReport",
    "OptLevel",
    "Prediction",
    "RecordError",
    "RenameMap",
    "Sample",
    "SimilarityConfig",
    "SourceFunction",
    "SummaryRule",
    "Token",
    "TokenKind",
    "TransformError",
    "Variant",
    "VariantStats",
    "align",
    "attach_stripped",
    "bleu4",
    "cluster_duplicates",
    "cluster_items",
    "compute_stats",
    "content_tokens",
    "deduplicate",
    "deduplicate_aligned",
    "derive_variants",
    "demi_strip",
    "detect_language",
    "detokenize",
    "doc_candidates_in",
    "evaluate",
    "exact_match",
    "extract_functions",
    "extract_summary",
    "filter_summary",
    "identity_stem",
    "ingest_decompiled",
    "is_english",
    "meteor",
    "metric_tokens",
    "normalize_opt_level",
    "porter_stem",
    "read_records",
    "read_split",
    "rouge_l",
    "sample_id",
    "scan_source_dir",
    "selected_rule",
    "similarity",
    "split_corpus",
    "split_sentences",
    "strip_function_name",
    "subsample_train",
    "tokenize",
    "write_records",
    "write_split",
]
