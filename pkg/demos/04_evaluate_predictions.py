"""
Scoring predicted summaries
===========================

Evaluate candidate summaries against the corpus references with
sentence-level EM, BLEU-4, ROUGE-L and METEOR, all averaged over
every sample, missing predictions included as zeros.
"""

from pathlib import Path

from binsum import (
    MetricConfig,
    Prediction,
    Variant,
    align,
    bleu4,
    evaluate,
    ingest_decompiled,
    meteor,
    rouge_l,
    scan_source_dir,
)

ROOT = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "corpus"

sources = []
for project_dir in sorted((ROOT / "src").iterdir()):
    sources.extend(scan_source_dir(project_dir, project_dir.name))
functions, _ = ingest_decompiled(ROOT / "decompiled.jsonl")
samples, _ = align(functions, sources, variants=(Variant.DECOMPILED,))

# single pairs first: the metrics work on raw strings
ref = "Returns the ssrc of the session"
for cand in (ref, "returns the SSRC for a session", "Frees the session"):
    print(f"{cand!r:<36} bleu {bleu4(ref, cand):6.2f}  "
          f"rouge {rouge_l(ref, cand):6.2f}  meteor {meteor(ref, cand):6.2f}")

# an oracle predictor echoes every reference: only METEOR stays below
# 100 because its fragmentation penalty never fully vanishes
echo = [Prediction(s.id, s.summary) for s in samples]
print("\necho predictor")
print(evaluate(samples, echo).render())

# a sloppier predictor drops the last word and one prediction entirely
sloppy = [
    Prediction(s.id, " ".join(s.summary.split()[:-1]))
    for s in samples[1:]
]
print("\ntruncating predictor")
print(evaluate(samples, sloppy).render())

# case differences can be forgiven by scoring lowercased
print("\ntruncating predictor, lowercased")
print(evaluate(samples, sloppy, MetricConfig(lowercase=True)).render())
