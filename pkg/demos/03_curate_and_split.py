"""
Curating the corpus: near-duplicates, splits, statistics
========================================================

Cluster near-identical functions so only one survives, partition whole
projects into train/valid/test, and describe what is left.
"""

from pathlib import Path

from binsum import (
    align,
    compute_stats,
    deduplicate_aligned,
    derive_variants,
    ingest_decompiled,
    scan_source_dir,
    split_corpus,
    subsample_train,
)

ROOT = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "corpus"

sources = []
for project_dir in sorted((ROOT / "src").iterdir()):
    sources.extend(scan_source_dir(project_dir, project_dir.name))
functions, _ = ingest_decompiled(ROOT / "decompiled.jsonl")
samples, _ = align(functions, sources)
samples.extend(derive_variants(samples))

# similarity is measured over identifier and literal tokens only,
# so renamed twins of the same routine still cluster together
kept, clusters, diag = deduplicate_aligned(samples, seed=7)
print(f"dedup: {len(samples)} -> {len(kept)} samples")
for cluster in clusters:
    if len(cluster.members) > 1:
        print(f"  cluster {list(cluster.members)} keeps {cluster.representative}")

# whole projects move together so test functions are never train neighbors
split = split_corpus(kept, ratios=(0.8, 0.1, 0.1), seed=7)
print(f"\ntrain projects: {split.train_projects}")
print(f"valid projects: {split.valid_projects}")
print(f"test projects:  {split.test_projects}")
print(f"sizes: {len(split.train)}/{len(split.valid)}/{len(split.test)}")

# training curves need nested subsets: smaller fractions are subsets
half = subsample_train(split, 0.5)
tenth = subsample_train(split, 0.1)
assert set(tenth.train) <= set(half.train) <= set(split.train)
print(f"subsampled train sizes: {len(split.train)} / {len(half.train)} / {len(tenth.train)}")

print()
print(compute_stats(kept, split).render())
