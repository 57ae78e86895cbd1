"""
Building an aligned corpus from sources and a decompiler export
===============================================================

Scan C projects for documented functions, ingest the matching
decompiler export, and pair the two by (project, function name).
"""

from collections import Counter
from pathlib import Path

from binsum import align, attach_stripped, ingest_decompiled, scan_source_dir

ROOT = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "corpus"

# every subdirectory of the source tree is one project
sources = []
for project_dir in sorted((ROOT / "src").iterdir()):
    tally = Counter()
    batch = scan_source_dir(project_dir, project_dir.name, tally)
    sources.extend(batch)
    documented = sum(1 for f in batch if f.doc is not None)
    print(f"{project_dir.name:<10} {len(batch):>3} functions, {documented} documented")

# the export is one JSON object per decompiled function
functions, diag = ingest_decompiled(ROOT / "decompiled.jsonl")
print(f"\ningested {diag['ingested']}/{diag['total']} records "
      f"({diag['stripped']} stripped, {diag['missing_pseudo_c']} without pseudo-C)")

# align decompiled functions with their documented source twins
samples, buckets = align(functions, sources)
print("\nalignment buckets")
for key in sorted(buckets):
    print(f"  {key:<26} {buckets[key]}")

# stripped-binary functions re-enter by address instead of by name
extra, attach_diag = attach_stripped(samples, functions)
samples.extend(extra)
print(f"\nattached {attach_diag['stripped_attached']} of "
      f"{attach_diag['stripped_input']} stripped functions by address")

print("\nsample summaries")
for s in samples[:4]:
    print(f"  {s.project}/{s.name} [{s.variant.value}]: {s.summary}")
