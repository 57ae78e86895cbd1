"""
Deriving anonymized code variants
=================================

Each decompiled function yields harder variants of itself: one with
every identifier replaced by a placeholder, one with only the function
name hidden. Summaries carry over unchanged.
"""

from binsum import OptLevel, Sample, Variant, demi_strip, derive_variants, strip_function_name

pseudo_c = """ulong rtp_sess_ssrc(long param_1)
{
  uint local_14;
  if (param_1 == 0) {
    local_14 = 0;
  }
  else {
    local_14 = *(uint *)(param_1 + 4);
  }
  return (ulong)local_14;
}
"""

# full anonymization: the function becomes FUN_0, everything else VAR_k
stripped, renames = demi_strip(pseudo_c, "rtp_sess_ssrc")
print(stripped)
print("rename map:")
for old, new in renames.mapping:
    print(f"  {old:<14} -> {new}")

# the inverse mapping restores the original names
assert renames.inverse()["VAR_0"] == "param_1"

# the gentler variant hides only the function's own name
print(strip_function_name(pseudo_c, "rtp_sess_ssrc"))

# decompiler-generated names can be kept when only real names should go
kept, _ = demi_strip(pseudo_c, "rtp_sess_ssrc", keep_generated=True)
print(kept)

# over a corpus, variants are derived per decompiled sample
base = Sample.make(
    project="rtpcore",
    binary="rtpcore_O3.elf",
    name="rtp_sess_ssrc",
    variant=Variant.DECOMPILED,
    code=pseudo_c,
    summary="Returns the ssrc of the session",
    opt_level=OptLevel.O3,
)
for derived in derive_variants([base]):
    print(f"{derived.variant.value:<14} id={derived.id} summary={derived.summary!r}")
