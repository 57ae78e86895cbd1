"""Record round-trips, id stability, and byte-deterministic file IO."""

from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from binsum import (
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
from testlib import mk_sample

# ---------------------------------------------------------------------------
# sample ids
# ---------------------------------------------------------------------------


def test_sample_id_is_stable_hex64():
    sid = sample_id("zlib", "libz.so", "inflate", Variant.DECOMPILED)
    assert sid == sample_id("zlib", "libz.so", "inflate", "decompiled")
    assert len(sid) == 16
    int(sid, 16)


def test_sample_id_distinguishes_every_field():
    base = ("zlib", "libz.so", "inflate", Variant.DECOMPILED)
    seen = {sample_id(*base)}
    for variant in Variant:
        seen.add(sample_id("zlib", "libz.so", "inflate", variant))
    seen.add(sample_id("zlib2", "libz.so", "inflate", Variant.DECOMPILED))
    seen.add(sample_id("zlib", "libz2.so", "inflate", Variant.DECOMPILED))
    seen.add(sample_id("zlib", "libz.so", "inflate2", Variant.DECOMPILED))
    assert len(seen) == len(Variant) + 3


def test_sample_id_fields_do_not_bleed_into_each_other():
    # separator must keep ("ab", "c") distinct from ("a", "bc")
    assert sample_id("ab", "c", "f", "decompiled") != sample_id("a", "bc", "f", "decompiled")


def test_sample_make_derives_id():
    s = mk_sample()
    assert s.id == sample_id(s.project, s.binary, s.name, s.variant)


# ---------------------------------------------------------------------------
# to_json / from_json round trips
# ---------------------------------------------------------------------------


def test_sample_round_trip():
    s = mk_sample(summary="Frees the session and its buffers.")
    assert Sample.from_json(s.to_json()) == s


def test_sample_round_trip_none_fields():
    s = mk_sample(opt_level=None, source_file=None)
    assert Sample.from_json(s.to_json()) == s


def test_sample_golden_field_names():
    d = mk_sample().to_json()
    assert list(d) == [
        "id",
        "project",
        "binary",
        "name",
        "variant",
        "code",
        "summary",
        "opt_level",
        "source_file",
    ]


def test_prediction_round_trip_allows_empty_candidate():
    p = Prediction(sample_id="0123456789abcdef", candidate="")
    assert Prediction.from_json(p.to_json()) == p


def test_doc_comment_round_trip():
    doc = DocComment(raw_text="Computes a checksum.", style=DocStyle.MULTI_LINE, line_span=(3, 6))
    assert DocComment.from_json(doc.to_json()) == doc


def test_doc_comment_rejects_inverted_span():
    with pytest.raises(RecordError):
        DocComment.from_json({"raw_text": "x", "style": "multi_line", "line_span": [6, 3]})


def test_doc_comment_single_line_span_must_be_one_line():
    with pytest.raises(RecordError):
        DocComment.from_json({"raw_text": "x", "style": "single_line", "line_span": [3, 4]})


def test_source_function_round_trip():
    fn = SourceFunction(
        project="rtpcore",
        file_path="src/rtp.c",
        name="rtp_free",
        signature="void rtp_free(struct rtp *r)",
        body_text="void rtp_free(struct rtp *r)\n{\n    free(r);\n}",
        start_line=10,
        end_line=13,
        doc=DocComment("Frees the session.", DocStyle.SINGLE_LINE, (9, 9)),
    )
    assert SourceFunction.from_json(fn.to_json()) == fn


def test_decompiled_function_round_trip():
    fn = DecompiledFunction(
        project="rtpcore",
        binary="rtpcore_O2.elf",
        name="rtp_free",
        pseudo_c="void rtp_free(long param_1) { free(param_1); }",
        opt_level_raw="-O2",
        opt_level=OptLevel.O2,
        stripped=False,
        address="0x00101000",
    )
    assert DecompiledFunction.from_json(fn.to_json()) == fn


def test_decompiled_stripped_real_name_rejected():
    d = {
        "project": "p",
        "binary": "b",
        "name": "real_name",
        "pseudo_c": "x",
        "opt_level_raw": "-O2",
        "opt_level": "O2",
        "stripped": True,
        "address": None,
    }
    with pytest.raises(RecordError) as err:
        DecompiledFunction.from_json(d)
    assert err.value.field == "name"


def test_decompiled_stripped_placeholder_name_allowed():
    d = {
        "project": "p",
        "binary": "b",
        "name": "FUN_00101a30",
        "pseudo_c": "x",
        "opt_level_raw": "-O2",
        "opt_level": "O2",
        "stripped": True,
        "address": "0x00101a30",
    }
    assert DecompiledFunction.from_json(d).stripped


def test_corpus_split_round_trip():
    split = CorpusSplit(
        seed=7,
        ratios=(0.8, 0.1, 0.1),
        train=("a1", "a2"),
        valid=("b1",),
        test=("c1",),
        train_projects=("alpha",),
        valid_projects=("beta",),
        test_projects=("gamma",),
        pinned_valid=("beta",),
        pinned_test=(),
    )
    assert CorpusSplit.from_json(split.to_json()) == split


def test_corpus_split_tolerates_missing_pin_fields():
    d = CorpusSplit(
        seed=0,
        ratios=(0.8, 0.1, 0.1),
        train=(),
        valid=(),
        test=(),
        train_projects=(),
        valid_projects=(),
        test_projects=(),
    ).to_json()
    del d["pinned_valid"]
    del d["pinned_test"]
    split = CorpusSplit.from_json(d)
    assert split.pinned_valid == () and split.pinned_test == ()


# ---------------------------------------------------------------------------
# validation errors carry line and field
# ---------------------------------------------------------------------------


def test_missing_field_names_line_and_field(tmp_path):
    path = tmp_path / "bad.jsonl"
    row = mk_sample().to_json()
    del row["summary"]
    path.write_text(json.dumps(row) + "\n", encoding="utf-8")
    with pytest.raises(RecordError) as err:
        read_records(path, Sample)
    assert err.value.line == 1
    assert err.value.field == "summary"


def test_wrong_type_rejected(tmp_path):
    path = tmp_path / "bad.jsonl"
    row = mk_sample().to_json()
    row["code"] = 42
    path.write_text(json.dumps(row) + "\n", encoding="utf-8")
    with pytest.raises(RecordError) as err:
        read_records(path, Sample)
    assert err.value.field == "code"


def test_invalid_json_line_number(tmp_path):
    path = tmp_path / "bad.jsonl"
    good = json.dumps(mk_sample().to_json())
    path.write_text(good + "\n{oops\n", encoding="utf-8")
    with pytest.raises(RecordError) as err:
        read_records(path, Sample)
    assert err.value.line == 2


def test_bad_enum_value_rejected(tmp_path):
    path = tmp_path / "bad.jsonl"
    row = mk_sample().to_json()
    row["variant"] = "sideways"
    path.write_text(json.dumps(row) + "\n", encoding="utf-8")
    with pytest.raises(RecordError) as err:
        read_records(path, Sample)
    assert err.value.field == "variant"


# ---------------------------------------------------------------------------
# file IO determinism
# ---------------------------------------------------------------------------


def test_write_records_sorted_and_deterministic(tmp_path):
    samples = [
        mk_sample(name="zeta"),
        mk_sample(name="alpha"),
        mk_sample(name="mid"),
    ]
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    write_records(samples, a)
    write_records(list(reversed(samples)), b)
    assert a.read_bytes() == b.read_bytes()
    back = read_records(a, Sample)
    assert [s.id for s in back] == sorted(s.id for s in samples)


def test_read_records_skips_blank_lines(tmp_path):
    path = tmp_path / "sparse.jsonl"
    row = json.dumps(mk_sample().to_json())
    path.write_text("\n" + row + "\n\n", encoding="utf-8")
    assert len(read_records(path, Sample)) == 1


def test_split_file_round_trip(tmp_path):
    split = CorpusSplit(
        seed=3,
        ratios=(0.6, 0.2, 0.2),
        train=("t1",),
        valid=("v1",),
        test=("s1",),
        train_projects=("a",),
        valid_projects=("b",),
        test_projects=("c",),
    )
    path = tmp_path / "split.json"
    write_split(split, path)
    assert read_split(path) == split


_text = st.text(
    alphabet=st.characters(blacklist_categories=("Cs",)),
    min_size=1,
    max_size=60,
)


@settings(max_examples=60, deadline=None)
@given(
    code=_text,
    summary=_text,
    name=st.text(
        alphabet=st.sampled_from("abcdefghijklmnopqrstuvwxyz_0123456789"),
        min_size=1,
        max_size=20,
    ),
)
def test_sample_file_round_trip_survives_odd_text(tmp_path_factory, code, summary, name):
    # newlines, quotes, and non-ASCII in payload fields must survive the file
    tmp = tmp_path_factory.mktemp("records")
    sample = mk_sample(name=name, code=code + "\n\"'é中", summary=summary)
    path = tmp / "s.jsonl"
    write_records([sample], path)
    assert read_records(path, Sample) == [sample]
