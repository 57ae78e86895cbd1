"""Lexer totality and the identifier-anonymizing transforms."""

from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from binsum import (
    OptLevel,
    Sample,
    Token,
    TokenKind,
    TransformError,
    Variant,
    demi_strip,
    derive_variants,
    detokenize,
    strip_function_name,
    tokenize,
)
from testlib import mk_sample
from pseudo_gen import make_pseudo

# ---------------------------------------------------------------------------
# lexer
# ---------------------------------------------------------------------------


def test_tokenize_kinds():
    code = 'ulong f(int n) { return n + 0x1f + "s" + \'c\'; }'
    kinds = {t.text: t.kind for t in tokenize(code)}
    assert kinds["ulong"] is TokenKind.TYPE_NAME
    assert kinds["int"] is TokenKind.KEYWORD
    assert kinds["return"] is TokenKind.KEYWORD
    assert kinds["f"] is TokenKind.IDENTIFIER
    assert kinds["n"] is TokenKind.IDENTIFIER
    assert kinds["0x1f"] is TokenKind.NUMBER
    assert kinds['"s"'] is TokenKind.STRING
    assert kinds["'c'"] is TokenKind.CHAR
    assert kinds["+"] is TokenKind.OPERATOR
    assert kinds["{"] is TokenKind.PUNCT


def test_tokenize_escaped_quotes():
    code = r'"a\"b" x'
    tokens = tokenize(code)
    assert tokens[0].text == r'"a\"b"'
    assert tokens[1].text == "x"


def test_tokenize_multi_char_operators_longest_match():
    texts = [t.text for t in tokenize("a >>= b >> c >= d > e")]
    assert texts == ["a", ">>=", "b", ">>", "c", ">=", "d", ">", "e"]


def test_tokenize_numbers():
    texts = [t.text for t in tokenize("1 1u 0x1fUL 1.5 .5 1e9 1.5e-3f")]
    assert texts == ["1", "1u", "0x1fUL", "1.5", ".5", "1e9", "1.5e-3f"]


@settings(max_examples=200, deadline=None)
@given(st.text(max_size=200))
def test_lexer_total_and_splice_exact(text):
    # any string tokenizes, and splicing the tokens back reproduces it
    tokens = tokenize(text)
    assert detokenize(text, tokens) == text
    for t in tokens:
        assert text[t.offset : t.end] == t.text


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_lexer_round_trip_on_random_pseudo_c(seed):
    code, _ = make_pseudo(random.Random(seed))
    assert detokenize(code, tokenize(code)) == code


# ---------------------------------------------------------------------------
# demi_strip
# ---------------------------------------------------------------------------

_CANON_IN = (
    "ulong rtp_sess_ssrc(long param_1){ uint local_14; if (param_1 == 0){ local_14 = 0; }"
    " else { local_14 = *(uint *)(param_1 + 4);} return (ulong)local_14; }"
)
_CANON_OUT = (
    "ulong FUN_0(long VAR_0){ uint VAR_1; if (VAR_0 == 0){ VAR_1 = 0; }"
    " else { VAR_1 = *(uint *)(VAR_0 + 4);} return (ulong)VAR_1; }"
)


def test_demi_strip_canonical():
    out, renames = demi_strip(_CANON_IN, "rtp_sess_ssrc")
    assert out == _CANON_OUT
    assert renames.as_dict() == {
        "rtp_sess_ssrc": "FUN_0",
        "param_1": "VAR_0",
        "local_14": "VAR_1",
    }


def test_demi_strip_idempotent_on_canonical():
    out, _ = demi_strip(_CANON_IN, "rtp_sess_ssrc")
    again, _ = demi_strip(out, "FUN_0")
    assert again == out


def test_demi_strip_missing_name_raises():
    with pytest.raises(TransformError):
        demi_strip("int f(void) { return 0; }", "g")


def test_demi_strip_keep_generated():
    out, renames = demi_strip(_CANON_IN, "rtp_sess_ssrc", keep_generated=True)
    assert "param_1" in out and "local_14" in out
    assert out.startswith("ulong FUN_0(")
    assert renames.as_dict() == {"rtp_sess_ssrc": "FUN_0"}


def test_demi_strip_leaves_literals_untouched():
    code = 'int log_it(char *msg) { puts("log_it saw msg"); return \'m\'; }'
    out, _ = demi_strip(code, "log_it")
    assert '"log_it saw msg"' in out
    assert "'m'" in out


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_demi_strip_structure_preserved(seed):
    code, fn_name = make_pseudo(random.Random(seed))
    out, renames = demi_strip(code, fn_name)
    mapping = renames.as_dict()

    before, after = tokenize(code), tokenize(out)
    assert len(before) == len(after)
    gaps_before = _gaps(code, before)
    gaps_after = _gaps(out, after)
    assert gaps_before == gaps_after

    first_seen: list[str] = []
    for old, new in zip(before, after):
        assert old.kind is new.kind
        if old.kind is TokenKind.IDENTIFIER:
            assert mapping[old.text] == new.text
            if old.text not in first_seen:
                first_seen.append(old.text)
        else:
            assert old.text == new.text

    # injective: no two originals share a placeholder
    assert len(set(mapping.values())) == len(mapping)
    # placeholders numbered by first occurrence
    expected = {fn_name: "FUN_0"}
    counter = 0
    for name in first_seen:
        if name == fn_name:
            continue
        expected[name] = f"VAR_{counter}"
        counter += 1
    assert mapping == expected

    # inverse map restores every identifier
    inverse = renames.inverse()
    for old, new in zip(before, after):
        if old.kind is TokenKind.IDENTIFIER:
            assert inverse[new.text] == old.text


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_demi_strip_idempotent_random(seed):
    code, fn_name = make_pseudo(random.Random(seed))
    out, _ = demi_strip(code, fn_name)
    again, _ = demi_strip(out, "FUN_0")
    assert again == out


def _gaps(source: str, tokens: list[Token]) -> list[str]:
    gaps = []
    pos = 0
    for t in tokens:
        gaps.append(source[pos : t.offset])
        pos = t.end
    gaps.append(source[pos:])
    return gaps


# ---------------------------------------------------------------------------
# strip_function_name
# ---------------------------------------------------------------------------


def test_strip_function_name_only_touches_the_name():
    out = strip_function_name(_CANON_IN, "rtp_sess_ssrc")
    assert out == _CANON_IN.replace("rtp_sess_ssrc", "FUN_0")
    assert "param_1" in out and "local_14" in out


def test_strip_function_name_ignores_matches_inside_literals():
    code = 'int f(void) { puts("f"); return 0; }'
    out = strip_function_name(code, "f")
    assert out == 'int FUN_0(void) { puts("f"); return 0; }'


def test_strip_function_name_missing_raises():
    with pytest.raises(TransformError):
        strip_function_name("int f(void) { return 0; }", "missing")


# ---------------------------------------------------------------------------
# derive_variants
# ---------------------------------------------------------------------------


def _decompiled_sample() -> Sample:
    return mk_sample(
        name="rtp_sess_ssrc",
        variant=Variant.DECOMPILED,
        code=_CANON_IN,
        summary="Returns the ssrc of the session",
        opt_level=OptLevel.O3,
    )


def test_derive_variants_produces_both_defaults():
    base = _decompiled_sample()
    derived = derive_variants([base])
    by_variant = {s.variant: s for s in derived}
    assert set(by_variant) == {Variant.DEMI_STRIPPED, Variant.NO_FUNNAME}
    assert by_variant[Variant.DEMI_STRIPPED].code == _CANON_OUT
    assert by_variant[Variant.NO_FUNNAME].code == _CANON_IN.replace("rtp_sess_ssrc", "FUN_0")
    for s in derived:
        assert s.summary == base.summary
        assert s.opt_level == base.opt_level
        assert s.name == base.name
        assert s.id != base.id


def test_derive_variants_skips_non_decompiled_inputs():
    src = mk_sample(variant=Variant.SOURCE_C)
    assert derive_variants([src]) == []


def test_derive_variants_second_run_adds_nothing():
    base = _decompiled_sample()
    first = derive_variants([base])
    second = derive_variants([base, *first])
    assert second == []


def test_derive_variants_rejects_underivable_variant():
    with pytest.raises(TransformError):
        derive_variants([_decompiled_sample()], variants=(Variant.STRIPPED,))
