"""Pseudo-C lexing and identifier-anonymizing transforms.

The lexer is total: any input string tokenizes, unknown bytes become
one-character punctuation tokens, and splicing token texts back between
the original whitespace reproduces the input byte for byte. That property
is what lets the rename transforms preserve layout exactly.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from .records import BinsumError, OptLevel, Sample, Variant


class TransformError(BinsumError):
    pass


class TokenKind(str, enum.Enum):
    IDENTIFIER = "identifier"
    KEYWORD = "keyword"
    TYPE_NAME = "type_name"
    NUMBER = "number"
    STRING = "string"
    CHAR = "char"
    OPERATOR = "operator"
    PUNCT = "punct"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    offset: int

    @property
    def end(self) -> int:
        return self.offset + len(self.text)


C_KEYWORDS = frozenset(
    """auto break case char const continue default do double else enum extern
    float for goto if inline int long register restrict return short signed
    sizeof static struct switch typedef union unsigned void volatile while
    _Alignas _Alignof _Atomic _Bool _Complex _Generic _Imaginary _Noreturn
    _Static_assert _Thread_local""".split()
)

# primitive type names the decompiler prints that are not C keywords
DECOMPILER_TYPES = frozenset(
    ["ulong", "uint", "ushort", "byte", "bool", "undefined", "code", "char16"]
    + [f"undefined{n}" for n in range(1, 9)]
    + [f"int{n}" for n in range(3, 8)]
    + [f"uint{n}" for n in range(3, 8)]
)

_WORD_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUMBER_RE = re.compile(
    r"0[xX][0-9a-fA-F]+[uUlL]*"
    r"|(?:\d+\.\d*|\.\d+)(?:[eE][+-]?\d+)?[fFlL]*"
    r"|\d+[eE][+-]?\d+[fFlL]*"
    r"|\d+[uUlL]*"
)

_OPERATORS = [
    ">>=", "<<=", "...",
    "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||",
    "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=",
    "+", "-", "*", "/", "%", "=", "<", ">", "!", "&", "|", "^", "~", "?", ":", ".",
]

_PUNCT = frozenset("(){}[];,")


def _scan_quoted(text: str, start: int, quote: str) -> int:
    """End offset of a quoted literal starting at `start`; lenient on EOF."""
    i = start + 1
    while i < len(text):
        ch = text[i]
        if ch == "\\" and i + 1 < len(text):
            i += 2
            continue
        i += 1
        if ch == quote:
            break
    return i


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch == '"' or ch == "'":
            end = _scan_quoted(text, i, ch)
            kind = TokenKind.STRING if ch == '"' else TokenKind.CHAR
            tokens.append(Token(kind, text[i:end], i))
            i = end
            continue
        m = _WORD_RE.match(text, i)
        if m is not None:
            word = m.group()
            if word in C_KEYWORDS:
                kind = TokenKind.KEYWORD
            elif word in DECOMPILER_TYPES:
                kind = TokenKind.TYPE_NAME
            else:
                kind = TokenKind.IDENTIFIER
            tokens.append(Token(kind, word, i))
            i = m.end()
            continue
        m = _NUMBER_RE.match(text, i)
        if m is not None:
            tokens.append(Token(TokenKind.NUMBER, m.group(), i))
            i = m.end()
            continue
        matched_op = None
        for op in _OPERATORS:
            if text.startswith(op, i):
                matched_op = op
                break
        if matched_op is not None:
            tokens.append(Token(TokenKind.OPERATOR, matched_op, i))
            i += len(matched_op)
            continue
        # known punctuation and any unknown byte: one-character token
        tokens.append(Token(TokenKind.PUNCT, ch, i))
        i += 1
    return tokens


def detokenize(source: str, tokens: Sequence[Token]) -> str:
    """Splice token texts back between the whitespace runs of `source`."""
    parts: list[str] = []
    pos = 0
    for t in tokens:
        parts.append(source[pos : t.offset])
        parts.append(t.text)
        pos = t.end
    parts.append(source[pos:])
    return "".join(parts)


def _rewrite(source: str, tokens: Sequence[Token], mapping: dict[str, str]) -> str:
    parts: list[str] = []
    pos = 0
    for t in tokens:
        parts.append(source[pos : t.offset])
        if t.kind is TokenKind.IDENTIFIER and t.text in mapping:
            parts.append(mapping[t.text])
        else:
            parts.append(t.text)
        pos = t.end
    parts.append(source[pos:])
    return "".join(parts)


# --------------------------------------------------------------------------
# renames
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RenameMap:
    """Injective mapping from original identifiers to placeholder names."""

    mapping: tuple[tuple[str, str], ...]

    def as_dict(self) -> dict[str, str]:
        return dict(self.mapping)

    def inverse(self) -> dict[str, str]:
        return {new: old for old, new in self.mapping}


# decompiler-generated locals and parameters, preserved by --keep-generated
GENERATED_NAME_RE = re.compile(
    r"param_\d+"
    r"|local_[0-9a-fA-F_]+"
    r"|[a-z]{0,4}Var\d+"
    r"|[a-z]{0,4}Stack_?[0-9a-fA-F]+"
    r"|DAT_[0-9a-fA-F]+"
    r"|LAB_[0-9a-fA-F]+"
    r"|FUN_[0-9a-fA-F]+"
)


def demi_strip(
    code: str,
    function_name: str,
    *,
    keep_generated: bool = False,
) -> tuple[str, RenameMap]:
    """Anonymize every identifier: the function becomes FUN_0, the rest VAR_k.

    k follows first occurrence, whitespace and literals are untouched, and
    struct member names count as identifiers like any other. The transform
    is idempotent: placeholder names map back onto themselves.
    """
    tokens = tokenize(code)
    identifiers = [t.text for t in tokens if t.kind is TokenKind.IDENTIFIER]
    if function_name not in identifiers:
        raise TransformError(f"function name {function_name!r} does not occur in code")
    mapping: dict[str, str] = {function_name: "FUN_0"}
    counter = 0
    for name in identifiers:
        if name in mapping:
            continue
        if keep_generated and GENERATED_NAME_RE.fullmatch(name):
            continue
        mapping[name] = f"VAR_{counter}"
        counter += 1
    return _rewrite(code, tokens, mapping), RenameMap(tuple(sorted(mapping.items())))


def strip_function_name(code: str, function_name: str) -> str:
    """Replace only the defined function's name with FUN_0."""
    tokens = tokenize(code)
    if not any(t.kind is TokenKind.IDENTIFIER and t.text == function_name for t in tokens):
        raise TransformError(f"function name {function_name!r} does not occur in code")
    return _rewrite(code, tokens, {function_name: "FUN_0"})


# --------------------------------------------------------------------------
# variant derivation over samples
# --------------------------------------------------------------------------

_DERIVED_VARIANTS = (Variant.DEMI_STRIPPED, Variant.NO_FUNNAME)


def derive_variants(
    samples: Iterable[Sample],
    variants: Sequence[Variant] = _DERIVED_VARIANTS,
    *,
    keep_generated: bool = False,
) -> list[Sample]:
    """Derive anonymized variants from every decompiled sample given.

    Returns only the new samples; ids are re-derived so a second run over
    the combined corpus produces nothing new. Summaries and opt levels are
    inherited unchanged.
    """
    for v in variants:
        if v not in _DERIVED_VARIANTS:
            raise TransformError(f"cannot derive variant {v.value}")
    pool = list(samples)
    existing = {s.id for s in pool}
    out: list[Sample] = []
    for s in pool:
        if s.variant is not Variant.DECOMPILED:
            continue
        for v in variants:
            if v is Variant.DEMI_STRIPPED:
                code, _ = demi_strip(s.code, s.name, keep_generated=keep_generated)
            else:
                code = strip_function_name(s.code, s.name)
            derived = Sample.make(
                project=s.project,
                binary=s.binary,
                name=s.name,
                variant=v,
                code=code,
                summary=s.summary,
                opt_level=s.opt_level,
                source_file=s.source_file,
            )
            if derived.id not in existing:
                out.append(derived)
    return out
