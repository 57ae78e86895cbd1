"""C source scanning: function definitions, doc comments, summary rules.

The scanner is a brace-balanced pass over comment/string/preprocessor
masked text, not a real C parser. Function-like macro definitions and
prototypes yield nothing; regions it cannot make sense of are skipped and
tallied in a diagnostics counter rather than raised.
"""

from __future__ import annotations

import enum
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from .lang import LanguageDetector, detect_language
from .records import DocComment, DocStyle, SourceFunction

_FILL = "\x00"


class ExtractionMode(str, enum.Enum):
    STRICT_RULES = "strict_rules"
    FIRST_SENTENCE_ALWAYS = "first_sentence_always"


class SummaryRule(enum.IntEnum):
    SINGLE_LINE = 1
    BRIEF_TAG = 2
    DESCRIPTION_LINE = 3
    BEFORE_PARAM_TAG = 4
    FIRST_SENTENCE = 5


# --------------------------------------------------------------------------
# masking pass: comments out, strings out, preprocessor out
# --------------------------------------------------------------------------


@dataclass
class _RawComment:
    start: int
    end: int          # offset one past the comment text
    start_line: int
    end_line: int
    block: bool
    full_line: bool   # nothing but whitespace before it on its first line
    body: str         # text between the comment markers


def _mask(text: str) -> tuple[str, list[_RawComment]]:
    out = list(text)
    comments: list[_RawComment] = []
    i = 0
    n = len(text)
    line = 1
    line_had_code = False

    def fill(a: int, b: int) -> None:
        for k in range(a, b):
            if out[k] != "\n":
                out[k] = _FILL

    while i < n:
        ch = text[i]
        nxt = text[i + 1] if i + 1 < n else ""
        if ch == "\n":
            line += 1
            line_had_code = False
            i += 1
            continue
        if ch == "/" and nxt == "/":
            start, start_line = i, line
            j = i + 2
            while j < n and text[j] != "\n":
                j += 1
            comments.append(
                _RawComment(start, j, start_line, line, False, not line_had_code, text[i + 2 : j])
            )
            fill(start, j)
            i = j
            continue
        if ch == "/" and nxt == "*":
            start, start_line = i, line
            j = i + 2
            while j < n - 1 and not (text[j] == "*" and text[j + 1] == "/"):
                if text[j] == "\n":
                    line += 1
                    line_had_code = False
                j += 1
            j = min(j + 2, n)
            comments.append(
                _RawComment(start, j, start_line, line, True, not line_had_code, text[i + 2 : j - 2])
            )
            fill(start, j)
            i = j
            continue
        if ch == "#" and not line_had_code:
            start = i
            j = i
            while j < n:
                if text[j] == "\n":
                    if j > 0 and text[j - 1] == "\\":
                        line += 1
                        j += 1
                        continue
                    break
                j += 1
            fill(start, j)
            i = j
            continue
        if ch == '"' or ch == "'":
            start = i
            j = i + 1
            while j < n:
                if text[j] == "\\" and j + 1 < n:
                    j += 2
                    continue
                if text[j] == ch:
                    j += 1
                    break
                if text[j] == "\n":
                    break  # unterminated literal: stop at end of line
                j += 1
            fill(start, j)
            line_had_code = True
            i = j
            continue
        if not ch.isspace():
            line_had_code = True
        i += 1
    return "".join(out), comments


# --------------------------------------------------------------------------
# doc comment cleaning and attachment
# --------------------------------------------------------------------------


def _clean_block_body(body: str) -> str:
    body = body.lstrip("*!")
    lines = []
    for raw in body.split("\n"):
        stripped = raw.strip()
        while stripped.startswith("*"):
            stripped = stripped[1:].strip()
        lines.append(stripped)
    while lines and not lines[0]:
        lines.pop(0)
    while lines and not lines[-1]:
        lines.pop()
    return "\n".join(lines)


def _clean_line_body(body: str) -> str:
    stripped = body.lstrip("/")
    if stripped[:1] in ("!", "<"):
        stripped = stripped[1:]
    return stripped.strip()


def _merge_line_runs(comments: list[_RawComment]) -> list[_RawComment]:
    """Consecutive full-line // comments act as one block."""
    merged: list[_RawComment] = []
    for c in comments:
        if (
            merged
            and not c.block
            and not merged[-1].block
            and c.full_line
            and merged[-1].full_line
            and c.start_line == merged[-1].end_line + 1
        ):
            prev = merged[-1]
            prev.end = c.end
            prev.end_line = c.end_line
            prev.body = prev.body + "\n" + c.body
        else:
            merged.append(
                _RawComment(c.start, c.end, c.start_line, c.end_line, c.block, c.full_line, c.body)
            )
    return merged


def _to_doc(comment: _RawComment) -> DocComment | None:
    if comment.block:
        text = _clean_block_body(comment.body)
    else:
        text = "\n".join(_clean_line_body(part) for part in comment.body.split("\n")).strip("\n")
    if not text.strip():
        return None
    span = (comment.start_line, comment.end_line)
    style = DocStyle.SINGLE_LINE if span[0] == span[1] else DocStyle.MULTI_LINE
    return DocComment(raw_text=text, style=style, line_span=span)


# --------------------------------------------------------------------------
# function scanning
# --------------------------------------------------------------------------

_CANDIDATE_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\s*\(")
_NOT_FUNCTION_NAMES = frozenset(
    "if while for switch return sizeof do else case goto".split()
)
_DECL_CHARS = frozenset("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_* \t\n\r")


def _line_starts(text: str) -> list[int]:
    starts = [0]
    for i, ch in enumerate(text):
        if ch == "\n":
            starts.append(i + 1)
    return starts


def _line_of(starts: list[int], offset: int) -> int:
    import bisect

    return bisect.bisect_right(starts, offset)


def extract_functions(
    source_text: str,
    file_path: str,
    project: str,
    diagnostics: Counter | None = None,
) -> list[SourceFunction]:
    """Top-level function definitions with their attached doc comments.

    A doc comment is the comment block ending on the signature's starting
    line or the line directly above it; any blank line in between breaks
    the attachment. Results are ordered by position in the file.
    """
    tally = diagnostics if diagnostics is not None else Counter()
    masked, raw_comments = _mask(source_text)
    comments = _merge_line_runs(raw_comments)
    starts = _line_starts(source_text)

    # brace depth before each candidate, computed in one incremental pass
    out: list[SourceFunction] = []
    depth = 0
    scanned_to = 0

    def advance(upto: int) -> None:
        nonlocal depth, scanned_to
        for k in range(scanned_to, upto):
            c = masked[k]
            if c == "{":
                depth += 1
            elif c == "}":
                if depth == 0:
                    tally["unbalanced_brace"] += 1
                else:
                    depth -= 1
        scanned_to = upto

    for m in _CANDIDATE_RE.finditer(masked):
        if m.start() < scanned_to:
            continue  # inside a body already consumed
        advance(m.start())
        if depth != 0:
            continue
        name = m.group().rstrip(" \t\n\r(")
        if name in _NOT_FUNCTION_NAMES:
            continue

        # match the parameter list parens
        paren_depth = 0
        j = m.end() - 1
        params_end = -1
        while j < len(masked):
            c = masked[j]
            if c == "(":
                paren_depth += 1
            elif c == ")":
                paren_depth -= 1
                if paren_depth == 0:
                    params_end = j
                    break
            j += 1
        if params_end < 0:
            tally["unclosed_parens"] += 1
            continue

        k = params_end + 1
        while k < len(masked) and (masked[k].isspace() or masked[k] == _FILL):
            k += 1
        if k >= len(masked) or masked[k] != "{":
            continue  # prototype, macro use, pointer declarator, ...

        body_depth = 0
        body_end = -1
        p = k
        while p < len(masked):
            c = masked[p]
            if c == "{":
                body_depth += 1
            elif c == "}":
                body_depth -= 1
                if body_depth == 0:
                    body_end = p
                    break
            p += 1
        if body_end < 0:
            tally["unclosed_brace"] += 1
            advance(m.end())
            continue

        # declaration start: walk back over type/qualifier tokens
        d = m.start() - 1
        while d >= 0 and masked[d] in _DECL_CHARS:
            d -= 1
        decl_start = d + 1
        while decl_start < m.start() and source_text[decl_start].isspace():
            decl_start += 1

        sig_line = _line_of(starts, decl_start)
        doc = None
        for comment in comments:
            if comment.end > decl_start:
                break
            if sig_line - comment.end_line in (0, 1):
                doc = _to_doc(comment)
        out.append(
            SourceFunction(
                project=project,
                file_path=file_path,
                name=name,
                signature=" ".join(source_text[decl_start : params_end + 1].split()),
                body_text=source_text[decl_start : body_end + 1],
                start_line=sig_line,
                end_line=_line_of(starts, body_end),
                doc=doc,
            )
        )
        advance(body_end + 1)
        tally["functions"] += 1
    return out


# --------------------------------------------------------------------------
# sentence segmentation
# --------------------------------------------------------------------------

_ABBREVIATIONS = frozenset("e.g i.e etc vs cf al fig eq no resp approx".split())


def _is_boundary(text: str, i: int) -> bool:
    """True when the terminator at text[i] ends a sentence."""
    if i + 1 < len(text) and not text[i + 1].isspace():
        return False
    if text[i] in "!?":
        return True
    # period: guard abbreviations and single initials
    j = i - 1
    while j >= 0 and (text[j].isalnum() or text[j] == "."):
        j -= 1
    word = text[j + 1 : i].rstrip(".")
    lowered = word.lower()
    if lowered in _ABBREVIATIONS:
        return False
    if len(word) == 1 and word.isalpha():
        return False
    return True


def split_sentences(text: str) -> list[str]:
    """Sentences end at ., ! or ? before whitespace, and at line breaks."""
    sentences: list[str] = []
    buf: list[str] = []

    def flush() -> None:
        s = "".join(buf).strip()
        if s:
            sentences.append(s)
        buf.clear()

    for i, ch in enumerate(text):
        if ch == "\n":
            flush()
            continue
        buf.append(ch)
        if ch in ".!?" and _is_boundary(text, i):
            flush()
    flush()
    return sentences


def _first_sentence(text: str) -> str | None:
    sentences = split_sentences(text)
    return sentences[0] if sentences else None


# --------------------------------------------------------------------------
# summary extraction rules
# --------------------------------------------------------------------------

_BRIEF_RE = re.compile(r"@(brief|purpose)\b")
_PARAM_RE = re.compile(r"@(param|v)\b")
_DESCRIPTION_MARKER = "Description:"
_ANY_TAG_RE = re.compile(r"@(brief|purpose|param|v)\b")


def selected_rule(doc: DocComment, mode: ExtractionMode) -> SummaryRule:
    """Which extraction rule fires for this doc; total over all inputs."""
    if mode is ExtractionMode.FIRST_SENTENCE_ALWAYS:
        return SummaryRule.FIRST_SENTENCE
    if doc.style is DocStyle.SINGLE_LINE:
        return SummaryRule.SINGLE_LINE
    if _BRIEF_RE.search(doc.raw_text):
        return SummaryRule.BRIEF_TAG
    if any(_DESCRIPTION_MARKER in line for line in doc.raw_text.split("\n")):
        return SummaryRule.DESCRIPTION_LINE
    if _PARAM_RE.search(doc.raw_text):
        return SummaryRule.BEFORE_PARAM_TAG
    return SummaryRule.FIRST_SENTENCE


def extract_summary(doc: DocComment, mode: ExtractionMode = ExtractionMode.STRICT_RULES) -> str | None:
    """Apply the selected rule; None when it yields nothing usable."""
    rule = selected_rule(doc, mode)
    text = doc.raw_text
    if rule in (SummaryRule.SINGLE_LINE, SummaryRule.FIRST_SENTENCE):
        summary = _first_sentence(text)
    elif rule is SummaryRule.BRIEF_TAG:
        m = _BRIEF_RE.search(text)
        assert m is not None
        summary = _first_sentence(text[m.end() :])
    elif rule is SummaryRule.DESCRIPTION_LINE:
        lines = text.split("\n")
        index = next(i for i, line in enumerate(lines) if _DESCRIPTION_MARKER in line)
        after = lines[index].split(_DESCRIPTION_MARKER, 1)[1]
        tail = "\n".join([after] + lines[index + 1 :])
        summary = _first_sentence(tail)
    else:
        m = _PARAM_RE.search(text)
        assert m is not None
        sentences = split_sentences(text[: m.start()])
        summary = sentences[-1] if sentences else None

    if summary is None:
        return None
    summary = summary.strip()
    if not summary:
        return None
    if mode is ExtractionMode.STRICT_RULES:
        if _ANY_TAG_RE.search(summary) or _DESCRIPTION_MARKER in summary:
            return None
    return summary


# --------------------------------------------------------------------------
# summary filtering
# --------------------------------------------------------------------------


class FilterReason(str, enum.Enum):
    OK = "ok"
    EMPTY = "empty"
    TOO_SHORT = "too_short"
    TOO_LONG = "too_long"
    SPECIAL_TOKEN = "special_token"
    NON_ENGLISH = "non_english"


@dataclass(frozen=True)
class FilterVerdict:
    passed: bool
    reason: FilterReason


@dataclass(frozen=True)
class FilterConfig:
    min_tokens: int = 3
    max_tokens: int = 256
    reject_special_tokens: bool = True
    require_english: bool = True
    detector: LanguageDetector | None = None


_HTML_TAG_RE = re.compile(r"</?[A-Za-z][A-Za-z0-9]*/?>")
_DRIVE_PATH_RE = re.compile(r"[A-Za-z]:[/\\]")
_MULTI_SEGMENT_RE = re.compile(r"(?:[^/\s]*/){2,}[^/\s]*")
_DEV_MARKERS = ("FIXME:", "TODO:", "XXX:")


def _is_special_token(token: str) -> bool:
    if "http://" in token or "https://" in token:
        return True
    if _HTML_TAG_RE.search(token):
        return True
    if _DRIVE_PATH_RE.match(token):
        return True
    if _MULTI_SEGMENT_RE.fullmatch(token):
        return True
    return any(token.startswith(marker) for marker in _DEV_MARKERS)


def filter_summary(summary: str | None, cfg: FilterConfig = FilterConfig()) -> FilterVerdict:
    """CodeSearchNet-style acceptance test for an extracted summary."""
    if summary is None or not summary.strip():
        return FilterVerdict(False, FilterReason.EMPTY)
    tokens = summary.split()
    if len(tokens) < cfg.min_tokens:
        return FilterVerdict(False, FilterReason.TOO_SHORT)
    if len(tokens) > cfg.max_tokens:
        return FilterVerdict(False, FilterReason.TOO_LONG)
    if cfg.reject_special_tokens and any(_is_special_token(t) for t in tokens):
        return FilterVerdict(False, FilterReason.SPECIAL_TOKEN)
    if cfg.require_english:
        guess = detect_language(summary, cfg.detector)
        if guess.code != "en" or guess.confidence < 0.5:
            return FilterVerdict(False, FilterReason.NON_ENGLISH)
    return FilterVerdict(True, FilterReason.OK)


def scan_source_dir(
    root: str | Path,
    project: str,
    diagnostics: Counter | None = None,
) -> list[SourceFunction]:
    """Extract functions from every .c and .h file under root.

    File paths are recorded relative to root with / separators so the
    output is stable across platforms. Files that cannot be decoded are
    read with replacement characters rather than skipped.
    """
    base = Path(root)
    tally = diagnostics if diagnostics is not None else Counter()
    out: list[SourceFunction] = []
    paths = sorted(p for p in base.rglob("*") if p.suffix in (".c", ".h") and p.is_file())
    for path in paths:
        text = path.read_text(encoding="utf-8", errors="replace")
        rel = path.relative_to(base).as_posix()
        out.extend(extract_functions(text, rel, project, tally))
        tally["files"] += 1
    out.sort(key=lambda f: (f.file_path, f.start_line))
    return out


def doc_candidates_in(source_text: str) -> list[DocComment]:
    """All cleaned comments of a file, mostly useful for tests and demos."""
    _, raw = _mask(source_text)
    docs = []
    for comment in _merge_line_runs(raw):
        doc = _to_doc(comment)
        if doc is not None:
            docs.append(doc)
    return docs
