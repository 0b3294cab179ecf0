"""Response post-processing: narration stripping and URL repair.

The model occasionally narrates its tool usage ("I will now call ...")
or mangles URLs (doubled schemes, stray trailing punctuation, literal
spaces inside query strings). This pass removes whole narration
sentences and repairs URL tokens in place; it is idempotent. The
narration patterns ship as data, not code, so they can be revised
without touching the pipeline.
"""
from __future__ import annotations

import json
import re
from importlib import resources

_SENTENCE_PUNCT = ".!?"
_TRAILING_JUNK = ".,;:!?'\""
_URL_RE = re.compile(r'https?://[^\s<>"]+')
_DOUBLED_SCHEME_RE = re.compile(r"^(https?://)(?:https?://)+")
_BRACKET_WINDOW = 60


def _load_patterns() -> tuple:
    raw = resources.files("collection_explorer.data").joinpath(
        "narration_patterns.json").read_text(encoding="utf-8")
    return tuple(re.compile(p, re.IGNORECASE) for p in json.loads(raw))


_NARRATION_PATTERNS = _load_patterns()


def _split_sentences(text: str) -> list:
    """Split into sentences, each keeping its trailing whitespace, so the
    surviving pieces concatenate back verbatim."""
    out = []
    start = 0
    i = 0
    n = len(text)
    while i < n:
        if text[i] in _SENTENCE_PUNCT:
            j = i + 1
            while j < n and text[j] in _SENTENCE_PUNCT:
                j += 1
            k = j
            while k < n and text[k].isspace():
                k += 1
            if k > j or j == n:
                out.append(text[start:k])
                start = k
                i = k
                continue
            i = j
            continue
        i += 1
    if start < n:
        out.append(text[start:])
    return out


def strip_narration(text: str) -> str:
    """Drop sentences that merely narrate tool usage."""
    kept = []
    dropped = False
    for sentence in _split_sentences(text):
        core = sentence.strip()
        if core and any(p.search(core) for p in _NARRATION_PATTERNS):
            dropped = True
            continue
        kept.append(sentence)
    result = "".join(kept)
    return result.rstrip() if dropped else result


def _repair_one(url: str) -> str:
    url = _DOUBLED_SCHEME_RE.sub(r"\1", url)
    while url:
        last = url[-1]
        if last in _TRAILING_JUNK:
            url = url[:-1]
            continue
        if last == ")" and url.count("(") < url.count(")"):
            url = url[:-1]
            continue
        if last == "]" and url.count("[") < url.count("]"):
            url = url[:-1]
            continue
        break
    return url


def repair_urls(text: str) -> str:
    """Fix each URL token: collapse doubled schemes, absorb a bracketed
    span split by spaces (percent-encoding them), strip trailing junk."""
    out = []
    pos = 0
    for match in _URL_RE.finditer(text):
        start, end = match.span()
        if start < pos:
            continue
        url = match.group(0)
        out.append(text[pos:start])
        consumed = end
        if url.count("[") > url.count("]"):
            window = text[end:end + _BRACKET_WINDOW]
            close = window.find("]")
            newline = window.find("\n")
            if close >= 0 and (newline < 0 or close < newline):
                url += window[:close + 1].replace(" ", "%20")
                consumed = end + close + 1
        out.append(_repair_one(url))
        pos = consumed
    out.append(text[pos:])
    return "".join(out)


def postprocess(raw: str) -> str:
    """Full cleaning pass; postprocess(postprocess(x)) == postprocess(x)."""
    return repair_urls(strip_narration(raw))
