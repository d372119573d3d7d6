"""Cleanup of raw model output before parsing.

Chat models wrap queries in markdown fences and surround them with prose;
this module recovers the bare candidate query text.
"""

from __future__ import annotations

import re

_FENCE_OPEN = re.compile(r"^\s*```[A-Za-z]*\s*$")
_FENCE_ANY = re.compile(r"^\s*`{1,}\s*$")
_QUERY_HEAD = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*($|\|)")
_UNION_HEAD = re.compile(r"^\s*union\s+[A-Za-z_]")
# A pipeline continuation: a piped stage, or a stage keyword whose pipe the
# model forgot (the refiner repairs those, so keep them).
_PIPE_LINE = re.compile(
    r"^\s*(\||(?:where|project|extend|summarize|sort|order|top|take|limit|count|distinct|join|union)\b)"
)

_PROSE_STARTERS = {
    "here", "this", "the", "sure", "note", "explanation", "certainly",
    "below", "above", "it", "you", "i",
}


def strip_model_decorations(raw: str) -> str:
    """Reduce raw model output to the candidate query text.

    Removes markdown code fences, prose before the first table-name line,
    and prose or explanation paragraphs after the last pipeline line.
    Idempotent; if no query-shaped content is found the trimmed input is
    returned unchanged.
    """
    text = raw.strip()
    if not text:
        return text

    fenced = _first_fenced_block(text)
    if fenced is not None:
        text = fenced.strip()

    lines = [line for line in text.splitlines() if not _FENCE_ANY.match(line)]
    start = _query_start(lines)
    if start is None:
        return text.strip()
    picked = [lines[start].strip()]
    depth = _paren_delta(lines[start])
    index = start + 1
    while index < len(lines):
        line = lines[index]
        if not line.strip():
            # Blank lines separate the query from trailing prose unless the
            # pipeline visibly continues afterwards.
            rest = next((l for l in lines[index + 1 :] if l.strip()), "")
            if depth <= 0 and not _PIPE_LINE.match(rest):
                break
            index += 1
            continue
        if depth > 0 or _PIPE_LINE.match(line):
            picked.append(line.rstrip())
            depth += _paren_delta(line)
            index += 1
            continue
        break
    return "\n".join(picked).strip()


def _first_fenced_block(text: str) -> str | None:
    lines = text.splitlines()
    open_index = None
    for i, line in enumerate(lines):
        if _FENCE_OPEN.match(line):
            open_index = i
            break
    if open_index is None:
        return None
    for j in range(open_index + 1, len(lines)):
        if _FENCE_ANY.match(lines[j]):
            return "\n".join(lines[open_index + 1 : j])
    return "\n".join(lines[open_index + 1 :])


def _query_start(lines: list[str]) -> int | None:
    for i, line in enumerate(lines):
        stripped = line.strip()
        if not stripped:
            continue
        if _UNION_HEAD.match(stripped):
            return i
        match = _QUERY_HEAD.match(stripped)
        if match is None:
            continue
        word = match.group(1)
        # A bare lowercase English word starting a sentence is prose, not a
        # table name; Defender tables are CamelCase and a single-word line
        # followed by a pipe line is a query head either way.
        if match.group(2) == "|" or not stripped.endswith((".", ":", ",")):
            if word.lower() in _PROSE_STARTERS and match.group(2) != "|":
                next_line = next((l for l in lines[i + 1 :] if l.strip()), "")
                if not _PIPE_LINE.match(next_line):
                    continue
            return i
    return None


def _paren_delta(line: str) -> int:
    depth = 0
    in_string: str | None = None
    i = 0
    while i < len(line):
        ch = line[i]
        if in_string is not None:
            if ch == "\\":
                i += 2
                continue
            if ch == in_string:
                in_string = None
        elif ch in "\"'":
            in_string = ch
        elif ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        i += 1
    return depth
