"""Line-oriented text format for channel networks.

A `pcn <n>` header followed by one `chan <u> <v> <cap_uv> <cap_vu>` line per
channel, integer fields, `#` starts a comment.  Serialization is canonical
(channels sorted by endpoint pair), so parse -> serialize -> parse is the
identity.
"""

from __future__ import annotations

import os

from .graph import ChannelGraph


class ParseError(Exception):
    """Malformed input; carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def _content_lines(text: str):
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield i, line


def _int_field(line_no: int, token: str, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise ParseError(line_no, f"bad {what} {token!r}") from None


def loads_network(text: str) -> ChannelGraph:
    g: ChannelGraph | None = None
    for line_no, line in _content_lines(text):
        fields = line.split()
        if g is None:
            if len(fields) != 2 or fields[0] != "pcn":
                raise ParseError(line_no, f"expected 'pcn <n>' header, got {line!r}")
            n = _int_field(line_no, fields[1], "node count")
            if n < 0:
                raise ParseError(line_no, f"node count must be >= 0, got {n}")
            g = ChannelGraph(n)
            continue
        if fields[0] != "chan":
            raise ParseError(line_no, f"expected 'chan' record, got {fields[0]!r}")
        if len(fields) != 5:
            raise ParseError(line_no, f"expected 'chan <u> <v> <cap_uv> <cap_vu>', got {line!r}")
        u = _int_field(line_no, fields[1], "node id")
        v = _int_field(line_no, fields[2], "node id")
        cap_uv = _int_field(line_no, fields[3], "capacity")
        cap_vu = _int_field(line_no, fields[4], "capacity")
        try:
            g.open_channel(u, v, cap_uv, cap_vu)
        except Exception as exc:
            raise ParseError(line_no, str(exc)) from None
    if g is None:
        raise ParseError(1, "empty network file")
    return g


def dumps_network(g: ChannelGraph) -> str:
    lines = [f"pcn {g.n}"]
    for cid in sorted(ch.id for ch in g.channels()):
        ch = g.channel(cid)
        lines.append(f"chan {ch.u} {ch.v} {ch.cap_forward} {ch.cap_backward}")
    return "\n".join(lines) + "\n"


def load_network(path: str | os.PathLike) -> ChannelGraph:
    with open(path, "r", encoding="utf-8") as fh:
        return loads_network(fh.read())


def save_network(g: ChannelGraph, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_network(g))
