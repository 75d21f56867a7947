"""Label model: plain tokens, color-set labels, pointer labels, and set-labels.

Tokens are canonical serializations, so two structurally equal labels always
share a token and vice versa:

* plain identifiers: ``M``, ``W``, ``Ok_2``
* the wildcard ``X`` (the color-set label with an empty color set)
* color-set labels ``L{0.1,1.2}`` over colors written ``level.index``
* pointer labels ``P3`` / ``U1``
* set-labels ``<tok,tok,...>`` whose members are labels themselves
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import total_ordering

from .errors import ParseError

_IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")
_POINTER_RE = re.compile(r"([PU])([0-9]+)\Z")


@dataclass(frozen=True, order=True)
class ColorId:
    level: int
    index: int

    def token(self) -> str:
        return f"{self.level}.{self.index}"


@total_ordering
@dataclass(frozen=True, eq=False)
class Label:
    """Tokens are canonical serializations, so identity is token identity;
    the cached hash keeps nested set-labels cheap in set operations."""

    token: str
    colors: frozenset[ColorId] | None = field(default=None, compare=False)
    pointer: tuple[str, int] | None = field(default=None, compare=False)
    members: frozenset["Label"] | None = field(default=None, compare=False)

    def __eq__(self, other) -> bool:
        return isinstance(other, Label) and self.token == other.token

    def __hash__(self) -> int:
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash(self.token)
            object.__setattr__(self, "_hash", h)
        return h

    def __lt__(self, other: "Label") -> bool:
        return self.token < other.token

    def __repr__(self) -> str:
        return f"Label({self.token})"

    @property
    def is_set(self) -> bool:
        return self.members is not None

    @property
    def is_colors(self) -> bool:
        return self.colors is not None

    def member_set(self) -> frozenset["Label"]:
        """The label as a set of labels: its members, or a singleton."""
        if self.members is not None:
            return self.members
        return frozenset([self])


def plain_label(token: str) -> Label:
    if not _IDENT_RE.match(token):
        raise ParseError(f"invalid label token {token!r}")
    return Label(token)


def color_label(colors) -> Label:
    cs = frozenset(colors)
    if not cs:
        return Label("X", colors=cs)
    body = ",".join(c.token() for c in sorted(cs))
    return Label("L{" + body + "}", colors=cs)


WILDCARD = color_label(frozenset())


def pointer_label(kind: str, level: int) -> Label:
    if kind not in ("P", "U") or level < 1:
        raise ParseError(f"invalid pointer label {kind}{level}")
    return Label(f"{kind}{level}", pointer=(kind, level))


def set_label(members) -> Label:
    ms = frozenset(members)
    if not ms:
        raise ParseError("set-label must have at least one member")
    body = ",".join(sorted(m.token for m in ms))
    return Label("<" + body + ">", members=ms)


def parse_label_token(token: str) -> Label:
    """Parse one label token into its structured form."""
    if token == "X":
        return WILDCARD
    if token.startswith("<") and token.endswith(">"):
        return set_label(_parse_member_list(token[1:-1]))
    if token.startswith("L{") and token.endswith("}"):
        return color_label(_parse_color(c) for c in _split_top(token[2:-1]) if c)
    m = _POINTER_RE.match(token)
    if m:
        return pointer_label(m.group(1), int(m.group(2)))
    return plain_label(token)


def _parse_color(text: str) -> ColorId:
    parts = text.split(".")
    if len(parts) != 2:
        raise ParseError(f"invalid color token {text!r} (expected level.index)")
    try:
        return ColorId(int(parts[0]), int(parts[1]))
    except ValueError:
        raise ParseError(f"invalid color token {text!r}") from None


def _split_top(text: str) -> list[str]:
    """Split on commas that are not nested inside braces or angle brackets."""
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch in "{<":
            depth += 1
        elif ch in "}>":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return parts


def _parse_member_list(text: str) -> list[Label]:
    items = [t for t in _split_top(text) if t]
    if not items:
        raise ParseError("empty set-label")
    return [parse_label_token(t) for t in items]
