"""Data strings: finite sequences of (tag, value) pairs over the integers."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Sequence, Tuple

Symbol = Tuple[str, int]
DataString = Tuple[Symbol, ...]


class InputError(ValueError):
    """An input symbol carries a tag outside the machine's input alphabet."""


class FormatError(ValueError):
    """A file or document does not follow the expected format."""


def data_string(pairs: Iterable[Sequence]) -> DataString:
    out = []
    for p in pairs:
        if len(p) != 2:
            raise FormatError(f"expected [tag, value] pair, got {p!r}")
        tag, value = p
        if not isinstance(tag, str):
            raise FormatError(f"tag must be a string, got {tag!r}")
        if isinstance(value, bool) or not isinstance(value, int):
            raise FormatError(f"value must be an integer, got {value!r}")
        out.append((tag, int(value)))
    return tuple(out)


def loads(text: str) -> DataString:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, list):
        raise FormatError("a data string document is a JSON array of [tag, integer] pairs")
    return data_string(doc)


def dumps(w: Sequence[Symbol]) -> str:
    return json.dumps([[t, v] for t, v in w])


def load(path) -> DataString:
    return loads(Path(path).read_text(encoding="utf-8"))


def dump(w: Sequence[Symbol], path) -> None:
    Path(path).write_text(dumps(w) + "\n", encoding="utf-8")


def show(w) -> str:
    if w is None:
        return "undefined"
    return "".join(f"({t},{v})" for t, v in w) or "ε"
