"""Encoding scalar parameters and results as a prefix of the data string.

Inputs, in declaration order: a data value d becomes ``(param, d)``, a tag
σ becomes ``(σ, 0)``, a boolean becomes ``(true, 0)`` or ``(false, 0)``.
Outputs are prefixed the same way, except that tag and boolean results carry
the *carrier* value: the data value of the first symbol of the encoded
input.  A transducer cannot emit constants, so this is the value it can
always reproduce; when the encoded input is empty such results are undefined.
"""
from __future__ import annotations

from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .datastring import InputError

PARAM = "param"
TRUE = "true"
FALSE = "false"

Signature = Sequence[Tuple[str, str]]   # (name, type) in declaration order


def encode_input(inputs: Signature, params: Dict[str, object], w) -> tuple:
    prefix = []
    for name, typ in inputs:
        if name not in params:
            raise InputError(f"missing value for input parameter {name!r}")
        v = params[name]
        if typ == "data":
            prefix.append((PARAM, int(v)))
        elif typ == "bool":
            prefix.append((TRUE if _truth(v) else FALSE, 0))
        elif typ == "tag":
            prefix.append((str(v), 0))
        else:
            raise InputError(f"parameter {name!r} has unsupported type {typ}")
    return tuple(prefix) + tuple(w)


def _truth(v) -> bool:
    if isinstance(v, str):
        if v.lower() in ("1", "true"):
            return True
        if v.lower() in ("0", "false"):
            return False
        raise InputError(f"not a boolean: {v!r}")
    return bool(v)


def carrier_value(encoded: Sequence) -> Optional[int]:
    return encoded[0][1] if encoded else None


def encode_output(outputs: Signature, values: Dict[str, object], out, carrier: Optional[int]):
    """The encoded result, or None when some component cannot be represented."""
    if out is None:
        return None
    prefix = []
    for name, typ in outputs:
        v = values.get(name)
        if typ == "data":
            if v is None:
                return None
            prefix.append((PARAM, v))
        else:
            if carrier is None or v is None:
                return None
            tag = (TRUE if v else FALSE) if typ == "bool" else v
            prefix.append((tag, carrier))
    return tuple(prefix) + tuple(out)


def decode_output(outputs: Signature, encoded) -> Tuple[tuple, Dict[str, object]]:
    if encoded is None:
        return None, {}
    if len(encoded) < len(outputs):
        raise InputError("encoded output is shorter than its parameter prefix")
    values = {}
    for (name, typ), (tag, val) in zip(outputs, encoded):
        values[name] = val if typ == "data" else (tag == TRUE) if typ == "bool" else tag
    return tuple(encoded[len(outputs):]), values


def decode_input(inputs: Signature, encoded) -> Tuple[Dict[str, object], tuple]:
    """Split an encoded input into parameter values and the list; InputError if malformed."""
    if len(encoded) < len(inputs):
        raise InputError("encoded input is shorter than its parameter prefix")
    params = {}
    for (name, typ), (tag, val) in zip(inputs, encoded):
        if typ == "data" and tag == PARAM:
            params[name] = val
        elif typ == "bool" and tag in (TRUE, FALSE):
            params[name] = tag == TRUE
        elif typ == "tag":
            params[name] = tag
        else:
            raise InputError(f"symbol ({tag}, {val}) does not encode {typ} parameter {name!r}")
    return params, tuple(encoded[len(inputs):])


def parse_param(typ: str, text: str):
    if typ == "data":
        return int(text)
    if typ == "bool":
        return _truth(text)
    return text


def param_tags(sig: Signature, alphabet: Iterable[str]) -> List[str]:
    """Tags used by the parameter prefix."""
    tags = []
    for _, typ in sig:
        if typ == "data":
            tags.append(PARAM)
        elif typ == "bool":
            tags += [TRUE, FALSE]
        else:
            tags += list(alphabet)
    out = []
    for t in tags:
        if t not in out:
            out.append(t)
    return out
