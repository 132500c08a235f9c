"""The ``sdt`` command.

Exit codes: 0 for a defined output, a valid file, or a verdict of
holds/equivalent/safe; 1 for an undefined output, a violated property or a
restriction failure; 2 for usage, parse and validation errors.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

from . import datastring as ds
from . import formula as fm
from . import machine as mc
from .encoding import FALSE, PARAM, TRUE, carrier_value, decode_input, encode_input, encode_output, parse_param
from .epsilon import eliminate_epsilon
from .equiv import check_equivalence
from .equiv.product import AlphabetMismatch
from .func import (FuncCompileError, FuncSyntaxError, check_single_pass, compile_func, parse_func,
                   run_func)
from .func.codegen import func_source_from_sdst
from .func.compile import default_alphabet as func_alphabet
from .imp import (CompileError, ImpSyntaxError, check_imp, compile_imp, imp_source_from_sdst, parse_imp, run_imp)
from .imp.interp import default_alphabet as imp_alphabet
from .run import trace_sdst
from .verify import (KINDS, AssertionQuery, BoundedHolds, Holds, HoareTriple, Safe, check_assertion, check_hoare,
                     check_total)

OK, FAIL, USAGE = 0, 1, 2
LANGS = ("sdst", "imp", "fun")
_EXT = {".sdst": "sdst", ".sdsa": "sdst", ".json": "sdst", ".imp": "imp", ".fun": "fun"}
_PREFIX_TAGS = (PARAM, TRUE, FALSE)


class UsageError(Exception):
    """Bad invocation or an input file that does not parse or validate."""

    def __init__(self, message: str, diagnostics: Optional[List[str]] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or []


@dataclass
class Report:
    command: List[str]
    verdict: str = ""
    output: Optional[list] = None
    witnesses: List[list] = field(default_factory=list)
    diagnostics: List[str] = field(default_factory=list)
    transcript: List[str] = field(default_factory=list)
    timing: float = 0.0

    def to_json(self) -> dict:
        return {"command": self.command, "verdict": self.verdict, "output": self.output,
                "witnesses": self.witnesses, "diagnostics": self.diagnostics,
                "transcript": self.transcript, "timing": round(self.timing, 4)}

    def text(self) -> str:
        lines = [self.verdict] if self.verdict else []
        lines += self.transcript
        lines += [f"  {d}" for d in self.diagnostics]
        return "\n".join(lines)


# -- loading -----------------------------------------------------------------------------------

@dataclass
class Artifact:
    lang: str
    path: str
    obj: object

    @property
    def signature(self):
        """(inputs, outputs) of the scalar parameter prefix."""
        if self.lang == "imp":
            return ([(d.name, d.type) for d in self.obj.input_params],
                    [(d.name, d.type) for d in self.obj.output_params])
        if self.lang == "fun":
            return list(self.obj.input_params), list(self.obj.output_params)
        return [], []

    def list_alphabet(self) -> tuple:
        if self.lang == "imp":
            return imp_alphabet(self.obj)
        if self.lang == "fun":
            return func_alphabet(self.obj)
        return tuple(a for a in self.obj.input_alphabet if a not in _PREFIX_TAGS)


def detect_lang(path: str, lang: Optional[str]) -> str:
    if lang:
        return lang
    ext = Path(path).suffix.lower()
    if ext not in _EXT:
        raise UsageError(f"{path}: cannot tell the language from the extension; pass --lang")
    return _EXT[ext]


def load_artifact(path: str, lang: Optional[str] = None, validate: bool = True) -> Artifact:
    lang = detect_lang(path, lang)
    try:
        if lang == "sdst":
            S = mc.load(path)
            if validate:
                problems = mc.validate_sdst(S)
                if problems:
                    raise UsageError(f"{path}: invalid machine",
                                     [f"[{v.kind}] {v.message}" for v in problems])
            return Artifact(lang, path, S)
        text = Path(path).read_text(encoding="utf-8")
        obj = parse_imp(text) if lang == "imp" else parse_func(text)
        return Artifact(lang, path, obj)
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror or exc}") from exc
    except (ds.FormatError, ImpSyntaxError, FuncSyntaxError, fm.FormulaSyntaxError) as exc:
        raise UsageError(f"{path}: {exc}") from exc


def restriction_problems(a: Artifact) -> List[str]:
    if a.lang == "imp":
        return [f"[{r.kind}] {r.message}" for r in check_imp(a.obj)]
    if a.lang == "fun":
        return [f"[{v.clause}] {v.message}" for v in check_single_pass(a.obj).violations]
    return [f"[{v.kind}] {v.message}" for v in mc.validate_sdst(a.obj)]


def to_sdst(a: Artifact, alphabet=None) -> mc.Sdst:
    try:
        if a.lang == "imp":
            return compile_imp(a.obj, alphabet)
        if a.lang == "fun":
            return compile_func(a.obj, alphabet)
    except CompileError as exc:
        raise UsageError(f"{a.path}: violates the single-pass restrictions",
                         [f"[{r.kind}] {r.message}" for r in exc.violations]) from exc
    except FuncCompileError as exc:
        raise UsageError(f"{a.path}: violates the single-pass restrictions",
                         [f"[{v.clause}] {v.message}" for v in exc.report.violations]) from exc
    return a.obj


def shared_alphabet(arts: List[Artifact], explicit: Optional[str]) -> tuple:
    if explicit:
        return tuple(t.strip() for t in explicit.split(",") if t.strip())
    tags = []
    for a in arts:
        tags += a.list_alphabet()
    return tuple(sorted(set(tags)))


def parse_params(a: Artifact, pairs: List[str]) -> Dict[str, object]:
    inputs, _ = a.signature
    types = dict(inputs)
    params = {}
    for pair in pairs or []:
        name, sep, text = pair.partition("=")
        if not sep:
            raise UsageError(f"--param expects name=value, got {pair!r}")
        if name not in types:
            raise UsageError(f"{a.path} has no input parameter {name!r}")
        try:
            params[name] = parse_param(types[name], text)
        except (ValueError, ds.InputError) as exc:
            raise UsageError(f"--param {pair}: {exc}") from exc
    missing = [n for n in types if n not in params]
    if missing:
        raise UsageError(f"missing --param for {', '.join(missing)}")
    return params


# -- running -----------------------------------------------------------------------------------

@dataclass
class Run:
    output: Optional[tuple]        # encoded output; None when undefined
    reason: str = ""
    outputs: Dict[str, object] = field(default_factory=dict)
    plain: Optional[tuple] = None  # the result list alone


def run_native(a: Artifact, w, params: Optional[Dict[str, object]] = None) -> Run:
    """Run on the list ``w`` with ``params``, or on the encoded input ``w`` when params is None."""
    if a.lang == "sdst":
        o = trace_sdst(a.obj, w)
        return Run(o.output, o.reason, plain=o.output)
    inputs, outputs = a.signature
    if params is None:
        params, lst = decode_input(inputs, w)
        encoded = tuple(w)
    else:
        lst = tuple(w)
        encoded = encode_input(inputs, dict(params), lst)
    for tag, _ in lst:
        if tag not in a.list_alphabet():
            raise ds.InputError(f"tag {tag!r} is not in the list alphabet {list(a.list_alphabet())}")
    o = run_imp(a.obj, lst, params) if a.lang == "imp" else run_func(a.obj, lst, params)
    if o.status != "ok":
        return Run(None, o.reason)
    enc = encode_output(outputs, o.outputs, o.output, carrier_value(encoded))
    if enc is None:
        return Run(None, "a scalar result has no carrier value (empty encoded input)", o.outputs, o.output)
    return Run(enc, "", o.outputs, o.output)


def _reason_category(reason: str) -> str:
    return reason or "undefined"


def cmd_run(args, rep: Report) -> int:
    a = load_artifact(args.program, args.lang)
    if a.lang != "sdst":
        problems = restriction_problems(a)
        if problems:
            raise UsageError(f"{a.path}: violates the single-pass restrictions", problems)
    try:
        w = ds.load(args.input)
    except OSError as exc:
        raise UsageError(f"{args.input}: {exc.strerror or exc}") from exc
    except ds.FormatError as exc:
        raise UsageError(f"{args.input}: {exc}") from exc
    try:
        params = None if args.encoded or a.lang == "sdst" else parse_params(a, args.param)
        r = run_native(a, w, params)
    except ds.InputError as exc:
        raise UsageError(str(exc)) from exc
    if r.output is None:
        rep.verdict = f"undefined ({_reason_category(r.reason)})"
        return FAIL
    shown = r.output if (args.encoded or a.lang == "sdst") else r.plain
    rep.output = [list(s) for s in shown]
    rep.verdict = ds.dumps(shown)
    if r.outputs and not args.encoded:
        rep.transcript.append("outputs: " + ", ".join(f"{k}={v}" for k, v in r.outputs.items()))
    return OK


def cmd_validate(args, rep: Report) -> int:
    a = load_artifact(args.path, args.lang, validate=False)
    problems = restriction_problems(a)
    rep.diagnostics = problems
    rep.verdict = "valid" if not problems else "invalid"
    return OK if not problems else FAIL


def cmd_check_restrictions(args, rep: Report) -> int:
    a = load_artifact(args.path, args.lang, validate=False)
    if a.lang == "sdst":
        raise UsageError("check-restrictions applies to .imp and .fun programs; use validate for machines")
    problems = restriction_problems(a)
    rep.diagnostics = problems
    rep.verdict = "admissible" if not problems else "not admissible"
    return OK if not problems else FAIL


def _emit(text: str, out: Optional[str], rep: Report):
    if out:
        Path(out).write_text(text, encoding="utf-8")
        rep.verdict = f"wrote {out}"
    else:
        rep.verdict = text.rstrip("\n")


def _convert(args, rep: Report, target: str) -> int:
    a = load_artifact(args.path, args.source_lang)
    if target not in LANGS:
        raise UsageError(f"unknown target {target!r}")
    alphabet = shared_alphabet([a], args.alphabet) if args.alphabet else None
    S = to_sdst(a, alphabet)
    if args.eliminate_eps or (target != "sdst" and S.has_eps):
        S = eliminate_epsilon(S)
    if target == "sdst":
        text = json.dumps(mc.to_json(S), indent=1) + "\n"
    elif target == "imp":
        text = imp_source_from_sdst(S, args.name)
    else:
        text = func_source_from_sdst(S, args.name)
    _emit(text, args.output, rep)
    return OK


def cmd_compile(args, rep: Report) -> int:
    return _convert(args, rep, args.to)


def cmd_codegen(args, rep: Report) -> int:
    return _convert(args, rep, args.to)


def _write_witness(w, path: Optional[str], rep: Report):
    rep.witnesses.append([list(s) for s in w])
    if path:
        ds.dump(w, path)
        rep.transcript.append(f"witness written to {path}")


def _replay_line(a: Artifact, w) -> str:
    try:
        r = run_native(a, w)
    except ds.InputError as exc:
        return f"  {a.path}: rejected input ({exc})"
    if r.output is None:
        return f"  {a.path}: undefined ({_reason_category(r.reason)})"
    return f"  {a.path}: {ds.show(r.output)}"


def _machines(paths: List[str], lang: Optional[str], alphabet: Optional[str]):
    arts = [load_artifact(p, lang) for p in paths]
    ab = shared_alphabet(arts, alphabet)
    return arts, [to_sdst(a, ab) for a in arts]


def cmd_equiv(args, rep: Report) -> int:
    arts, (S1, S2) = _machines([args.a, args.b], args.lang, args.alphabet)
    S1, S2 = eliminate_epsilon(S1), eliminate_epsilon(S2)
    try:
        res = check_equivalence(S1, S2)
    except AlphabetMismatch as exc:
        raise UsageError(f"cannot compare: {exc}",
                         [f"{a.path}: {list(S.input_alphabet)}" for a, S in zip(arts, (S1, S2))]) from exc
    if res.equivalent:
        rep.verdict = "Equivalent"
        return OK
    w = res.witness.input
    where = f" at position {res.witness.position}" if res.witness.position is not None else ""
    rep.verdict = f"NotEquivalent ({res.witness.kind}{where})"
    rep.transcript.append(f"input: {ds.show(w)}")
    rep.transcript += [_replay_line(a, w) for a in arts]
    _write_witness(w, args.witness, rep)
    return FAIL


def _acceptor(path: Optional[str], lang: Optional[str]) -> Optional[mc.Sdst]:
    if path is None:
        return None
    a = load_artifact(path, lang or "sdst")
    if a.lang != "sdst" or a.obj.string_vars:
        raise UsageError(f"{path}: pre/post conditions must be acceptors (machines without string variables)")
    return a.obj


def _accept_all(alphabet) -> mc.Sdst:
    return mc.make_sdsa(alphabet, ["p"], "p", [mc.CURR], ["p"],
                        [mc.transition("p", s, fm.TRUE, "p") for s in alphabet])


def cmd_hoare(args, rep: Report) -> int:
    body_art = load_artifact(args.body, args.lang)
    pre, post = _acceptor(args.pre, None), _acceptor(args.post, None)
    if body_art.lang == "sdst":
        body = body_art.obj
    else:
        ab = args.alphabet and shared_alphabet([body_art], args.alphabet)
        if not ab and pre is not None:
            ab = tuple(a for a in pre.input_alphabet if a not in _PREFIX_TAGS)
        body = to_sdst(body_art, ab or None)
    pre = pre or _accept_all(body.input_alphabet)
    post = post or _accept_all(body.output_alphabet)
    check = check_total if args.total else check_hoare
    try:
        res = check(HoareTriple(pre, body, post), mode=args.mode, bound=args.bound)
    except AlphabetMismatch as exc:
        raise UsageError(f"cannot check: {exc}") from exc
    if isinstance(res, Holds):
        rep.verdict = "Holds"
        return OK
    if isinstance(res, BoundedHolds):
        rep.verdict = f"Holds up to length {res.bound}"
        return OK
    rep.verdict = f"Violation ({res.reason})"
    rep.transcript.append(f"input: {ds.show(res.input)}")
    rep.transcript.append(_replay_line(body_art, res.input))
    _write_witness(res.input, args.witness, rep)
    return FAIL


def cmd_assert(args, rep: Report) -> int:
    a = load_artifact(args.program, args.lang or "imp")
    if a.lang != "imp":
        raise UsageError("assertions apply to imperative programs")
    problems = restriction_problems(a)
    if problems:
        raise UsageError(f"{a.path}: violates the single-pass restrictions", problems)
    pre = _acceptor(args.pre, None)
    q = AssertionQuery(args.kind, a.obj, pre, label=args.label, x=args.x, y=args.y)
    try:
        res = check_assertion(q)
    except (ValueError, AlphabetMismatch) as exc:
        raise UsageError(str(exc)) from exc
    if isinstance(res, Safe):
        rep.verdict = "Safe"
        return OK
    rep.verdict = f"Witness ({res.event})"
    rep.transcript.append(f"input: {ds.show(res.input)}")
    rep.transcript.append(_replay_line(a, res.input))
    _write_witness(res.input, args.witness, rep)
    return FAIL


# -- argument parsing ----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sdt", description="Streaming data-string transducers and single-pass "
                                "list programs: run, compile, generate and verify.")
    p.add_argument("--json", action="store_true", help="print a machine-readable report")
    sub = p.add_subparsers(dest="command", required=True)

    def lang_opt(sp, flag="--lang"):
        sp.add_argument(flag, choices=LANGS, dest="lang" if flag == "--lang" else "source_lang",
                        help="override detection by file extension")

    r = sub.add_parser("run", help="run a machine or program on an input data string")
    r.add_argument("program")
    r.add_argument("input", help="JSON array of [tag, integer] pairs")
    lang_opt(r)
    r.add_argument("--param", action="append", metavar="NAME=VALUE", help="scalar input parameter")
    r.add_argument("--encoded", action="store_true",
                   help="the input carries the parameter prefix; print the encoded output")
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("validate", help="parse and check a machine or program")
    v.add_argument("path")
    lang_opt(v)
    v.set_defaults(func=cmd_validate)

    cr = sub.add_parser("check-restrictions", help="check the single-pass restrictions of a program")
    cr.add_argument("path")
    lang_opt(cr)
    cr.set_defaults(func=cmd_check_restrictions)

    for name, helptext, default in (("compile", "compile a program to a transducer", "sdst"),
                                    ("codegen", "generate a program from a transducer", None)):
        c = sub.add_parser(name, help=helptext)
        c.add_argument("path")
        lang_opt(c, "--from")
        c.add_argument("--to", choices=LANGS, default=default, required=default is None)
        c.add_argument("--eliminate-eps", action="store_true", help="remove ε-transitions from the result")
        c.add_argument("--alphabet", help="comma-separated list tags (default: tags in the program, plus a)")
        c.add_argument("--name", default="Generated", help="name of the generated program")
        c.add_argument("-o", "--output", help="write to this file instead of stdout")
        c.set_defaults(func=cmd_compile if name == "compile" else cmd_codegen)

    e = sub.add_parser("equiv", help="decide whether two machines or programs are equivalent")
    e.add_argument("a")
    e.add_argument("b")
    lang_opt(e)
    e.add_argument("--alphabet", help="comma-separated list tags shared by both sides")
    e.add_argument("--witness", metavar="PATH", help="write a separating input here")
    e.set_defaults(func=cmd_equiv)

    h = sub.add_parser("hoare", help="check {pre} body {post}")
    h.add_argument("body")
    h.add_argument("--pre", help="acceptor over inputs (default: accept everything)")
    h.add_argument("--post", help="acceptor over outputs (default: accept everything)")
    lang_opt(h)
    h.add_argument("--mode", choices=("summary", "bounded"), default="summary")
    h.add_argument("--bound", type=int, default=5, help="input length for bounded mode")
    h.add_argument("--total", action="store_true", help="also require the body to be defined")
    h.add_argument("--alphabet", help="comma-separated list tags for compiling the body")
    h.add_argument("--witness", metavar="PATH", help="write a violating input here")
    h.set_defaults(func=cmd_hoare)

    a = sub.add_parser("assert", help="search for a heap event in an imperative program")
    a.add_argument("program")
    a.add_argument("--kind", choices=KINDS, required=True)
    a.add_argument("--label", help="location for --kind loc")
    a.add_argument("--x", help="reference variable for alias and nil")
    a.add_argument("--y", help="second reference variable for alias")
    a.add_argument("--pre", help="acceptor over encoded inputs")
    lang_opt(a)
    a.add_argument("--witness", metavar="PATH", help="write the witness input here")
    a.set_defaults(func=cmd_assert)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    rep = Report(["sdt"] + argv)
    start = time.perf_counter()
    try:
        code = args.func(args, rep)
    except UsageError as exc:
        rep.verdict = f"error: {exc}"
        rep.diagnostics = exc.diagnostics
        code = USAGE
    rep.timing = time.perf_counter() - start
    if args.json:
        print(json.dumps(rep.to_json(), indent=1))
    else:
        stream = sys.stderr if code == USAGE else sys.stdout
        print(rep.text(), file=stream)
    return code


if __name__ == "__main__":
    sys.exit(main())
