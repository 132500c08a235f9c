"""The imperative heap-list language: parsing, checking, running, compiling, generating."""
from .ast import ImpProgram
from .cfg import EXIT, Restriction, build_cfg, check_imp
from .codegen import imp_from_sdst, imp_source_from_sdst
from .compile import CompileError, ImpCompiler, compile_imp
from .interp import ImpOutcome, ImpRuntimeError, default_alphabet, default_budget, run_imp
from .parser import ImpSyntaxError, parse_imp

__all__ = ["ImpProgram", "EXIT", "Restriction", "build_cfg", "check_imp", "imp_from_sdst",
           "imp_source_from_sdst", "CompileError", "ImpCompiler", "compile_imp", "ImpOutcome",
           "ImpRuntimeError", "default_alphabet", "default_budget", "run_imp", "ImpSyntaxError",
           "parse_imp"]
