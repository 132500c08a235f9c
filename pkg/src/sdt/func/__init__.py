"""The functional list language: parser, restriction checker, interpreter and compiler."""
from .ast import FuncProgram
from .codegen import func_from_sdst, func_source_from_sdst
from .check import RestrictionReport, Violation, check_single_pass
from .compile import FuncCompileError, FuncCompiler, compile_func
from .interp import FuncOutcome, run_func
from .parser import FuncSyntaxError, parse_func

__all__ = ["FuncProgram", "RestrictionReport", "Violation", "check_single_pass", "FuncCompileError",
           "FuncCompiler", "compile_func", "FuncOutcome", "run_func", "FuncSyntaxError", "parse_func",
           "func_from_sdst", "func_source_from_sdst"]
