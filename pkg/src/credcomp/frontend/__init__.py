from .lower import TEMP_PREFIX, compile_source, lower, unassigned_temp_uses
from .source import SourceAst, SourceError, Token, parse_source, tokenize
from .tactext import TacSyntaxError, parse_tac, print_tac, program_hash

__all__ = [
    "SourceAst",
    "SourceError",
    "TEMP_PREFIX",
    "TacSyntaxError",
    "Token",
    "compile_source",
    "lower",
    "parse_source",
    "parse_tac",
    "print_tac",
    "program_hash",
    "tokenize",
    "unassigned_temp_uses",
]
