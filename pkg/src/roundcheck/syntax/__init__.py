"""Types, terms, parsers and printers for the .nfz and .bean languages."""

from .bean_parser import BEAN_PRIMITIVES, parse_bean, parse_bean_type_text
from .lexer import ParseError
from .nfz_parser import NFZ_PRIMITIVES, parse_numfuzz, parse_nfz_type_text
from .pretty import (
    pretty, pretty_bean_term, pretty_bean_type, pretty_grade, pretty_number, pretty_program,
    pretty_term, pretty_type,
)

__all__ = [
    "BEAN_PRIMITIVES", "NFZ_PRIMITIVES", "ParseError", "parse_bean", "parse_bean_type_text",
    "parse_numfuzz", "parse_nfz_type_text", "pretty", "pretty_bean_term", "pretty_bean_type",
    "pretty_grade", "pretty_number", "pretty_program", "pretty_term", "pretty_type",
]
