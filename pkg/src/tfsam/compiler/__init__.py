"""Grammar frontend, description normalization and code generation."""

from .codegen import (
    Block, Instr, ObjectCode, compile_grammar, compile_program_term, compile_query_term,
    compile_rule, compile_type_table, flatten, read_object,
)
from .frontend import parse_description, parse_source
from .grammar import Grammar, Rule, build_grammar, expand_empty_categories, order_unit_rules

__all__ = [
    "Block", "Grammar", "Instr", "ObjectCode", "Rule", "build_grammar", "compile_grammar",
    "compile_program_term", "compile_query_term", "compile_rule", "compile_type_table",
    "expand_empty_categories", "flatten", "order_unit_rules", "parse_description",
    "parse_source", "read_object",
]
