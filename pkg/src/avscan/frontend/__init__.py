from .nodes import Node, Span, SourceUnit, ContractDef, FunctionDef, ModifierDef, StateVarDecl, ParamDecl
from .parser import parse_source, enumerate_functions
from .lexer import tokenize, Token

__all__ = [
    "Node", "Span", "SourceUnit", "ContractDef", "FunctionDef", "ModifierDef",
    "StateVarDecl", "ParamDecl", "parse_source", "enumerate_functions",
    "tokenize", "Token",
]
