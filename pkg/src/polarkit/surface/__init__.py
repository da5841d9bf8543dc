from .desugar import DesugarError, DesugarResult, desugar, desugar_expr
from .parser import parse, parse_expr

__all__ = ["DesugarError", "DesugarResult", "desugar", "desugar_expr", "parse", "parse_expr"]
