from .expr import (
    Add,
    Const,
    Div,
    Exp,
    Expression,
    Ln,
    Mul,
    Neg,
    Var,
    X,
    complexity,
    depth,
    diff_expr,
    display,
    eval_expr,
    evaluate,
    parse,
    to_string,
)
from .gp import GpConfig, ParetoFront, crossover, fit_constants, gp_search, mutate, random_tree
from .select import Selection, sample_shape_function, select_model

__all__ = [
    "Add", "Const", "Div", "Exp", "Expression", "Ln", "Mul", "Neg", "Var", "X",
    "complexity", "depth", "diff_expr", "display", "eval_expr", "evaluate", "parse", "to_string",
    "GpConfig", "ParetoFront", "crossover", "fit_constants", "gp_search", "mutate", "random_tree",
    "Selection", "sample_shape_function", "select_model",
]
