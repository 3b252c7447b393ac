"""Pretty-printer for model ASTs.

Printing a parsed model and reparsing the output yields a structurally
identical AST (case statements were already desugared at parse time, so
they reappear as if-chains).
"""

from __future__ import annotations

from .ast_nodes import (
    BinOp, DistCall, FixedFuncDecl, IfExpr, Lit, Model, NumRef, NumberStmt,
    ObsStmt, QueryStmt, RandomFuncDecl, Ref, UnaryOp, struct_key,
)

_PREC = {
    "==": 1, "!=": 1, "<": 1, "<=": 1, ">": 1, ">=": 1,
    "+": 2, "-": 2,
    "*": 3, "/": 3,
}


def print_expr(e, parent_prec: int = 0) -> str:
    if isinstance(e, Lit):
        if isinstance(e.value, bool):
            return "true" if e.value else "false"
        return repr(e.value)
    if isinstance(e, Ref):
        if e.args:
            return f"{e.name}({', '.join(print_expr(a) for a in e.args)})"
        return e.name
    if isinstance(e, NumRef):
        return f"#{e.type_name}"
    if isinstance(e, IfExpr):
        s = (f"if {print_expr(e.cond)} then {print_expr(e.then)} "
             f"else {print_expr(e.els)}")
        return f"({s})" if parent_prec > 0 else s
    if isinstance(e, BinOp):
        prec = _PREC[e.op]
        s = f"{print_expr(e.left, prec)} {e.op} {print_expr(e.right, prec + 1)}"
        return f"({s})" if prec < parent_prec else s
    if isinstance(e, UnaryOp):
        return f"-{print_expr(e.operand, 4)}"
    if isinstance(e, DistCall):
        if e.dist == "Categorical":
            entries = ", ".join(
                f"{print_expr(k)} -> {print_expr(w)}" for k, w in e.mapping)
            return f"Categorical({{{entries}}})"
        if e.dist == "UniformChoice":
            return f"UniformChoice({{{e.set_type} {e.set_var}}})"
        return f"{e.dist}({', '.join(print_expr(a) for a in e.args)})"
    raise TypeError(f"not an expression: {e!r}")


def print_model(m: Model) -> str:
    lines = []
    for td in m.type_decls:
        lines.append(f"type {td.name};")
        if td.constants:
            lines.append(f"distinct {td.name} {', '.join(td.constants)};")
    for ns in m.number_stmts:
        lines.append(f"#{ns.object_type} ~ {print_expr(ns.body)};")
    for f in m.fixed_fns:
        params = _params(f)
        lines.append(f"fixed {f.return_type} {f.name}{params} = {print_expr(f.body)};")
    for f in m.random_fns:
        params = _params(f)
        lines.append(f"random {f.return_type} {f.name}{params} ~ {print_expr(f.body)};")
    for ob in m.evidence:
        lines.append(f"obs {print_expr(ob.lhs)} = {print_expr(ob.value)};")
    for q in m.queries:
        lines.append(f"query {print_expr(q.expr)};")
    return "\n".join(lines) + "\n"


def _params(f) -> str:
    if not f.params:
        return ""
    return "(" + ", ".join(f"{t} {n}" for n, t in f.params) + ")"


def models_equal(a: Model, b: Model) -> bool:
    """Structural equality, ignoring positions and annotations."""

    def stmt_keys(m):
        return (
            [(td.name, td.constants) for td in m.type_decls],
            [(ns.object_type, struct_key(ns.body)) for ns in m.number_stmts],
            [(f.name, f.params, f.return_type, struct_key(f.body)) for f in m.random_fns],
            [(f.name, f.params, f.return_type, struct_key(f.body)) for f in m.fixed_fns],
            [(struct_key(o.lhs), struct_key(o.value)) for o in m.evidence],
            [struct_key(q.expr) for q in m.queries],
        )

    return stmt_keys(a) == stmt_keys(b)
