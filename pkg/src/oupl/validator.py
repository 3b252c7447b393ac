"""Semantic validation: name resolution, type checking, structural rules.

Produces a TypedModel where every expression node carries exactly one type
and every Ref knows what it refers to.  Object constants are resolved to
integer indices.

Structural rules enforced here:
  * every identifier declared exactly once; every reference resolves;
  * one number statement per open-universe type, none for distinct types;
  * distribution arities and argument types;
  * distribution calls only in tail position (each execution path through a
    declaration body ends in exactly one distribution call or a
    deterministic value);
  * unconditional self-reference is rejected (a function whose body refers
    to itself outside any conditional branch); cyclic references between
    templates are allowed, since a particular world can still be acyclic.
"""

from __future__ import annotations

from .ast_nodes import (
    BUILTIN_TYPES, BinOp, DIST_SIGNATURES, DistCall, IfExpr, Lit, Model,
    NumRef, Ref, TypeInfo, TypedModel, UnaryOp, walk,
)
from .errors import ValidationError

_NUMERIC = ("Int", "Real")


def _err(msg, node) -> ValidationError:
    pos = getattr(node, "pos", None)
    if pos is None:
        return ValidationError(msg)
    return ValidationError(msg, pos.line, pos.col)


class _Scope:
    """Global declarations plus the parameters of the template being checked."""

    def __init__(self, tm: TypedModel):
        self.tm = tm
        self.params = {}

    def with_params(self, params):
        s = _Scope(self.tm)
        s.params = dict((n, t) for n, t in params)
        return s


def validate(model: Model, name: str = "model") -> TypedModel:
    tm = TypedModel(model=model, name=name)
    _collect_declarations(model, tm)
    scope = _Scope(tm)

    for ns in model.number_stmts:
        _check_body(ns.body, scope, f"#{ns.object_type}")
        if ns.body.ty != "Int":
            raise _err(f"number statement for {ns.object_type} must have integer"
                       f" support, got {ns.body.ty}", ns.body)
        _check_number_support(ns)

    for f in model.fixed_fns:
        fscope = scope.with_params(f.params)
        _check_param_types(f, tm)
        _infer(f.body, fscope)
        for node in walk(f.body):
            if isinstance(node, DistCall):
                raise _err(f"fixed function {f.name} cannot contain a"
                           " distribution call", node)
        _require(f.body, f.return_type, f"body of fixed {f.name}")

    for f in model.random_fns:
        fscope = scope.with_params(f.params)
        _check_param_types(f, tm)
        _check_body(f.body, fscope, f.name, expect=f.return_type)
        _check_self_cycle(f)

    for ob in model.evidence:
        _infer(ob.lhs, scope)
        if not (isinstance(ob.lhs, Ref) and ob.lhs.kind == "random"):
            raise _err("observation left-hand side must be a random-function"
                       " application", ob.lhs)
        _infer(ob.value, scope)
        if not _is_literal_value(ob.value):
            raise _err("observation right-hand side must be a literal value",
                       ob.value)
        _require(ob.value, ob.lhs.ty, "observed value")

    for q in model.queries:
        _infer(q.expr, scope)

    return tm


# ---------------------------------------------------------------------------
# declaration collection


def _collect_declarations(model: Model, tm: TypedModel) -> None:
    seen = {}

    def declare(kind, name, node):
        if name in DIST_SIGNATURES:
            raise _err(f"{name!r} is a reserved distribution name", node)
        if name in BUILTIN_TYPES:
            raise _err(f"{name!r} is a builtin type name", node)
        if name in seen:
            raise _err(f"{kind} {name!r} conflicts with earlier declaration of"
                       f" {seen[name]} {name!r}", node)
        seen[name] = kind

    for td in model.type_decls:
        declare("type", td.name, td)
        tm.types[td.name] = TypeInfo(td.name, td.constants)
        for idx, cname in enumerate(td.constants):
            declare("object constant", cname, td)
            tm.constants[cname] = (td.name, idx)

    for ns in model.number_stmts:
        info = tm.types.get(ns.object_type)
        if info is None:
            raise _err(f"number statement for undeclared type {ns.object_type!r}", ns)
        if info.number_stmt is not None:
            raise _err(f"duplicate number statement for type {ns.object_type!r}", ns)
        if info.constants:
            raise _err(f"type {ns.object_type!r} has distinct constants and"
                       " cannot also have a number statement", ns)
        info.number_stmt = ns

    for f in model.random_fns:
        declare("random function", f.name, f)
        tm.randoms[f.name] = f
    for f in model.fixed_fns:
        declare("fixed function", f.name, f)
        tm.fixeds[f.name] = f


def _check_param_types(f, tm: TypedModel) -> None:
    if len(f.params) > 2:
        raise _err(f"function {f.name} has {len(f.params)} parameters;"
                   " at most 2 are supported", f)
    names = set()
    for n, t in f.params:
        if n in names:
            raise _err(f"duplicate parameter {n!r} in {f.name}", f)
        names.add(n)
        if t not in tm.types and t not in BUILTIN_TYPES:
            raise _err(f"parameter {n!r} of {f.name} has undeclared type {t!r}", f)
    if f.return_type not in tm.types and f.return_type not in BUILTIN_TYPES:
        raise _err(f"function {f.name} has undeclared return type"
                   f" {f.return_type!r}", f)


# ---------------------------------------------------------------------------
# type inference


def _compatible(expected: str, actual: str) -> bool:
    return expected == actual or (expected == "Real" and actual == "Int")


def _require(node, expected: str, what: str) -> None:
    if not _compatible(expected, node.ty):
        raise _err(f"{what} has type {node.ty}, expected {expected}", node)


def _infer(e, scope: _Scope) -> str:
    tm = scope.tm
    if isinstance(e, Lit):
        if isinstance(e.value, bool):
            e.ty = "Bool"
        elif isinstance(e.value, int):
            e.ty = "Int"
        else:
            e.ty = "Real"
        return e.ty

    if isinstance(e, NumRef):
        info = tm.types.get(e.type_name)
        if info is None:
            raise _err(f"number reference to undeclared type {e.type_name!r}", e)
        if not info.is_open:
            raise _err(f"type {e.type_name!r} has no number statement", e)
        e.ty = "Int"
        return e.ty

    if isinstance(e, Ref):
        return _infer_ref(e, scope)

    if isinstance(e, IfExpr):
        _infer(e.cond, scope)
        _require(e.cond, "Bool", "if condition")
        t1 = _infer(e.then, scope)
        t2 = _infer(e.els, scope)
        if t1 == t2:
            e.ty = t1
        elif {t1, t2} <= set(_NUMERIC):
            e.ty = "Real"
        else:
            raise _err(f"if branches have incompatible types {t1} and {t2}", e)
        return e.ty

    if isinstance(e, BinOp):
        t1 = _infer(e.left, scope)
        t2 = _infer(e.right, scope)
        if e.op in ("==", "!="):
            if t1 != t2 and not ({t1, t2} <= set(_NUMERIC)):
                raise _err(f"cannot compare {t1} with {t2}", e)
            e.ty = "Bool"
        elif e.op in ("<", "<=", ">", ">="):
            for t, side in ((t1, e.left), (t2, e.right)):
                if t not in _NUMERIC:
                    raise _err(f"ordering comparison requires numeric operands,"
                               f" got {t}", side)
            e.ty = "Bool"
        else:
            for t, side in ((t1, e.left), (t2, e.right)):
                if t not in _NUMERIC:
                    raise _err(f"arithmetic requires numeric operands, got {t}", side)
            if e.op == "/":
                e.ty = "Real"
            else:
                e.ty = "Int" if t1 == t2 == "Int" else "Real"
        return e.ty

    if isinstance(e, UnaryOp):
        t = _infer(e.operand, scope)
        if t not in _NUMERIC:
            raise _err(f"unary minus requires a numeric operand, got {t}", e)
        e.ty = t
        return e.ty

    if isinstance(e, DistCall):
        return _infer_dist(e, scope)

    raise _err(f"unsupported expression {e!r}", e)


def _infer_ref(e: Ref, scope: _Scope) -> str:
    tm = scope.tm
    if not e.args and e.name in scope.params:
        e.kind = "param"
        e.ty = scope.params[e.name]
        return e.ty
    if e.name in tm.randoms:
        decl = tm.randoms[e.name]
        e.kind = "random"
        _check_args(e, decl, scope)
        e.ty = decl.return_type
        return e.ty
    if e.name in tm.fixeds:
        decl = tm.fixeds[e.name]
        e.kind = "fixed"
        _check_args(e, decl, scope)
        e.ty = decl.return_type
        return e.ty
    if not e.args and e.name in tm.constants:
        tname, idx = tm.constants[e.name]
        e.kind = "const"
        e.const_index = idx
        e.ty = tname
        return e.ty
    raise _err(f"reference to undeclared name {e.name!r}", e)


def _check_args(e: Ref, decl, scope: _Scope) -> None:
    if len(e.args) != len(decl.params):
        raise _err(f"{e.name} takes {len(decl.params)} argument(s),"
                   f" got {len(e.args)}", e)
    for arg, (pname, ptype) in zip(e.args, decl.params):
        _infer(arg, scope)
        _require(arg, ptype, f"argument {pname!r} of {e.name}")


def _infer_dist(e: DistCall, scope: _Scope) -> str:
    tm = scope.tm
    if e.dist == "Categorical":
        key_ty = None
        for k, w in e.mapping:
            t = _infer(k, scope)
            if key_ty is None:
                key_ty = t
            elif not (_compatible(key_ty, t) or _compatible(t, key_ty)):
                raise _err(f"Categorical keys mix types {key_ty} and {t}", k)
            _infer(w, scope)
            _require(w, "Real", "Categorical weight")
        e.ty = key_ty
        return e.ty
    if e.dist == "UniformChoice":
        info = tm.types.get(e.set_type)
        if info is None:
            raise _err(f"UniformChoice over undeclared type {e.set_type!r}", e)
        e.ty = e.set_type
        return e.ty
    arg_types, ret = DIST_SIGNATURES[e.dist]
    if len(e.args) != len(arg_types):
        raise _err(f"{e.dist} takes {len(arg_types)} argument(s),"
                   f" got {len(e.args)}", e)
    for arg, expected in zip(e.args, arg_types):
        _infer(arg, scope)
        _require(arg, expected, f"argument of {e.dist}")
    e.ty = ret
    return e.ty


# ---------------------------------------------------------------------------
# structural rules


def _check_body(body, scope: _Scope, what: str, expect: str = None) -> None:
    """Type-check a declaration body and enforce the tail-position rule."""
    _infer(body, scope)
    if expect is not None:
        _require(body, expect, f"body of {what}")
    _check_tail_positions(body, tail=True, what=what)


def _check_tail_positions(e, tail: bool, what: str) -> None:
    if isinstance(e, DistCall):
        if not tail:
            raise _err(f"distribution call in non-tail position in {what}"
                       " (distributions may only appear as the final outcome"
                       " of a declaration path)", e)
        for sub in e.args:
            _check_tail_positions(sub, False, what)
        if e.mapping:
            for k, w in e.mapping:
                _check_tail_positions(k, False, what)
                _check_tail_positions(w, False, what)
        return
    if isinstance(e, IfExpr):
        _check_tail_positions(e.cond, False, what)
        _check_tail_positions(e.then, tail, what)
        _check_tail_positions(e.els, tail, what)
        return
    if isinstance(e, BinOp):
        _check_tail_positions(e.left, False, what)
        _check_tail_positions(e.right, False, what)
        return
    if isinstance(e, UnaryOp):
        _check_tail_positions(e.operand, False, what)
        return
    if isinstance(e, Ref):
        for a in e.args:
            _check_tail_positions(a, False, what)


def _check_self_cycle(f) -> None:
    """Reject reference of f inside its own body outside any if-branch."""

    def scan(e, in_branch: bool):
        if isinstance(e, Ref) and e.kind == "random" and e.name == f.name:
            if not in_branch:
                raise _err(f"random function {f.name!r} unconditionally refers"
                           " to itself; no possible world can satisfy this"
                           " declaration", e)
        if isinstance(e, IfExpr):
            scan(e.cond, in_branch)
            scan(e.then, True)
            scan(e.els, True)
            return
        for c in _subexprs(e):
            scan(c, in_branch)

    scan(f.body, False)


def _subexprs(e):
    from .ast_nodes import children
    return children(e)


def _check_number_support(ns) -> None:
    """Distribution families allowed in number statements."""
    ok = ("UniformInt", "Poisson", "Categorical")

    def scan(e, tail):
        if isinstance(e, DistCall):
            if e.dist not in ok:
                raise _err(f"number statement for {ns.object_type} uses"
                           f" {e.dist}, which cannot produce a non-negative"
                           " integer count", e)
            return
        if isinstance(e, IfExpr):
            scan(e.then, tail)
            scan(e.els, tail)
            return
        if isinstance(e, Lit):
            if tail and (not isinstance(e.value, int) or isinstance(e.value, bool)
                         or e.value < 0):
                raise _err("number statement outcome must be a non-negative"
                           " integer", e)

    scan(ns.body, True)


def _is_literal_value(e) -> bool:
    if isinstance(e, Lit):
        return True
    if isinstance(e, UnaryOp) and isinstance(e.operand, Lit):
        return True
    if isinstance(e, Ref) and e.kind == "const":
        return True
    return False


def literal_value(e):
    """Python value of a validated literal expression."""
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, UnaryOp) and isinstance(e.operand, Lit):
        return -e.operand.value
    if isinstance(e, Ref) and e.kind == "const":
        return e.const_index
    raise ValueError(f"not a literal: {e!r}")
