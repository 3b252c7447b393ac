"""AST for the modeling language.

Expression nodes are plain mutable dataclasses.  The validator annotates
every node in place: ``ty`` receives the node's type and ``Ref`` nodes get
their resolved ``kind``.  Types are represented as strings: the builtins
``Bool``, ``Int``, ``Real`` plus user-declared type names.  Object values of
user types are plain integer indices from validation onward.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union


BUILTIN_TYPES = ("Bool", "Int", "Real")

# Distribution vocabulary.  Maps name -> (arity, arg types, return type).
# Categorical and UniformChoice have bespoke syntax and are special-cased.
DIST_SIGNATURES = {
    "UniformInt": (("Int", "Int"), "Int"),
    "Bernoulli": (("Real",), "Bool"),
    "Gaussian": (("Real", "Real"), "Real"),
    "Poisson": (("Real",), "Int"),
    "Beta": (("Real", "Real"), "Real"),
    "Gamma": (("Real", "Real"), "Real"),
    "Categorical": (None, None),    # map syntax, return type = key type
    "UniformChoice": (None, None),  # set syntax, return type = element type
}


@dataclass
class Pos:
    line: int = 0
    col: int = 0


# ---------------------------------------------------------------------------
# Expressions


@dataclass
class Lit:
    value: Union[bool, int, float]
    pos: Pos = field(default_factory=Pos)
    ty: Optional[str] = None


@dataclass
class Ref:
    """Identifier reference or function application.

    ``kind`` is filled by the validator: "param", "random", "fixed" or
    "const" (a distinct-declared object constant; ``const_index`` then holds
    its object index).
    """

    name: str
    args: tuple = ()
    pos: Pos = field(default_factory=Pos)
    ty: Optional[str] = None
    kind: Optional[str] = None
    const_index: Optional[int] = None


@dataclass
class NumRef:
    """Reference to a number variable, written ``#T``."""

    type_name: str
    pos: Pos = field(default_factory=Pos)
    ty: Optional[str] = "Int"


@dataclass
class IfExpr:
    cond: "Expr"
    then: "Expr"
    els: "Expr"
    pos: Pos = field(default_factory=Pos)
    ty: Optional[str] = None


@dataclass
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"
    pos: Pos = field(default_factory=Pos)
    ty: Optional[str] = None


@dataclass
class UnaryOp:
    op: str
    operand: "Expr"
    pos: Pos = field(default_factory=Pos)
    ty: Optional[str] = None


@dataclass
class DistCall:
    """A distribution call in tail position.

    ``mapping`` carries Categorical's ``{key -> weight, ...}`` entries;
    ``set_type``/``set_var`` carry UniformChoice's ``{T t}`` set expression.
    """

    dist: str
    args: tuple = ()
    mapping: Optional[tuple] = None
    set_type: Optional[str] = None
    set_var: Optional[str] = None
    pos: Pos = field(default_factory=Pos)
    ty: Optional[str] = None


Expr = Union[Lit, Ref, NumRef, IfExpr, BinOp, UnaryOp, DistCall]


# ---------------------------------------------------------------------------
# Statements


@dataclass
class TypeDecl:
    name: str
    constants: tuple = ()  # distinct-declared object names, index = position
    pos: Pos = field(default_factory=Pos)


@dataclass
class NumberStmt:
    object_type: str
    body: Expr = None
    pos: Pos = field(default_factory=Pos)


@dataclass
class RandomFuncDecl:
    name: str
    params: tuple = ()          # ((name, type), ...)
    return_type: str = ""
    body: Expr = None
    pos: Pos = field(default_factory=Pos)


@dataclass
class FixedFuncDecl:
    name: str
    params: tuple = ()
    return_type: str = ""
    body: Expr = None
    pos: Pos = field(default_factory=Pos)


@dataclass
class ObsStmt:
    lhs: Expr = None            # validated: a random-function application
    value: Expr = None          # literal (possibly negated) or object constant
    pos: Pos = field(default_factory=Pos)


@dataclass
class QueryStmt:
    expr: Expr = None
    pos: Pos = field(default_factory=Pos)


@dataclass
class Model:
    type_decls: list = field(default_factory=list)
    number_stmts: list = field(default_factory=list)
    random_fns: list = field(default_factory=list)
    fixed_fns: list = field(default_factory=list)
    evidence: list = field(default_factory=list)
    queries: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# Validated model


@dataclass
class TypeInfo:
    name: str
    constants: tuple = ()
    number_stmt: Optional[NumberStmt] = None

    @property
    def is_open(self) -> bool:
        return self.number_stmt is not None

    @property
    def fixed_size(self) -> Optional[int]:
        """Object count for closed user types; None for open ones."""
        return None if self.is_open else len(self.constants)


@dataclass
class TypedModel:
    model: Model
    types: dict = field(default_factory=dict)     # name -> TypeInfo
    randoms: dict = field(default_factory=dict)   # name -> RandomFuncDecl
    fixeds: dict = field(default_factory=dict)    # name -> FixedFuncDecl
    constants: dict = field(default_factory=dict)  # const name -> (type, index)
    name: str = "model"

    def open_types(self) -> list:
        return [t for t in self.types.values() if t.is_open]

    def const_name(self, type_name: str, index: int) -> str:
        info = self.types.get(type_name)
        if info is not None and index < len(info.constants):
            return info.constants[index]
        return f"{type_name}[{index}]"


def children(e: Expr) -> tuple:
    """Direct sub-expressions of ``e`` in deterministic order."""
    if isinstance(e, (Lit, NumRef)):
        return ()
    if isinstance(e, Ref):
        return tuple(e.args)
    if isinstance(e, IfExpr):
        return (e.cond, e.then, e.els)
    if isinstance(e, BinOp):
        return (e.left, e.right)
    if isinstance(e, UnaryOp):
        return (e.operand,)
    if isinstance(e, DistCall):
        out = list(e.args)
        if e.mapping:
            for k, w in e.mapping:
                out.append(k)
                out.append(w)
        return tuple(out)
    raise TypeError(f"not an expression: {e!r}")


def walk(e: Expr):
    """Pre-order traversal of an expression tree."""
    yield e
    for c in children(e):
        yield from walk(c)


def skeleton(e: Expr):
    """Dependency skeleton of an expression: structure and references with
    literal leaves erased.

    Two branches with equal skeletons read exactly the same references under
    any downstream valuation, so the branch condition cannot re-route the
    parent set.
    """
    if isinstance(e, Lit):
        return ("lit",)
    if isinstance(e, Ref):
        return ("ref", e.name) + tuple(skeleton(a) for a in e.args)
    if isinstance(e, NumRef):
        return ("num", e.type_name)
    if isinstance(e, IfExpr):
        return ("if", skeleton(e.cond), skeleton(e.then), skeleton(e.els))
    if isinstance(e, BinOp):
        return ("bin", e.op, skeleton(e.left), skeleton(e.right))
    if isinstance(e, UnaryOp):
        return ("un", skeleton(e.operand))
    if isinstance(e, DistCall):
        parts = ["dist", e.dist]
        parts.extend(skeleton(a) for a in e.args)
        if e.mapping:
            for k, w in e.mapping:
                parts.append(skeleton(k))
                parts.append(skeleton(w))
        if e.set_type:
            parts.append(("set", e.set_type))
        return tuple(parts)
    raise TypeError(f"not an expression: {e!r}")


def struct_key(e: Expr):
    """Structural identity of an expression (ignores positions/annotations).

    Used to deduplicate references: two occurrences of ``z(d)`` in one body
    compare equal.
    """
    if isinstance(e, Lit):
        return ("lit", type(e.value).__name__, e.value)
    if isinstance(e, Ref):
        return ("ref", e.name) + tuple(struct_key(a) for a in e.args)
    if isinstance(e, NumRef):
        return ("num", e.type_name)
    if isinstance(e, IfExpr):
        return ("if", struct_key(e.cond), struct_key(e.then), struct_key(e.els))
    if isinstance(e, BinOp):
        return ("bin", e.op, struct_key(e.left), struct_key(e.right))
    if isinstance(e, UnaryOp):
        return ("un", e.op, struct_key(e.operand))
    if isinstance(e, DistCall):
        parts = ["dist", e.dist]
        parts.extend(struct_key(a) for a in e.args)
        if e.mapping:
            for k, w in e.mapping:
                parts.append(struct_key(k))
                parts.append(struct_key(w))
        if e.set_type:
            parts.append(("set", e.set_type, e.set_var))
        return tuple(parts)
    raise TypeError(f"not an expression: {e!r}")
