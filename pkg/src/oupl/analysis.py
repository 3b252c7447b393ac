"""Static analysis over validated models.

Computes the facts code generation needs:

  * free variables of expressions (random-function and number-variable
    references, excluding fixed functions);
  * the switching-set approximation S_hat: for each template, the templates
    whose value changes can re-route its parent set — the union of free
    variables of if-conditions (including desugared case scrutinees),
    random-function argument expressions, and set expressions;
  * the static children upper bound: for each template X, every reference
    site to X across all declarations, evidence and queries, with argument
    mappings so candidate child instances can be enumerated;
  * conjugacy tags for Gibbs (Beta-Bernoulli, Gamma-Poisson, Gaussian with
    a Gaussian mean), plus static finite supports for enumerated Gibbs.

Templates are identified by name: random functions by their declared name,
number variables as ``#T``, observation and query statements as ``obs[i]``
and ``query[i]`` pseudo-templates (they reference variables and therefore
participate in dependency bookkeeping, but have no sampled value of their
own).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from .ast_nodes import (
    BinOp, DistCall, IfExpr, Lit, NumRef, Ref, TypedModel, UnaryOp,
    skeleton, struct_key,
)
from .validator import literal_value


# ---------------------------------------------------------------------------
# template universe


@dataclass(frozen=True)
class Template:
    """One dependency-tracking unit: a random function, a number variable,
    or an observation/query pseudo-node."""

    name: str
    kind: str                  # "random" | "number" | "obs" | "query"
    params: tuple = ()         # ((name, type), ...)
    body: object = None        # declaration / lhs / query expression
    obs_value: object = None   # pinned value for obs templates


def templates_of(tm: TypedModel) -> dict:
    out = {}
    for t in tm.types.values():
        if t.is_open:
            name = f"#{t.name}"
            out[name] = Template(name, "number", (), t.number_stmt.body)
    for f in tm.model.random_fns:
        out[f.name] = Template(f.name, "random", f.params, f.body)
    for i, ob in enumerate(tm.model.evidence):
        name = f"obs[{i}]"
        out[name] = Template(name, "obs", (), ob.lhs, literal_value(ob.value))
    for i, q in enumerate(tm.model.queries):
        name = f"query[{i}]"
        out[name] = Template(name, "query", (), q.expr)
    return out


# ---------------------------------------------------------------------------
# free variables


@dataclass(frozen=True)
class RefSite:
    """A syntactic reference to a random template inside an expression."""

    template: str      # function name or "#T"
    args: tuple        # argument expressions
    node: object       # the Ref/NumRef/DistCall node itself

    def key(self):
        return (self.template,) + tuple(struct_key(a) for a in self.args)


def free_vars(e) -> list:
    """Random-variable reference sites syntactically reachable in ``e``.

    Fixed functions and literals contribute nothing themselves, but their
    argument expressions are scanned.  Set expressions contribute the number
    variable of their element type (open types only).  Deduplicated by
    structural identity, in first-occurrence order.
    """
    out = []
    seen = set()

    def add(site: RefSite):
        k = site.key()
        if k not in seen:
            seen.add(k)
            out.append(site)

    def scan(node):
        if isinstance(node, Ref):
            if node.kind == "random":
                add(RefSite(node.name, tuple(node.args), node))
            for a in node.args:
                scan(a)
            return
        if isinstance(node, NumRef):
            add(RefSite(f"#{node.type_name}", (), node))
            return
        if isinstance(node, Lit):
            return
        if isinstance(node, IfExpr):
            scan(node.cond)
            scan(node.then)
            scan(node.els)
            return
        if isinstance(node, BinOp):
            scan(node.left)
            scan(node.right)
            return
        if isinstance(node, UnaryOp):
            scan(node.operand)
            return
        if isinstance(node, DistCall):
            for a in node.args:
                scan(a)
            if node.mapping:
                for k, w in node.mapping:
                    scan(k)
                    scan(w)
            if node.set_type is not None:
                scan_set_expr(node)
            return
        raise TypeError(f"not an expression: {node!r}")

    def scan_set_expr(node: DistCall):
        # {T t} reads the number variable of T when T is open.
        add_num_for_set(node, add)

    def add_num_for_set(node, addfn):
        # The validator guarantees set_type exists; only open types have a
        # number variable to read.
        ti = _TYPE_TABLE.get(node.set_type) if _TYPE_TABLE else None
        if ti is None or ti.is_open:
            addfn(RefSite(f"#{node.set_type}", (), node))

    scan(e)
    return out


# free_vars needs type openness to decide whether a set expression reads a
# number variable; a tiny module-level registry keeps its signature matching
# the one-argument contract.
_TYPE_TABLE = {}


class _TypeContext:
    def __init__(self, tm: TypedModel):
        self.tm = tm

    def __enter__(self):
        global _TYPE_TABLE
        self._saved = _TYPE_TABLE
        _TYPE_TABLE = self.tm.types
        return self

    def __exit__(self, *exc):
        global _TYPE_TABLE
        _TYPE_TABLE = self._saved


# ---------------------------------------------------------------------------
# switching sets


@dataclass
class SwitchingSets:
    """Template -> set of templates whose value changes can alter its
    parent set (the compile-time over-approximation)."""

    s_hat: dict = field(default_factory=dict)

    def of(self, template: str) -> frozenset:
        return self.s_hat.get(template, frozenset())


def switching_sets(tm: TypedModel) -> SwitchingSets:
    result = {}
    with _TypeContext(tm):
        for name, t in templates_of(tm).items():
            acc = set()
            _collect_switching(t.body, acc)
            # Switching parents are always free variables of the declaration.
            fv = {s.template for s in free_vars(t.body)}
            result[name] = frozenset(acc & fv)
    return SwitchingSets(result)


def _collect_switching(e, acc: set) -> None:
    """Union of free variables of if-conditions, random-function argument
    expressions, and set expressions.

    Condition free variables are included only when the two branches differ
    in dependency skeleton: if the branches read exactly the same references
    in any world, the condition's value cannot re-route the parent set, so
    it is not a switching variable.  Models with fixed dependency structure
    therefore get empty switching sets even when their conditional
    probability tables are written with if-chains.
    """
    if isinstance(e, IfExpr):
        if skeleton(e.then) != skeleton(e.els):
            for s in free_vars(e.cond):
                acc.add(s.template)
        _collect_switching(e.cond, acc)
        _collect_switching(e.then, acc)
        _collect_switching(e.els, acc)
        return
    if isinstance(e, Ref):
        if e.kind == "random":
            for a in e.args:
                for s in free_vars(a):
                    acc.add(s.template)
        for a in e.args:
            _collect_switching(a, acc)
        return
    if isinstance(e, DistCall):
        if e.set_type is not None:
            ti = _TYPE_TABLE.get(e.set_type) if _TYPE_TABLE else None
            if ti is None or ti.is_open:
                acc.add(f"#{e.set_type}")
        for a in e.args:
            _collect_switching(a, acc)
        if e.mapping:
            for k, w in e.mapping:
                _collect_switching(k, acc)
                _collect_switching(w, acc)
        return
    if isinstance(e, BinOp):
        _collect_switching(e.left, acc)
        _collect_switching(e.right, acc)
        return
    if isinstance(e, UnaryOp):
        _collect_switching(e.operand, acc)
        return
    # Lit / NumRef: nothing.


# ---------------------------------------------------------------------------
# static children bound


@dataclass(frozen=True)
class ArgSlot:
    """How one argument of a reference site is determined, for enumerating
    candidate child instances of a given parent instance."""

    kind: str                  # "formal" | "const" | "opaque"
    value: object = None       # formal index or constant object index


@dataclass(frozen=True)
class ChildSite:
    """Template Y references parent X somewhere in its body."""

    child: str                 # Y (the referencing template)
    parent: str                # X
    slots: tuple               # ArgSlot per parent argument position


@dataclass
class StaticChildrenBound:
    """Parent template -> tuple of reference sites across the whole model.

    Instantiating these sites for a concrete parent instance over-counts its
    true children in any world.
    """

    sites: dict = field(default_factory=dict)

    def of(self, template: str) -> tuple:
        return self.sites.get(template, ())

    def child_templates(self, template: str) -> frozenset:
        return frozenset(s.child for s in self.of(template))


def static_children(tm: TypedModel) -> StaticChildrenBound:
    sites = {}
    with _TypeContext(tm):
        tmpl = templates_of(tm)
        for name, t in tmpl.items():
            if t.kind == "query":
                # Queries hold references (they keep variables alive) but
                # carry no likelihood factor; they still appear as children
                # for bookkeeping.
                pass
            param_names = [p[0] for p in t.params]
            for site in free_vars(t.body):
                slots = []
                for a in site.args:
                    if isinstance(a, Ref) and a.kind == "param":
                        slots.append(ArgSlot("formal", param_names.index(a.name)))
                    elif isinstance(a, Ref) and a.kind == "const":
                        slots.append(ArgSlot("const", a.const_index))
                    elif isinstance(a, Lit):
                        slots.append(ArgSlot("const", a.value))
                    else:
                        slots.append(ArgSlot("opaque"))
                cs = ChildSite(name, site.template, tuple(slots))
                sites.setdefault(site.template, []).append(cs)
    return StaticChildrenBound({k: tuple(v) for k, v in sites.items()})


# ---------------------------------------------------------------------------
# conjugacy


@dataclass(frozen=True)
class ConjugacyTag:
    """Closed-form full-conditional classification of one random function."""

    kind: Optional[str]        # "beta_bernoulli" | "gamma_poisson" | "gaussian_mean" | None
    child_templates: tuple = ()
    # gaussian_mean only: the (constant) variance of the child likelihood.
    child_var: Optional[float] = None


_PRIOR_FAMILIES = {"Beta": "beta_bernoulli", "Gamma": "gamma_poisson",
                   "Gaussian": "gaussian_mean"}
_LIKELIHOOD_OF = {"beta_bernoulli": "Bernoulli", "gamma_poisson": "Poisson",
                  "gaussian_mean": "Gaussian"}


def check_conjugacy(tm: TypedModel) -> dict:
    """Tag every random function; ``kind=None`` means Gibbs must fall back
    to support enumeration (or refuse the variable)."""
    out = {}
    with _TypeContext(tm):
        tmpl = templates_of(tm)
        for f in tm.model.random_fns:
            out[f.name] = _tag_one(tm, tmpl, f)
    return out


def _tail_dists(body) -> list:
    """All distribution calls in tail position of a declaration body."""
    tails = []

    def scan(e):
        if isinstance(e, DistCall):
            tails.append(e)
        elif isinstance(e, IfExpr):
            scan(e.then)
            scan(e.els)

    scan(body)
    return tails


def _tag_one(tm: TypedModel, tmpl: dict, f) -> ConjugacyTag:
    tails = _tail_dists(f.body)
    if len(tails) != 1:
        return ConjugacyTag(None)
    prior = tails[0]
    kind = _PRIOR_FAMILIES.get(prior.dist)
    if kind is None:
        return ConjugacyTag(None)
    want_dist = _LIKELIHOOD_OF[kind]

    child_templates = []
    child_var = None
    for name, t in tmpl.items():
        if t.kind == "query":
            continue  # queries contribute no likelihood factor
        refs = [s for s in free_vars(t.body) if s.template == f.name]
        if not refs:
            continue
        if t.kind in ("obs", "number"):
            return ConjugacyTag(None)  # indicator/count factor, not the family
        decl = tm.randoms[name]
        tails_t = _tail_dists(decl.body)
        if len(tails_t) != 1:
            return ConjugacyTag(None)
        like = tails_t[0]
        if like.dist != want_dist:
            return ConjugacyTag(None)
        # The prior variable must appear exactly once, precisely as the
        # designated parameter of the likelihood, and nowhere else.
        slot = like.args[0] if like.args else None
        if slot is None or not _is_ref_to(slot, f.name):
            return ConjugacyTag(None)
        others = [s for s in _all_ref_occurrences(decl.body, f.name)
                  if s is not slot]
        if others:
            return ConjugacyTag(None)
        if kind == "gaussian_mean":
            var_expr = like.args[1]
            v = _const_real(var_expr, tm)
            if v is None:
                return ConjugacyTag(None)
            if child_var is not None and child_var != v:
                return ConjugacyTag(None)
            child_var = v
        child_templates.append(name)

    if not child_templates:
        # A prior with no family children is still directly sampleable, but
        # there is nothing conjugate about it; keep the tag for the family.
        return ConjugacyTag(kind, (), child_var)
    return ConjugacyTag(kind, tuple(child_templates), child_var)


def _is_ref_to(e, name: str) -> bool:
    return isinstance(e, Ref) and e.kind == "random" and e.name == name


def _all_ref_occurrences(body, name: str) -> list:
    from .ast_nodes import walk
    return [n for n in walk(body) if _is_ref_to(n, name)]


def _const_real(e, tm: TypedModel):
    if isinstance(e, Lit) and not isinstance(e.value, bool):
        return float(e.value)
    if isinstance(e, UnaryOp) and isinstance(e.operand, Lit):
        return -float(e.operand.value)
    if isinstance(e, Ref) and e.kind == "fixed" and not e.args:
        body = tm.fixeds[e.name].body
        return _const_real(body, tm)
    return None


# ---------------------------------------------------------------------------
# static finite supports (enumerated Gibbs / exact enumeration)


def static_support(tm: TypedModel, body) -> Optional[list]:
    """Value list if every tail distribution of ``body`` has a statically
    known finite support; None otherwise."""
    values = []
    seen = set()
    for d in _tail_dists(body):
        sup = _dist_support(tm, d)
        if sup is None:
            return None
        for v in sup:
            if v not in seen:
                seen.add(v)
                values.append(v)
    if not values:
        return None
    return values


def _dist_support(tm: TypedModel, d: DistCall):
    if d.dist == "Bernoulli":
        return [True, False]
    if d.dist == "Categorical":
        vals = []
        for k, _ in d.mapping:
            v = _const_value(k)
            if v is None:
                return None
            vals.append(v)
        return vals
    if d.dist == "UniformInt":
        lo = _const_value(d.args[0])
        hi = _const_value(d.args[1])
        if isinstance(lo, int) and isinstance(hi, int):
            return list(range(lo, hi + 1))
        return None
    if d.dist == "UniformChoice":
        info = tm.types[d.set_type]
        if info.is_open:
            return None
        return list(range(info.fixed_size))
    return None


def _const_value(e):
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, Ref) and e.kind == "const":
        return e.const_index
    if isinstance(e, UnaryOp) and isinstance(e.operand, Lit):
        return -e.operand.value
    return None


# ---------------------------------------------------------------------------
# combined result + JSON dump


@dataclass
class ModelAnalysis:
    tm: TypedModel
    templates: dict
    s_hat: SwitchingSets
    children_bound: StaticChildrenBound
    conjugacy: dict

    def rc_tracked(self, fn_name: str) -> bool:
        """Reference counting applies to functions indexed by an
        open-universe type (their instances come and go with references)."""
        f = self.tm.randoms.get(fn_name)
        if f is None or not f.params:
            return False
        return any(self.tm.types.get(t) is not None and self.tm.types[t].is_open
                   for _, t in f.params)


def analyze(tm: TypedModel) -> ModelAnalysis:
    return ModelAnalysis(
        tm=tm,
        templates=templates_of(tm),
        s_hat=switching_sets(tm),
        children_bound=static_children(tm),
        conjugacy=check_conjugacy(tm),
    )


def dump_analysis(an: ModelAnalysis) -> str:
    """JSON rendering of S_hat, the children bound, and conjugacy tags."""
    data = {
        "model": an.tm.name,
        "switching_sets": {k: sorted(v) for k, v in sorted(an.s_hat.s_hat.items())},
        "static_children": {
            parent: [
                {"child": s.child,
                 "slots": [[sl.kind, sl.value] for sl in s.slots]}
                for s in sites
            ]
            for parent, sites in sorted(an.children_bound.sites.items())
        },
        "conjugacy": {
            name: {"kind": tag.kind,
                   "children": list(tag.child_templates),
                   "child_var": tag.child_var}
            for name, tag in sorted(an.conjugacy.items())
        },
        "rc_tracked": sorted(name for name in an.tm.randoms
                             if an.rc_tracked(name)),
    }
    return json.dumps(data, indent=2, sort_keys=True)
