"""Recursive-descent parser for the modeling language.

Grammar (a small BLOG subset):

    program   := stmt*
    stmt      := "type" IDENT ";"
               | "distinct" IDENT ident ("," ident)* ";"
               | "#" IDENT "~" expr ";"
               | "random" IDENT IDENT [params] "~" expr ";"
               | "fixed" IDENT IDENT [params] "=" expr ";"
               | "obs" expr "=" expr ";"
               | "query" expr ";"
    params    := "(" [IDENT IDENT ("," IDENT IDENT)*] ")"
    expr      := "if" expr "then" expr "else" expr
               | "case" expr "in" "{" arm ("," arm)* "}"
               | cmp
    arm       := expr "->" expr
    cmp       := addsub [cmpop addsub]
    addsub    := muldiv (("+"|"-") muldiv)*
    muldiv    := unary (("*"|"/") unary)*
    unary     := "-" unary | atom
    atom      := INT | FLOAT | "true" | "false" | "#" IDENT
               | "Categorical" "(" "{" expr "->" expr ("," ...)* "}" ")"
               | "UniformChoice" "(" "{" IDENT IDENT "}" ")"
               | IDENT [ "(" [expr ("," expr)*] ")" ]
               | "(" expr ")"

Case statements are desugared into nested if-then-else chains here, with
the final arm acting as the default branch.  ``distinct`` declarations are
merged into the owning type declaration, which must appear earlier in the
file.
"""

from __future__ import annotations

from .ast_nodes import (
    BinOp, DistCall, FixedFuncDecl, IfExpr, Lit, Model, NumRef, NumberStmt,
    ObsStmt, Pos, QueryStmt, RandomFuncDecl, Ref, TypeDecl, UnaryOp,
    DIST_SIGNATURES,
)
from .errors import ParseError
from .lexer import Token, tokenize

CMP_OPS = ("==", "!=", "<", "<=", ">", ">=")


class _Parser:
    def __init__(self, tokens: list):
        self.toks = tokens
        self.i = 0

    # -- token helpers ------------------------------------------------------

    def peek(self) -> Token:
        return self.toks[self.i]

    def next(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def at(self, *kinds) -> bool:
        return self.toks[self.i].kind in kinds

    def expect(self, *kinds) -> Token:
        t = self.toks[self.i]
        if t.kind not in kinds:
            got = t.text if t.kind != "EOF" else "end of input"
            raise ParseError(f"unexpected {got!r}", t.line, t.col, expected=kinds)
        self.i += 1
        return t

    def pos(self) -> Pos:
        t = self.peek()
        return Pos(t.line, t.col)

    # -- program ------------------------------------------------------------

    def parse_model(self) -> Model:
        m = Model()
        types_by_name = {}
        while not self.at("EOF"):
            t = self.peek()
            if t.kind == "type":
                self.next()
                name = self.expect("IDENT")
                self.expect(";")
                decl = TypeDecl(name.text, (), Pos(name.line, name.col))
                m.type_decls.append(decl)
                types_by_name[name.text] = decl
            elif t.kind == "distinct":
                self.next()
                tname = self.expect("IDENT")
                decl = types_by_name.get(tname.text)
                if decl is None:
                    raise ParseError(
                        f"distinct declaration for undeclared type {tname.text!r}"
                        " (declare the type first)", tname.line, tname.col)
                names = [self.expect("IDENT").text]
                while self.at(","):
                    self.next()
                    names.append(self.expect("IDENT").text)
                self.expect(";")
                decl.constants = decl.constants + tuple(names)
            elif t.kind == "#":
                p = self.pos()
                self.next()
                tname = self.expect("IDENT").text
                self.expect("~")
                body = self.parse_expr()
                self.expect(";")
                m.number_stmts.append(NumberStmt(tname, body, p))
            elif t.kind == "random":
                p = self.pos()
                self.next()
                ret = self.expect("IDENT").text
                name = self.expect("IDENT").text
                params = self.parse_params()
                self.expect("~")
                body = self.parse_expr()
                self.expect(";")
                m.random_fns.append(RandomFuncDecl(name, params, ret, body, p))
            elif t.kind == "fixed":
                p = self.pos()
                self.next()
                ret = self.expect("IDENT").text
                name = self.expect("IDENT").text
                params = self.parse_params()
                self.expect("=")
                body = self.parse_expr()
                self.expect(";")
                m.fixed_fns.append(FixedFuncDecl(name, params, ret, body, p))
            elif t.kind == "obs":
                p = self.pos()
                self.next()
                lhs = self.parse_expr()
                self.expect("=")
                rhs = self.parse_expr()
                self.expect(";")
                m.evidence.append(ObsStmt(lhs, rhs, p))
            elif t.kind == "query":
                p = self.pos()
                self.next()
                e = self.parse_expr()
                self.expect(";")
                m.queries.append(QueryStmt(e, p))
            else:
                raise ParseError(
                    f"unexpected {t.text!r}", t.line, t.col,
                    expected=("type", "distinct", "#", "random", "fixed", "obs", "query"))
        return m

    def parse_params(self) -> tuple:
        if not self.at("("):
            return ()
        self.next()
        params = []
        if not self.at(")"):
            while True:
                ty = self.expect("IDENT").text
                name = self.expect("IDENT").text
                params.append((name, ty))
                if self.at(","):
                    self.next()
                    continue
                break
        self.expect(")")
        return tuple(params)

    # -- expressions --------------------------------------------------------

    def parse_expr(self):
        if self.at("if"):
            p = self.pos()
            self.next()
            cond = self.parse_expr()
            self.expect("then")
            then = self.parse_expr()
            self.expect("else")
            els = self.parse_expr()
            return IfExpr(cond, then, els, p)
        if self.at("case"):
            return self.parse_case()
        return self.parse_cmp()

    def parse_case(self):
        p = self.pos()
        self.next()
        scrutinee = self.parse_cmp()
        self.expect("in")
        self.expect("{")
        arms = []
        while True:
            key = self.parse_expr()
            self.expect("->")
            val = self.parse_expr()
            arms.append((key, val))
            if self.at(","):
                self.next()
                continue
            break
        self.expect("}")
        if len(arms) < 1:
            raise ParseError("empty case", p.line, p.col)
        # Desugar: the last arm is the default branch.
        result = arms[-1][1]
        for key, val in reversed(arms[:-1]):
            cond = BinOp("==", scrutinee, key, key.pos if hasattr(key, "pos") else p)
            result = IfExpr(cond, val, result, p)
        return result

    def parse_cmp(self):
        left = self.parse_addsub()
        if self.peek().kind in CMP_OPS:
            op = self.next()
            right = self.parse_addsub()
            return BinOp(op.kind, left, right, Pos(op.line, op.col))
        return left

    def parse_addsub(self):
        e = self.parse_muldiv()
        while self.at("+", "-"):
            op = self.next()
            r = self.parse_muldiv()
            e = BinOp(op.kind, e, r, Pos(op.line, op.col))
        return e

    def parse_muldiv(self):
        e = self.parse_unary()
        while self.at("*", "/"):
            op = self.next()
            r = self.parse_unary()
            e = BinOp(op.kind, e, r, Pos(op.line, op.col))
        return e

    def parse_unary(self):
        if self.at("-"):
            op = self.next()
            e = self.parse_unary()
            return UnaryOp("-", e, Pos(op.line, op.col))
        return self.parse_atom()

    def parse_atom(self):
        t = self.peek()
        if t.kind == "INT":
            self.next()
            return Lit(int(t.text), Pos(t.line, t.col))
        if t.kind == "FLOAT":
            self.next()
            return Lit(float(t.text), Pos(t.line, t.col))
        if t.kind == "true":
            self.next()
            return Lit(True, Pos(t.line, t.col))
        if t.kind == "false":
            self.next()
            return Lit(False, Pos(t.line, t.col))
        if t.kind == "#":
            self.next()
            name = self.expect("IDENT")
            return NumRef(name.text, Pos(name.line, name.col))
        if t.kind == "(":
            self.next()
            e = self.parse_expr()
            self.expect(")")
            return e
        if t.kind == "IDENT":
            name = self.next()
            p = Pos(name.line, name.col)
            if name.text == "Categorical":
                return self.parse_categorical(p)
            if name.text == "UniformChoice":
                return self.parse_uniform_choice(p)
            if self.at("("):
                self.next()
                args = []
                if not self.at(")"):
                    while True:
                        args.append(self.parse_expr())
                        if self.at(","):
                            self.next()
                            continue
                        break
                self.expect(")")
                if name.text in DIST_SIGNATURES:
                    return DistCall(name.text, tuple(args), pos=p)
                return Ref(name.text, tuple(args), p)
            return Ref(name.text, (), p)
        raise ParseError(
            f"unexpected {t.text if t.kind != 'EOF' else 'end of input'!r}",
            t.line, t.col,
            expected=("literal", "identifier", "if", "case", "(", "#"))

    def parse_categorical(self, p: Pos):
        self.expect("(")
        self.expect("{")
        entries = []
        while True:
            key = self.parse_expr()
            self.expect("->")
            weight = self.parse_expr()
            entries.append((key, weight))
            if self.at(","):
                self.next()
                continue
            break
        self.expect("}")
        self.expect(")")
        return DistCall("Categorical", (), tuple(entries), pos=p)

    def parse_uniform_choice(self, p: Pos):
        self.expect("(")
        self.expect("{")
        tname = self.expect("IDENT").text
        vname = self.expect("IDENT").text
        self.expect("}")
        self.expect(")")
        return DistCall("UniformChoice", (), None, tname, vname, pos=p)


def parse(tokens) -> Model:
    """Parse a token stream (or source text) into a Model AST."""
    if isinstance(tokens, str):
        tokens = tokenize(tokens)
    return _Parser(list(tokens)).parse_model()
