"""Tokenizer for model source files.

Produces a flat token list with line/column positions; ``//`` comments are
stripped.  Keywords are recognized here so the parser only deals with token
kinds.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import LexError

KEYWORDS = {
    "type", "distinct", "random", "fixed", "obs", "query",
    "if", "then", "else", "case", "in", "true", "false",
}

# Multi-char symbols first so maximal munch works.
SYMBOLS = [
    "->", "==", "!=", "<=", ">=",
    "#", "~", ";", ",", "(", ")", "{", "}", "=", "<", ">", "+", "-", "*", "/",
]


@dataclass(frozen=True)
class Token:
    kind: str       # keyword text, symbol text, or IDENT / INT / FLOAT / EOF
    text: str
    line: int
    col: int

    def __repr__(self):
        return f"Token({self.kind!r}, {self.text!r}, {self.line}:{self.col})"


def tokenize(source: str) -> list:
    """Tokenize model source text.

    Raises LexError with a position on any illegal character.
    """
    toks = []
    i = 0
    line = 1
    col = 1
    n = len(source)
    while i < n:
        c = source[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and source[i + 1].isdigit()):
            start = i
            startcol = col
            while i < n and source[i].isdigit():
                i += 1
            is_float = False
            if i < n and source[i] == "." and i + 1 < n and source[i + 1].isdigit():
                is_float = True
                i += 1
                while i < n and source[i].isdigit():
                    i += 1
            if i < n and source[i] in "eE":
                j = i + 1
                if j < n and source[j] in "+-":
                    j += 1
                if j < n and source[j].isdigit():
                    is_float = True
                    i = j
                    while i < n and source[i].isdigit():
                        i += 1
            text = source[start:i]
            col += i - start
            toks.append(Token("FLOAT" if is_float else "INT", text, line, startcol))
            continue
        if c.isalpha() or c == "_":
            start = i
            startcol = col
            while i < n and (source[i].isalnum() or source[i] == "_"):
                i += 1
            text = source[start:i]
            col += i - start
            kind = text if text in KEYWORDS else "IDENT"
            toks.append(Token(kind, text, line, startcol))
            continue
        for sym in SYMBOLS:
            if source.startswith(sym, i):
                toks.append(Token(sym, sym, line, col))
                i += len(sym)
                col += len(sym)
                break
        else:
            raise LexError(f"illegal character {c!r}", line, col)
    toks.append(Token("EOF", "", line, col))
    return toks
