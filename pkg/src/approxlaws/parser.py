"""Recursive-descent parser for the machine expression grammar.

    identifiers   [A-Za-z][A-Za-z0-9]*
    numbers       integer literals; rationals via the `/` operator
    operators     + - * / ^   (standard precedence, ^ binds an integer
                  literal exponent only, right-associative)
    derivatives   u_tx  == der(u, t, x) for a declared dependent u and
                  single-letter independents; explicit form der(u, t, x)
    expansions    u[0], u[1], with derivatives u[1]_x / der(u[1], x)
    functions     f(u), f'(u), f''(u) for a declared function symbol
    eps           reserved small-parameter symbol

Parsing resolves every derivative notation to jet atoms; the result is an
expression tree (not yet normalized).
"""

from __future__ import annotations

from fractions import Fraction

from .atoms import FuncAtom, Jet, SymbolTable
from .expr import Add, AtomRef, Expr, Mul, Pow, Rat


class ParseError(Exception):
    def __init__(self, msg, pos=None, text=None):
        self.pos = pos
        if pos is not None:
            msg = f"{msg} (at position {pos})"
        super().__init__(msg)


# token kinds
_NUM, _NAME, _SUFFIX, _PRIMES, _OP, _END = "num", "name", "suffix", "primes", "op", "end"

_OPS = set("+-*/^()[],")


def _tokenize(text):
    toks = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append((_NUM, int(text[i:j]), i))
            i = j
        elif c.isalpha():
            j = i
            while j < n and text[j].isalnum():
                j += 1
            toks.append((_NAME, text[i:j], i))
            i = j
        elif c == "_":
            j = i + 1
            while j < n and text[j].isalnum():
                j += 1
            if j == i + 1:
                raise ParseError("dangling underscore", i, text)
            toks.append((_SUFFIX, text[i + 1 : j], i))
            i = j
        elif c == "'":
            j = i
            while j < n and text[j] == "'":
                j += 1
            toks.append((_PRIMES, j - i, i))
            i = j
        elif c in _OPS:
            toks.append((_OP, c, i))
            i += 1
        else:
            raise ParseError(f"unexpected character {c!r}", i, text)
    toks.append((_END, None, n))
    return toks


class _Parser:
    def __init__(self, text, table: SymbolTable):
        self.text = text
        self.table = table
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect_op(self, op):
        kind, val, pos = self.next()
        if kind != _OP or val != op:
            raise ParseError(f"expected {op!r}", pos, self.text)

    def at_op(self, *ops):
        kind, val, _ = self.peek()
        return kind == _OP and val in ops

    # grammar -------------------------------------------------------------

    def parse(self) -> Expr:
        e = self.sum_()
        kind, val, pos = self.peek()
        if kind != _END:
            raise ParseError(f"unexpected {val!r}", pos, self.text)
        return e

    def sum_(self):
        terms = [self.product()]
        while self.at_op("+", "-"):
            _, op, _ = self.next()
            t = self.product()
            terms.append(t if op == "+" else Mul((Rat(Fraction(-1)), t)))
        return terms[0] if len(terms) == 1 else Add(tuple(terms))

    def product(self):
        factors = [self.unary()]
        while self.at_op("*", "/"):
            _, op, _ = self.next()
            f = self.unary()
            factors.append(f if op == "*" else Pow(f, -1))
        return factors[0] if len(factors) == 1 else Mul(tuple(factors))

    def unary(self):
        sign = 1
        while self.at_op("+", "-"):
            _, op, _ = self.next()
            if op == "-":
                sign = -sign
        e = self.power()
        return e if sign == 1 else Mul((Rat(Fraction(-1)), e))

    def power(self):
        base = self.primary()
        if self.at_op("^"):
            self.next()
            n = self.exponent()
            return Pow(base, n)
        return base

    def exponent(self) -> int:
        """Integer literal exponent, optionally signed or parenthesized;
        chained ^ is right-associative."""
        if self.at_op("("):
            self.next()
            n = self.exponent()
            self.expect_op(")")
        else:
            sign = 1
            while self.at_op("+", "-"):
                _, op, _ = self.next()
                if op == "-":
                    sign = -sign
            kind, val, pos = self.next()
            if kind != _NUM:
                raise ParseError("exponent must be an integer literal", pos, self.text)
            n = sign * val
        if self.at_op("^"):
            self.next()
            m = self.exponent()
            if m < 0 or (n == 0 and m == 0):
                raise ParseError("unsupported exponent tower", self.peek()[2], self.text)
            n = n**m
        return n

    def primary(self):
        kind, val, pos = self.next()
        if kind == _NUM:
            return Rat(Fraction(val))
        if kind == _OP and val == "(":
            e = self.sum_()
            self.expect_op(")")
            return e
        if kind == _NAME:
            return self.named(val, pos)
        raise ParseError(f"unexpected {val!r}", pos, self.text)

    def named(self, name, pos):
        t = self.table
        if name == "eps":
            return AtomRef(t.eps)
        if name == "der":
            return self.der(pos)
        if name in t.funcs:
            nd = 0
            if self.peek()[0] == _PRIMES:
                nd = self.next()[1]
            self.expect_op("(")
            arg = self.depref("function argument")
            self.expect_op(")")
            if arg.deriv:
                raise ParseError("function argument must be an underived dependent variable", pos, self.text)
            if arg.order not in (None, 0):
                raise ParseError("function argument must be u or u[0]", pos, self.text)
            if arg.dep != t.funcs[name]:
                raise ParseError(
                    f"function {name} was declared on {t.dep_names[t.funcs[name]]!r}", pos, self.text
                )
            return AtomRef(FuncAtom(name, nd, arg))
        if t.dep_index(name) is not None:
            jet = self.jetref(name, pos)
            return AtomRef(jet)
        i = t.indep_index(name)
        if i is not None:
            self.no_suffix(name, pos)
            return AtomRef(t.indep[i])
        p = t.param(name)
        if p is not None:
            self.no_suffix(name, pos)
            return AtomRef(p)
        kind, val, pos2 = self.peek()
        if kind == _SUFFIX:
            raise ParseError(f"derivative of a non-dependent symbol {name!r}", pos2, self.text)
        raise ParseError(f"undeclared identifier {name!r}", pos, self.text)

    def no_suffix(self, name, pos):
        if self.peek()[0] in (_SUFFIX,) or self.at_op("["):
            raise ParseError(f"derivative of a non-dependent symbol {name!r}", pos, self.text)

    def jetref(self, name, pos) -> Jet:
        order = None
        if self.at_op("["):
            self.next()
            kind, val, pos2 = self.next()
            if kind != _NUM:
                raise ParseError("expansion order must be an integer", pos2, self.text)
            order = val
            self.expect_op("]")
        deriv = ()
        if self.peek()[0] == _SUFFIX:
            _, suffix, pos2 = self.next()
            deriv = tuple(suffix)
            for ch in deriv:
                if self.table.indep_index(ch) is None:
                    raise ParseError(f"{ch!r} in derivative suffix is not an independent variable", pos2, self.text)
        return self.table.jet(name, order, deriv)

    def depref(self, what) -> Jet:
        kind, val, pos = self.next()
        if kind != _NAME or self.table.dep_index(val) is None:
            raise ParseError(f"{what} must be a dependent variable", pos, self.text)
        order = None
        if self.at_op("["):
            self.next()
            kind2, val2, pos2 = self.next()
            if kind2 != _NUM:
                raise ParseError("expansion order must be an integer", pos2, self.text)
            order = val2
            self.expect_op("]")
        return self.table.jet(val, order, ())

    def der(self, pos) -> Expr:
        self.expect_op("(")
        jet = self.depref("der() subject")
        names = []
        while self.at_op(","):
            self.next()
            kind, val, pos2 = self.next()
            if kind != _NAME or self.table.indep_index(val) is None:
                raise ParseError(f"der() direction {val!r} is not an independent variable", pos2, self.text)
            names.append(val)
        self.expect_op(")")
        if not names:
            raise ParseError("der() needs at least one direction", pos, self.text)
        out = jet
        for n in names:
            out = out.lifted(self.table.indep_index(n))
        return AtomRef(out)


def parse(text: str, table: SymbolTable) -> Expr:
    """Parse ``text`` against the declared symbols; raises :class:`ParseError`
    with a position on malformed input or undeclared identifiers."""
    return _Parser(text, table).parse()
