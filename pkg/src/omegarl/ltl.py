"""Linear temporal logic over atomic propositions, with lasso-word evaluation.

Formulas are reduced at parse time to a small core: true, atoms, negation,
disjunction, next and until.  The surface syntax additionally offers false,
conjunction, implication, F (eventually) and G (always):

    formula := or_expr ("->" formula)?          implication, right assoc
    or_expr := and_expr ("|" and_expr)*
    and_expr := until_expr ("&" until_expr)*
    until_expr := unary ("U" until_expr)?        right assoc
    unary := ("!" | "X" | "F" | "G") unary | atom | "true" | "false"
           | "(" formula ")"

Atoms are identifiers; the single capitals X, F, G, U are reserved.
"""

from __future__ import annotations

import re
from typing import Container, FrozenSet, List, Sequence, Set, Tuple

Ltl = tuple

LTL_TRUE: Ltl = ("true",)


class LtlSyntaxError(ValueError):
    pass


def l_atom(name: str) -> Ltl:
    return ("ap", name)


def l_not(f: Ltl) -> Ltl:
    return ("not", f)


def l_or(f: Ltl, g: Ltl) -> Ltl:
    return ("or", f, g)


def l_and(f: Ltl, g: Ltl) -> Ltl:
    return l_not(l_or(l_not(f), l_not(g)))


def l_next(f: Ltl) -> Ltl:
    return ("next", f)


def l_until(f: Ltl, g: Ltl) -> Ltl:
    return ("until", f, g)


def l_eventually(f: Ltl) -> Ltl:
    return l_until(LTL_TRUE, f)


def l_always(f: Ltl) -> Ltl:
    return l_not(l_until(LTL_TRUE, l_not(f)))


_LTL_TOKEN_RE = re.compile(r"\s+|(->|[!&|()])|([A-Za-z_]\w*)")

_RESERVED = {"X", "F", "G", "U", "true", "false"}


def _lex(text: str) -> List[str]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _LTL_TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            raise LtlSyntaxError(f"unexpected character {text[pos]!r} at offset {pos}")
        tok = m.group(1) or m.group(2)
        if tok:
            tokens.append(tok)
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, tokens: List[str]):
        self.tokens = tokens
        self.i = 0

    def peek(self) -> str:
        return self.tokens[self.i] if self.i < len(self.tokens) else ""

    def take(self) -> str:
        tok = self.peek()
        if not tok:
            raise LtlSyntaxError("unexpected end of formula")
        self.i += 1
        return tok

    def accept(self, tok: str) -> bool:
        if self.peek() == tok:
            self.i += 1
            return True
        return False

    def formula(self) -> Ltl:
        left = self.or_expr()
        if self.accept("->"):
            return l_or(l_not(left), self.formula())
        return left

    def or_expr(self) -> Ltl:
        left = self.and_expr()
        while self.accept("|"):
            left = l_or(left, self.and_expr())
        return left

    def and_expr(self) -> Ltl:
        left = self.until_expr()
        while self.accept("&"):
            left = l_and(left, self.until_expr())
        return left

    def until_expr(self) -> Ltl:
        left = self.unary()
        if self.accept("U"):
            return l_until(left, self.until_expr())
        return left

    def unary(self) -> Ltl:
        tok = self.take()
        if tok == "!":
            return l_not(self.unary())
        if tok == "X":
            return l_next(self.unary())
        if tok == "F":
            return l_eventually(self.unary())
        if tok == "G":
            return l_always(self.unary())
        if tok == "(":
            inner = self.formula()
            if not self.accept(")"):
                raise LtlSyntaxError("missing closing parenthesis")
            return inner
        if tok == "true":
            return LTL_TRUE
        if tok == "false":
            return l_not(LTL_TRUE)
        if re.fullmatch(r"[A-Za-z_]\w*", tok) and tok not in _RESERVED:
            return l_atom(tok)
        raise LtlSyntaxError(f"unexpected token {tok!r}")


def parse_ltl(text: str) -> Ltl:
    p = _Parser(_lex(text))
    f = p.formula()
    if p.peek():
        raise LtlSyntaxError(f"trailing input from token {p.peek()!r}")
    return f


def ltl_atoms(f: Ltl) -> Tuple[str, ...]:
    """Atom names occurring in the formula, sorted."""
    out: Set[str] = set()

    def walk(g: Ltl) -> None:
        if g[0] == "ap":
            out.add(g[1])
        else:
            for child in g[1:]:
                walk(child)

    walk(f)
    return tuple(sorted(out))


def format_ltl(f: Ltl) -> str:
    """Core-syntax rendering, fully parenthesized at binary nodes."""
    op = f[0]
    if op == "true":
        return "true"
    if op == "ap":
        return f[1]
    if op == "not":
        return "!" + format_ltl(f[1])
    if op == "next":
        return "X" + format_ltl(f[1])
    if op == "or":
        return "(" + format_ltl(f[1]) + " | " + format_ltl(f[2]) + ")"
    if op == "until":
        return "(" + format_ltl(f[1]) + " U " + format_ltl(f[2]) + ")"
    raise LtlSyntaxError(f"bad formula node {op!r}")


def eval_ltl_lasso(
    f: Ltl,
    prefix: Sequence[Container[str]],
    cycle: Sequence[Container[str]],
) -> bool:
    """Evaluates the formula on the infinite word prefix . cycle^w.

    Each word position carries the set of atomic propositions holding there.
    Until is resolved as a least fixpoint, swept backwards over the lasso
    until stable.
    """
    if not cycle:
        raise LtlSyntaxError("cycle must be nonempty")
    m, n = len(prefix), len(cycle)
    total = m + n
    labels = list(prefix) + list(cycle)
    nxt = [i + 1 for i in range(total)]
    nxt[total - 1] = m

    memo: dict = {}

    def values(g: Ltl) -> List[bool]:
        if g in memo:
            return memo[g]
        op = g[0]
        if op == "true":
            val = [True] * total
        elif op == "ap":
            val = [g[1] in labels[i] for i in range(total)]
        elif op == "not":
            val = [not v for v in values(g[1])]
        elif op == "or":
            lv, rv = values(g[1]), values(g[2])
            val = [a or b for a, b in zip(lv, rv)]
        elif op == "next":
            sub = values(g[1])
            val = [sub[nxt[i]] for i in range(total)]
        elif op == "until":
            pv, qv = values(g[1]), values(g[2])
            val = list(qv)
            for _ in range(total):
                new = [qv[i] or (pv[i] and val[nxt[i]]) for i in range(total)]
                if new == val:
                    break
                val = new
        else:
            raise LtlSyntaxError(f"bad formula node {op!r}")
        memo[g] = val
        return val

    return values(f)[0]
