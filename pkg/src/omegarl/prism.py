"""Parser for a restricted PRISM-language subset.

Supported constructs: an ``mdp`` header, ``const int``/``const double``
declarations, exactly one ``module`` with bounded integer variables, guarded
probabilistic commands, and ``label`` definitions.  The reachable state space
is built by breadth-first exploration from the initial valuation.

Grammar sketch (``//`` comments allowed)::

    model    : "mdp" (const | module | label)*
    const    : "const" ("int" | "double") NAME "=" expr ";"
    module   : "module" NAME vardecl* command* "endmodule"
    vardecl  : NAME ":" "[" expr ".." expr "]" "init" expr ";"
    command  : "[" NAME "]" expr "->" update ("+" update)* ";"
    update   : (expr ":")? assign ("&" assign)*
    assign   : "(" NAME "'" "=" expr ")"  |  "true"
    label    : "label" STRING "=" expr ";"

Expressions use PRISM operators: ``|  &  !  = != < <= > >=  + -  * /``
with literals, ``true``/``false``, constants and module variables.
"""

from __future__ import annotations

import re
from collections import deque
from typing import Dict, List, Optional, Tuple

from .model import Dist, Mdp, ModelFormatError, PROB_TOL


class PrismSyntaxError(ModelFormatError):
    """Raised on lexical, syntactic, or semantic errors in PRISM text."""


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|//[^\n]*)
  | (?P<number>\d+\.\d+|\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"[^"]*")
  | (?P<op><=|>=|!=|\.\.|->|[][()'=<>!&|+\-*/:;,])
    """,
    re.VERBOSE,
)

_KEYWORDS = {"mdp", "const", "int", "double", "module", "endmodule", "init", "label", "true", "false"}


class Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind: str, text: str, line: int, col: int):
        self.kind = kind
        self.text = text
        self.line = line
        self.col = col

    def __repr__(self) -> str:
        return f"Token({self.kind}, {self.text!r}, {self.line}:{self.col})"


def _lex(text: str) -> List[Token]:
    tokens = []
    pos = 0
    line = 1
    line_start = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            col = pos - line_start + 1
            raise PrismSyntaxError(f"line {line}:{col}: unexpected character {text[pos]!r}")
        kind = m.lastgroup
        tok_text = m.group()
        if kind != "ws":
            k = tok_text if kind == "name" and tok_text in _KEYWORDS else kind
            tokens.append(Token(k, tok_text, line, m.start() - line_start + 1))
        newlines = tok_text.count("\n")
        if newlines:
            line += newlines
            line_start = m.start() + tok_text.rfind("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Stream:
    def __init__(self, tokens: List[Token]):
        self.tokens = tokens
        self.i = 0

    @property
    def here(self) -> Token:
        return self.tokens[self.i]

    def take(self, kind: Optional[str] = None, text: Optional[str] = None) -> Token:
        tok = self.here
        if kind is not None and tok.kind != kind:
            raise PrismSyntaxError(f"line {tok.line}:{tok.col}: expected {kind}, got {tok.text!r}")
        if text is not None and tok.text != text:
            raise PrismSyntaxError(f"line {tok.line}:{tok.col}: expected {text!r}, got {tok.text!r}")
        self.i += 1
        return tok

    def peek(self, kind: str, text: Optional[str] = None) -> bool:
        tok = self.here
        return tok.kind == kind and (text is None or tok.text == text)

    def accept(self, kind: str, text: Optional[str] = None) -> Optional[Token]:
        if self.peek(kind, text):
            return self.take()
        return None


# Expression AST: ("num", v) ("var", name, tok) ("not", e) ("neg", e)
# ("bin", op, l, r) ("bool", v)

def _parse_expr(ts: _Stream):
    return _parse_or(ts)


def _parse_or(ts: _Stream):
    e = _parse_and(ts)
    while ts.accept("op", "|"):
        e = ("bin", "|", e, _parse_and(ts))
    return e


def _parse_and(ts: _Stream):
    e = _parse_not(ts)
    while ts.accept("op", "&"):
        e = ("bin", "&", e, _parse_not(ts))
    return e


def _parse_not(ts: _Stream):
    if ts.accept("op", "!"):
        return ("not", _parse_not(ts))
    return _parse_cmp(ts)


def _parse_cmp(ts: _Stream):
    e = _parse_add(ts)
    for op in ("<=", ">=", "!=", "=", "<", ">"):
        if ts.peek("op", op):
            ts.take()
            return ("bin", op, e, _parse_add(ts))
    return e


def _parse_add(ts: _Stream):
    e = _parse_mul(ts)
    while True:
        if ts.accept("op", "+"):
            e = ("bin", "+", e, _parse_mul(ts))
        elif ts.accept("op", "-"):
            e = ("bin", "-", e, _parse_mul(ts))
        else:
            return e


def _parse_mul(ts: _Stream):
    e = _parse_unary(ts)
    while True:
        if ts.accept("op", "*"):
            e = ("bin", "*", e, _parse_unary(ts))
        elif ts.accept("op", "/"):
            e = ("bin", "/", e, _parse_unary(ts))
        else:
            return e


def _parse_unary(ts: _Stream):
    if ts.accept("op", "-"):
        return ("neg", _parse_unary(ts))
    return _parse_atom(ts)


def _parse_atom(ts: _Stream):
    tok = ts.here
    if ts.accept("op", "("):
        e = _parse_expr(ts)
        ts.take("op", ")")
        return e
    if tok.kind == "number":
        ts.take()
        return ("num", float(tok.text) if "." in tok.text else int(tok.text))
    if tok.kind == "true":
        ts.take()
        return ("bool", True)
    if tok.kind == "false":
        ts.take()
        return ("bool", False)
    if tok.kind == "name":
        ts.take()
        return ("var", tok.text, tok)
    raise PrismSyntaxError(f"line {tok.line}:{tok.col}: expected expression, got {tok.text!r}")


def _eval(e, env: Dict[str, object]):
    kind = e[0]
    if kind == "num" or kind == "bool":
        return e[1]
    if kind == "var":
        name, tok = e[1], e[2]
        if name not in env:
            raise PrismSyntaxError(f"line {tok.line}:{tok.col}: unknown identifier {name!r}")
        return env[name]
    if kind == "not":
        return not _eval(e[1], env)
    if kind == "neg":
        return -_eval(e[1], env)
    op = e[1]
    l = _eval(e[2], env)
    r = _eval(e[3], env)
    if op == "|":
        return bool(l) or bool(r)
    if op == "&":
        return bool(l) and bool(r)
    if op == "=":
        return l == r
    if op == "!=":
        return l != r
    if op == "<":
        return l < r
    if op == "<=":
        return l <= r
    if op == ">":
        return l > r
    if op == ">=":
        return l >= r
    if op == "+":
        return l + r
    if op == "-":
        return l - r
    if op == "*":
        return l * r
    if op == "/":
        return l / r
    raise AssertionError(op)


class _Command:
    __slots__ = ("action", "guard", "updates", "line")

    def __init__(self, action: str, guard, updates, line: int):
        self.action = action
        self.guard = guard
        # updates: list of (prob_expr_or_None, [(var, expr), ...])
        self.updates = updates
        self.line = line


def parse_prism(text: str, constants: Optional[Dict[str, float]] = None) -> Mdp:
    """Parses PRISM-subset text and builds the reachable state space.

    ``constants`` overrides declared constant values by name (used for model
    parameters such as ``p``).
    """
    ts = _Stream(_lex(text))
    ts.take("mdp")

    const_env: Dict[str, object] = {}
    overrides = dict(constants or {})
    variables: List[Tuple[str, int, int, int]] = []  # (name, lo, hi, init)
    commands: List[_Command] = []
    labels: List[Tuple[str, object]] = []
    saw_module = False

    while not ts.peek("eof"):
        if ts.accept("const"):
            is_int = bool(ts.accept("int"))
            if not is_int:
                ts.take("double")
            name = ts.take("name").text
            ts.take("op", "=")
            value = _eval(_parse_expr(ts), const_env)
            ts.take("op", ";")
            if name in overrides:
                value = overrides.pop(name)
            const_env[name] = int(value) if is_int else float(value)
        elif ts.peek("module"):
            if saw_module:
                tok = ts.here
                raise PrismSyntaxError(f"line {tok.line}: only one module is supported")
            saw_module = True
            ts.take("module")
            ts.take("name")
            while ts.peek("name"):
                vname = ts.take("name").text
                ts.take("op", ":")
                ts.take("op", "[")
                lo = _eval(_parse_expr(ts), const_env)
                ts.take("op", "..")
                hi = _eval(_parse_expr(ts), const_env)
                ts.take("op", "]")
                ts.take("init")
                iv = _eval(_parse_expr(ts), const_env)
                ts.take("op", ";")
                if not (isinstance(lo, int) and isinstance(hi, int) and lo <= hi):
                    raise PrismSyntaxError(f"variable {vname}: bad bounds [{lo}..{hi}]")
                if not lo <= iv <= hi:
                    raise PrismSyntaxError(f"variable {vname}: init {iv} outside [{lo}..{hi}]")
                variables.append((vname, int(lo), int(hi), int(iv)))
            while ts.peek("op", "["):
                line = ts.here.line
                ts.take("op", "[")
                action = ts.take("name").text
                ts.take("op", "]")
                guard = _parse_expr(ts)
                ts.take("op", "->")
                updates = [_parse_update(ts)]
                while ts.accept("op", "+"):
                    updates.append(_parse_update(ts))
                ts.take("op", ";")
                commands.append(_Command(action, guard, updates, line))
            ts.take("endmodule")
        elif ts.accept("label"):
            name_tok = ts.take("string")
            ts.take("op", "=")
            labels.append((name_tok.text.strip('"'), _parse_expr(ts)))
            ts.take("op", ";")
        else:
            tok = ts.here
            raise PrismSyntaxError(f"line {tok.line}:{tok.col}: unexpected {tok.text!r}")

    if overrides:
        raise PrismSyntaxError(f"unknown constant override(s): {sorted(overrides)}")
    if not saw_module:
        raise PrismSyntaxError("model has no module")
    return _build(const_env, variables, commands, labels)


def _parse_update(ts: _Stream):
    """One probabilistic branch: optional ``expr :`` then assignments."""
    save = ts.i
    prob = None
    try:
        e = _parse_expr(ts)
        if ts.accept("op", ":"):
            prob = e
        else:
            ts.i = save
    except PrismSyntaxError:
        ts.i = save
    if ts.accept("true"):
        return (prob, [])
    assigns = [_parse_assign(ts)]
    while ts.accept("op", "&"):
        if ts.accept("true"):
            continue
        assigns.append(_parse_assign(ts))
    return (prob, assigns)


def _parse_assign(ts: _Stream):
    ts.take("op", "(")
    var = ts.take("name").text
    ts.take("op", "'")
    ts.take("op", "=")
    expr = _parse_expr(ts)
    ts.take("op", ")")
    return (var, expr)


def _build(const_env, variables, commands, labels) -> Mdp:
    if not variables:
        raise PrismSyntaxError("module declares no variables")
    var_names = [v[0] for v in variables]
    bounds = {name: (lo, hi) for name, lo, hi, _ in variables}
    init_valuation = tuple(v[3] for v in variables)

    action_order: List[str] = []
    for c in commands:
        if c.action not in action_order:
            action_order.append(c.action)
    a_index = {a: i for i, a in enumerate(action_order)}

    def env_of(valuation) -> Dict[str, object]:
        env = dict(const_env)
        env.update(zip(var_names, valuation))
        return env

    state_index: Dict[Tuple[int, ...], int] = {init_valuation: 0}
    order = [init_valuation]
    enabled: List[List[int]] = []
    trans: Dict[Tuple[int, int], Dist] = {}
    frontier = deque([init_valuation])
    while frontier:
        valuation = frontier.popleft()
        s = state_index[valuation]
        env = env_of(valuation)
        fired: Dict[str, _Command] = {}
        row: List[int] = []
        for c in commands:
            if not _eval(c.guard, env):
                continue
            if c.action in fired:
                raise PrismSyntaxError(
                    f"lines {fired[c.action].line} and {c.line}: overlapping guards for "
                    f"action {c.action!r} at state {dict(zip(var_names, valuation))}"
                )
            fired[c.action] = c
            dist: Dict[Tuple[int, ...], float] = {}
            total = 0.0
            for prob_expr, assigns in c.updates:
                p = 1.0 if prob_expr is None else float(_eval(prob_expr, env))
                if p < -PROB_TOL or p > 1 + PROB_TOL:
                    raise PrismSyntaxError(f"line {c.line}: branch probability {p!r} outside [0, 1]")
                total += p
                target = list(valuation)
                for var, expr in assigns:
                    if var not in bounds:
                        raise PrismSyntaxError(f"line {c.line}: unknown variable {var!r}")
                    value = _eval(expr, env)
                    lo, hi = bounds[var]
                    if not isinstance(value, (int, float)) or value != int(value):
                        raise PrismSyntaxError(f"line {c.line}: non-integer update for {var!r}")
                    value = int(value)
                    if not lo <= value <= hi:
                        raise PrismSyntaxError(
                            f"line {c.line}: update drives {var!r} to {value}, outside [{lo}..{hi}]"
                        )
                    target[var_names.index(var)] = value
                key = tuple(target)
                dist[key] = dist.get(key, 0.0) + p
            if abs(total - 1.0) > PROB_TOL:
                raise PrismSyntaxError(f"line {c.line}: branch probabilities sum to {total!r}")
            pairs = []
            for target, p in dist.items():
                if p == 0.0:
                    continue
                if target not in state_index:
                    state_index[target] = len(order)
                    order.append(target)
                    frontier.append(target)
                pairs.append((p, state_index[target]))
            a = a_index[c.action]
            trans[(s, a)] = tuple(pairs)
            row.append(a)
        enabled.append(sorted(row))

    label_names = [name for name, _ in labels]
    state_labels = []
    state_names = []
    for valuation in order:
        env = env_of(valuation)
        state_labels.append(frozenset(name for name, expr in labels if _eval(expr, env)))
        state_names.append("(" + ",".join(str(v) for v in valuation) + ")")

    return Mdp(
        state_names=state_names,
        labels=state_labels,
        actions=action_order,
        enabled=enabled,
        trans=trans,
        initial=0,
        aps=sorted(set(label_names)),
    )
