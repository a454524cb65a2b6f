"""Reading and writing omega-automata in the HOA v1 interchange format.

Supported subset: single initial state, explicit labelled edges, Buchi or
Rabin acceptance.  Acceptance sets may be attached to states or to edges on
input; state-attached sets are converted by marking every outgoing edge.
Output always uses transition-attached sets.
"""

from __future__ import annotations

import re
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

from .automata import (
    FALSE,
    TRUE,
    Automaton,
    Edge,
    Guard,
    g_and,
    g_ap,
    g_not,
    g_or,
)


class HoaError(ValueError):
    pass


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|/\*.*?\*/)
  | (?P<header>[A-Za-z_][\w-]*:)
  | (?P<body>--BODY--|--END--|--ABORT--)
  | (?P<int>\d+)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<name>[A-Za-z_]\w*)
  | (?P<punct>[\[\]{}()!&|])
    """,
    re.VERBOSE | re.DOTALL,
)


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    tokens = []
    pos = 0
    line = 1
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise HoaError(f"line {line}: unexpected character {text[pos]!r}")
        kind = m.lastgroup
        value = m.group()
        if kind != "ws":
            tokens.append((kind, value, line))
        line += value.count("\n")
        pos = m.end()
    return tokens


class _Stream:
    def __init__(self, tokens: List[Tuple[str, str, int]]):
        self.tokens = tokens
        self.i = 0

    def peek(self) -> Optional[Tuple[str, str, int]]:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def take(self) -> Tuple[str, str, int]:
        tok = self.peek()
        if tok is None:
            raise HoaError("unexpected end of input")
        self.i += 1
        return tok

    def accept(self, value: str) -> bool:
        tok = self.peek()
        if tok is not None and tok[1] == value:
            self.i += 1
            return True
        return False

    def expect(self, value: str) -> Tuple[str, str, int]:
        tok = self.take()
        if tok[1] != value:
            raise HoaError(f"line {tok[2]}: expected {value!r}, found {tok[1]!r}")
        return tok


def _unquote(s: str) -> str:
    return re.sub(r"\\(.)", r"\1", s[1:-1])


# Acceptance conditions are parsed into ("fin", n) / ("inf", n) atoms joined
# by "and"/"or" nodes, then normalized to a list of conjunctions of atoms.


def _parse_acc_expr(st: _Stream):
    left = _parse_acc_term(st)
    while st.accept("|"):
        left = ("or", left, _parse_acc_term(st))
    return left


def _parse_acc_term(st: _Stream):
    left = _parse_acc_atom(st)
    while st.accept("&"):
        left = ("and", left, _parse_acc_atom(st))
    return left


def _parse_acc_atom(st: _Stream):
    tok = st.take()
    if tok[1] == "(":
        inner = _parse_acc_expr(st)
        st.expect(")")
        return inner
    if tok[1] in ("Fin", "Inf"):
        st.expect("(")
        n = st.take()
        if n[0] != "int":
            raise HoaError(f"line {n[2]}: expected a set index in {tok[1]}(...)")
        st.expect(")")
        return (tok[1].lower(), int(n[1]))
    raise HoaError(f"line {tok[2]}: unsupported acceptance term {tok[1]!r}")


def _flatten(node, op: str) -> List:
    if node[0] == op:
        return _flatten(node[1], op) + _flatten(node[2], op)
    return [node]


def _classify_acceptance(n_sets: int, cond) -> Tuple[str, int]:
    """Returns (acc_type, n_pairs) or raises for unsupported shapes."""
    disjuncts = [_flatten(d, "and") for d in _flatten(cond, "or")]
    if len(disjuncts) == 1 and disjuncts[0] == [("inf", 0)] and n_sets == 1:
        return "buchi", 0
    if n_sets == 2 * len(disjuncts):
        for i, conj in enumerate(disjuncts):
            if sorted(conj) != sorted([("fin", 2 * i), ("inf", 2 * i + 1)]):
                break
        else:
            return "rabin", len(disjuncts)
    raise HoaError("unsupported acceptance condition; expected Buchi or Rabin form")


def _parse_guard(st: _Stream, n_aps: int) -> Guard:
    left = _parse_guard_term(st, n_aps)
    while st.accept("|"):
        left = g_or(left, _parse_guard_term(st, n_aps))
    return left


def _parse_guard_term(st: _Stream, n_aps: int) -> Guard:
    left = _parse_guard_unary(st, n_aps)
    while st.accept("&"):
        left = g_and(left, _parse_guard_unary(st, n_aps))
    return left


def _parse_guard_unary(st: _Stream, n_aps: int) -> Guard:
    tok = st.take()
    if tok[1] == "!":
        return g_not(_parse_guard_unary(st, n_aps))
    if tok[1] == "(":
        inner = _parse_guard(st, n_aps)
        st.expect(")")
        return inner
    if tok[1] == "t":
        return TRUE
    if tok[1] == "f":
        return FALSE
    if tok[0] == "int":
        i = int(tok[1])
        if i >= n_aps:
            raise HoaError(f"line {tok[2]}: AP index {i} out of range")
        return g_ap(i)
    raise HoaError(f"line {tok[2]}: unexpected token {tok[1]!r} in edge label")


def _parse_acc_sets(st: _Stream) -> FrozenSet[int]:
    sets: Set[int] = set()
    if st.accept("{"):
        while not st.accept("}"):
            tok = st.take()
            if tok[0] != "int":
                raise HoaError(f"line {tok[2]}: expected a set index, found {tok[1]!r}")
            sets.add(int(tok[1]))
    return frozenset(sets)


def parse_hoa(text: str) -> Automaton:
    st = _Stream(_tokenize(text))

    tok = st.take()
    if tok[1] != "HOA:":
        raise HoaError(f"line {tok[2]}: expected 'HOA: v1' header")
    version = st.take()
    if version[1] != "v1":
        raise HoaError(f"line {version[2]}: unsupported HOA version {version[1]!r}")

    n_states: Optional[int] = None
    initial: Optional[int] = None
    aps: Optional[List[str]] = None
    n_sets: Optional[int] = None
    acc_cond = None
    acc_name: Optional[str] = None
    acc_name_pairs = 0

    while True:
        tok = st.peek()
        if tok is None:
            raise HoaError("missing --BODY--")
        if tok[1] == "--BODY--":
            st.take()
            break
        tok = st.take()
        if tok[0] != "header":
            raise HoaError(f"line {tok[2]}: expected a header item, found {tok[1]!r}")
        key = tok[1][:-1]
        if key == "States":
            n_states = int(st.take()[1])
        elif key == "Start":
            if initial is not None:
                raise HoaError(f"line {tok[2]}: multiple initial states are not supported")
            initial = int(st.take()[1])
        elif key == "AP":
            count = int(st.take()[1])
            aps = []
            for _ in range(count):
                s = st.take()
                if s[0] != "string":
                    raise HoaError(f"line {s[2]}: expected a quoted AP name")
                aps.append(_unquote(s[1]))
        elif key == "Acceptance":
            n_sets = int(st.take()[1])
            acc_cond = _parse_acc_expr(st)
        elif key == "acc-name":
            name = st.take()[1]
            acc_name = name
            if name == "Rabin":
                acc_name_pairs = int(st.take()[1])
        else:
            # tool:, name:, properties: and similar are skipped up to the
            # next header or --BODY--.
            while True:
                nxt = st.peek()
                if nxt is None or nxt[0] in ("header", "body"):
                    break
                st.take()

    if initial is None:
        raise HoaError("missing Start: header")
    if aps is None:
        raise HoaError("missing AP: header")
    if n_sets is None or acc_cond is None:
        raise HoaError("missing Acceptance: header")

    acc_type, n_pairs = _classify_acceptance(n_sets, acc_cond)
    if acc_name == "Buchi" and acc_type != "buchi":
        raise HoaError("acc-name: Buchi contradicts the Acceptance: condition")
    if acc_name == "Rabin" and (acc_type, acc_name_pairs) != ("rabin", n_pairs):
        raise HoaError("acc-name: Rabin contradicts the Acceptance: condition")

    edges: List[Edge] = []
    edge_acc: List[FrozenSet[int]] = []
    state_names: Dict[int, str] = {}
    seen_states: Set[int] = set()
    max_state = initial

    current: Optional[int] = None
    current_state_sets: FrozenSet[int] = frozenset()
    while True:
        tok = st.peek()
        if tok is None:
            raise HoaError("missing --END--")
        if tok[1] == "--END--":
            st.take()
            break
        if tok[1] == "State:":
            st.take()
            idx = st.take()
            if idx[0] != "int":
                raise HoaError(f"line {idx[2]}: labelled State: lines are not supported")
            current = int(idx[1])
            if current in seen_states:
                raise HoaError(f"line {idx[2]}: state {current} declared twice")
            seen_states.add(current)
            max_state = max(max_state, current)
            nxt = st.peek()
            if nxt is not None and nxt[0] == "string":
                state_names[current] = _unquote(st.take()[1])
            current_state_sets = _parse_acc_sets(st)
            continue
        if current is None:
            raise HoaError(f"line {tok[2]}: edge before any State: declaration")
        st.expect("[")
        guard = _parse_guard(st, len(aps))
        st.expect("]")
        dst_tok = st.take()
        if dst_tok[0] != "int":
            raise HoaError(f"line {dst_tok[2]}: expected a destination state index")
        dst = int(dst_tok[1])
        max_state = max(max_state, dst)
        sets = _parse_acc_sets(st)
        edges.append(Edge(current, dst, guard))
        edge_acc.append(sets | current_state_sets)

    if st.peek() is not None:
        tok = st.take()
        raise HoaError(f"line {tok[2]}: trailing input after --END--")

    if n_states is None:
        n_states = max_state + 1
    elif max_state >= n_states:
        raise HoaError(f"state index {max_state} exceeds States: {n_states}")

    for sets in edge_acc:
        for s in sets:
            if s >= n_sets:
                raise HoaError(f"acceptance set {s} out of range (Acceptance: {n_sets})")

    names = [state_names.get(q, str(q)) for q in range(n_states)]
    return Automaton(
        aps=aps,
        n_states=n_states,
        initial=initial,
        edges=edges,
        edge_acc=edge_acc,
        acc_type=acc_type,
        n_pairs=n_pairs,
        state_names=names,
    )


def guard_to_str(g: Guard, prec: int = 0) -> str:
    """Renders a guard with HOA syntax; prec 0 allows |, 1 allows &, 2 atoms only."""
    op = g[0]
    if op == "t":
        return "t"
    if op == "f":
        return "f"
    if op == "ap":
        return str(g[1])
    if op == "not":
        return "!" + guard_to_str(g[1], 2)
    if op == "and":
        s = guard_to_str(g[1], 1) + " & " + guard_to_str(g[2], 1)
        return "(" + s + ")" if prec > 1 else s
    if op == "or":
        s = guard_to_str(g[1], 0) + " | " + guard_to_str(g[2], 0)
        return "(" + s + ")" if prec > 0 else s
    raise HoaError(f"bad guard node {op!r}")


def _acceptance_line(a: Automaton) -> Tuple[str, str]:
    if a.acc_type == "buchi":
        return "acc-name: Buchi", "Acceptance: 1 Inf(0)"
    parts = [f"(Fin({2 * i}) & Inf({2 * i + 1}))" for i in range(a.n_pairs)]
    if a.n_pairs == 1:
        parts = [parts[0][1:-1]]
    return (
        f"acc-name: Rabin {a.n_pairs}",
        f"Acceptance: {2 * a.n_pairs} " + " | ".join(parts),
    )


def print_hoa(a: Automaton, name: Optional[str] = None) -> str:
    lines = ["HOA: v1"]
    if name:
        lines.append(f'name: "{name}"')
    lines.append(f"States: {a.n_states}")
    lines.append(f"Start: {a.initial}")
    lines.append("AP: " + " ".join([str(len(a.aps))] + [f'"{p}"' for p in a.aps]))
    acc_name, acceptance = _acceptance_line(a)
    lines.append(acc_name)
    lines.append(acceptance)
    lines.append("--BODY--")
    default_names = all(a.state_names[q] == str(q) for q in range(a.n_states))
    for q in range(a.n_states):
        if default_names:
            lines.append(f"State: {q}")
        else:
            lines.append(f'State: {q} "{a.state_names[q]}"')
        for i in a.out[q]:
            e = a.edges[i]
            sets = ""
            if a.edge_acc[i]:
                sets = " {" + " ".join(str(s) for s in sorted(a.edge_acc[i])) + "}"
            lines.append(f"[{guard_to_str(e.guard)}] {e.dst}{sets}")
    lines.append("--END--")
    return "\n".join(lines) + "\n"
