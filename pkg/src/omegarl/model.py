"""Markov decision processes with labelled states.

An :class:`Mdp` stores a finite state space, a global action alphabet,
per-state enabled actions, probabilistic transition distributions and a
propositional labelling.  Two textual formats are supported: a restricted
PRISM subset (see :mod:`omegarl.prism`) and a line-oriented explicit-state
format parsed by :func:`parse_explicit`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

PROB_TOL = 1e-9

Dist = Tuple[Tuple[float, int], ...]


class ModelFormatError(ValueError):
    """Raised for malformed model text; message carries the line number."""


@dataclass(frozen=True)
class Diagnostic:
    """Machine-readable validation finding."""

    kind: str
    state: Optional[int] = None
    action: Optional[str] = None
    message: str = ""

    def __str__(self) -> str:
        where = []
        if self.state is not None:
            where.append(f"state {self.state}")
        if self.action is not None:
            where.append(f"action {self.action}")
        loc = ", ".join(where)
        return f"{self.kind}({loc}): {self.message}" if loc else f"{self.kind}: {self.message}"


class Mdp:
    """Finite MDP with atomic-proposition labels on states.

    Attributes:
        state_names: display name per state (index = state id).
        labels: frozenset of atomic propositions per state.
        actions: global action name list; actions are referred to by index.
        enabled: per state, tuple of enabled action indices.
        trans: (state, action index) -> tuple of (probability, successor).
        initial: initial state index.
        aps: sorted tuple of atomic propositions that may appear in labels.
    """

    def __init__(
        self,
        state_names: Sequence[str],
        labels: Sequence[Iterable[str]],
        actions: Sequence[str],
        enabled: Sequence[Sequence[int]],
        trans: Dict[Tuple[int, int], Dist],
        initial: int = 0,
        aps: Optional[Sequence[str]] = None,
    ):
        self.state_names: List[str] = list(state_names)
        self.labels: List[FrozenSet[str]] = [frozenset(l) for l in labels]
        self.actions: List[str] = list(actions)
        self.enabled: List[Tuple[int, ...]] = [tuple(e) for e in enabled]
        self.trans: Dict[Tuple[int, int], Dist] = dict(trans)
        self.initial = initial
        if aps is None:
            aps = sorted(set().union(*self.labels)) if self.labels else []
        self.aps: Tuple[str, ...] = tuple(aps)

    @property
    def n_states(self) -> int:
        return len(self.state_names)

    def action_index(self, name: str) -> int:
        return self.actions.index(name)

    def successors(self, state: int, action: int) -> Dist:
        return self.trans[(state, action)]

    def all_successors(self, state: int) -> FrozenSet[int]:
        out = set()
        for a in self.enabled[state]:
            out.update(d for _, d in self.trans[(state, a)])
        return frozenset(out)

    def validate(self) -> List[Diagnostic]:
        """Checks structural invariants; returns diagnostics, raises nothing."""
        out: List[Diagnostic] = []
        n = self.n_states
        if not 0 <= self.initial < n:
            out.append(Diagnostic("bad-initial", message=f"initial state {self.initial} out of range"))
        for s in range(n):
            if not self.enabled[s]:
                out.append(Diagnostic("deadlock", state=s, message="no enabled action"))
            for a in self.enabled[s]:
                if (s, a) not in self.trans:
                    out.append(Diagnostic("missing-distribution", state=s, action=self.actions[a],
                                          message="enabled action has no distribution"))
                    continue
                dist = self.trans[(s, a)]
                total = 0.0
                for p, d in dist:
                    total += p
                    if not 0.0 <= p <= 1.0:
                        out.append(Diagnostic("bad-probability", state=s, action=self.actions[a],
                                              message=f"probability {p!r} outside [0, 1]"))
                    if not 0 <= d < n:
                        out.append(Diagnostic("bad-successor", state=s, action=self.actions[a],
                                              message=f"successor {d} out of range"))
                if abs(total - 1.0) > PROB_TOL:
                    out.append(Diagnostic("bad-distribution", state=s, action=self.actions[a],
                                          message=f"probabilities sum to {total!r}"))
        for s in range(n):
            for ap in self.labels[s]:
                if ap not in self.aps:
                    out.append(Diagnostic("unknown-ap", state=s, message=f"label {ap!r} not declared"))
        return out


def parse_explicit(text: str) -> Mdp:
    """Parses the explicit-state format.

    Line kinds (``#`` starts a comment, blank lines are skipped)::

        states N
        init I                  (optional, defaults to 0)
        state I label a,b,c     (the label part may be omitted)
        trans I ACT P J         (one line per successor)
    """
    n_states = None
    initial = 0
    labels: Dict[int, FrozenSet[str]] = {}
    raw_trans: Dict[Tuple[int, str], List[Tuple[float, int]]] = {}
    action_order: List[str] = []

    def err(lineno: int, msg: str) -> ModelFormatError:
        return ModelFormatError(f"line {lineno}: {msg}")

    def state_id(tok: str, lineno: int) -> int:
        try:
            s = int(tok)
        except ValueError:
            raise err(lineno, f"expected state index, got {tok!r}") from None
        if n_states is not None and not 0 <= s < n_states:
            raise err(lineno, f"state index {s} out of range [0, {n_states})")
        return s

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0]
        if kind == "states":
            if n_states is not None:
                raise err(lineno, "duplicate states header")
            if len(parts) != 2 or not parts[1].isdigit():
                raise err(lineno, "expected: states N")
            n_states = int(parts[1])
        elif kind == "init":
            if len(parts) != 2:
                raise err(lineno, "expected: init I")
            initial = state_id(parts[1], lineno)
        elif kind == "state":
            if n_states is None:
                raise err(lineno, "state line before states header")
            if len(parts) not in (2, 3, 4):
                raise err(lineno, "expected: state I [label a,b,...]")
            s = state_id(parts[1], lineno)
            if len(parts) >= 3:
                if parts[2] != "label":
                    raise err(lineno, f"expected keyword label, got {parts[2]!r}")
                names = parts[3].split(",") if len(parts) == 4 else []
                labels[s] = frozenset(x for x in names if x)
            else:
                labels[s] = frozenset()
        elif kind == "trans":
            if n_states is None:
                raise err(lineno, "trans line before states header")
            if len(parts) != 5:
                raise err(lineno, "expected: trans I ACT P J")
            s = state_id(parts[1], lineno)
            act = parts[2]
            try:
                p = float(parts[3])
            except ValueError:
                raise err(lineno, f"bad probability {parts[3]!r}") from None
            d = state_id(parts[4], lineno)
            if act not in action_order:
                action_order.append(act)
            raw_trans.setdefault((s, act), []).append((p, d))
        else:
            raise err(lineno, f"unknown directive {kind!r}")

    if n_states is None:
        raise ModelFormatError("missing states header")

    actions = action_order
    a_index = {a: i for i, a in enumerate(actions)}
    enabled: List[List[int]] = [[] for _ in range(n_states)]
    trans: Dict[Tuple[int, int], Dist] = {}
    for (s, act), pairs in raw_trans.items():
        a = a_index[act]
        enabled[s].append(a)
        trans[(s, a)] = tuple(pairs)
    for s in range(n_states):
        enabled[s].sort()
        labels.setdefault(s, frozenset())

    return Mdp(
        state_names=[str(i) for i in range(n_states)],
        labels=[labels[s] for s in range(n_states)],
        actions=actions,
        enabled=enabled,
        trans=trans,
        initial=initial,
    )


def serialize_explicit(m: Mdp) -> str:
    """Renders an MDP in the explicit-state format; inverse of parse_explicit."""
    lines = [f"states {m.n_states}"]
    if m.initial != 0:
        lines.append(f"init {m.initial}")
    for s in range(m.n_states):
        if m.labels[s]:
            lines.append(f"state {s} label {','.join(sorted(m.labels[s]))}")
        else:
            lines.append(f"state {s}")
    for s in range(m.n_states):
        for a in m.enabled[s]:
            for p, d in m.trans[(s, a)]:
                lines.append(f"trans {s} {m.actions[a]} {p!r} {d}")
    return "\n".join(lines) + "\n"


def parse_model(text: str, fmt: str, constants: Optional[Dict[str, float]] = None) -> Mdp:
    """Parses model text in the given format: ``prism-subset`` or ``explicit``."""
    if fmt == "explicit":
        return parse_explicit(text)
    if fmt == "prism-subset":
        from . import prism

        return prism.parse_prism(text, constants=constants)
    raise ValueError(f"unknown model format {fmt!r}")
