"""Omega-automata over propositional alphabets.

States read letters drawn from 2^AP, encoded as integer bitmasks (bit i set
iff proposition ``aps[i]`` holds).  Acceptance is transition-based: either
Buchi (edges in acceptance set 0 must recur) or Rabin with k pairs, where
pair i uses set 2i for the finitely-often part B_i and set 2i+1 for the
infinitely-often part G_i.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from .graph import sccs as _sccs

Guard = tuple
Letter = int


class AutomatonError(ValueError):
    pass


TRUE: Guard = ("t",)
FALSE: Guard = ("f",)


def g_ap(i: int) -> Guard:
    return ("ap", i)


def g_not(g: Guard) -> Guard:
    return ("not", g)


def g_and(*gs: Guard) -> Guard:
    out = TRUE
    for g in gs:
        out = g if out == TRUE else ("and", out, g)
    return out


def g_or(*gs: Guard) -> Guard:
    out = FALSE
    for g in gs:
        out = g if out == FALSE else ("or", out, g)
    return out


def eval_guard(g: Guard, letter: Letter) -> bool:
    op = g[0]
    if op == "t":
        return True
    if op == "f":
        return False
    if op == "ap":
        return bool(letter >> g[1] & 1)
    if op == "not":
        return not eval_guard(g[1], letter)
    if op == "and":
        return eval_guard(g[1], letter) and eval_guard(g[2], letter)
    if op == "or":
        return eval_guard(g[1], letter) or eval_guard(g[2], letter)
    raise AutomatonError(f"bad guard node {op!r}")


def minterm(letter: Letter, n_aps: int) -> Guard:
    """Guard satisfied by exactly one letter."""
    parts = [g_ap(i) if letter >> i & 1 else g_not(g_ap(i)) for i in range(n_aps)]
    return g_and(*parts) if parts else TRUE


def guard_for_letters(letters: Iterable[Letter], n_aps: int) -> Guard:
    letters = sorted(set(letters))
    if len(letters) == 1 << n_aps:
        return TRUE
    return g_or(*(minterm(l, n_aps) for l in letters))


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    guard: Guard


class Automaton:
    """Nondeterministic omega-automaton with transition-based acceptance.

    Attributes:
        aps: atomic proposition names; letter bit i <-> aps[i].
        n_states, initial, state_names: state space bookkeeping.
        edges: list of Edge; edge ids are list positions.
        out: per state, tuple of outgoing edge ids.
        edge_acc: per edge, frozenset of acceptance-set indices.
        acc_type: "buchi" (one set, Inf(0)) or "rabin" (2k sets).
        n_pairs: number of Rabin pairs (0 for Buchi).
    """

    def __init__(
        self,
        aps: Sequence[str],
        n_states: int,
        initial: int,
        edges: Sequence[Edge],
        edge_acc: Sequence[Iterable[int]],
        acc_type: str = "buchi",
        n_pairs: int = 0,
        state_names: Optional[Sequence[str]] = None,
    ):
        if acc_type not in ("buchi", "rabin"):
            raise AutomatonError(f"unsupported acceptance type {acc_type!r}")
        if not 0 <= initial < n_states:
            raise AutomatonError(f"initial state {initial} out of range")
        self.aps: Tuple[str, ...] = tuple(aps)
        self.n_states = n_states
        self.initial = initial
        self.edges: List[Edge] = list(edges)
        self.edge_acc: List[FrozenSet[int]] = [frozenset(a) for a in edge_acc]
        self.acc_type = acc_type
        self.n_pairs = n_pairs
        self.state_names = list(state_names) if state_names else [str(q) for q in range(n_states)]
        out: List[List[int]] = [[] for _ in range(n_states)]
        for i, e in enumerate(self.edges):
            if not 0 <= e.src < n_states or not 0 <= e.dst < n_states:
                raise AutomatonError(f"edge {i} endpoints out of range")
            out[e.src].append(i)
        self.out: List[Tuple[int, ...]] = [tuple(o) for o in out]
        n_letters = 1 << len(self.aps)
        for i, e in enumerate(self.edges):
            if not any(eval_guard(e.guard, l) for l in range(n_letters)):
                raise AutomatonError(f"edge {i} ({e.src}->{e.dst}) has unsatisfiable guard")

    @property
    def n_letters(self) -> int:
        return 1 << len(self.aps)

    def letter_of(self, label: Iterable[str]) -> Letter:
        mask = 0
        for name in label:
            if name in self.aps:
                mask |= 1 << self.aps.index(name)
        return mask

    def edges_from(self, q: int, letter: Letter) -> List[int]:
        return [i for i in self.out[q] if eval_guard(self.edges[i].guard, letter)]

    def delta(self, q: int, letter: Letter) -> FrozenSet[int]:
        return frozenset(self.edges[i].dst for i in self.edges_from(q, letter))

    def delta_set(self, qs: Iterable[int], letter: Letter) -> FrozenSet[int]:
        out: Set[int] = set()
        for q in qs:
            out.update(self.edges[i].dst for i in self.edges_from(q, letter))
        return frozenset(out)

    def is_accepting_edge(self, edge_id: int) -> bool:
        return self.acc_type == "buchi" and 0 in self.edge_acc[edge_id]

    def accepting_edges(self) -> FrozenSet[int]:
        if self.acc_type != "buchi":
            raise AutomatonError("accepting_edges is defined for Buchi acceptance")
        return frozenset(i for i, a in enumerate(self.edge_acc) if 0 in a)

    def rabin_pairs(self) -> List[Tuple[FrozenSet[int], FrozenSet[int]]]:
        """Pairs (B_i, G_i) of edge-id sets; Buchi is viewed as one pair (/, F)."""
        if self.acc_type == "buchi":
            return [(frozenset(), self.accepting_edges())]
        pairs = []
        for i in range(self.n_pairs):
            b = frozenset(e for e, a in enumerate(self.edge_acc) if 2 * i in a)
            g = frozenset(e for e, a in enumerate(self.edge_acc) if 2 * i + 1 in a)
            pairs.append((b, g))
        return pairs


def is_deterministic(a: Automaton) -> bool:
    """At most one matching edge per (state, letter)."""
    for q in range(a.n_states):
        for letter in range(a.n_letters):
            if len(a.edges_from(q, letter)) > 1:
                return False
    return True


def ldbw_partition(a: Automaton) -> Optional[Tuple[FrozenSet[int], FrozenSet[int]]]:
    """Computes the candidate (initial, final) partition for limit-determinism.

    The minimal viable final part is the delta-closure of all accepting
    edges' endpoints; the four defining conditions are then checked:
    disjointness, accepting edges inside the final part, per-letter
    determinism inside, and closure.  Returns None if the candidate fails.
    """
    if a.acc_type != "buchi":
        return None
    acc = a.accepting_edges()
    seed: Set[int] = set()
    for e in acc:
        seed.add(a.edges[e].src)
        seed.add(a.edges[e].dst)
    final: Set[int] = set()
    work = list(seed)
    while work:
        q = work.pop()
        if q in final:
            continue
        final.add(q)
        for i in a.out[q]:
            work.append(a.edges[i].dst)
    for e in acc:
        if a.edges[e].src not in final or a.edges[e].dst not in final:
            return None
    for q in final:
        for letter in range(a.n_letters):
            hits = a.edges_from(q, letter)
            if len(hits) > 1:
                return None
            if hits and a.edges[hits[0]].dst not in final:
                return None
    initial_part = frozenset(range(a.n_states)) - frozenset(final)
    return initial_part, frozenset(final)


def classify(a: Automaton) -> str:
    """Strongest applicable class: deterministic > limit-deterministic > nondeterministic."""
    if is_deterministic(a):
        return "deterministic"
    if ldbw_partition(a) is not None:
        return "limit-deterministic"
    return "nondeterministic"


@dataclass
class Ldbw:
    """Limit-deterministic Buchi automaton with its witnessing partition."""

    automaton: Automaton
    initial_part: FrozenSet[int]
    final_part: FrozenSet[int]
    guess_edges: FrozenSet[int] = field(default_factory=frozenset)


def nbw_to_ldbw(a: Automaton) -> Ldbw:
    """Converts a (nondeterministic) Buchi automaton to a limit-deterministic one.

    The initial part runs the subset construction and carries no accepting
    edges.  The final part runs a breakpoint construction over pairs
    (reachable set R, breakpoint set B), where B collects states reached
    along paths that crossed an accepting edge since the last reset; an
    emitted edge is accepting exactly when B fills up to R and is reset.
    For every initial-part state S and letter there is one guess edge into
    (R', empty) for each nonempty subset R' of the successor set.
    """
    if a.acc_type != "buchi":
        raise AutomatonError("limit-determinization applies to Buchi automata")
    acc = a.accepting_edges()
    n_aps = len(a.aps)
    letters = range(1 << n_aps)

    def acc_successors(qs: Iterable[int], letter: Letter) -> FrozenSet[int]:
        out: Set[int] = set()
        for q in qs:
            for i in a.edges_from(q, letter):
                if i in acc:
                    out.add(a.edges[i].dst)
        return frozenset(out)

    # State keys: ("i", R) for the subset part, ("f", R, B) for the
    # breakpoint part.  B holds the states reached, since the last reset,
    # along some path that crossed an accepting edge; the emitted edge is
    # accepting exactly when B fills up to R, at which point B resets.
    index: Dict[tuple, int] = {}
    names: List[str] = []
    order: List[tuple] = []

    def intern(key: tuple) -> int:
        if key not in index:
            index[key] = len(order)
            order.append(key)
            if key[0] == "i":
                names.append("{" + ",".join(a.state_names[q] for q in sorted(key[1])) + "}")
            else:
                r = ",".join(a.state_names[q] for q in sorted(key[1]))
                b = ",".join(a.state_names[q] for q in sorted(key[2]))
                names.append("{" + r + "|" + b + "}")
        return index[key]

    start = intern(("i", frozenset([a.initial])))
    edges: List[Edge] = []
    edge_acc: List[FrozenSet[int]] = []
    guess_ids: Set[int] = set()
    work = deque([0])
    seen = {0}
    while work:
        s = work.popleft()
        key = order[s]
        if key[0] == "i":
            subset = key[1]
            for letter in letters:
                succ = a.delta_set(subset, letter)
                if not succ:
                    continue
                # Deterministic subset edge.
                d = intern(("i", succ))
                edges.append(Edge(s, d, minterm(letter, n_aps)))
                edge_acc.append(frozenset())
                if d not in seen:
                    seen.add(d)
                    work.append(d)
                # One guess edge per nonempty successor subset.
                members = sorted(succ)
                for mask in range(1, 1 << len(members)):
                    sub = frozenset(members[i] for i in range(len(members)) if mask >> i & 1)
                    d = intern(("f", sub, frozenset()))
                    guess_ids.add(len(edges))
                    edges.append(Edge(s, d, minterm(letter, n_aps)))
                    edge_acc.append(frozenset())
                    if d not in seen:
                        seen.add(d)
                        work.append(d)
        else:
            _, r, b = key
            for letter in letters:
                r2 = a.delta_set(r, letter)
                if not r2:
                    continue
                b2 = a.delta_set(b, letter) | acc_successors(r, letter)
                accepting = b2 == r2
                dkey = ("f", r2, frozenset()) if accepting else ("f", r2, frozenset(b2))
                d = intern(dkey)
                edges.append(Edge(s, d, minterm(letter, n_aps)))
                edge_acc.append(frozenset([0]) if accepting else frozenset())
                if d not in seen:
                    seen.add(d)
                    work.append(d)

    result = Automaton(
        aps=a.aps,
        n_states=len(order),
        initial=start,
        edges=edges,
        edge_acc=edge_acc,
        acc_type="buchi",
        state_names=names,
    )
    initial_part = frozenset(i for i, k in enumerate(order) if k[0] == "i")
    final_part = frozenset(i for i, k in enumerate(order) if k[0] == "f")
    return Ldbw(result, initial_part, final_part, frozenset(guess_ids))


def lasso_accepts(a: Automaton, prefix: Sequence[Letter], cycle: Sequence[Letter]) -> bool:
    """Does the automaton accept the ultimately periodic word prefix . cycle^w?

    Searches the product of the automaton with the cycle positions for an
    acceptance-witnessing cycle (Buchi: an accepting edge inside a reachable
    SCC; Rabin: a G_i edge inside a reachable SCC of the B_i-free graph).
    """
    if not cycle:
        raise AutomatonError("cycle must be nonempty")
    heads = frozenset([a.initial])
    for letter in prefix:
        heads = a.delta_set(heads, letter)
        if not heads:
            return False

    n = len(cycle)
    n_nodes = a.n_states * n

    def node(q: int, i: int) -> int:
        return q * n + i

    succ: List[List[int]] = [[] for _ in range(n_nodes)]
    edge_refs: List[List[int]] = [[] for _ in range(n_nodes)]  # parallel edge ids
    for q in range(a.n_states):
        for i, letter in enumerate(cycle):
            for e in a.edges_from(q, letter):
                succ[node(q, i)].append(node(a.edges[e].dst, (i + 1) % n))
                edge_refs[node(q, i)].append(e)

    reachable = [False] * n_nodes
    work = [node(q, 0) for q in heads]
    for v in work:
        reachable[v] = True
    while work:
        v = work.pop()
        for w in succ[v]:
            if not reachable[w]:
                reachable[w] = True
                work.append(w)

    for b_set, g_set in a.rabin_pairs():
        if not g_set:
            continue
        if b_set:
            sub_succ: List[List[int]] = [[] for _ in range(n_nodes)]
            sub_refs: List[List[int]] = [[] for _ in range(n_nodes)]
            for v in range(n_nodes):
                for w, e in zip(succ[v], edge_refs[v]):
                    if e not in b_set:
                        sub_succ[v].append(w)
                        sub_refs[v].append(e)
        else:
            sub_succ, sub_refs = succ, edge_refs
        scc = _sccs(n_nodes, sub_succ)
        for v in range(n_nodes):
            if not reachable[v]:
                continue
            for w, e in zip(sub_succ[v], sub_refs[v]):
                if e in g_set and scc[v] == scc[w]:
                    return True
    return False
