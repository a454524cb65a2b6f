"""Synchronous product of a labelled MDP with an omega-automaton.

On every product transition the automaton reads the label of the *source*
model state.  A nondeterministic automaton therefore contributes its edge
choice to the action: where several automaton edges match (q, L(s)), each
product action carries one choice and is named ``act#q<dst>``.  Because the
edge choice is part of the action, acceptance becomes a property of
(product state, action) pairs, which is what the reachability-shaped
augmentation needs.

:func:`augment` applies the sink construction for a satisfaction weight
zeta: every accepting (state, action) diverts probability 1 - zeta to an
absorbing sink state t and scales its original successors by zeta.
"""

from __future__ import annotations

from collections import deque
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

from .automata import Automaton
from .model import Dist, Mdp

SinkPair = Tuple[FrozenSet[Tuple[int, int]], FrozenSet[Tuple[int, int]]]


class ProductError(ValueError):
    pass


class Product(Mdp):
    """Product MDP; state i came from model/automaton pair ``origin[i]``.

    Acceptance is attached to (state, action index) pairs: ``accepting``
    for Buchi, or ``rabin`` as a list of (B_i, G_i) pair sets.
    """

    def __init__(
        self,
        *,
        state_names: Sequence[str],
        labels: Sequence,
        actions: Sequence[str],
        enabled: Sequence[Sequence[int]],
        trans: Dict[Tuple[int, int], Dist],
        initial: int,
        aps: Sequence[str],
        origin: Sequence[Optional[Tuple[int, int]]],
        acc_type: str,
        accepting: FrozenSet[Tuple[int, int]] = frozenset(),
        rabin: Sequence[SinkPair] = (),
        mdp: Optional[Mdp] = None,
        automaton: Optional[Automaton] = None,
    ):
        super().__init__(state_names, labels, actions, enabled, trans, initial, aps)
        self.origin: List[Optional[Tuple[int, int]]] = list(origin)
        self.acc_type = acc_type
        self.accepting = frozenset(accepting)
        self.rabin: List[SinkPair] = list(rabin)
        self.mdp = mdp
        self.automaton = automaton


def build_product(m: Mdp, a: Automaton, complete_rejecting: bool = False) -> Product:
    """Builds the reachable fragment of the product of ``m`` and ``a``.

    Raises ProductError if the automaton lacks a transition for the label
    of a reachable model state, unless ``complete_rejecting`` is set, in
    which case such runs are routed to an absorbing rejecting state.
    """
    index: Dict[Tuple[int, int], int] = {}
    origin: List[Optional[Tuple[int, int]]] = []
    names: List[str] = []
    labels: List[FrozenSet[str]] = []
    enabled: List[List[int]] = []
    work: deque = deque()

    def intern(s: int, q: int) -> int:
        key = (s, q)
        if key not in index:
            index[key] = len(origin)
            origin.append(key)
            names.append(f"({m.state_names[s]},{a.state_names[q]})")
            labels.append(m.labels[s])
            enabled.append([])
            work.append(index[key])
        return index[key]

    actions: List[str] = []
    action_ids: Dict[str, int] = {}

    def action_id(name: str) -> int:
        if name not in action_ids:
            action_ids[name] = len(actions)
            actions.append(name)
        return action_ids[name]

    trans: Dict[Tuple[int, int], Dist] = {}
    accepting: Set[Tuple[int, int]] = set()
    rabin_sets: List[Tuple[Set[Tuple[int, int]], Set[Tuple[int, int]]]] = [
        (set(), set()) for _ in range(a.n_pairs)
    ]
    reject: Optional[int] = None

    start = intern(m.initial, a.initial)
    while work:
        ps = work.popleft()
        if origin[ps] is None:
            continue
        s, q = origin[ps]
        letter = a.letter_of(m.labels[s])
        choices = a.edges_from(q, letter)
        if not choices:
            if not complete_rejecting:
                raise ProductError(
                    f"automaton state {a.state_names[q]} has no transition for the label "
                    f"{set(m.labels[s]) or '{}'} of reachable model state {m.state_names[s]}"
                )
            if reject is None:
                reject = len(origin)
                origin.append(None)
                names.append("(reject)")
                labels.append(frozenset())
                enabled.append([])
                ai = action_id("stay")
                enabled[reject].append(ai)
                trans[(reject, ai)] = ((1.0, reject),)
            for act in m.enabled[s]:
                ai = action_id(m.actions[act])
                enabled[ps].append(ai)
                trans[(ps, ai)] = ((1.0, reject),)
            continue

        # Suffix action names by the automaton move only when there is a
        # choice; fall back to edge ids if two choices share a destination.
        if len(choices) == 1:
            suffixes = [""]
        else:
            dsts = [a.edges[e].dst for e in choices]
            if len(set(dsts)) == len(dsts):
                suffixes = [f"#q{a.state_names[d]}" for d in dsts]
            else:
                suffixes = [f"#e{e}" for e in choices]

        for act in m.enabled[s]:
            for e, suffix in zip(choices, suffixes):
                q2 = a.edges[e].dst
                ai = action_id(m.actions[act] + suffix)
                dist = tuple((p, intern(s2, q2)) for p, s2 in m.trans[(s, act)])
                enabled[ps].append(ai)
                trans[(ps, ai)] = dist
                if a.acc_type == "buchi":
                    if 0 in a.edge_acc[e]:
                        accepting.add((ps, ai))
                else:
                    for i in range(a.n_pairs):
                        if 2 * i in a.edge_acc[e]:
                            rabin_sets[i][0].add((ps, ai))
                        if 2 * i + 1 in a.edge_acc[e]:
                            rabin_sets[i][1].add((ps, ai))

    return Product(
        state_names=names,
        labels=labels,
        actions=actions,
        enabled=enabled,
        trans=trans,
        initial=start,
        aps=m.aps,
        origin=origin,
        acc_type=a.acc_type,
        accepting=frozenset(accepting),
        rabin=[(frozenset(b), frozenset(g)) for b, g in rabin_sets],
        mdp=m,
        automaton=a,
    )


class AugmentedMdp(Mdp):
    """Product with the zeta sink applied; reaching ``sink`` certifies acceptance."""

    def __init__(self, product: Product, zeta: float):
        if product.acc_type != "buchi":
            raise ProductError("the sink augmentation applies to Buchi products")
        if not 0.0 < zeta < 1.0:
            raise ProductError(f"zeta must lie strictly between 0 and 1, got {zeta!r}")
        names = list(product.state_names) + ["t"]
        labels = list(product.labels) + [frozenset()]
        actions = list(product.actions)
        sink = product.n_states
        enabled = [list(e) for e in product.enabled] + [[]]
        trans: Dict[Tuple[int, int], Dist] = {}
        for (s, ai), dist in product.trans.items():
            if (s, ai) in product.accepting:
                scaled = tuple((zeta * p, d) for p, d in dist)
                trans[(s, ai)] = ((1.0 - zeta, sink),) + scaled
            else:
                trans[(s, ai)] = dist
        if "stay" in actions:
            stay = actions.index("stay")
        else:
            stay = len(actions)
            actions.append("stay")
        enabled[sink].append(stay)
        trans[(sink, stay)] = ((1.0, sink),)
        super().__init__(names, labels, actions, enabled, trans, product.initial, product.aps)
        self.product = product
        self.zeta = zeta
        self.sink = sink
        self.accepting = product.accepting


def augment(product: Product, zeta: float) -> AugmentedMdp:
    """Applies the sink construction for satisfaction weight zeta."""
    return AugmentedMdp(product, zeta)


def strip_augmentation(aug: AugmentedMdp) -> Mdp:
    """Inverts :func:`augment` up to floating-point error."""
    zeta = aug.zeta
    sink = aug.sink
    trans: Dict[Tuple[int, int], Dist] = {}
    for (s, ai), dist in aug.trans.items():
        if s == sink:
            continue
        if (s, ai) in aug.accepting:
            trans[(s, ai)] = tuple((p / zeta, d) for p, d in dist if d != sink)
        else:
            trans[(s, ai)] = dist
    return Mdp(
        aug.state_names[:sink],
        aug.labels[:sink],
        aug.actions,
        aug.enabled[:sink],
        trans,
        aug.initial,
        aug.aps,
    )


def serialize_product(p: Product) -> str:
    """Explicit-format text with acceptance annotations as comments."""
    from .model import serialize_explicit

    out = [serialize_explicit(p).rstrip("\n")]
    if p.acc_type == "buchi":
        for s, ai in sorted(p.accepting):
            out.append(f"# accepting {s} {p.actions[ai]}")
    else:
        for i, (b, g) in enumerate(p.rabin):
            for s, ai in sorted(b):
                out.append(f"# rabin {i} fin {s} {p.actions[ai]}")
            for s, ai in sorted(g):
                out.append(f"# rabin {i} inf {s} {p.actions[ai]}")
    return "\n".join(out) + "\n"
