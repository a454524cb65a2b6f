"""Exact analysis of MDPs and products.

Covers maximal end component decomposition, optimal reachability and
satisfaction probabilities, evaluation of mixed strategies on products
(acceptance probability a, sink probability p, transient accepting-edge
count f), expected average reward, and positional strategy enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product as iter_product
from typing import (
    Callable,
    Dict,
    FrozenSet,
    Iterable,
    Iterator,
    List,
    Mapping,
    Optional,
    Sequence,
    Set,
    Tuple,
)

import numpy as np

from .graph import sccs
from .model import Mdp
from .product import AugmentedMdp, Product, ProductError, augment

VI_TOL = 1e-9
VI_MAX_SWEEPS = 10 ** 6
TIE_TOL = 1e-6

Component = Tuple[FrozenSet[int], FrozenSet[Tuple[int, int]]]


class AnalysisError(ValueError):
    pass


# ---------------------------------------------------------------------------
# End components


def mec_decomposition(m: Mdp, banned: FrozenSet[Tuple[int, int]] = frozenset()) -> List[Component]:
    """Maximal end components as (state set, retained (state, action) set).

    ``banned`` pairs are treated as absent, which is how Rabin Fin-sets are
    pruned before re-decomposing.
    """
    n = m.n_states
    alive = [True] * n
    acts: List[Set[int]] = [
        {a for a in m.enabled[s] if (s, a) not in banned} for s in range(n)
    ]
    while True:
        changed = False
        for s in range(n):
            if not alive[s]:
                continue
            for a in list(acts[s]):
                if any(not alive[d] for pr, d in m.trans[(s, a)] if pr > 0.0):
                    acts[s].discard(a)
                    changed = True
            if not acts[s]:
                alive[s] = False
                changed = True
        succ: List[List[int]] = [[] for _ in range(n)]
        for s in range(n):
            if alive[s]:
                for a in acts[s]:
                    succ[s].extend(d for pr, d in m.trans[(s, a)] if pr > 0.0)
        comp = sccs(n, succ)
        for s in range(n):
            if not alive[s]:
                continue
            for a in list(acts[s]):
                if any(comp[d] != comp[s] for pr, d in m.trans[(s, a)] if pr > 0.0):
                    acts[s].discard(a)
                    changed = True
        if not changed:
            break
    groups: Dict[int, Set[int]] = {}
    for s in range(n):
        if alive[s]:
            groups.setdefault(comp[s], set()).add(s)
    out: List[Component] = []
    for _, states in sorted(groups.items(), key=lambda kv: min(kv[1])):
        pairs = frozenset((s, a) for s in states for a in acts[s])
        out.append((frozenset(states), pairs))
    return out


def accepting_mecs(p: Product, pair: Optional[int] = None) -> List[Component]:
    """End components that witness acceptance.

    Buchi: maximal end components retaining an accepting (state, action).
    Rabin: end components of the B_i-pruned MDP retaining a G_i pair, for
    any pair i (or only the given one); these may overlap across pairs.
    """
    if p.acc_type == "buchi":
        if pair not in (None, 0):
            raise AnalysisError("Buchi acceptance has a single pair")
        return [c for c in mec_decomposition(p) if c[1] & p.accepting]
    pairs = p.rabin if pair is None else [p.rabin[pair]]
    out: List[Component] = []
    seen: Set[Component] = set()
    for b_set, g_set in pairs:
        for c in mec_decomposition(p, banned=b_set):
            if c[1] & g_set and c not in seen:
                seen.add(c)
                out.append(c)
    return out


def accepting_states(p: Product, pair: Optional[int] = None) -> FrozenSet[int]:
    """Union of the state sets of all accepting end components."""
    out: Set[int] = set()
    for states, _ in accepting_mecs(p, pair):
        out.update(states)
    return frozenset(out)


# ---------------------------------------------------------------------------
# Optimal reachability


def _backward_reach(m: Mdp, target: Set[int]) -> Set[int]:
    pred: List[Set[int]] = [set() for _ in range(m.n_states)]
    for (s, a), dist in m.trans.items():
        if a in m.enabled[s]:
            for pr, d in dist:
                if pr > 0.0:
                    pred[d].add(s)
    out = set(target)
    work = list(target)
    while work:
        v = work.pop()
        for u in pred[v]:
            if u not in out:
                out.add(u)
                work.append(u)
    return out


def prob0_states(m: Mdp, target: Iterable[int]) -> FrozenSet[int]:
    """States whose maximal reachability probability is exactly 0."""
    reach = _backward_reach(m, set(target))
    return frozenset(set(range(m.n_states)) - reach)


def prob1_states(m: Mdp, target: Iterable[int]) -> FrozenSet[int]:
    """States with a strategy reaching the target almost surely.

    Greatest fixpoint over Z of the least fixpoint over Y of: s is in Y if
    s is a target, or some enabled action keeps all mass in Z and touches Y.
    """
    target = set(target)
    z: Set[int] = set(range(m.n_states))
    while True:
        y: Set[int] = set(t for t in target if t in z)
        grown = True
        while grown:
            grown = False
            for s in z:
                if s in y:
                    continue
                for a in m.enabled[s]:
                    supp = [d for pr, d in m.trans[(s, a)] if pr > 0.0]
                    if all(d in z for d in supp) and any(d in y for d in supp):
                        y.add(s)
                        grown = True
                        break
        if y == z:
            return frozenset(z)
        z = y


def max_reach_prob(
    m: Mdp,
    target: Iterable[int],
    tol: float = VI_TOL,
    max_sweeps: int = VI_MAX_SWEEPS,
) -> np.ndarray:
    """Per-state maximal probability of reaching the target set.

    Qualitative preprocessing pins probability-1 and probability-0 states
    exactly; the rest is solved by Gauss-Seidel value iteration to the
    given sup-norm residual tolerance.
    """
    target = set(target)
    p1 = prob1_states(m, target)
    p0 = prob0_states(m, target)
    v = np.zeros(m.n_states)
    for s in p1:
        v[s] = 1.0
    free = [s for s in range(m.n_states) if s not in p1 and s not in p0]
    for _ in range(max_sweeps):
        residual = 0.0
        for s in free:
            best = 0.0
            for a in m.enabled[s]:
                total = 0.0
                for pr, d in m.trans[(s, a)]:
                    total += pr * v[d]
                if total > best:
                    best = total
            residual = max(residual, abs(best - v[s]))
            v[s] = best
        if residual <= tol:
            break
    else:
        raise AnalysisError(f"value iteration did not converge within {max_sweeps} sweeps")
    return v


def greedy_action_sets(m: Mdp, v: np.ndarray, tie_tol: float = TIE_TOL) -> List[Tuple[int, ...]]:
    """Per state, the enabled actions whose one-step backup is within tie_tol of the best."""
    out: List[Tuple[int, ...]] = []
    for s in range(m.n_states):
        backups = []
        for a in m.enabled[s]:
            backups.append((sum(pr * v[d] for pr, d in m.trans[(s, a)]), a))
        if not backups:
            out.append(())
            continue
        best = max(b for b, _ in backups)
        out.append(tuple(a for b, a in backups if b >= best - tie_tol))
    return out


def max_satisfaction_prob(p: Product, pair: Optional[int] = None, tol: float = VI_TOL) -> np.ndarray:
    """Per-state optimal probability of satisfying the product acceptance.

    For Rabin products, ``pair`` restricts the objective to a single pair.
    """
    return max_reach_prob(p, accepting_states(p, pair), tol=tol)


# ---------------------------------------------------------------------------
# Strategies


@dataclass
class MixedStrategy:
    """Per-state probability distribution over enabled action indices."""

    probs: Dict[int, Dict[int, float]]

    @staticmethod
    def from_pure(choice: Mapping[int, int]) -> "MixedStrategy":
        return MixedStrategy({s: {a: 1.0} for s, a in choice.items()})

    @staticmethod
    def uniform(m: Mdp) -> "MixedStrategy":
        return MixedStrategy(
            {s: {a: 1.0 / len(m.enabled[s]) for a in m.enabled[s]}
             for s in range(m.n_states) if m.enabled[s]}
        )

    def action_probs(self, s: int) -> Dict[int, float]:
        if s not in self.probs:
            raise AnalysisError(f"strategy does not cover state {s}")
        return self.probs[s]

    def validate(self, m: Mdp) -> None:
        for s, dist in self.probs.items():
            if not 0 <= s < m.n_states:
                raise AnalysisError(f"strategy covers unknown state {s}")
            total = 0.0
            for a, pr in dist.items():
                if a not in m.enabled[s]:
                    raise AnalysisError(
                        f"strategy plays disabled action {m.actions[a]} at state {m.state_names[s]}"
                    )
                if pr < 0:
                    raise AnalysisError("negative strategy probability")
                total += pr
            if abs(total - 1.0) > 1e-9:
                raise AnalysisError(f"strategy probabilities at state {s} sum to {total!r}")


def _induced_chain(m: Mdp, sigma: MixedStrategy) -> List[Dict[int, float]]:
    moves: List[Dict[int, float]] = []
    for s in range(m.n_states):
        row: Dict[int, float] = {}
        if m.enabled[s]:
            for a, pa in sigma.action_probs(s).items():
                if pa == 0.0:
                    continue
                for pr, d in m.trans[(s, a)]:
                    row[d] = row.get(d, 0.0) + pa * pr
        moves.append(row)
    return moves


def _chain_bsccs(moves: List[Dict[int, float]]) -> Tuple[List[int], List[FrozenSet[int]]]:
    n = len(moves)
    succ = [[d for d, pr in moves[s].items() if pr > 0.0] for s in range(n)]
    comp = sccs(n, succ)
    closed: Dict[int, bool] = {}
    members: Dict[int, Set[int]] = {}
    for s in range(n):
        members.setdefault(comp[s], set()).add(s)
        closed.setdefault(comp[s], True)
        for d in succ[s]:
            if comp[d] != comp[s]:
                closed[comp[s]] = False
    bsccs = []
    for cid, states in sorted(members.items(), key=lambda kv: min(kv[1])):
        # A trivial SCC without a self loop is transient, not a BSCC.
        if not closed[cid]:
            continue
        if len(states) == 1:
            s = next(iter(states))
            if not succ[s]:
                bsccs.append(frozenset(states))
                continue
            if s not in succ[s]:
                continue
        bsccs.append(frozenset(states))
    return comp, bsccs


def _chain_reach(moves: List[Dict[int, float]], ones: Set[int], zeros: Set[int]) -> np.ndarray:
    """Reach probability toward ``ones`` when ``zeros`` absorb complementarily.

    Both sets must be closed under the chain.  States that can only reach
    one of the two sets get exact 0/1 values; the rest is a linear solve.
    """
    n = len(moves)
    pred: List[Set[int]] = [set() for _ in range(n)]
    for s in range(n):
        for d, pr in moves[s].items():
            if pr > 0.0:
                pred[d].add(s)

    def back(seed: Set[int]) -> Set[int]:
        out = set(seed)
        work = list(seed)
        while work:
            v = work.pop()
            for u in pred[v]:
                if u not in out:
                    out.add(u)
                    work.append(u)
        return out

    can_one = back(ones)
    can_zero = back(zeros)
    v = np.zeros(n)
    mixed: List[int] = []
    for s in range(n):
        if s in ones or (s in can_one and s not in can_zero):
            v[s] = 1.0
        elif s not in can_one:
            v[s] = 0.0
        elif s in zeros:
            v[s] = 0.0
        else:
            mixed.append(s)
    if mixed:
        idx = {s: i for i, s in enumerate(mixed)}
        k = len(mixed)
        mat = np.eye(k)
        rhs = np.zeros(k)
        for s in mixed:
            for d, pr in moves[s].items():
                if d in idx:
                    mat[idx[s], idx[d]] -= pr
                else:
                    rhs[idx[s]] += pr * v[d]
        sol = np.linalg.solve(mat, rhs)
        for s in mixed:
            v[s] = sol[idx[s]]
    return v


def _transient_solve(
    moves: List[Dict[int, float]],
    absorbed: Set[int],
    cost: np.ndarray,
) -> np.ndarray:
    """Expected total cost accumulated before entering ``absorbed`` (0 there)."""
    n = len(moves)
    transient = [s for s in range(n) if s not in absorbed]
    v = np.zeros(n)
    if transient:
        idx = {s: i for i, s in enumerate(transient)}
        k = len(transient)
        mat = np.eye(k)
        rhs = np.zeros(k)
        for s in transient:
            rhs[idx[s]] = cost[s]
            for d, pr in moves[s].items():
                if d in idx:
                    mat[idx[s], idx[d]] -= pr
        sol = np.linalg.solve(mat, rhs)
        for s in transient:
            v[s] = sol[idx[s]]
    return v


@dataclass
class EvalReport:
    """Exact outcome of running a mixed strategy on a product.

    a: probability the induced run satisfies the acceptance condition.
    p: probability of reaching the sink t in the zeta-augmented chain
       (None when no zeta was given).
    f: expected number of accepting (state, action) traversals before the
       chain settles into a bottom SCC (None for Rabin acceptance).
    """

    a: float
    p: Optional[float]
    f: Optional[float]
    zeta: Optional[float]
    a_values: np.ndarray
    p_values: Optional[np.ndarray]
    f_values: Optional[np.ndarray]
    bsccs: List[Tuple[FrozenSet[int], bool]] = field(default_factory=list)


def _bscc_accepting(p: Product, sigma: MixedStrategy, states: FrozenSet[int]) -> bool:
    support = set()
    for s in states:
        if p.enabled[s]:
            for a, pa in sigma.action_probs(s).items():
                if pa > 0.0:
                    support.add((s, a))
    if p.acc_type == "buchi":
        return bool(support & p.accepting)
    for b_set, g_set in p.rabin:
        if not (support & b_set) and (support & g_set):
            return True
    return False


def evaluate_strategy(
    p: Product,
    sigma: MixedStrategy,
    zeta: Optional[float] = None,
) -> EvalReport:
    """Exact (a, p, f) for a mixed strategy; linear algebra, no sampling."""
    sigma.validate(p)
    moves = _induced_chain(p, sigma)
    _, bscc_sets = _chain_bsccs(moves)
    flagged = [(states, _bscc_accepting(p, sigma, states)) for states in bscc_sets]
    acc_states: Set[int] = set()
    rej_states: Set[int] = set()
    for states, good in flagged:
        (acc_states if good else rej_states).update(states)
    a_values = _chain_reach(moves, acc_states, rej_states)

    f_values = None
    f = None
    if p.acc_type == "buchi":
        cost = np.zeros(p.n_states)
        for s in range(p.n_states):
            if p.enabled[s]:
                for a, pa in sigma.action_probs(s).items():
                    if (s, a) in p.accepting:
                        cost[s] += pa
        f_values = _transient_solve(moves, acc_states | rej_states, cost)
        f = float(f_values[p.initial])

    p_values = None
    p_prob = None
    if zeta is not None:
        if p.acc_type != "buchi":
            raise ProductError("the sink augmentation applies to Buchi products")
        aug = augment(p, zeta)
        aug_moves = _induced_chain_augmented(aug, sigma)
        p_values = _chain_reach(aug_moves, {aug.sink}, _closed_rejecting(aug_moves, aug.sink))
        p_prob = float(p_values[p.initial])

    return EvalReport(
        a=float(a_values[p.initial]),
        p=p_prob,
        f=f,
        zeta=zeta,
        a_values=a_values,
        p_values=p_values,
        f_values=f_values,
        bsccs=flagged,
    )


def _induced_chain_augmented(aug: AugmentedMdp, sigma: MixedStrategy) -> List[Dict[int, float]]:
    moves: List[Dict[int, float]] = []
    for s in range(aug.n_states):
        row: Dict[int, float] = {}
        if s == aug.sink:
            row[s] = 1.0
        elif aug.enabled[s]:
            for a, pa in sigma.action_probs(s).items():
                if pa == 0.0:
                    continue
                for pr, d in aug.trans[(s, a)]:
                    row[d] = row.get(d, 0.0) + pa * pr
        moves.append(row)
    return moves


def _closed_rejecting(moves: List[Dict[int, float]], sink: int) -> Set[int]:
    """BSCC states of the augmented chain other than the sink itself."""
    _, bscc_sets = _chain_bsccs(moves)
    out: Set[int] = set()
    for states in bscc_sets:
        if sink not in states:
            out.update(states)
    return out


# ---------------------------------------------------------------------------
# Optimal strategy construction


def optimal_strategy(p: Product, pair: Optional[int] = None, tie_tol: float = TIE_TOL) -> MixedStrategy:
    """An optimal mixed strategy for the product acceptance objective.

    Inside accepting end components the strategy mixes uniformly over the
    component's retained actions (claimed in a fixed order where components
    overlap); elsewhere it mixes uniformly over the actions whose backup
    matches the optimal satisfaction value, which reaches the components
    with optimal probability.
    """
    claims: Dict[int, Tuple[int, ...]] = {}
    for states, pairs in accepting_mecs(p, pair):
        for s in states:
            if s not in claims:
                acts = tuple(sorted(a for (s2, a) in pairs if s2 == s))
                claims[s] = acts
    v = max_reach_prob(p, claims.keys())
    greedy = greedy_action_sets(p, v, tie_tol)
    probs: Dict[int, Dict[int, float]] = {}
    for s in range(p.n_states):
        if not p.enabled[s]:
            continue
        if s in claims:
            acts = claims[s]
        elif v[s] > 0.0:
            acts = greedy[s]
        else:
            acts = tuple(p.enabled[s])
        probs[s] = {a: 1.0 / len(acts) for a in acts}
    return MixedStrategy(probs)


# ---------------------------------------------------------------------------
# Average reward


def expected_average_reward(
    m: Mdp,
    sigma: MixedStrategy,
    rewards: Mapping[Tuple[int, int], float],
) -> np.ndarray:
    """Per-state expected limit-average reward of a mixed strategy.

    Rewards are per (state, action index).  Each bottom SCC contributes its
    stationary gain, weighted by the absorption probabilities.
    """
    sigma.validate(m)
    moves = _induced_chain(m, sigma)
    _, bscc_sets = _chain_bsccs(moves)
    n = m.n_states
    gain = np.zeros(n)
    values = np.zeros(n)
    for states in bscc_sets:
        members = sorted(states)
        idx = {s: i for i, s in enumerate(members)}
        k = len(members)
        mat = np.zeros((k, k))
        for s in members:
            for d, pr in moves[s].items():
                mat[idx[d], idx[s]] += pr
        # pi solves pi = P^T pi with sum 1; replace one balance row.
        system = mat - np.eye(k)
        system[0, :] = 1.0
        rhs = np.zeros(k)
        rhs[0] = 1.0
        pi = np.linalg.solve(system, rhs)
        g = 0.0
        for s in members:
            step = 0.0
            if m.enabled[s]:
                for a, pa in sigma.action_probs(s).items():
                    step += pa * rewards.get((s, a), 0.0)
            g += pi[idx[s]] * step
        for s in members:
            gain[s] = g
    absorbed: Set[int] = set()
    for states in bscc_sets:
        absorbed.update(states)
    transient = [s for s in range(n) if s not in absorbed]
    for s in absorbed:
        values[s] = gain[s]
    if transient:
        idx = {s: i for i, s in enumerate(transient)}
        k = len(transient)
        mat = np.eye(k)
        rhs = np.zeros(k)
        for s in transient:
            for d, pr in moves[s].items():
                if d in idx:
                    mat[idx[s], idx[d]] -= pr
                else:
                    rhs[idx[s]] += pr * values[d]
        sol = np.linalg.solve(mat, rhs)
        for s in transient:
            values[s] = sol[idx[s]]
    return values


# ---------------------------------------------------------------------------
# Strategy enumeration


def enumerate_positional_strategies(
    m: Mdp,
    collapse: bool = True,
    key: Optional[Callable[[int, int], object]] = None,
) -> Iterator[Dict[int, int]]:
    """All pure positional strategies, as state -> action index maps.

    With ``collapse``, actions of a state that induce the same distribution
    and the same acceptance memberships (for products) are represented by
    one of them, shrinking the enumeration without losing distinct
    outcomes.
    """
    if key is None and isinstance(m, Product):
        def key(s: int, a: int) -> object:
            marks = [(s, a) in m.accepting]
            for b_set, g_set in m.rabin:
                marks.append((s, a) in b_set)
                marks.append((s, a) in g_set)
            return tuple(marks)

    per_state: List[List[int]] = []
    for s in range(m.n_states):
        if not m.enabled[s]:
            per_state.append([])
            continue
        if collapse:
            reps: Dict[object, int] = {}
            for a in m.enabled[s]:
                dist = tuple(sorted(m.trans[(s, a)], key=lambda pd: (pd[1], pd[0])))
                k = (dist, key(s, a)) if key is not None else dist
                if k not in reps:
                    reps[k] = a
            per_state.append(sorted(reps.values()))
        else:
            per_state.append(list(m.enabled[s]))

    slots = [s for s in range(m.n_states) if per_state[s]]
    for combo in iter_product(*(per_state[s] for s in slots)):
        yield dict(zip(slots, combo))
