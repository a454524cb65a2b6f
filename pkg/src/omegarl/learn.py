"""Model-free Q-learning for omega-regular objectives.

The main learner runs episodic, tabular Q-learning on the zeta-augmented
product: the only reward is 1 on entering the sink t, so with gamma = 1 the
optimal Q-values equal the sink-reachability probabilities and maximizing
them maximizes the satisfaction probability (for zeta close enough to 1).
Episode truncation bootstraps from the successor state's value, so the
learned Q approximates the infinite-horizon target rather than a finite cut.

A baseline learner assigns Rabin-pair shaped rewards (+R on G_i pairs,
-R on B_i pairs) directly on the product and optimizes them in discounted
or relative-value (average reward) mode, for comparison.

All randomness flows from one root seed through splitmix64-derived per-run,
per-episode sub-seeds, so results are reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from random import Random
from typing import Dict, List, Optional, Sequence, Tuple

from .analysis import MixedStrategy
from .product import AugmentedMdp, Product

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _splitmix64(x: int) -> int:
    x = (x + _GOLDEN) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def derive_seed(root: int, *path: int) -> int:
    """Deterministic sub-seed for a nested scope (run, episode, ...)."""
    h = _splitmix64(root & _MASK64)
    for part in path:
        h = _splitmix64(h ^ ((part + _GOLDEN) & _MASK64))
    return h


@dataclass
class LearnConfig:
    episodes: int = 20000
    episode_length: int = 80
    alpha: float = 0.1
    epsilon: float = 0.1
    gamma: float = 1.0
    zeta: float = 0.99
    runs: int = 5
    tie_tol: float = 0.01
    seed: int = 0


@dataclass
class QTable:
    """Q-values indexed by state and position within the enabled-action tuple."""

    values: List[List[float]]
    acts: List[Tuple[int, ...]]

    def value(self, s: int, action: int) -> float:
        return self.values[s][self.acts[s].index(action)]

    def state_value(self, s: int) -> float:
        return max(self.values[s]) if self.values[s] else 0.0

    def argmax_set(self, s: int, tie_tol: float = 0.0) -> Tuple[int, ...]:
        if not self.acts[s]:
            return ()
        best = max(self.values[s])
        return tuple(a for a, v in zip(self.acts[s], self.values[s]) if v >= best - tie_tol)


def _sampling_tables(m) -> Tuple[List[Tuple[int, ...]], List[List[Tuple[int, ...]]], List[List[Tuple[float, ...]]]]:
    acts: List[Tuple[int, ...]] = []
    dests: List[List[Tuple[int, ...]]] = []
    cums: List[List[Tuple[float, ...]]] = []
    for s in range(m.n_states):
        acts.append(tuple(m.enabled[s]))
        row_d: List[Tuple[int, ...]] = []
        row_c: List[Tuple[float, ...]] = []
        for a in m.enabled[s]:
            dist = [(pr, d) for pr, d in m.trans[(s, a)] if pr > 0.0]
            ds = tuple(d for _, d in dist)
            total = 0.0
            cs = []
            for pr, _ in dist:
                total += pr
                cs.append(total)
            cs[-1] = 1.0
            row_d.append(ds)
            row_c.append(tuple(cs))
        dests.append(row_d)
        cums.append(row_c)
    return acts, dests, cums


def q_learning(aug: AugmentedMdp, cfg: LearnConfig, run_index: int = 0) -> QTable:
    """One run of episodic Q-learning on the augmented product."""
    acts, dests, cums = _sampling_tables(aug)
    n = aug.n_states
    sink = aug.sink
    q: List[List[float]] = [[0.0] * len(acts[s]) for s in range(n)]
    alpha = cfg.alpha
    eps = cfg.epsilon
    gamma = cfg.gamma
    initial = aug.initial
    length = cfg.episode_length
    for ep in range(cfg.episodes):
        rng = Random(derive_seed(cfg.seed, run_index, ep))
        rand = rng.random
        s = initial
        qs = q[s]
        for _ in range(length):
            if rand() < eps:
                k = int(rand() * len(qs))
            else:
                k = 0
                best = qs[0]
                for i in range(1, len(qs)):
                    if qs[i] > best:
                        best = qs[i]
                        k = i
            ds = dests[s][k]
            if len(ds) == 1:
                s2 = ds[0]
            else:
                r = rand()
                cs = cums[s][k]
                i = 0
                while r > cs[i]:
                    i += 1
                s2 = ds[i]
            if s2 == sink:
                qs[k] += alpha * (1.0 - qs[k])
                break
            q2 = q[s2]
            target = gamma * (max(q2) if q2 else 0.0)
            qs[k] += alpha * (target - qs[k])
            s = s2
            qs = q2
    return QTable(q, acts)


def learn(aug: AugmentedMdp, cfg: LearnConfig) -> List[QTable]:
    """All configured independent runs."""
    return [q_learning(aug, cfg, run_index=r) for r in range(cfg.runs)]


def extract_strategy(qt: QTable, product: Product, tie_tol: Optional[float] = None) -> MixedStrategy:
    """Uniform mixture over near-greedy actions, per product state."""
    tol = 0.0 if tie_tol is None else tie_tol
    probs: Dict[int, Dict[int, float]] = {}
    for s in range(product.n_states):
        if not product.enabled[s]:
            continue
        best = qt.argmax_set(s, tol)
        probs[s] = {a: 1.0 / len(best) for a in best}
    return MixedStrategy(probs)


def mean_q(tables: Sequence[QTable], s: int, action: int) -> float:
    return sum(t.value(s, action) for t in tables) / len(tables)


@dataclass
class RabinRewardConfig:
    """Shaped-reward baseline on the raw product for one Rabin pair."""

    pair: int = 0
    r_plus: float = 1.0
    r_minus: float = 1.0
    mode: str = "average"  # or "discounted"
    discount: float = 0.99


def rabin_rewards(product: Product, cfg: RabinRewardConfig) -> Dict[Tuple[int, int], float]:
    pairs = product.rabin if product.acc_type == "rabin" else [(frozenset(), product.accepting)]
    if not 0 <= cfg.pair < len(pairs):
        raise ValueError(f"pair index {cfg.pair} out of range for {len(pairs)} pair(s)")
    b_set, g_set = pairs[cfg.pair]
    out: Dict[Tuple[int, int], float] = {}
    for key in g_set:
        out[key] = cfg.r_plus
    for key in b_set:
        out[key] = -cfg.r_minus
    return out


def rabin_q_learning(
    product: Product,
    rcfg: RabinRewardConfig,
    cfg: LearnConfig,
    run_index: int = 0,
) -> QTable:
    """Baseline learner for Rabin-shaped rewards.

    Discounted mode is plain Q-learning.  Average mode is relative value
    iteration style Q-learning with the initial state as reference; the
    episode reset is treated as a real transition back to the initial
    state, which keeps the effective chain unichain.
    """
    if rcfg.mode not in ("average", "discounted"):
        raise ValueError(f"unknown mode {rcfg.mode!r}")
    rewards = rabin_rewards(product, rcfg)
    acts, dests, cums = _sampling_tables(product)
    n = product.n_states
    q: List[List[float]] = [[0.0] * len(acts[s]) for s in range(n)]
    rew: List[List[float]] = [
        [rewards.get((s, a), 0.0) for a in acts[s]] for s in range(n)
    ]
    alpha = cfg.alpha
    eps = cfg.epsilon
    lam = rcfg.discount
    average = rcfg.mode == "average"
    initial = product.initial
    length = cfg.episode_length
    q_ref = q[initial]
    for ep in range(cfg.episodes):
        rng = Random(derive_seed(cfg.seed, run_index, ep))
        rand = rng.random
        s = initial
        qs = q[s]
        for t in range(length):
            if rand() < eps:
                k = int(rand() * len(qs))
            else:
                k = 0
                best = qs[0]
                for i in range(1, len(qs)):
                    if qs[i] > best:
                        best = qs[i]
                        k = i
            if t == length - 1:
                s2 = initial
            else:
                ds = dests[s][k]
                if len(ds) == 1:
                    s2 = ds[0]
                else:
                    r = rand()
                    cs = cums[s][k]
                    i = 0
                    while r > cs[i]:
                        i += 1
                    s2 = ds[i]
            q2 = q[s2]
            nxt = max(q2) if q2 else 0.0
            if average:
                target = rew[s][k] + nxt - max(q_ref)
            else:
                target = rew[s][k] + lam * nxt
            qs[k] += alpha * (target - qs[k])
            s = s2
            qs = q2
    return QTable(q, acts)
