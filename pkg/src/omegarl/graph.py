"""Small graph routines shared by the automata and analysis layers."""

from __future__ import annotations

from typing import List, Tuple


def sccs(n_nodes: int, succ: List[List[int]]) -> List[int]:
    """Iterative Tarjan; returns an SCC id per node, ids in reverse topological order."""
    index = [-1] * n_nodes
    low = [0] * n_nodes
    on_stack = [False] * n_nodes
    stack: List[int] = []
    scc_id = [-1] * n_nodes
    counter = 0
    n_sccs = 0
    for root in range(n_nodes):
        if index[root] != -1:
            continue
        call: List[Tuple[int, int]] = [(root, 0)]
        while call:
            v, pi = call.pop()
            if pi == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            recurse = False
            for j in range(pi, len(succ[v])):
                w = succ[v][j]
                if index[w] == -1:
                    call.append((v, j + 1))
                    call.append((w, 0))
                    recurse = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if recurse:
                continue
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    scc_id[w] = n_sccs
                    if w == v:
                        break
                n_sccs += 1
            if call:
                parent = call[-1][0]
                low[parent] = min(low[parent], low[v])
    return scc_id
