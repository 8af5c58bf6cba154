"""Dinic max-flow with min-cut extraction.

Capacities may be floats or :class:`fractions.Fraction`; the algorithm only
adds, subtracts and compares them, so rational inputs give exact flows.
Traversal order is the insertion order of edges, which makes results
deterministic.
"""
from __future__ import annotations

from collections import deque

__all__ = ["FlowNetwork"]


class FlowNetwork:
    """Directed network with residual edges stored in pairs ``(e, e ^ 1)``.

    ``eps`` is the residual capacity at or below which an edge counts as
    saturated; use 0 for exact arithmetic.
    """

    def __init__(self, num_nodes: int, zero=0.0, eps=0.0):
        self.num_nodes = num_nodes
        self.zero = zero
        self.eps = eps
        self.head: list[int] = []
        self.cap: list = []
        self.orig: list = []
        self.adj: list[list[int]] = [[] for _ in range(num_nodes)]

    def add_edge(self, u: int, v: int, capacity) -> int:
        e = len(self.head)
        self.head += [v, u]
        self.cap += [capacity, self.zero]
        self.orig += [capacity, self.zero]
        self.adj[u].append(e)
        self.adj[v].append(e + 1)
        return e

    def flow(self, e: int):
        """Flow currently routed through forward edge ``e``."""
        return self.orig[e] - self.cap[e]

    def _levels(self, s: int, t: int):
        level = [-1] * self.num_nodes
        level[s] = 0
        queue = deque([s])
        head, cap, eps, adj = self.head, self.cap, self.eps, self.adj
        while queue:
            u = queue.popleft()
            for e in adj[u]:
                v = head[e]
                if level[v] < 0 and cap[e] > eps:
                    level[v] = level[u] + 1
                    queue.append(v)
        return level if level[t] >= 0 else None

    def max_flow(self, s: int, t: int):
        """Route a maximum flow from ``s`` to ``t`` and return its value."""
        head, cap, eps, adj = self.head, self.cap, self.eps, self.adj
        total = self.zero
        while True:
            level = self._levels(s, t)
            if level is None:
                return total
            ptr = [0] * self.num_nodes
            while True:
                path: list[int] = []
                u = s
                while u != t:
                    edges = adj[u]
                    i = ptr[u]
                    lu = level[u] + 1
                    while i < len(edges):
                        e = edges[i]
                        if cap[e] > eps and level[head[e]] == lu:
                            break
                        i += 1
                    ptr[u] = i
                    if i == len(edges):
                        if u == s:
                            break
                        level[u] = -1
                        e = path.pop()
                        u = head[e ^ 1]
                        ptr[u] += 1
                        continue
                    path.append(edges[i])
                    u = head[edges[i]]
                if u != t:
                    break
                push = min(cap[e] for e in path)
                for e in path:
                    cap[e] -= push
                    cap[e ^ 1] += push
                total += push

    def reachable(self, s: int) -> list[bool]:
        """Nodes reachable from ``s`` through unsaturated residual edges."""
        seen = [False] * self.num_nodes
        seen[s] = True
        stack = [s]
        head, cap, eps, adj = self.head, self.cap, self.eps, self.adj
        while stack:
            u = stack.pop()
            for e in adj[u]:
                v = head[e]
                if not seen[v] and cap[e] > eps:
                    seen[v] = True
                    stack.append(v)
        return seen
