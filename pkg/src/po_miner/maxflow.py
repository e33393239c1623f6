"""Dinic's blocking-flow maximum flow on small integer networks."""

from __future__ import annotations

from collections import deque


class FlowNetwork:
    def __init__(self, size: int):
        self.size = size
        self.adj: list[list[int]] = [[] for _ in range(size)]
        # parallel edge arrays; edge e and e ^ 1 are a residual pair
        self.head: list[int] = []
        self.cap: list[int] = []

    def add_edge(self, u: int, v: int, capacity: int) -> None:
        self.adj[u].append(len(self.head))
        self.head.append(v)
        self.cap.append(capacity)
        self.adj[v].append(len(self.head))
        self.head.append(u)
        self.cap.append(0)

    def _levels(self, s: int, t: int) -> list[int] | None:
        level = [-1] * self.size
        level[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for e in self.adj[u]:
                v = self.head[e]
                if self.cap[e] > 0 and level[v] < 0:
                    level[v] = level[u] + 1
                    queue.append(v)
        return level if level[t] >= 0 else None

    def _augment(self, s: int, t: int, level: list[int], it: list[int], limit: int) -> int:
        """Push one augmenting path along the level graph; 0 when blocked."""
        path: list[int] = []
        u = s
        while True:
            if u == t:
                pushed = min([limit] + [self.cap[e] for e in path])
                for e in path:
                    self.cap[e] -= pushed
                    self.cap[e ^ 1] += pushed
                return pushed
            edges = self.adj[u]
            while it[u] < len(edges):
                e = edges[it[u]]
                v = self.head[e]
                if self.cap[e] > 0 and level[v] == level[u] + 1:
                    break
                it[u] += 1
            else:
                # dead end: retreat and discard the edge that led here
                if not path:
                    return 0
                level[u] = -1
                e = path.pop()
                u = self.head[e ^ 1]
                it[u] += 1
                continue
            e = edges[it[u]]
            path.append(e)
            u = self.head[e]

    def max_flow(self, s: int, t: int, limit: int | None = None) -> int:
        """Value of a maximum s-t flow, stopping early once ``limit`` is reached."""
        total = 0
        bound = limit if limit is not None else sum(self.cap[e] for e in self.adj[s])
        while total < bound:
            level = self._levels(s, t)
            if level is None:
                break
            it = [0] * self.size
            while total < bound:
                pushed = self._augment(s, t, level, it, bound - total)
                if not pushed:
                    break
                total += pushed
        return total
