"""Maximum B-matchings that avoid a bidder set, via min-cost max-flow.

Network: source -> bidder ``a`` (capacity ``d_a``), bidder -> item ``r`` for
each interest edge (capacity 1, cost 1 if ``a`` is in the avoided set),
item -> sink (capacity ``c_r``).  Successive shortest paths with
Bellman-Ford; all ties resolve by node and edge insertion order.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class InterestGraph:
    bidders: tuple          # bidder ids, in tie-break order
    demand: dict            # bidder id -> integer capacity
    items: tuple            # item ids, in tie-break order
    supply: dict            # item id -> unsold instances
    edges: tuple            # (bidder id, item id) pairs

    @property
    def t_bar(self) -> int:
        return sum(self.supply[r] for r in self.items)

    @classmethod
    def build(cls, bidders, demand, items, supply, interest):
        """``interest[a]`` is the set of items bidder ``a`` may receive."""
        edges = tuple((a, r) for a in bidders for r in items
                      if r in interest[a] and supply[r] > 0 and demand[a] > 0)
        return cls(tuple(bidders), dict(demand), tuple(items), dict(supply), edges)


@dataclass(frozen=True)
class AvoidMatching:
    load: dict              # (bidder, item) -> 0/1
    total: int
    per_bidder: dict = field(default_factory=dict)
    avoided_load: int = 0


class _Network:
    def __init__(self, size):
        self.adj = [[] for _ in range(size)]
        self.to, self.cap, self.cost = [], [], []

    def add(self, u, v, cap, cost):
        self.adj[u].append(len(self.to))
        self.to.append(v); self.cap.append(cap); self.cost.append(cost)
        self.adj[v].append(len(self.to))
        self.to.append(u); self.cap.append(0); self.cost.append(-cost)
        return len(self.to) - 2

    def min_cost_max_flow(self, s, t):
        size = len(self.adj)
        flow = cost = 0
        while True:
            dist = [None] * size
            via = [-1] * size
            dist[s] = 0
            for _ in range(size - 1):
                changed = False
                for u in range(size):
                    if dist[u] is None:
                        continue
                    for e in self.adj[u]:
                        if self.cap[e] <= 0:
                            continue
                        v = self.to[e]
                        nd = dist[u] + self.cost[e]
                        if dist[v] is None or nd < dist[v]:
                            dist[v] = nd
                            via[v] = e
                            changed = True
                if not changed:
                    break
            if dist[t] is None:
                return flow, cost
            push = None
            v = t
            while v != s:
                e = via[v]
                push = self.cap[e] if push is None else min(push, self.cap[e])
                v = self.to[e ^ 1]
            v = t
            while v != s:
                e = via[v]
                self.cap[e] -= push
                self.cap[e ^ 1] += push
                v = self.to[e ^ 1]
            flow += push
            cost += push * dist[t]


def s_avoid_matching(g: InterestGraph, S=()) -> AvoidMatching:
    """Maximum B-matching assigning as few instances as possible to ``S``."""
    S = {S} if isinstance(S, int) else set(S)
    nb, ni = len(g.bidders), len(g.items)
    src, sink = 0, nb + ni + 1
    net = _Network(nb + ni + 2)
    bpos = {a: 1 + k for k, a in enumerate(g.bidders)}
    ipos = {r: 1 + nb + k for k, r in enumerate(g.items)}
    for a in g.bidders:
        net.add(src, bpos[a], int(g.demand[a]), 0)
    arcs = {}
    for a, r in g.edges:
        arcs[(a, r)] = net.add(bpos[a], ipos[r], 1, 1 if a in S else 0)
    for r in g.items:
        net.add(ipos[r], sink, int(g.supply[r]), 0)
    total, cost = net.min_cost_max_flow(src, sink)
    load = {key: 1 - net.cap[e] for key, e in arcs.items()}
    per = {a: 0 for a in g.bidders}
    for (a, _), x in load.items():
        per[a] += x
    return AvoidMatching(load, total, per, cost)


def assigned_excluding(g: InterestGraph, S) -> int:
    """``B(not S)``: instances matched to bidders outside ``S`` in an
    ``S``-avoid matching."""
    mt = s_avoid_matching(g, S)
    return mt.total - mt.avoided_load
