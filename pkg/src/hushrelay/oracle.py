"""Sequential ground-truth flow solvers.

Two independent routes to the same answer: a shortest-augmenting-path
max-flow used as the trust anchor, and a sequential push-relabel with dummy
endpoints that mirrors the distributed protocol's initialization so traces
stay comparable.  Correctness, not speed, is the contract here.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .graph import ChannelGraph, FlowAssignment, Funds, NodeId


@dataclass
class OracleResult:
    max_value: Funds
    flow: FlowAssignment


def maxflow_augmenting(
    g: ChannelGraph, s: NodeId, r: NodeId, stop_at: Funds | None = None
) -> OracleResult:
    """Exact maximum s->r flow via shortest augmenting paths.

    Deterministic given adjacency order.  If stop_at is given, augmentation
    halts once the flow reaches it (the reported value is then
    min(stop_at, true max)); feasibility checks use this to stay cheap.
    """
    if s == r:
        raise ValueError("source and sink must differ")
    flow: dict[tuple[int, int], int] = {}
    adj = [g.neighbors(v) for v in range(g.n)]
    total = 0
    while stop_at is None or total < stop_at:
        # BFS over residual edges for a shortest path
        parent: dict[int, int] = {s: s}
        queue = deque([s])
        while queue and r not in parent:
            v = queue.popleft()
            for w in adj[v]:
                if w not in parent and g.capacity(v, w) - flow.get((v, w), 0) > 0:
                    parent[w] = v
                    queue.append(w)
        if r not in parent:
            break
        path = [r]
        while path[-1] != s:
            path.append(parent[path[-1]])
        path.reverse()
        bottleneck = min(
            g.capacity(v, w) - flow.get((v, w), 0) for v, w in zip(path, path[1:])
        )
        if stop_at is not None:
            bottleneck = min(bottleneck, stop_at - total)
        for v, w in zip(path, path[1:]):
            flow[(v, w)] = flow.get((v, w), 0) + bottleneck
            flow[(w, v)] = flow.get((w, v), 0) - bottleneck
        total += bottleneck
    fa = FlowAssignment(s, r)
    for (v, w), a in flow.items():
        if a > 0:
            fa.add(v, w, a)
    return OracleResult(total, fa)


def is_feasible(g: ChannelGraph, s: NodeId, r: NodeId, val: Funds) -> bool:
    """True iff val units can be routed from s to r."""
    if val == 0:
        return True
    return maxflow_augmenting(g, s, r, stop_at=val).max_value >= val


def feasible_flow_sequential(g: ChannelGraph, s: NodeId, r: NodeId, val: Funds) -> FlowAssignment:
    """Route up to val units s->r with a sequential FIFO push-relabel.

    Dummy endpoints cap the routed amount: a virtual source feeds s exactly
    val and a virtual sink absorbs at most val from r.  The virtual source
    starts at label n+2, everything else at 0, matching the distributed
    variant.  Delivers min(val, maxflow); the remainder drains back to the
    virtual source.  Returns a flow over the real edges only.
    """
    if val < 0:
        raise ValueError("value must be >= 0")
    n = g.n
    sp, rp = n, n + 1  # virtual source / virtual sink
    adj: list[list[int]] = [g.neighbors(v) for v in range(n)] + [[s], [r]]
    adj[s] = adj[s] + [sp]
    adj[r] = adj[r] + [rp]
    cap: dict[tuple[int, int], int] = {}
    for ch in g.channels():
        cap[(ch.u, ch.v)] = ch.cap_forward
        cap[(ch.v, ch.u)] = ch.cap_backward
    cap[(sp, s)] = val
    cap[(r, rp)] = val

    flow: dict[tuple[int, int], int] = {}
    label = [0] * (n + 2)
    label[sp] = n + 2
    excess = [0] * (n + 2)
    if val == 0:
        return FlowAssignment(s, r)
    flow[(sp, s)] = val
    flow[(s, sp)] = -val
    excess[s] = val

    active = deque([s])
    queued = [False] * (n + 2)
    queued[s] = True
    while active:
        v = active.popleft()
        queued[v] = False
        while excess[v] > 0:
            pushed = False
            for w in adj[v]:
                if label[w] >= label[v]:
                    continue
                res = cap.get((v, w), 0) - flow.get((v, w), 0)
                if res <= 0:
                    continue
                delta = min(excess[v], res)
                flow[(v, w)] = flow.get((v, w), 0) + delta
                flow[(w, v)] = flow.get((w, v), 0) - delta
                excess[v] -= delta
                excess[w] += delta
                pushed = True
                if w not in (sp, rp) and not queued[w]:
                    active.append(w)
                    queued[w] = True
                if excess[v] == 0:
                    break
            if excess[v] == 0:
                break
            if not pushed:
                # relabel to one above the lowest residual neighbor, then
                # yield the discharge slot (FIFO)
                label[v] = 1 + min(
                    label[w]
                    for w in adj[v]
                    if cap.get((v, w), 0) - flow.get((v, w), 0) > 0
                )
                if not queued[v]:
                    active.append(v)
                    queued[v] = True
                break

    fa = FlowAssignment(s, r)
    for (v, w), a in flow.items():
        if a > 0 and v < n and w < n:
            fa.add(v, w, a)
    return fa


def residual_reachable(g: ChannelGraph, flow: FlowAssignment, s: NodeId) -> set[NodeId]:
    """Nodes reachable from s along residual edges; the min-cut certificate check."""
    seen = {s}
    queue = deque([s])
    while queue:
        v = queue.popleft()
        for w in g.neighbors(v):
            if w not in seen and g.capacity(v, w) - flow.get(v, w) > 0:
                seen.add(w)
                queue.append(w)
    return seen
