"""Distributed push-relabel routing as per-node state machines.

Each node owns its label, excess, per-edge flow ledger and a cache of
neighbor labels, and reacts to four message kinds: PushRequest, Accept,
Nak and LabelUpdate.  Handlers touch only the receiving node's state and
return outbound messages, so any dispatcher that delivers messages to one
node at a time (single-threaded or sharded) yields the same behavior.

Key rules:
  - a push is applied optimistically at the sender and rolled back exactly
    on Nak;
  - the receiver accepts iff its label is strictly below the label carried
    in the request;
  - at most one push is in flight per directed edge, and a node never
    relabels while it has any push in flight (so a request always carries
    the sender's current label);
  - label caches only ever increase (stale updates are discarded), fed by
    Accept/Nak payloads and LabelUpdate broadcasts.

Routing an amount val attaches a virtual source feeding s exactly val and a
virtual sink absorbing at most val from r.  Both are passive: they accept
pushes but never originate any.  Undeliverable excess climbs labels until it
drains back to the virtual source, so termination leaves every real node
with zero excess.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

from .decompose import cancel_cycles
from .graph import ChannelGraph, FlowAssignment, Funds, NodeId


class ProtocolError(Exception):
    """Invariant breach or malformed event; signals a bug, not a routing failure."""


class SameSourceSink(ValueError):
    pass


class ZeroValue(ValueError):
    pass


class UnknownNeighbor(ProtocolError):
    pass


class UnknownRequestId(ProtocolError):
    pass


class NotTerminated(ProtocolError):
    pass


class Role(Enum):
    NORMAL = "normal"
    SOURCE = "source"
    SINK = "sink"
    DUMMY_SOURCE = "dummy_source"
    DUMMY_SINK = "dummy_sink"


@dataclass(slots=True)
class PushRequest:
    sender: NodeId
    request_id: int
    amount: Funds
    sender_label: int


@dataclass(slots=True)
class Accept:
    request_id: int
    amount: Funds
    responder_label: int


@dataclass(slots=True)
class Nak:
    request_id: int
    amount: Funds
    responder_label: int


@dataclass(slots=True)
class LabelUpdate:
    sender: NodeId
    new_label: int


Message = PushRequest | Accept | Nak | LabelUpdate
Outbound = tuple[NodeId, Message]


@dataclass(slots=True)
class NodeState:
    """One protocol participant; mutated only by its owning dispatcher."""

    id: NodeId
    role: Role
    label: int = 0
    excess: Funds = 0
    # local ledger f(v, w) per neighbor, and static directed capacities
    edge_flow: dict[NodeId, Funds] = field(default_factory=dict)
    cap: dict[NodeId, Funds] = field(default_factory=dict)
    neighbor_labels: dict[NodeId, int] = field(default_factory=dict)
    # request id -> (neighbor, amount); one in-flight push per directed edge
    pending: dict[int, tuple[NodeId, Funds]] = field(default_factory=dict)
    busy: set[NodeId] = field(default_factory=set)
    # sorted real channel neighbors; virtual peer excluded from broadcasts
    channel_neighbors: list[NodeId] = field(default_factory=list)
    scan_order: list[NodeId] = field(default_factory=list)
    relabel_count: int = 0
    next_request: int = 0
    wake_scheduled: bool = False
    # role in (DUMMY_SOURCE, DUMMY_SINK); cached for the dispatch hot path
    passive: bool = False

    def residual(self, w: NodeId) -> Funds:
        return self.cap[w] - self.edge_flow[w]

    @property
    def active(self) -> bool:
        return self.excess > 0 and not self.passive


@dataclass(slots=True)
class RoutingOutcome:
    delivered: Funds
    returned: Funds
    flow: FlowAssignment
    messages_sent: int
    relabels: int
    simulated_time: int
    terminated: bool


def init_instance(g: ChannelGraph, s: NodeId, r: NodeId, val: Funds) -> dict[NodeId, NodeState]:
    """Build per-node states for routing val from s to r.

    Virtual endpoints take ids n and n+1; their edges exist only in the node
    states, never in the channel graph.  The virtual source starts at label
    n+2 with the full amount already pushed to s; everything else starts at
    label 0 with zero excess.
    """
    if s == r:
        raise SameSourceSink(f"source and sink must differ, got {s}")
    if val <= 0:
        raise ZeroValue(f"routed value must be > 0, got {val}")
    for v in (s, r):
        if not 0 <= v < g.n:
            raise ValueError(f"node {v} out of range 0..{g.n - 1}")
    sp, rp = g.n, g.n + 1
    caps: list[dict[NodeId, Funds]] = [{} for _ in range(g.n)]
    for ch in g.channels():
        caps[ch.u][ch.v] = ch.cap_forward
        caps[ch.v][ch.u] = ch.cap_backward
    states: dict[NodeId, NodeState] = {}
    for v in range(g.n):
        role = Role.SOURCE if v == s else Role.SINK if v == r else Role.NORMAL
        cap = caps[v]
        nbrs = sorted(cap)
        st = NodeState(
            id=v,
            role=role,
            edge_flow=dict.fromkeys(nbrs, 0),
            cap=cap,
            neighbor_labels=dict.fromkeys(nbrs, 0),
            channel_neighbors=nbrs,
            scan_order=nbrs,
        )
        states[v] = st

    src, snk = states[s], states[r]
    src.cap[sp] = 0
    src.edge_flow[sp] = -val
    src.neighbor_labels[sp] = g.n + 2
    src.scan_order = src.channel_neighbors + [sp]
    src.excess = val
    snk.cap[rp] = val
    snk.edge_flow[rp] = 0
    snk.neighbor_labels[rp] = 0
    snk.scan_order = snk.channel_neighbors + [rp]

    states[sp] = NodeState(
        id=sp,
        role=Role.DUMMY_SOURCE,
        label=g.n + 2,
        edge_flow={s: val},
        cap={s: val},
        neighbor_labels={s: 0},
        passive=True,
    )
    states[rp] = NodeState(
        id=rp,
        role=Role.DUMMY_SINK,
        label=0,
        edge_flow={r: 0},
        cap={r: 0},
        neighbor_labels={r: 0},
        passive=True,
    )
    return states


def relabel(v: NodeState) -> LabelUpdate:
    """Raise v's label to one above its lowest residual neighbor.

    Precondition (caller-checked): v has excess and every residual neighbor's
    cached label is >= d(v).  Broadcast the new label to all neighbors.
    """
    lowest = None
    cap = v.cap
    flow = v.edge_flow
    for w, lbl in v.neighbor_labels.items():
        if cap[w] - flow[w] > 0 and (lowest is None or lbl < lowest):
            lowest = lbl
    if lowest is None:
        raise ProtocolError(f"node {v.id} has excess but no residual neighbor")
    v.label = lowest + 1
    v.relabel_count += 1
    return LabelUpdate(v.id, v.label)


def on_activate(v: NodeState) -> Sequence[Outbound]:
    """Push excess to eligible neighbors; relabel when none remain.

    Eligible: positive residual, cached label below ours, no push already in
    flight on that edge.  With pushes in flight we neither relabel nor touch
    busy edges; the replies re-activate us.
    """
    excess = v.excess
    if excess <= 0 or v.passive:
        return ()
    out: list[Outbound] = []
    label = v.label
    cache = v.neighbor_labels
    flow = v.edge_flow
    cap = v.cap
    busy = v.busy
    vid = v.id
    for w in v.scan_order:
        if cache[w] >= label or w in busy:
            continue
        res = cap[w] - flow[w]
        if res <= 0:
            continue
        delta = excess if excess < res else res
        flow[w] += delta
        excess -= delta
        rid = (vid << 32) | v.next_request
        v.next_request += 1
        v.pending[rid] = (w, delta)
        busy.add(w)
        out.append((w, PushRequest(vid, rid, delta, label)))
        if excess == 0:
            break
    v.excess = excess
    if excess > 0 and not v.pending:
        update = relabel(v)
        for w in v.channel_neighbors:
            out.append((w, update))
    return out


def on_push_request(v: NodeState, m: PushRequest) -> Sequence[Outbound]:
    """Accept the push iff our label is below the sender's; otherwise Nak.

    Acceptance applies the inflow to the local ledger.  Either reply carries
    our current label so the sender can repair its cache.
    """
    sender = m.sender
    flow = v.edge_flow
    current = flow.get(sender)
    if current is None:
        raise UnknownNeighbor(f"node {v.id} got a push from non-neighbor {sender}")
    amount = m.amount
    if amount <= 0:
        raise ProtocolError(f"push of non-positive amount {amount}")
    if v.label < m.sender_label:
        flow[sender] = current - amount
        v.excess += amount
        return ((sender, Accept(m.request_id, amount, v.label)),)
    return ((sender, Nak(m.request_id, amount, v.label)),)


def on_reply(v: NodeState, m: Accept | Nak) -> Sequence[Outbound]:
    """Settle an in-flight push: commit on Accept, roll back exactly on Nak."""
    try:
        w, delta = v.pending.pop(m.request_id)
    except KeyError:
        raise UnknownRequestId(f"node {v.id} got a reply for unknown request {m.request_id}") from None
    v.busy.discard(w)
    if type(m) is Nak:
        v.edge_flow[w] -= delta
        v.excess += delta
    cache = v.neighbor_labels
    if m.responder_label > cache[w]:
        cache[w] = m.responder_label
    return ()


def on_label_update(v: NodeState, m: LabelUpdate) -> None:
    """Monotone cache update; stale (lower) values are discarded."""
    cache = v.neighbor_labels
    current = cache.get(m.sender)
    if current is None:
        raise UnknownNeighbor(f"node {v.id} got a label update from non-neighbor {m.sender}")
    if m.new_label > current:
        cache[m.sender] = m.new_label


def check_node_invariants(v: NodeState, n: int) -> None:
    """Per-node safety checks: non-negative excess, capacity bound, label bound."""
    if v.excess < 0:
        raise ProtocolError(f"node {v.id} has negative excess {v.excess}")
    if v.label > 2 * (n + 2):
        raise ProtocolError(f"node {v.id} label {v.label} exceeds bound {2 * (n + 2)}")
    for w, f in v.edge_flow.items():
        if f > v.cap[w]:
            raise ProtocolError(f"flow f({v.id},{w})={f} exceeds capacity {v.cap[w]}")


def extract_outcome(
    states: dict[NodeId, NodeState],
    g: ChannelGraph,
    s: NodeId,
    r: NodeId,
    val: Funds,
    *,
    messages_sent: int,
    simulated_time: int,
    terminated: bool = True,
) -> RoutingOutcome:
    """Assemble the routing outcome from quiescent node states.

    Asserts the termination contract: zero excess everywhere except the
    virtual endpoints, and mirrored per-edge ledgers.  The reported flow is
    the netted ledger with circulation removed: excess bouncing between
    nodes can leave zero-payment cycles in the raw ledgers, and the
    canonical routing result is the acyclic flow those ledgers imply.
    """
    if not terminated:
        raise NotTerminated("instance has not reached quiescence")
    sp, rp = g.n, g.n + 1
    for v, st in states.items():
        if st.pending:
            raise NotTerminated(f"node {v} still has in-flight pushes")
        if v not in (sp, rp) and st.excess != 0:
            raise ProtocolError(f"terminal excess {st.excess} at node {v}")
    delivered = states[rp].excess
    returned = states[sp].excess
    if delivered + returned != val:
        raise ProtocolError(
            f"delivered {delivered} + returned {returned} != routed value {val}"
        )
    flow = FlowAssignment(s, r)
    for ch in g.channels():
        f_uv = states[ch.u].edge_flow[ch.v]
        mirrored = states[ch.v].edge_flow[ch.u]
        if f_uv != -mirrored:
            raise ProtocolError(
                f"ledger mismatch on channel {ch.id}: {f_uv} vs {-mirrored}"
            )
        if f_uv != 0:
            flow.add(ch.u, ch.v, f_uv)
    flow = cancel_cycles(flow)
    relabels = sum(st.relabel_count for st in states.values())
    return RoutingOutcome(
        delivered=delivered,
        returned=returned,
        flow=flow,
        messages_sent=messages_sent,
        relabels=relabels,
        simulated_time=simulated_time,
        terminated=terminated,
    )
