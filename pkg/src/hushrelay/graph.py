"""Payment channel network graph model and flow bookkeeping.

A channel is a bilateral escrow between two accounts, stored once with one
capacity per direction.  Capacities and flows are non-negative integers so
all flow identities are exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

Funds = int
NodeId = int
ChannelId = tuple[int, int]


class PcnError(Exception):
    """Base class for graph-level errors."""


class SelfLoop(PcnError):
    pass


class DuplicateChannel(PcnError):
    pass


class NegativeCapacity(PcnError):
    pass


class UnknownChannel(PcnError):
    pass


class CapacityViolation(PcnError):
    pass


@dataclass
class Channel:
    """One payment channel.  Endpoints are normalized so u < v.

    cap_forward funds the u->v direction, cap_backward the v->u direction.
    Their sum is the escrowed total and is conserved by any flow update.
    """

    u: NodeId
    v: NodeId
    cap_forward: Funds
    cap_backward: Funds

    @property
    def id(self) -> ChannelId:
        return (self.u, self.v)

    @property
    def total(self) -> Funds:
        return self.cap_forward + self.cap_backward

    def capacity(self, x: NodeId, y: NodeId) -> Funds:
        """Directed capacity x->y; 0 if (x, y) are not this channel's endpoints."""
        if (x, y) == (self.u, self.v):
            return self.cap_forward
        if (x, y) == (self.v, self.u):
            return self.cap_backward
        return 0


class ChannelGraph:
    """Bidirected capacitated graph of accounts and payment channels.

    At most one channel per unordered node pair; non-edges answer with
    capacity 0.  Mutation happens only through open/close/apply operations.
    """

    def __init__(self, n: int):
        if n < 0:
            raise ValueError("node count must be non-negative")
        self.n = n
        self._channels: dict[ChannelId, Channel] = {}
        self._adj: list[dict[NodeId, Channel]] = [dict() for _ in range(n)]

    # -- queries ---------------------------------------------------------

    @property
    def channel_count(self) -> int:
        return len(self._channels)

    def channels(self) -> Iterator[Channel]:
        return iter(self._channels.values())

    def channel(self, cid: ChannelId) -> Channel:
        try:
            return self._channels[cid]
        except KeyError:
            raise UnknownChannel(f"no channel {cid}") from None

    def has_channel(self, u: NodeId, v: NodeId) -> bool:
        return (min(u, v), max(u, v)) in self._channels

    def neighbors(self, v: NodeId) -> list[NodeId]:
        return sorted(self._adj[v])

    def incident(self, v: NodeId) -> dict[NodeId, Channel]:
        return self._adj[v]

    def capacity(self, v: NodeId, w: NodeId) -> Funds:
        """Directed capacity c(v, w); 0 for non-edges."""
        ch = self._adj[v].get(w) if 0 <= v < self.n else None
        return ch.capacity(v, w) if ch is not None else 0

    def total_escrow(self) -> Funds:
        return sum(ch.total for ch in self._channels.values())

    def copy(self) -> "ChannelGraph":
        g = ChannelGraph(self.n)
        for ch in self._channels.values():
            g.open_channel(ch.u, ch.v, ch.cap_forward, ch.cap_backward)
        return g

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ChannelGraph):
            return NotImplemented
        if self.n != other.n:
            return False
        return {c.id: (c.cap_forward, c.cap_backward) for c in self.channels()} == {
            c.id: (c.cap_forward, c.cap_backward) for c in other.channels()
        }

    def __repr__(self) -> str:
        return f"ChannelGraph(n={self.n}, channels={len(self._channels)})"

    # -- mutation --------------------------------------------------------

    def _check_node(self, v: NodeId) -> None:
        if not 0 <= v < self.n:
            raise PcnError(f"node {v} out of range 0..{self.n - 1}")

    def open_channel(self, u: NodeId, v: NodeId, cap_uv: Funds, cap_vu: Funds) -> ChannelId:
        """Insert a channel with capacity cap_uv for u->v and cap_vu for v->u."""
        self._check_node(u)
        self._check_node(v)
        if u == v:
            raise SelfLoop(f"channel endpoints must differ, got {u}")
        if cap_uv < 0 or cap_vu < 0:
            raise NegativeCapacity(f"capacities must be >= 0, got {cap_uv}, {cap_vu}")
        if u > v:
            u, v, cap_uv, cap_vu = v, u, cap_vu, cap_uv
        cid = (u, v)
        if cid in self._channels:
            raise DuplicateChannel(f"channel {cid} already open")
        ch = Channel(u, v, cap_uv, cap_vu)
        self._channels[cid] = ch
        self._adj[u][v] = ch
        self._adj[v][u] = ch
        return cid

    def close_channel(self, cid: ChannelId) -> tuple[Funds, Funds]:
        """Remove a channel and return its final balance split (u side, v side)."""
        ch = self.channel(cid)
        del self._channels[cid]
        del self._adj[ch.u][ch.v]
        del self._adj[ch.v][ch.u]
        return (ch.cap_forward, ch.cap_backward)


class FlowAssignment:
    """Integer edge flow f(v, w) with enforced antisymmetry.

    Stores both orientations of every touched pair; `value` is the net flow
    into the sink, computed from the stored entries.
    """

    def __init__(self, source: NodeId, sink: NodeId, flow: dict[tuple[NodeId, NodeId], Funds] | None = None):
        self.source = source
        self.sink = sink
        self._f: dict[tuple[NodeId, NodeId], Funds] = {}
        if flow:
            for (v, w), amount in flow.items():
                self.add(v, w, amount)

    def get(self, v: NodeId, w: NodeId) -> Funds:
        return self._f.get((v, w), 0)

    def add(self, v: NodeId, w: NodeId, amount: Funds) -> None:
        if v == w:
            raise ValueError("flow on a self-loop is meaningless")
        self._f[(v, w)] = self._f.get((v, w), 0) + amount
        self._f[(w, v)] = self._f.get((w, v), 0) - amount

    def pairs(self) -> Iterator[tuple[tuple[NodeId, NodeId], Funds]]:
        return iter(self._f.items())

    def positive_edges(self) -> dict[tuple[NodeId, NodeId], Funds]:
        return {(v, w): a for (v, w), a in self._f.items() if a > 0}

    def nodes(self) -> set[NodeId]:
        seen = {self.source, self.sink}
        for v, w in self._f:
            seen.add(v)
            seen.add(w)
        return seen

    @property
    def value(self) -> Funds:
        """Net flow into the sink."""
        return sum(a for (v, w), a in self._f.items() if w == self.sink)

    def negate(self) -> "FlowAssignment":
        out = FlowAssignment(self.source, self.sink)
        for (v, w), a in self._f.items():
            out._f[(v, w)] = -a
        return out

    def validate(self, g: ChannelGraph) -> None:
        """Check the three flow constraints against g; raise CapacityViolation otherwise."""
        for (v, w), a in self._f.items():
            if self._f.get((w, v), 0) != -a:
                raise CapacityViolation(f"antisymmetry broken on ({v},{w})")
            if a > g.capacity(v, w):
                raise CapacityViolation(f"f({v},{w})={a} exceeds c={g.capacity(v, w)}")
        for v in self.nodes():
            if v in (self.source, self.sink):
                continue
            net = sum(a for (x, y), a in self._f.items() if y == v)
            if net != 0:
                raise CapacityViolation(f"conservation broken at {v}: net {net}")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FlowAssignment):
            return NotImplemented
        mine = {k: v for k, v in self._f.items() if v != 0}
        theirs = {k: v for k, v in other._f.items() if v != 0}
        return (self.source, self.sink) == (other.source, other.sink) and mine == theirs

    def __repr__(self) -> str:
        pos = self.positive_edges()
        return f"FlowAssignment({self.source}->{self.sink}, value={self.value}, edges={pos})"


class ResidualView:
    """Read-only residual capacities r_f(v, w) = c(v, w) - f(v, w) over a graph and flow."""

    def __init__(self, g: ChannelGraph, f: FlowAssignment):
        self._g = g
        self._f = f

    def of(self, v: NodeId, w: NodeId) -> Funds:
        return self._g.capacity(v, w) - self._f.get(v, w)


def residual(g: ChannelGraph, f: FlowAssignment, v: NodeId, w: NodeId) -> Funds:
    """Residual capacity c(v, w) - f(v, w); non-edges have c = 0."""
    return g.capacity(v, w) - f.get(v, w)


def apply_flow(g: ChannelGraph, f: FlowAssignment) -> ChannelGraph:
    """Return a new graph with per-direction capacities shifted by f.

    The per-channel escrow total is unchanged.  Raises CapacityViolation if
    any f(v, w) exceeds c(v, w).
    """
    out = ChannelGraph(g.n)
    for ch in g.channels():
        shift = f.get(ch.u, ch.v)
        new_fwd = ch.cap_forward - shift
        new_bwd = ch.cap_backward + shift
        if new_fwd < 0 or new_bwd < 0:
            raise CapacityViolation(
                f"flow {shift} on channel {ch.id} violates capacity "
                f"({ch.cap_forward}, {ch.cap_backward})"
            )
        out.open_channel(ch.u, ch.v, new_fwd, new_bwd)
    return out
