"""Privacy-preserving back-propagation of a computed flow to the source.

After routing terminates, flow facts travel from the sink back along the
flow edges.  Every flow-carrying edge holds a fresh 256-bit key known to its
two endpoints.  The sink seals each predecessor fact (predecessor id, edge
flow, edge key) under its own master key and pads the packet with random
filler; each relay prepends one more sealed fact — encrypted under the key
it shares with the node it received the packet from — and drops one filler
unit, so packet length never changes in transit.  Only the source, given the
sink's master key and the filler set out of band, can peel the layers: each
decrypted fact carries the key for the next one.

Wire layout per unit: [1-byte layer tag][16-byte nonce][256-byte ciphertext]
(ciphertext = 240-byte plaintext + 16-byte auth tag).  A packet is depth
units long, where depth is the longest flow path; equal-depth instances are
therefore byte-length-identical at every relay position.
"""

from __future__ import annotations

import hashlib
import secrets
import struct
from dataclasses import dataclass, field
from random import Random

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from .decompose import Path, cancel_cycles, decompose
from .graph import FlowAssignment, Funds, NodeId


class AuthFailure(Exception):
    """Ciphertext failed authentication."""


class InconsistentFlow(Exception):
    """Reported facts contradict flow conservation; some relay lied."""


KEY_LEN = 32
NONCE_LEN = 16
BLOCK_LEN = 256
TAG_LAYER = 0x01
UNIT_LEN = 1 + NONCE_LEN + BLOCK_LEN
_PLAINTEXT_LEN = BLOCK_LEN - 16
_FACT = struct.Struct(">QQ32s")


class AeadCipher:
    """AES-256-GCM; the default sealing scheme."""

    name = "aes256gcm"

    def encrypt(self, key: bytes, nonce: bytes, plaintext: bytes) -> bytes:
        return AESGCM(key).encrypt(nonce, plaintext, None)

    def decrypt(self, key: bytes, nonce: bytes, ciphertext: bytes) -> bytes:
        try:
            return AESGCM(key).decrypt(nonce, ciphertext, None)
        except InvalidTag as exc:
            raise AuthFailure("layer failed authentication") from exc


class NullCipher:
    """Transparent cipher for debugging: plaintext in the clear, keyed MAC."""

    name = "null"

    def _mac(self, key: bytes, nonce: bytes, plaintext: bytes) -> bytes:
        return hashlib.sha256(key + nonce + plaintext).digest()[:16]

    def encrypt(self, key: bytes, nonce: bytes, plaintext: bytes) -> bytes:
        return plaintext + self._mac(key, nonce, plaintext)

    def decrypt(self, key: bytes, nonce: bytes, ciphertext: bytes) -> bytes:
        plaintext, mac = ciphertext[:-16], ciphertext[-16:]
        if mac != self._mac(key, nonce, plaintext):
            raise AuthFailure("layer failed authentication")
        return plaintext


DEFAULT_CIPHER = AeadCipher()


def _rand_bytes(rng: Random | None, n: int) -> bytes:
    if rng is None:
        return secrets.token_bytes(n)
    return rng.randbytes(n)


def _encode_fact(pred: NodeId, amount: Funds, key: bytes) -> bytes:
    body = _FACT.pack(pred, amount, key)
    return body + b"\x00" * (_PLAINTEXT_LEN - len(body))


def _decode_fact(plaintext: bytes) -> tuple[NodeId, Funds, bytes]:
    pred, amount, key = _FACT.unpack_from(plaintext)
    return pred, amount, key


@dataclass(frozen=True)
class ReportPacket:
    data: bytes

    def __post_init__(self):
        if len(self.data) % UNIT_LEN != 0 or not self.data:
            raise ValueError(f"packet length {len(self.data)} is not a unit multiple")

    def units(self) -> list[bytes]:
        return [self.data[i : i + UNIT_LEN] for i in range(0, len(self.data), UNIT_LEN)]

    def __len__(self) -> int:
        return len(self.data)


def _seal_unit(cipher, key: bytes, fact: bytes, rng: Random | None) -> bytes:
    nonce = _rand_bytes(rng, NONCE_LEN)
    ct = cipher.encrypt(key, nonce, fact)
    assert len(ct) == BLOCK_LEN
    return bytes([TAG_LAYER]) + nonce + ct


def _filler_unit(rng: Random | None) -> bytes:
    return bytes([TAG_LAYER]) + _rand_bytes(rng, UNIT_LEN - 1)


def build_report(
    sink: NodeId,
    inbound: list[tuple[NodeId, Funds, bytes]],
    k_sink: bytes,
    depth: int,
    rng: Random | None = None,
    cipher=DEFAULT_CIPHER,
) -> tuple[dict[NodeId, ReportPacket], list[bytes]]:
    """Sink-side packets, one per flow-carrying predecessor edge.

    inbound lists (predecessor, edge flow, edge key) for every positive
    inbound edge.  Each packet is one sealed fact plus depth-1 filler units;
    the returned filler list is what the source must receive out of band.
    """
    packets: dict[NodeId, ReportPacket] = {}
    fillers: list[bytes] = []
    for pred, amount, edge_key in inbound:
        unit = _seal_unit(cipher, k_sink, _encode_fact(pred, amount, edge_key), rng)
        pad = [_filler_unit(rng) for _ in range(depth - 1)]
        fillers.extend(pad)
        packets[pred] = ReportPacket(unit + b"".join(pad))
    return packets, fillers


def relay_report(
    inbound_packet: ReportPacket,
    encrypt_key: bytes,
    facts: list[tuple[NodeId, Funds, bytes]],
    rng: Random | None = None,
    cipher=DEFAULT_CIPHER,
) -> dict[NodeId, ReportPacket]:
    """Relay-side packets: one per predecessor fact, wrapped over the inbound.

    encrypt_key is the edge key shared with the node the packet arrived
    from; prepending one unit and dropping one trailing filler keeps the
    length schedule fixed.
    """
    body = inbound_packet.data[: -UNIT_LEN]
    out: dict[NodeId, ReportPacket] = {}
    for pred, amount, edge_key in facts:
        unit = _seal_unit(cipher, encrypt_key, _encode_fact(pred, amount, edge_key), rng)
        out[pred] = ReportPacket(unit + body)
    return out


@dataclass
class ReconstructedFlow:
    flow: FlowAssignment
    paths: list[tuple[Path, Funds]]


@dataclass
class ReportRun:
    """A full sink-to-source propagation over a terminated routing's flow."""

    source_packets: list[ReportPacket]
    k_sink: bytes
    filler_set: list[bytes]
    depth: int
    edge_keys: dict[tuple[NodeId, NodeId], bytes]
    # (relay position from sink, packet length) per emitted packet
    position_lengths: list[tuple[int, int]] = field(default_factory=list)
    # what each relay saw arrive; kept for privacy analysis in tests
    relay_inbound: dict[NodeId, list[ReportPacket]] = field(default_factory=dict)


def run_report(
    flow: FlowAssignment,
    k_sink: bytes | None = None,
    rng: Random | None = None,
    cipher=DEFAULT_CIPHER,
) -> ReportRun:
    """Propagate a terminated routing's flow from sink back to source.

    Cycles are canceled first (they carry no payment and would loop the
    relay).  Fresh per-edge keys are drawn for every positive-flow edge.
    Every inbound packet at a relay is forwarded onward and every
    predecessor edge is reported at least once, so the source ends up with
    every flow fact; chains sharing a suffix produce duplicates that the
    source discards.
    """
    acyclic = cancel_cycles(flow)
    source, sink = flow.source, flow.sink
    if k_sink is None:
        k_sink = _rand_bytes(rng, KEY_LEN)
    pos = acyclic.positive_edges()
    edge_keys = {edge: _rand_bytes(rng, KEY_LEN) for edge in sorted(pos)}
    pos_in: dict[NodeId, list[tuple[NodeId, Funds]]] = {}
    pos_out: dict[NodeId, list[NodeId]] = {}
    for (u, v), a in sorted(pos.items()):
        pos_in.setdefault(v, []).append((u, a))
        pos_out.setdefault(u, []).append(v)
    if not pos:
        return ReportRun([], k_sink, [], 0, edge_keys)

    # process nodes sink-first in reverse topological order of the flow
    order: list[NodeId] = []
    unprocessed_out = {v: len(ws) for v, ws in pos_out.items()}
    ready = [sink]
    seen = {sink}
    while ready:
        ready.sort()
        v = ready.pop(0)
        order.append(v)
        for u, _ in pos_in.get(v, ()):
            unprocessed_out[u] -= 1
            if unprocessed_out[u] == 0 and u not in seen:
                seen.add(u)
                ready.append(u)

    # longest flow path in edges; fixes the uniform packet length schedule
    longest: dict[NodeId, int] = {}
    for v in order:
        longest[v] = 0 if v == sink else 1 + max(longest[w] for w in pos_out[v])
    depth = longest[source]
    run = ReportRun([], k_sink, [], depth, edge_keys)

    # inbox: packets en route to a node, tagged with the key of the edge
    # they traveled over and their hop position
    inbox: dict[NodeId, list[tuple[ReportPacket, bytes, int]]] = {v: [] for v in order}
    sink_facts = [(u, a, edge_keys[(u, sink)]) for u, a in pos_in[sink]]
    packets, fillers = build_report(sink, sink_facts, k_sink, depth, rng, cipher)
    run.filler_set.extend(fillers)
    for pred, pkt in packets.items():
        run.position_lengths.append((0, len(pkt)))
        inbox[pred].append((pkt, edge_keys[(pred, sink)], 1))

    for v in order:
        if v in (sink, source):
            continue
        items = inbox[v]
        run.relay_inbound[v] = [pkt for pkt, _, _ in items]
        facts = [(u, a, edge_keys[(u, v)]) for u, a in pos_in.get(v, ())]
        if not facts or not items:
            raise InconsistentFlow(f"relay {v} forwards flow it never received")
        # pair inbound packets with predecessors; extras on either side reuse
        # the last item on the other so nothing is dropped
        for i in range(max(len(items), len(facts))):
            pkt, key, position = items[min(i, len(items) - 1)]
            fact = facts[min(i, len(facts) - 1)]
            pred = fact[0]
            out = relay_report(pkt, key, [fact], rng, cipher)
            run.position_lengths.append((position, len(out[pred])))
            inbox[pred].append((out[pred], edge_keys[(pred, v)], position + 1))

    run.source_packets = [pkt for pkt, _, _ in inbox[source]]
    return run


def reconstruct(
    source: NodeId,
    sink: NodeId,
    packets: list[ReportPacket],
    k_sink: bytes,
    filler_set: list[bytes],
    cipher=DEFAULT_CIPHER,
) -> ReconstructedFlow:
    """Peel every packet layer by layer and rebuild the flow and its paths.

    Facts are deduplicated; an edge reported with two different values, or a
    fact set violating conservation, raises InconsistentFlow.  Decryption
    starts from the sink-sealed unit (the last non-filler unit) and walks
    left, each fact yielding the key for the next unit.
    """
    fillers = set(filler_set)
    facts: dict[tuple[NodeId, NodeId], Funds] = {}
    for pkt in packets:
        units = pkt.units()
        while units and units[-1] in fillers:
            units.pop()
        key = k_sink
        node = sink
        for unit in reversed(units):
            nonce = unit[1 : 1 + NONCE_LEN]
            plaintext = cipher.decrypt(key, nonce, unit[1 + NONCE_LEN :])
            pred, amount, next_key = _decode_fact(plaintext)
            edge = (pred, node)
            if amount <= 0:
                raise InconsistentFlow(f"non-positive flow {amount} reported on {edge}")
            if facts.get(edge, amount) != amount:
                raise InconsistentFlow(
                    f"edge {edge} reported twice with {facts[edge]} and {amount}"
                )
            facts[edge] = amount
            key = next_key
            node = pred

    flow = FlowAssignment(source, sink)
    for (u, v), a in facts.items():
        flow.add(u, v, a)
    flow = cancel_cycles(flow)
    for v in flow.nodes():
        if v in (source, sink):
            continue
        net = sum(a for (x, y), a in flow.pairs() if y == v)
        if net != 0:
            raise InconsistentFlow(f"conservation broken at node {v}: net {net}")
    paths = decompose(flow) if facts else []
    return ReconstructedFlow(flow, paths)
