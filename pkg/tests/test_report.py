from random import Random

import pytest

from hushrelay.graph import FlowAssignment
from hushrelay.report import (
    UNIT_LEN,
    AeadCipher,
    AuthFailure,
    InconsistentFlow,
    NullCipher,
    ReportPacket,
    build_report,
    reconstruct,
    relay_report,
    run_report,
)
from hushrelay.sim import SimConfig, run
from hushrelay.topology import BAConfig, WorkloadConfig, generate_ba, generate_workload

from .conftest import A, B, C, R, S


def worked_outcome(example_graph):
    return run(example_graph, S, R, 15, SimConfig(seed=7))


class TestBuildReport:
    def test_sink_emits_one_packet_per_predecessor(self, example_graph):
        out = worked_outcome(example_graph)
        rr = run_report(out.flow, rng=Random(1))
        # sink R has a single inbound edge C->R carrying 15
        packets, fillers = build_report(
            R, [(C, 15, rr.edge_keys[(C, R)])], rr.k_sink, depth=3, rng=Random(2)
        )
        assert set(packets) == {C}
        assert len(packets[C]) == 3 * UNIT_LEN
        assert len(fillers) == 2

    def test_zero_delivered_empty_report(self):
        f = FlowAssignment(0, 1)
        rr = run_report(f, rng=Random(1))
        assert rr.source_packets == []
        assert rr.depth == 0

    def test_wrong_key_fails_authentication(self, example_graph):
        out = worked_outcome(example_graph)
        rr = run_report(out.flow, rng=Random(1))
        with pytest.raises(AuthFailure):
            reconstruct(S, R, rr.source_packets, b"\x01" * 32, rr.filler_set)


class TestRelayReport:
    def test_relay_wraps_one_layer_per_predecessor(self, example_graph):
        out = worked_outcome(example_graph)
        rr = run_report(out.flow, rng=Random(3))
        packets, _ = build_report(
            R, [(C, 15, rr.edge_keys[(C, R)])], rr.k_sink, depth=3, rng=Random(4)
        )
        facts = [(A, 10, b"\x02" * 32), (B, 5, b"\x03" * 32)]
        relayed = relay_report(packets[C], rr.edge_keys[(C, R)], facts, rng=Random(5))
        assert set(relayed) == {A, B}
        # constant length: one unit added, one filler dropped
        assert all(len(p) == len(packets[C]) for p in relayed.values())

    def test_tampered_ciphertext_fails_at_source(self, example_graph):
        out = worked_outcome(example_graph)
        rr = run_report(out.flow, rng=Random(6))
        data = bytearray(rr.source_packets[0].data)
        data[UNIT_LEN // 2] ^= 0xFF
        broken = ReportPacket(bytes(data))
        packets = [broken] + rr.source_packets[1:]
        with pytest.raises(AuthFailure):
            reconstruct(S, R, packets, rr.k_sink, rr.filler_set)


class TestReconstruct:
    def test_worked_example_paths(self, example_graph):
        out = worked_outcome(example_graph)
        rr = run_report(out.flow, rng=Random(8))
        rec = reconstruct(S, R, rr.source_packets, rr.k_sink, rr.filler_set)
        assert rec.flow == out.flow
        assert rec.paths == [((S, A, C, R), 10), ((S, B, C, R), 5)]

    def test_single_channel_flow(self):
        from hushrelay.graph import ChannelGraph

        g = ChannelGraph(2)
        g.open_channel(0, 1, 9, 0)
        out = run(g, 0, 1, 4, SimConfig(seed=1))
        rr = run_report(out.flow, rng=Random(9))
        rec = reconstruct(0, 1, rr.source_packets, rr.k_sink, rr.filler_set)
        assert rec.paths == [((0, 1), 4)]

    def test_duplicate_packets_deduplicated(self, example_graph):
        out = worked_outcome(example_graph)
        rr = run_report(out.flow, rng=Random(10))
        doubled = rr.source_packets + rr.source_packets
        rec = reconstruct(S, R, doubled, rr.k_sink, rr.filler_set)
        assert rec.flow == out.flow

    def test_conflicting_fact_is_inconsistent(self, example_graph):
        out = worked_outcome(example_graph)
        rr = run_report(out.flow, rng=Random(11))
        # forge an extra single-layer chain claiming a different value on C->R
        forged, _ = build_report(
            R, [(C, 14, rr.edge_keys[(C, R)])], rr.k_sink, depth=1, rng=Random(12)
        )
        with pytest.raises(InconsistentFlow):
            reconstruct(S, R, rr.source_packets + [forged[C]], rr.k_sink, rr.filler_set)

    def test_null_cipher_round_trip(self, example_graph):
        out = worked_outcome(example_graph)
        cipher = NullCipher()
        rr = run_report(out.flow, rng=Random(13), cipher=cipher)
        rec = reconstruct(S, R, rr.source_packets, rr.k_sink, rr.filler_set, cipher=cipher)
        assert rec.flow == out.flow


class TestRoundTripCorpus:
    def test_reconstruction_matches_ledger_everywhere(self):
        checked = 0
        for seed in range(25):
            g = generate_ba(BAConfig(n=6 + seed, m_attach=2, seed=seed))
            for t in generate_workload(g, WorkloadConfig(txn_count=2, seed=seed)):
                out = run(g, t.s, t.r, t.val, SimConfig(seed=seed))
                if out.delivered == 0:
                    continue
                rr = run_report(out.flow, rng=Random(seed))
                rec = reconstruct(t.s, t.r, rr.source_packets, rr.k_sink, rr.filler_set)
                assert rec.flow == out.flow
                assert sum(v for _, v in rec.paths) == out.delivered
                checked += 1
        assert checked >= 30


class TestKeyFreshness:
    def test_edge_keys_differ_across_instances(self, example_graph):
        out = worked_outcome(example_graph)
        first = run_report(out.flow, rng=Random(20))
        second = run_report(out.flow, rng=Random(21))
        for edge in first.edge_keys:
            assert first.edge_keys[edge] != second.edge_keys[edge]
        assert first.k_sink != second.k_sink

    def test_keys_are_256_bit(self, example_graph):
        out = worked_outcome(example_graph)
        rr = run_report(out.flow, rng=Random(22))
        assert all(len(k) == 32 for k in rr.edge_keys.values())
        assert len(rr.k_sink) == 32


class TestLengthUniformity:
    def test_all_packets_same_length_within_instance(self, example_graph):
        out = worked_outcome(example_graph)
        rr = run_report(out.flow, rng=Random(14))
        lengths = {length for _, length in rr.position_lengths}
        assert lengths == {rr.depth * UNIT_LEN}

    def test_equal_depth_instances_equal_lengths(self):
        # same hop depth, very different values and identities
        f1 = FlowAssignment(0, 3)
        f1.add(0, 1, 70)
        f1.add(1, 3, 70)
        f2 = FlowAssignment(5, 9)
        f2.add(5, 8, 3)
        f2.add(8, 9, 3)
        r1 = run_report(f1, rng=Random(15))
        r2 = run_report(f2, rng=Random(16))
        assert r1.depth == r2.depth
        by_pos1 = {pos: length for pos, length in r1.position_lengths}
        by_pos2 = {pos: length for pos, length in r2.position_lengths}
        assert by_pos1 == by_pos2


class TestConfidentiality:
    def test_relays_cannot_peel_any_inbound_layer(self, example_graph):
        # a relay holds only the keys of its own incident edges; every unit
        # of every packet it receives must fail authentication under them
        out = worked_outcome(example_graph)
        rr = run_report(out.flow, rng=Random(17))
        cipher = AeadCipher()
        assert rr.relay_inbound  # the worked example has relays A, B, C
        attempts = 0
        for relay, packets in rr.relay_inbound.items():
            keys = [key for edge, key in rr.edge_keys.items() if relay in edge]
            assert keys
            for pkt in packets:
                for unit in pkt.units():
                    nonce, ct = unit[1:17], unit[17:]
                    for key in keys:
                        attempts += 1
                        with pytest.raises(AuthFailure):
                            cipher.decrypt(key, nonce, ct)
        assert attempts > 0
