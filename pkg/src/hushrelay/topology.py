"""Scale-free network generation and transaction workloads.

Graphs grow by preferential attachment from a complete core of m_attach
nodes, so every graph is connected and the edge count is exactly
m(m-1)/2 + (n-m)*m for m = m_attach.  Each channel direction gets an
independent uniform capacity draw.  All generation is reproducible from the
seed alone.
"""

from __future__ import annotations

import os
import random
from dataclasses import dataclass

from .graph import ChannelGraph, Funds, NodeId
from .netfile import ParseError, _content_lines, _int_field

# re-exported here so workload and network I/O live beside generation
from .netfile import load_network, save_network, loads_network, dumps_network  # noqa: F401


class InvalidConfig(ValueError):
    pass


@dataclass(frozen=True)
class BAConfig:
    n: int
    m_attach: int = 2
    cap_range: tuple[Funds, Funds] = (20, 100)
    seed: int = 0

    def validate(self) -> None:
        if self.m_attach < 1:
            raise InvalidConfig(f"m_attach must be >= 1, got {self.m_attach}")
        if self.n < self.m_attach + 1:
            raise InvalidConfig(
                f"need n >= m_attach + 1, got n={self.n}, m_attach={self.m_attach}"
            )
        lo, hi = self.cap_range
        if not 0 <= lo <= hi:
            raise InvalidConfig(f"bad capacity range {self.cap_range}")


@dataclass(frozen=True)
class WorkloadConfig:
    txn_count: int = 2000
    val_range: tuple[Funds, Funds] = (10, 80)
    seed: int = 0

    def validate(self) -> None:
        if self.txn_count < 0:
            raise InvalidConfig(f"txn_count must be >= 0, got {self.txn_count}")
        lo, hi = self.val_range
        if not 0 <= lo <= hi:
            raise InvalidConfig(f"bad value range {self.val_range}")


@dataclass(frozen=True)
class Transaction:
    s: NodeId
    r: NodeId
    val: Funds


def generate_ba(cfg: BAConfig) -> ChannelGraph:
    """Preferential-attachment channel graph, deterministic per seed."""
    cfg.validate()
    rng = random.Random(cfg.seed)
    lo, hi = cfg.cap_range
    g = ChannelGraph(cfg.n)
    m = cfg.m_attach
    # one endpoint entry per edge end; sampling from it is degree-weighted
    repeated: list[int] = []
    # complete core
    for u in range(m):
        for v in range(u + 1, m):
            g.open_channel(u, v, rng.randint(lo, hi), rng.randint(lo, hi))
            repeated.append(u)
            repeated.append(v)
    for new in range(m, cfg.n):
        targets: set[int] = set()
        while len(targets) < m:
            if repeated:
                targets.add(rng.choice(repeated))
            else:
                targets.add(rng.randrange(new))
        for t in sorted(targets):
            g.open_channel(new, t, rng.randint(lo, hi), rng.randint(lo, hi))
        repeated.extend(targets)
        repeated.extend([new] * m)
    return g


def generate_workload(g: ChannelGraph, cfg: WorkloadConfig) -> list[Transaction]:
    """Uniform random (s, r, val) transactions, deterministic per seed."""
    cfg.validate()
    if g.n < 2:
        raise InvalidConfig("workload needs a graph with at least 2 nodes")
    rng = random.Random(cfg.seed)
    lo, hi = cfg.val_range
    txns = []
    for _ in range(cfg.txn_count):
        s = rng.randrange(g.n)
        r = rng.randrange(g.n - 1)
        if r >= s:
            r += 1
        txns.append(Transaction(s, r, rng.randint(lo, hi)))
    return txns


def loads_workload(text: str) -> list[Transaction]:
    txns: list[Transaction] = []
    for line_no, line in _content_lines(text):
        fields = line.split()
        if fields[0] != "txn" or len(fields) != 4:
            raise ParseError(line_no, f"expected 'txn <s> <r> <val>', got {line!r}")
        s = _int_field(line_no, fields[1], "node id")
        r = _int_field(line_no, fields[2], "node id")
        val = _int_field(line_no, fields[3], "value")
        if s == r:
            raise ParseError(line_no, f"source and sink must differ, got {s}")
        if val < 0:
            raise ParseError(line_no, f"value must be >= 0, got {val}")
        txns.append(Transaction(s, r, val))
    return txns


def dumps_workload(txns: list[Transaction]) -> str:
    return "".join(f"txn {t.s} {t.r} {t.val}\n" for t in txns)


def load_workload(path: str | os.PathLike) -> list[Transaction]:
    with open(path, "r", encoding="utf-8") as fh:
        return loads_workload(fh.read())


def save_workload(txns: list[Transaction], path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_workload(txns))
