"""Workload benchmarking: oracle feasibility vs routed outcome per transaction.

Every transaction runs against the pristine graph (routing never commits
channel balances).  A transaction succeeds iff it delivers its full value.
Per-transaction latency seeds derive from the master seed and the
transaction id, so results are independent of execution order.

Wall-clock columns are hardware-bound and empty unless explicitly enabled:
with them off, repeated runs of the same command are byte-identical.
"""

from __future__ import annotations

import csv
import json
import statistics
import time
from dataclasses import dataclass, field
from typing import IO

from .graph import ChannelGraph
from .oracle import is_feasible
from .sim import EventBudgetExhausted, LatencyModel, SimConfig, Simulator
from .topology import Transaction

CSV_COLUMNS = [
    "txn",
    "source",
    "sink",
    "value",
    "feasible",
    "delivered",
    "success",
    "simulated_ttr",
    "wallclock_ttr_hw",
    "messages",
    "relabels",
    "error",
]

_SEED_MIX = 0x9E3779B97F4A7C15


def txn_seed(master_seed: int, txn_id: int) -> int:
    """Stable per-transaction latency seed; independent of worker scheduling."""
    x = (master_seed ^ ((txn_id + 1) * _SEED_MIX)) & 0xFFFFFFFFFFFFFFFF
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9 & 0xFFFFFFFFFFFFFFFF
    x = (x ^ (x >> 27)) * 0x94D049BB133111EB & 0xFFFFFFFFFFFFFFFF
    return (x ^ (x >> 31)) & 0x7FFFFFFFFFFFFFFF


@dataclass
class TxnResult:
    txn: int
    source: int
    sink: int
    value: int
    feasible: bool
    delivered: int
    success: bool
    simulated_ttr: int
    wallclock_ttr: float
    messages: int
    relabels: int
    error: str = ""

    def row(self, with_wallclock: bool) -> list[str]:
        return [
            str(self.txn),
            str(self.source),
            str(self.sink),
            str(self.value),
            str(int(self.feasible)),
            str(self.delivered),
            str(int(self.success)),
            str(self.simulated_ttr),
            f"{self.wallclock_ttr:.6f}" if with_wallclock else "",
            str(self.messages),
            str(self.relabels),
            self.error,
        ]


@dataclass
class ExperimentReport:
    rows: list[TxnResult]
    with_wallclock: bool = False
    aggregate: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.aggregate:
            self.aggregate = self._aggregate()

    def _aggregate(self) -> dict:
        done = [r for r in self.rows if not r.error]
        count = len(self.rows)
        successes = sum(r.success for r in self.rows)
        agg = {
            "txn_count": count,
            "errors": count - len(done),
            "successes": successes,
            "success_ratio": successes / count if count else 0.0,
            "feasible_ratio": sum(r.feasible for r in self.rows) / count if count else 0.0,
        }
        if done:
            ttrs = [r.simulated_ttr for r in done]
            agg["mean_simulated_ttr"] = statistics.fmean(ttrs)
            agg["p50_simulated_ttr"] = statistics.median(ttrs)
            agg["p95_simulated_ttr"] = sorted(ttrs)[max(0, int(0.95 * len(ttrs)) - 1)]
            agg["mean_messages"] = statistics.fmean(r.messages for r in done)
            agg["mean_relabels"] = statistics.fmean(r.relabels for r in done)
            if self.with_wallclock:
                agg["mean_wallclock_ttr_hw"] = statistics.fmean(
                    r.wallclock_ttr for r in done
                )
        return agg

    def write_csv(self, fh: IO[str]) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in self.rows:
            writer.writerow(r.row(self.with_wallclock))

    def to_json(self) -> str:
        return json.dumps(
            {
                "columns": CSV_COLUMNS,
                "rows": [r.row(self.with_wallclock) for r in self.rows],
                "aggregate": self.aggregate,
            },
            indent=2,
            sort_keys=True,
        )

    def summary_lines(self) -> list[str]:
        agg = self.aggregate
        lines = [
            f"transactions      {agg['txn_count']} ({agg['errors']} errors)",
            f"success_ratio     {agg['success_ratio']:.4f}",
            f"feasible_ratio    {agg['feasible_ratio']:.4f}",
        ]
        if "mean_simulated_ttr" in agg:
            lines.append(
                "simulated_ttr     "
                f"mean {agg['mean_simulated_ttr']:.1f}  p50 {agg['p50_simulated_ttr']:.0f}  "
                f"p95 {agg['p95_simulated_ttr']:.0f}"
            )
            lines.append(f"mean_messages     {agg['mean_messages']:.1f}")
            lines.append(f"mean_relabels     {agg['mean_relabels']:.1f}")
        if "mean_wallclock_ttr_hw" in agg:
            lines.append(
                f"wallclock_ttr     mean {agg['mean_wallclock_ttr_hw']:.4f}s (hardware-bound)"
            )
        return lines


def run_txn(
    g: ChannelGraph,
    txn_id: int,
    txn: Transaction,
    master_seed: int,
    latency: LatencyModel,
    check_invariants: bool = False,
) -> TxnResult:
    """Route one transaction on the pristine graph and score it."""
    feasible = is_feasible(g, txn.s, txn.r, txn.val)
    cfg = SimConfig(
        seed=txn_seed(master_seed, txn_id),
        latency=latency,
        check_invariants=check_invariants,
    )
    started = time.perf_counter()
    try:
        outcome = Simulator(g, txn.s, txn.r, txn.val, cfg).run()
    except EventBudgetExhausted:
        return TxnResult(
            txn_id, txn.s, txn.r, txn.val, feasible,
            0, False, 0, time.perf_counter() - started, 0, 0,
            error="event_budget_exhausted",
        )
    elapsed = time.perf_counter() - started
    return TxnResult(
        txn_id,
        txn.s,
        txn.r,
        txn.val,
        feasible,
        outcome.delivered,
        outcome.delivered == txn.val,
        outcome.simulated_time,
        elapsed,
        outcome.messages_sent,
        outcome.relabels,
    )


def run_bench(
    g: ChannelGraph,
    txns: list[Transaction],
    master_seed: int = 0,
    latency: LatencyModel | None = None,
    with_wallclock: bool = False,
    check_invariants: bool = False,
) -> ExperimentReport:
    latency = latency or LatencyModel.constant(1)
    rows = [
        run_txn(g, i, t, master_seed, latency, check_invariants)
        for i, t in enumerate(txns)
    ]
    return ExperimentReport(rows, with_wallclock=with_wallclock)
