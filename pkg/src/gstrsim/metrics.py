"""Delivery ratio, hop count and end-to-end delay, plus the CSV record format."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

CSV_HEADER = (
    "protocol,num_nodes,case,seed,delivery_ratio,avg_hops,avg_e2e_delay_s,"
    "messages_sent,messages_delivered,messages_expired"
)


@dataclass
class MetricsAccumulator:
    messages_sent: int = 0
    messages_delivered: int = 0
    messages_expired: int = 0
    relay_counts: list[int] = field(default_factory=list)
    delays: list[float] = field(default_factory=list)

    def sent(self) -> None:
        self.messages_sent += 1

    def delivered(self, relays: int, delay: float) -> None:
        self.messages_delivered += 1
        self.relay_counts.append(relays)
        self.delays.append(delay)

    def expired(self) -> None:
        self.messages_expired += 1


def delivery_ratio(acc: MetricsAccumulator) -> float:
    if acc.messages_sent == 0:
        return 0.0
    return acc.messages_delivered / acc.messages_sent


def avg_hops(acc: MetricsAccumulator) -> float:
    """Mean number of intermediate vehicle relays over delivered messages."""
    if not acc.relay_counts:
        return 0.0
    return sum(acc.relay_counts) / len(acc.relay_counts)


def avg_e2e_delay(acc: MetricsAccumulator) -> float:
    if not acc.delays:
        return 0.0
    return sum(acc.delays) / len(acc.delays)


@dataclass(frozen=True)
class RunRecord:
    protocol: str
    num_nodes: int
    case: str
    seed: int
    delivery_ratio: float
    avg_hops: float
    avg_e2e_delay: float
    messages_sent: int
    messages_delivered: int
    messages_expired: int

    @classmethod
    def from_accumulator(cls, acc: MetricsAccumulator, protocol: str, num_nodes: int,
                         case: str, seed: int) -> "RunRecord":
        return cls(protocol, num_nodes, case, seed, delivery_ratio(acc), avg_hops(acc),
                   avg_e2e_delay(acc), acc.messages_sent, acc.messages_delivered,
                   acc.messages_expired)

    @property
    def sort_key(self):
        return (self.protocol, self.case, self.num_nodes, self.seed)

    def csv_row(self) -> list[str]:
        return [
            self.protocol,
            str(self.num_nodes),
            self.case,
            str(self.seed),
            f"{self.delivery_ratio:.6f}",
            f"{self.avg_hops:.6f}",
            f"{self.avg_e2e_delay:.6f}",
            str(self.messages_sent),
            str(self.messages_delivered),
            str(self.messages_expired),
        ]


def write_records(records: list[RunRecord], path: str | Path) -> Path:
    """Write records sorted by (protocol, case, num_nodes, seed).

    Averages cover delivered messages only; a run without deliveries
    reports 0 for both averages.
    """
    if not records:
        raise ValueError("no records to write")
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(CSV_HEADER + "\n")
        w = csv.writer(fh, lineterminator="\n")
        for rec in sorted(records, key=lambda r: r.sort_key):
            w.writerow(rec.csv_row())
    return path


def read_records(path: str | Path) -> list[RunRecord]:
    with Path(path).open(encoding="utf-8", newline="") as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise ValueError(f"{path}: unexpected header {header!r}")
        out = []
        for row in csv.reader(fh):
            if not row:
                continue
            out.append(RunRecord(
                row[0], int(row[1]), row[2], int(row[3]), float(row[4]), float(row[5]),
                float(row[6]), int(row[7]), int(row[8]), int(row[9]),
            ))
    return out

