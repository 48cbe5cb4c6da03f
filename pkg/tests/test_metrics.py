import pytest
from hypothesis import given, strategies as st

from gstrsim.metrics import (
    CSV_HEADER,
    MetricsAccumulator,
    RunRecord,
    avg_e2e_delay,
    avg_hops,
    delivery_ratio,
    read_records,
    write_records,
)


def acc_with(sent, deliveries=(), expired=0):
    acc = MetricsAccumulator()
    for _ in range(sent):
        acc.sent()
    for relays, delay in deliveries:
        acc.delivered(relays, delay)
    for _ in range(expired):
        acc.expired()
    return acc


def test_delivery_ratio_examples():
    assert delivery_ratio(acc_with(10, [(0, 0.1)] * 8)) == 0.8
    assert delivery_ratio(acc_with(0)) == 0
    assert delivery_ratio(acc_with(3, [(1, 0.1)] * 3)) == 1.0


def test_avg_hops_examples():
    assert avg_hops(acc_with(4, [(1, 0.02)] * 4)) == 1.0
    assert avg_hops(acc_with(4, [(0, 2.0)] * 4)) == 0.0
    assert avg_hops(acc_with(3, [(0, 1), (1, 1), (2, 1)])) == 1.0


def test_avg_delay_examples():
    assert avg_e2e_delay(acc_with(1, [(1, 0.020)])) == 0.020
    empty = acc_with(5, expired=5)
    assert avg_e2e_delay(empty) == 0 and empty.messages_delivered == 0
    assert avg_e2e_delay(acc_with(2, [(0, 0.01), (0, 0.03)])) == pytest.approx(0.02)


def rec(protocol="gstr", n=40, case="free", seed=1, ratio=0.5):
    return RunRecord(protocol, n, case, seed, ratio, 1.0, 0.25, 10, 5, 5)


def test_write_one_record(tmp_path):
    path = write_records([rec()], tmp_path / "out.csv")
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == CSV_HEADER
    assert lines[1] == "gstr,40,free,1,0.500000,1.000000,0.250000,10,5,5"


def test_write_sorts_rows(tmp_path):
    recs = [rec("gtlr"), rec("gpsr", n=80), rec("gpsr", n=40, seed=2), rec("gpsr", n=40, seed=1)]
    got = read_records(write_records(recs, tmp_path / "out.csv"))
    assert [(r.protocol, r.num_nodes, r.seed) for r in got] == [
        ("gpsr", 40, 1), ("gpsr", 40, 2), ("gpsr", 80, 1), ("gtlr", 40, 1)]


def test_fixed_six_decimals(tmp_path):
    a = write_records([rec(ratio=1 / 3)], tmp_path / "a.csv").read_bytes()
    b = write_records([rec(ratio=1 / 3)], tmp_path / "b.csv").read_bytes()
    assert a == b and b"0.333333," in a


def test_write_rejects_empty(tmp_path):
    with pytest.raises(ValueError):
        write_records([], tmp_path / "x.csv")


def test_read_rejects_bad_header(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("a,b\n")
    with pytest.raises(ValueError):
        read_records(p)


@given(st.integers(0, 50), st.lists(st.tuples(st.integers(0, 8), st.floats(0, 500)), max_size=50))
def test_accumulator_invariants(extra, deliveries):
    acc = acc_with(len(deliveries) + extra, deliveries, expired=extra)
    assert 0.0 <= delivery_ratio(acc) <= 1.0
    assert acc.messages_delivered + acc.messages_expired <= acc.messages_sent
    assert len(acc.relay_counts) == len(acc.delays) == acc.messages_delivered
    assert avg_hops(acc) >= 0
