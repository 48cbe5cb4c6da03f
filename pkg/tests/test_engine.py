import numpy as np
import pytest

from gstrsim import ScenarioConfig, run_scenario
from gstrsim.config import SocialConfig
from gstrsim.engine import Simulation, record_from_log, rng_streams, to_us, write_event_log
from gstrsim.social import SocialGraph

S, C, R = 0, 1, 2


def static_cfg(**kw):
    # the graph is supplied explicitly; k only has to be valid for tiny n
    base = dict(num_nodes=3, sim_duration=30.0, ttl=10.0, seed=3, social=SocialConfig(k=2))
    base.update(kw)
    return ScenarioConfig(**base)


def run_static(positions, edges, traffic=((1.0, S, R),), **kw):
    cfg = static_cfg(num_nodes=len(positions), **kw)
    g = SocialGraph(range(len(positions)), edges)
    return run_scenario(cfg, social=g, positions=np.array(positions, dtype=float), traffic=list(traffic))


def only(result):
    assert len(result.messages) == 1
    return result.messages[0]


def test_one_hop_through_connected_node():
    # spacing equals the radio range
    res = run_static([(100, 100), (350, 100), (600, 100)], [(S, C), (C, R)])
    m = only(res)
    assert m.outcome == "delivered" and m.relays == 1 and not m.via_cloud
    assert m.delivered_at - m.injected_at == pytest.approx(0.02)
    assert res.record.avg_hops == 1.0


def test_direct_delivery_has_no_relays():
    res = run_static([(100, 100), (900, 900), (300, 100)], [(S, R)])
    m = only(res)
    assert m.outcome == "delivered" and m.relays == 0
    assert m.delivered_at - m.injected_at == pytest.approx(0.01)


def test_cloud_delivery_inside_cell():
    # sender and receiver share a cell but are out of range and have no common friend
    res = run_static([(100, 100), (1500, 1500), (500, 100)], [])
    m = only(res)
    assert m.outcome == "delivered" and m.via_cloud and m.relays == 0
    # uplink, then the next poll plus lookup and downlink
    assert m.delivered_at == pytest.approx(2.0 + 0.05 + 0.1)
    assert res.record.avg_hops == 0.0


def test_receiver_outside_home_cell_expires():
    res = run_static([(100, 100), (1000, 1000), (1900, 1900)], [])
    m = only(res)
    assert m.outcome == "expired" and m.expired_at == pytest.approx(1.0 + 10.0 + 1e-6)
    assert res.record.delivery_ratio == 0.0
    assert not res.audit_violations


def test_stranger_relay_is_discarded_by_baseline_receiver():
    res = run_static([(100, 100), (300, 100), (500, 100)], [], protocol="gpsr")
    m = only(res)
    assert m.outcome == "discarded"
    assert any(" discard " in line for line in res.event_log)


def test_baseline_holds_without_cloud():
    res = run_static([(100, 100), (1500, 1500), (500, 100)], [], protocol="gpsr")
    assert only(res).outcome == "expired"
    assert res.cloud_stores == 0


def test_transmission_aborts_when_target_leaves(tmp_path):
    trace = tmp_path / "trace.txt"
    trace.write_text(
        "0 0 100 100\n0 1 300 100\n1.0 1 300 100\n1.1 1 300 1500\n0 2 500 100\n"
    )
    cfg = static_cfg(trace=str(trace))
    g = SocialGraph(range(3), [(S, C), (C, R)])
    res = run_scenario(cfg, social=g, traffic=[(1.099, S, R)])
    assert res.aborted_transmissions == 1
    assert not res.audit_violations
    assert any(" abort " in line for line in res.event_log)


def test_event_priority_at_equal_time():
    sim = Simulation(static_cfg(), social=SocialGraph(range(3), []),
                     positions=np.zeros((3, 2)), traffic=[])
    order = []
    for kind in (5, 3, 0, 4, 1, 2):
        sim.schedule(to_us(1.0), kind, payload=kind)
    import heapq
    while sim._queue:
        order.append(heapq.heappop(sim._queue)[1])
    assert order == [0, 1, 2, 3, 4, 5]


def test_rng_streams_are_independent_and_seeded():
    a, b = rng_streams(5), rng_streams(5)
    assert a["traffic"].random() == b["traffic"].random()
    assert rng_streams(5)["mobility"].random() != rng_streams(5)["traffic"].random()


SMALL = ScenarioConfig(num_nodes=40, sim_duration=120.0, ttl=60.0, seed=11)


@pytest.mark.parametrize("protocol", ["gstr", "gpsr", "tgpsr", "gtlr"])
def test_run_is_deterministic(protocol):
    cfg = SMALL.replace(protocol=protocol)
    a, b = run_scenario(cfg), run_scenario(cfg)
    assert a.event_log == b.event_log
    assert a.record == b.record


@pytest.mark.parametrize("protocol", ["gstr", "gpsr"])
def test_custody_audit_and_conservation(protocol):
    res = run_scenario(SMALL.replace(protocol=protocol, num_nodes=80))
    assert res.audit_checks >= 120
    assert res.audit_violations == []
    counts = res.outcome_counts()
    assert sum(counts.values()) == res.record.messages_sent
    acc = res.accumulator
    assert acc.messages_delivered + acc.messages_expired <= acc.messages_sent
    assert len(acc.delays) == len(acc.relay_counts) == acc.messages_delivered


def test_metrics_rebuild_from_event_log(tmp_path):
    res = run_scenario(SMALL.replace(num_nodes=80))
    path = write_event_log(res, tmp_path / "events.log")
    lines = path.read_text().splitlines()
    assert record_from_log(lines, res.config) == res.record
    times = [float(line.split()[0]) for line in lines]
    assert times == sorted(times)


@pytest.mark.parametrize("case", ["single_connected", "multi_connected", "none_connected"])
def test_injected_pairs_satisfy_case(case):
    res = run_scenario(SMALL.replace(case=case, num_nodes=120), record_events=False)
    assert res.record.messages_sent > 0
    assert res.case_violations == 0


def test_social_graph_size_must_match():
    with pytest.raises(Exception, match="social graph"):
        Simulation(static_cfg(), social=SocialGraph(range(4), []), positions=np.zeros((3, 2)))


def test_delivered_cloud_messages_stay_in_home_cell():
    res = run_scenario(SMALL.replace(case="none_connected", num_nodes=120))
    delivered = [m for m in res.messages if m.outcome == "delivered"]
    assert delivered and all(m.via_cloud and m.relays == 0 for m in delivered)
