import math

import pytest
from hypothesis import given, strategies as st

from gstrsim.baselines import (
    gabriel_neighbors,
    gpsr_next_hop,
    greedy_next_hop,
    gtlr_next_hop,
    tgpsr_next_hop,
)
from gstrsim.mobility import Neighbor, Position, distance
from gstrsim.social import SocialGraph

ORIGIN = Position(0.0, 0.0)


def nb(node, x, y, load=0):
    return Neighbor(node, Position(float(x), float(y)), (0.0, 0.0), load)


def test_gpsr_prefers_destination():
    snap = [nb(7, 100, 0), nb(9, 200, 0)]
    assert gpsr_next_hop(ORIGIN, (100.0, 0.0), snap) == 7


def test_gpsr_picks_closest_to_destination():
    # self 200 m from dst; neighbours 300 m and 150 m away from it
    dst = (200.0, 0.0)
    snap = [nb(1, -100, 0), nb(2, 50, 0)]
    assert distance(snap[0].pos, dst) == 300 and distance(snap[1].pos, dst) == 150
    assert gpsr_next_hop(ORIGIN, dst, snap) == 2


def test_gpsr_isolated_returns_none():
    assert gpsr_next_hop(ORIGIN, (500.0, 0.0), []) is None


def test_gpsr_void_without_planar_progress():
    # the only neighbour sits behind us and is where the message came from
    snap = [nb(3, -100, 0)]
    assert gpsr_next_hop(ORIGIN, (500.0, 0.0), snap, prev_node=3) is None


def test_gpsr_perimeter_walks_around_void():
    snap = [nb(4, -50, 100), nb(5, -50, -120)]
    assert gpsr_next_hop(ORIGIN, (500.0, 0.0), snap) in (4, 5)


def test_gabriel_drops_edge_with_witness():
    snap = [nb(1, 200, 0), nb(2, 100, 10)]
    kept = {n.node for n in gabriel_neighbors(ORIGIN, snap)}
    assert kept == {2}


@pytest.fixture
def friends():
    # 1 is a friend of both endpoints, 2 of only one, 3 of nobody
    return SocialGraph(range(6), [(0, 1), (1, 5), (0, 2)])


def test_tgpsr_all_low_is_none(friends):
    snap = [nb(2, 100, 0), nb(3, 150, 0)]
    assert tgpsr_next_hop(ORIGIN, (500.0, 0.0), snap, friends, 0, 5) is None


def test_tgpsr_medium_candidate(friends):
    snap = [nb(1, 100, 0), nb(3, 200, 0)]
    assert tgpsr_next_hop(ORIGIN, (500.0, 0.0), snap, friends, 0, 5, threshold=0.5) == 1


def test_tgpsr_high_threshold_rejects_medium(friends):
    snap = [nb(1, 100, 0)]
    assert tgpsr_next_hop(ORIGIN, (500.0, 0.0), snap, friends, 0, 5, threshold=1.0) is None


def test_tgpsr_bad_threshold(friends):
    with pytest.raises(ValueError):
        tgpsr_next_hop(ORIGIN, (500.0, 0.0), [], friends, 0, 5, threshold=0.7)


def test_gtlr_load_breaks_distance_tie():
    snap = [nb(1, 100, 50, load=5), nb(2, 100, -50, load=0)]
    assert gtlr_next_hop(ORIGIN, (500.0, 0.0), snap) == 2


def test_gtlr_no_closer_neighbor():
    assert gtlr_next_hop(ORIGIN, (500.0, 0.0), [nb(1, -10, 0)]) is None


def test_gtlr_rejects_negative_weight():
    with pytest.raises(ValueError):
        gtlr_next_hop(ORIGIN, (1.0, 0.0), [], load_weight=-1)


coord = st.floats(-250, 250, allow_nan=False).map(lambda v: round(v, 1))
snapshots = st.lists(st.tuples(coord, coord, st.integers(0, 9)), max_size=10).map(
    lambda pts: [nb(i + 1, x, y, load) for i, (x, y, load) in enumerate(pts)
                 if 0 < math.hypot(x, y) <= 250]
)
dsts = st.tuples(st.floats(-900, 900), st.floats(-900, 900))


@given(snapshots, dsts)
def test_gtlr_zero_load_equals_greedy(snap, dst):
    assert gtlr_next_hop(ORIGIN, dst, snap, load_weight=0) == greedy_next_hop(ORIGIN, dst, snap)


@given(snapshots, dsts)
def test_greedy_strictly_progresses(snap, dst):
    hop = greedy_next_hop(ORIGIN, dst, snap)
    if hop is not None:
        pos = next(n.pos for n in snap if n.node == hop)
        assert distance(pos, dst) < distance(ORIGIN, dst)


@given(snapshots, dsts, st.integers(0, 2**32 - 1))
def test_tgpsr_choice_within_gpsr_choices(snap, dst, seed):
    import random

    r = random.Random(seed)
    n = 12
    edges = [(a, b) for a in range(n) for b in range(a + 1, n) if r.random() < 0.4]
    g = SocialGraph(range(n), edges)
    hop = tgpsr_next_hop(ORIGIN, dst, snap, g, 0, 11)
    if hop is not None:
        assert hop in {n.node for n in snap}
        assert hop in g.friends(0) and hop in g.friends(11)
