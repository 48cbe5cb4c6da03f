import itertools

import pytest
from hypothesis import given, strategies as st

from gstrsim.errors import NoCandidateError, OrderingError, ParameterError, UnknownNodeError
from gstrsim.social import (
    ErdosRenyi,
    SocialGraph,
    TrustHistory,
    TrustLevel,
    WattsStrogatz,
    are_friends,
    best_candidate,
    connected_candidates,
    connection_score,
    generate_social_graph,
    read_graph,
    record_trusted_interaction,
    trust_weight,
    write_graph,
)


def test_er_complete_pair():
    g = generate_social_graph(2, ErdosRenyi(p=1.0), seed=7)
    assert g.edges == {(0, 1)}


def test_er_empty():
    g = generate_social_graph(5, ErdosRenyi(p=0.0), seed=7)
    assert len(g) == 5 and g.edges == set()


def test_ws_mean_degree():
    g = generate_social_graph(100, WattsStrogatz(k=8, p=0.1), seed=42)
    # oracle: enumerate adjacency directly
    degree_sum = sum(1 for a in g.nodes for b in g.nodes if a != b and are_friends(g, a, b))
    assert abs(degree_sum / 100 - 8) <= 0.5


def test_generation_is_deterministic():
    a = generate_social_graph(60, WattsStrogatz(6, 0.2), seed=3)
    b = generate_social_graph(60, WattsStrogatz(6, 0.2), seed=3)
    c = generate_social_graph(60, WattsStrogatz(6, 0.2), seed=4)
    assert a == b
    assert a != c


@pytest.mark.parametrize("n,model", [
    (1, ErdosRenyi(0.5)),
    (10, ErdosRenyi(1.5)),
    (10, WattsStrogatz(k=10, p=0.1)),
    (10, WattsStrogatz(k=4, p=-0.1)),
])
def test_generation_rejects_bad_parameters(n, model):
    with pytest.raises(ParameterError):
        generate_social_graph(n, model, seed=1)


def test_are_friends_basic():
    g = SocialGraph(range(4), [(1, 2)])
    assert are_friends(g, 1, 2) and are_friends(g, 2, 1)
    assert not are_friends(g, 1, 1)
    assert not are_friends(SocialGraph(range(3)), 0, 1)
    with pytest.raises(UnknownNodeError):
        are_friends(g, 1, 9)


def test_self_loop_rejected():
    with pytest.raises(ParameterError):
        SocialGraph(range(2), [(1, 1)])


def test_connected_candidates_examples():
    s, r = 0, 1
    g = SocialGraph(range(6), [(s, 3), (r, 3), (s, 5)])
    assert connected_candidates(g, s, r, {3, 4}) == {3}
    assert r in connected_candidates(g, s, r, {r, 4})
    assert connected_candidates(g, s, r, {4, 5}) == set()


def test_connection_score_examples():
    s, r, c, a, b = range(5)
    g = SocialGraph(range(5), [(s, a), (s, b), (r, a), (r, b), (c, a), (c, b), (c, s), (c, r)])
    assert connection_score(g, s, r, c) == 4
    lonely = SocialGraph(range(3), [(0, 2), (1, 2)])
    assert connection_score(lonely, 0, 1, 2) == 0
    one = SocialGraph(range(4), [(0, 2), (2, 3), (0, 3)])
    assert connection_score(one, 0, 1, 2) == 1


def _graph_with_scores(scores):
    """Graph where candidate c is a friend of both endpoints and scores exactly scores[c]."""
    s, r = 0, 1
    edges = []
    nodes = {s, r} | set(scores)
    fresh = max(scores) + 1
    for c, k in scores.items():
        edges += [(s, c), (r, c)]
        for f in range(fresh, fresh + k):
            edges += [(c, f), (s, f)]
            nodes.add(f)
        fresh += k
    return SocialGraph(sorted(nodes), edges)


@pytest.mark.parametrize("scores,expected", [
    ({3: 4, 5: 1}, 3),
    ({7: 0}, 7),
    ({2: 3, 9: 3}, 2),
])
def test_best_candidate_examples(scores, expected):
    g = _graph_with_scores(scores)
    for c, k in scores.items():
        assert connection_score(g, 0, 1, c) == k
    assert best_candidate(g, 0, 1, set(scores)) == expected


def test_best_candidate_empty():
    with pytest.raises(NoCandidateError):
        best_candidate(SocialGraph(range(2)), 0, 1, set())


def test_trust_weight_levels(line_graph):
    h = TrustHistory()
    assert trust_weight(h, line_graph, 0, 2, 1, True) is TrustLevel.MEDIUM
    record_trusted_interaction(h, 0, 1, 3.0)
    assert trust_weight(h, line_graph, 0, 2, 1, True) is TrustLevel.HIGH
    assert trust_weight(h, line_graph, 0, 2, 1, False) is TrustLevel.MEDIUM
    g = SocialGraph(range(4), [(0, 3)])
    assert trust_weight(h, g, 0, 2, 3, True) is TrustLevel.LOW
    assert [lvl.weight for lvl in TrustLevel] == [1.0, 0.5, 0.0]


def test_trust_history_per_carrier(line_graph):
    h = record_trusted_interaction(TrustHistory(), 7, 1, 1.0)
    assert trust_weight(h, line_graph, 0, 2, 1, True) is TrustLevel.MEDIUM
    assert trust_weight(h, line_graph, 0, 2, 1, True, carrier=7) is TrustLevel.HIGH


def test_record_interaction():
    h = record_trusted_interaction(TrustHistory(), 1, 3, 5.0)
    assert h.interactions == {(1, 3): 5.0}
    record_trusted_interaction(h, 1, 3, 9.0)
    assert h.interactions == {(1, 3): 9.0}
    record_trusted_interaction(h, 1, 3, 9.0)
    assert len(h) == 1
    with pytest.raises(OrderingError):
        record_trusted_interaction(h, 1, 3, 2.0)


def test_graph_file_roundtrip(tmp_path):
    g = generate_social_graph(30, WattsStrogatz(4, 0.3), seed=9)
    write_graph(g, tmp_path / "g.txt")
    assert read_graph(tmp_path / "g.txt") == g
    (tmp_path / "bad.txt").write_text("edges 3\n")
    with pytest.raises(ParameterError):
        read_graph(tmp_path / "bad.txt")


graphs = st.integers(3, 12).flatmap(
    lambda n: st.tuples(
        st.just(n),
        st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(lambda e: e[0] != e[1])),
    )
)


@given(graphs)
def test_friendship_symmetric(data):
    n, edges = data
    g = SocialGraph(range(n), edges)
    for a, b in itertools.product(range(n), repeat=2):
        assert are_friends(g, a, b) == are_friends(g, b, a)


@given(graphs, st.data())
def test_candidate_soundness(data, draw):
    n, edges = data
    g = SocialGraph(range(n), edges)
    s, r = draw.draw(st.sampled_from([(a, b) for a in range(n) for b in range(n) if a != b]))
    nb = draw.draw(st.sets(st.integers(0, n - 1)))
    for c in connected_candidates(g, s, r, nb):
        assert c == r or (are_friends(g, c, s) and are_friends(g, c, r))


@given(graphs, st.data())
def test_best_candidate_is_argmax(data, draw):
    n, edges = data
    g = SocialGraph(range(n), edges)
    s, r = draw.draw(st.sampled_from([(a, b) for a in range(n) for b in range(n) if a != b]))
    cands = draw.draw(st.sets(st.integers(0, n - 1), min_size=1))
    best = best_candidate(g, s, r, cands)
    assert best in cands
    top = max(connection_score(g, s, r, c) for c in cands)
    assert connection_score(g, s, r, best) == top
    assert best == min(c for c in cands if connection_score(g, s, r, c) == top)


@given(graphs, st.data())
def test_trust_is_monotone_in_history(data, draw):
    n, edges = data
    g = SocialGraph(range(n), edges)
    s, r, c = draw.draw(st.permutations(range(n)))[:3]
    h = TrustHistory()
    in_range = draw.draw(st.booleans())
    before = trust_weight(h, g, s, r, c, in_range)
    record_trusted_interaction(h, s, c, 1.0)
    after = trust_weight(h, g, s, r, c, in_range)
    assert after.weight >= before.weight
    if before is TrustLevel.LOW:
        assert after is TrustLevel.LOW
