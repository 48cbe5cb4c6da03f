"""Social graphs and injection-pair rules for the three connectivity cases.

``single_connected``
    The graph has no 4-cycles, so any two nodes share at most one friend.
    A pair is eligible when the receiver is out of the sender's range and
    their unique common friend is in range of both, so it bridges the gap.
``multi_connected``
    Watts-Strogatz graph whose degree grows with the population. Eligible
    pairs have at least two common friends in the sender's range and the
    receiver out of range.
``none_connected``
    Sparse Watts-Strogatz graph. Eligible pairs share no friend at all and
    are out of each other's range, so only the cloud can bridge them.
"""

from __future__ import annotations

import numpy as np

from .config import ScenarioConfig
from .errors import ScenarioError
from .social import SocialGraph, WattsStrogatz, ErdosRenyi, generate_social_graph

SINGLE_TARGET_DEGREE = 6
MULTI_DEGREE_FRACTION = 0.15


def multi_degree(n: int) -> int:
    k = max(8, 2 * int(round(MULTI_DEGREE_FRACTION * n / 2)))
    return min(k, n - 1 - (n - 1) % 2)


def c4_free_graph(n: int, target_degree: float, rng: np.random.Generator) -> SocialGraph:
    """Random graph without 4-cycles: every pair has at most one common friend."""
    adj: list[set[int]] = [set() for _ in range(n)]
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    order = rng.permutation(len(pairs))
    want = int(round(target_degree * n / 2))
    edges = 0
    for idx in order:
        if edges >= want:
            break
        a, b = pairs[idx]
        na, nb = adj[a], adj[b]
        # a 4-cycle through the new edge a-b needs u ~ b, v ~ a and u ~ v
        if any((adj[u] & na) - {b, u} for u in nb if u != a):
            continue
        na.add(b)
        nb.add(a)
        edges += 1
    return SocialGraph(range(n), ((a, b) for a in range(n) for b in adj[a] if a < b))


def build_social_graph(cfg: ScenarioConfig, rng: np.random.Generator) -> SocialGraph:
    n = cfg.num_nodes
    if cfg.case == "single_connected" and n < 3:
        raise ScenarioError("single_connected needs at least 3 nodes")
    if cfg.case in ("multi_connected", "none_connected") and n < 4:
        raise ScenarioError(f"{cfg.case} needs at least 4 nodes")
    seed = int(rng.integers(0, 2**31 - 1))
    if cfg.case == "single_connected":
        return c4_free_graph(n, min(SINGLE_TARGET_DEGREE, n - 1), np.random.default_rng(seed))
    if cfg.case == "multi_connected":
        return generate_social_graph(n, WattsStrogatz(multi_degree(n), cfg.social.p), seed)
    if cfg.case == "none_connected":
        return generate_social_graph(n, WattsStrogatz(min(cfg.social.k, n - 1), cfg.social.p), seed)
    if cfg.social.model == "erdos_renyi":
        return generate_social_graph(n, ErdosRenyi(cfg.social.p), seed)
    return generate_social_graph(n, WattsStrogatz(cfg.social.k, cfg.social.p), seed)


def adjacency_matrix(g: SocialGraph) -> np.ndarray:
    n = len(g)
    a = np.zeros((n, n), dtype=np.int32)
    for u, v in g.edges:
        a[u, v] = a[v, u] = 1
    return a


def eligible_pairs(
    case: str,
    adj: np.ndarray,
    dist: np.ndarray,
    tx_range: float,
    max_pair_distance: float | None,
) -> list[tuple[int, int]]:
    """All (src, dst) pairs satisfying the case rule for the current geometry.

    ``dist`` is the full pairwise distance matrix.
    """
    n = adj.shape[0]
    in_range = (dist <= tx_range) & ~np.eye(n, dtype=bool)
    ok = ~in_range & ~np.eye(n, dtype=bool)
    if max_pair_distance is not None:
        ok &= dist <= max_pair_distance
    if case == "free":
        pass
    elif case == "none_connected":
        ok &= (adj @ adj) == 0
    else:
        near_friends = adj * in_range
        counts = near_friends @ adj
        if case == "multi_connected":
            ok &= counts >= 2
        elif case == "single_connected":
            # the unique common friend must also reach the receiver
            ok &= (counts == 1) & ((near_friends @ near_friends.T) == 1)
        else:
            raise ScenarioError(f"unknown case {case!r}")
    return [(int(s), int(d)) for s, d in zip(*np.nonzero(ok))]


def generate_case_scenario(case: str, num_nodes: int, seed: int,
                           **overrides) -> tuple[ScenarioConfig, SocialGraph]:
    """Config plus social graph for one of the connectivity cases.

    The graph is the one the engine will build for the same config, so the
    pair returned here can be inspected before running.
    """
    if case not in ("single_connected", "multi_connected", "none_connected"):
        raise ScenarioError(f"not a case scenario: {case!r}")
    cfg = ScenarioConfig(case=case, num_nodes=num_nodes, seed=seed, **overrides).validate()
    from .engine import rng_streams

    graph = build_social_graph(cfg, rng_streams(seed)["social"])
    return cfg, graph
