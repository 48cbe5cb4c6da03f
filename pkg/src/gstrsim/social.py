"""Social graph, connected-candidate discovery and trust weighting.

Trust evidence comes exclusively from the friendship graph plus a history of
relays that were accepted earlier in the same run.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import networkx as nx

from .errors import NoCandidateError, OrderingError, ParameterError, UnknownNodeError

NodeId = int


@dataclass(frozen=True)
class WattsStrogatz:
    k: int = 8
    p: float = 0.1


@dataclass(frozen=True)
class ErdosRenyi:
    p: float = 0.05


GraphModel = WattsStrogatz | ErdosRenyi


class SocialGraph:
    """Undirected friendship relation without self-loops."""

    def __init__(self, nodes: Iterable[NodeId], edges: Iterable[tuple[NodeId, NodeId]] = ()):
        self._adj: dict[NodeId, set[NodeId]] = {int(v): set() for v in nodes}
        for a, b in edges:
            self.add_edge(a, b)

    def add_edge(self, a: NodeId, b: NodeId) -> None:
        if a == b:
            raise ParameterError(f"self-loop on node {a}")
        self._check(a)
        self._check(b)
        self._adj[a].add(b)
        self._adj[b].add(a)

    def _check(self, v: NodeId) -> None:
        if v not in self._adj:
            raise UnknownNodeError(v)

    @property
    def nodes(self) -> frozenset[NodeId]:
        return frozenset(self._adj)

    @property
    def edges(self) -> set[tuple[NodeId, NodeId]]:
        return {(a, b) for a, nbrs in self._adj.items() for b in nbrs if a < b}

    def friends(self, v: NodeId) -> frozenset[NodeId]:
        self._check(v)
        return frozenset(self._adj[v])

    def degree(self, v: NodeId) -> int:
        self._check(v)
        return len(self._adj[v])

    def __len__(self) -> int:
        return len(self._adj)

    def __contains__(self, v) -> bool:
        return v in self._adj

    def __eq__(self, other) -> bool:
        if not isinstance(other, SocialGraph):
            return NotImplemented
        return self._adj == other._adj

    def __repr__(self) -> str:
        return f"SocialGraph(n={len(self)}, m={len(self.edges)})"


def generate_social_graph(n: int, model: GraphModel, seed: int) -> SocialGraph:
    """Build a synthetic friendship graph over nodes ``0..n-1``.

    The same ``(n, model, seed)`` always yields the same graph.
    """
    if n < 2:
        raise ParameterError(f"need at least 2 nodes, got {n}")
    if isinstance(model, WattsStrogatz):
        if not 0.0 <= model.p <= 1.0:
            raise ParameterError(f"rewire probability must be in [0, 1], got {model.p}")
        if not 0 < model.k < n:
            raise ParameterError(f"mean degree k must satisfy 0 < k < n, got k={model.k}, n={n}")
        g = nx.watts_strogatz_graph(n, model.k, model.p, seed=seed)
    elif isinstance(model, ErdosRenyi):
        if not 0.0 <= model.p <= 1.0:
            raise ParameterError(f"edge probability must be in [0, 1], got {model.p}")
        g = nx.gnp_random_graph(n, model.p, seed=seed)
    else:
        raise ParameterError(f"unknown graph model {model!r}")
    return SocialGraph(range(n), g.edges())


def are_friends(g: SocialGraph, a: NodeId, b: NodeId) -> bool:
    g._check(a)
    g._check(b)
    return b in g._adj[a]


def connected_candidates(
    g: SocialGraph, sender: NodeId, receiver: NodeId, neighbors: Iterable[NodeId]
) -> set[NodeId]:
    """Neighbors that are friends of both endpoints; the receiver always qualifies."""
    fs, fr = g._adj[sender], g._adj[receiver]
    out = set()
    for c in neighbors:
        if c == receiver or (c in fs and c in fr):
            out.add(c)
    return out


def connection_score(g: SocialGraph, sender: NodeId, receiver: NodeId, c: NodeId) -> int:
    """Shared social context of ``c`` with the two endpoints.

    Counts common friends of ``c`` and the sender plus common friends of ``c``
    and the receiver, never counting the three parties themselves.
    """
    for v in (sender, receiver, c):
        g._check(v)
    skip = {sender, receiver, c}
    nc = g._adj[c] - skip
    return len(nc & (g._adj[sender] - skip)) + len(nc & (g._adj[receiver] - skip))


def best_candidate(
    g: SocialGraph, sender: NodeId, receiver: NodeId, candidates: Iterable[NodeId]
) -> NodeId:
    cands = sorted(candidates)
    if not cands:
        raise NoCandidateError("no connected candidate to choose from")
    # sorted ascending + strict comparison keeps the smallest id on ties
    best, best_score = cands[0], connection_score(g, sender, receiver, cands[0])
    for c in cands[1:]:
        s = connection_score(g, sender, receiver, c)
        if s > best_score:
            best, best_score = c, s
    return best


class TrustLevel(enum.Enum):
    HIGH = 1.0
    MEDIUM = 0.5
    LOW = 0.0

    @property
    def weight(self) -> float:
        return self.value

    @classmethod
    def from_weight(cls, w: float) -> "TrustLevel":
        return cls(w)


@dataclass
class TrustHistory:
    """Accepted relays keyed by ``(carrier, relay)`` with the last-used time."""

    interactions: dict[tuple[NodeId, NodeId], float] = field(default_factory=dict)

    def __contains__(self, pair) -> bool:
        return pair in self.interactions

    def __len__(self) -> int:
        return len(self.interactions)

    def last_used(self, carrier: NodeId, relay: NodeId) -> float | None:
        return self.interactions.get((carrier, relay))


def record_trusted_interaction(h: TrustHistory, carrier: NodeId, relay: NodeId, t: float) -> TrustHistory:
    prev = h.interactions.get((carrier, relay))
    if prev is not None and t < prev:
        raise OrderingError(f"interaction ({carrier}, {relay}) at t={t} precedes t={prev}")
    h.interactions[(carrier, relay)] = t
    return h


def trust_weight(
    h: TrustHistory,
    g: SocialGraph,
    sender: NodeId,
    receiver: NodeId,
    c: NodeId,
    c_in_range: bool,
    carrier: NodeId | None = None,
) -> TrustLevel:
    """Three-level trust of ``c`` for a message from ``sender`` to ``receiver``.

    Social connectivity is judged against the message endpoints; the prior
    interaction is looked up for ``carrier`` (defaults to the sender), since
    intermediate carriers build their own relay history.
    """
    if not connected_candidates(g, sender, receiver, (c,)):
        return TrustLevel.LOW
    key = (sender if carrier is None else carrier, c)
    if c_in_range and key in h:
        return TrustLevel.HIGH
    return TrustLevel.MEDIUM


def write_graph(g: SocialGraph, path: str | Path) -> None:
    lines = [f"nodes {len(g)}"]
    lines += [f"{a} {b}" for a, b in sorted(g.edges)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_graph(path: str | Path) -> SocialGraph:
    text = Path(path).read_text(encoding="utf-8").splitlines()
    if not text or not text[0].startswith("nodes "):
        raise ParameterError(f"{path}: first line must be 'nodes <n>'")
    n = int(text[0].split()[1])
    g = SocialGraph(range(n))
    for lineno, line in enumerate(text[1:], start=2):
        if not line.strip():
            continue
        try:
            a, b = (int(x) for x in line.split())
        except ValueError:
            raise ParameterError(f"{path}:{lineno}: expected 'a b', got {line!r}") from None
        g.add_edge(a, b)
    return g
