"""Road grid, vehicle kinematics and the geometric quantities used for relay choice.

Vehicles live on a Manhattan grid: horizontal streets at ``y = j * spacing``
and vertical streets at ``x = i * spacing``. Kinematic state for a whole
fleet is kept in numpy arrays so a mobility tick is a handful of vector ops;
only vehicles that reach an intersection during the tick are handled one by
one (they draw their turn from the rng in index order, which keeps runs
reproducible).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import DegenerateRatioError, OrderingError, ParameterError

NodeId = int

# heading index -> unit vector; consecutive indices are 90 degrees apart (ccw)
HEADINGS = np.array([(1, 0), (0, 1), (-1, 0), (0, -1)], dtype=np.int8)


class Position(NamedTuple):
    x: float
    y: float


class Neighbor(NamedTuple):
    """One entry of a neighbor snapshot as seen at beacon time."""

    node: NodeId
    pos: Position
    vel: tuple[float, float]
    queue_load: int = 0


@dataclass(frozen=True)
class RoadGrid:
    width: float = 2000.0
    height: float = 2000.0
    spacing: float = 200.0

    def __post_init__(self):
        if self.spacing <= 0:
            raise ParameterError("grid spacing must be positive")
        for name in ("width", "height"):
            v = getattr(self, name)
            ratio = v / self.spacing
            if v <= 0 or abs(ratio - round(ratio)) > 1e-9:
                raise ParameterError(f"{name}={v} is not a positive multiple of spacing={self.spacing}")

    @property
    def cols(self) -> int:
        return int(round(self.width / self.spacing))

    @property
    def rows(self) -> int:
        return int(round(self.height / self.spacing))

    def on_street(self, p: Position, tol: float = 1e-6) -> bool:
        if not (-tol <= p.x <= self.width + tol and -tol <= p.y <= self.height + tol):
            return False
        fx = p.x / self.spacing
        fy = p.y / self.spacing
        return abs(fx - round(fx)) * self.spacing < tol or abs(fy - round(fy)) * self.spacing < tol


@dataclass
class VehicleState:
    id: NodeId
    pos: Position
    heading: tuple[int, int]
    speed: float
    segment: tuple[str, int]

    @property
    def velocity(self) -> tuple[float, float]:
        return (self.heading[0] * self.speed, self.heading[1] * self.speed)


@dataclass(frozen=True)
class TurnPolicy:
    straight: float = 0.5
    left: float = 0.25
    right: float = 0.25

    def __post_init__(self):
        probs = (self.straight, self.left, self.right)
        if min(probs) < 0 or abs(sum(probs) - 1.0) > 1e-9:
            raise ParameterError(f"turn probabilities must be non-negative and sum to 1, got {probs}")


class Fleet:
    """Array-backed kinematic state of every vehicle in a scenario."""

    def __init__(self, pos: np.ndarray, heading: np.ndarray, speed: np.ndarray):
        self.pos = np.asarray(pos, dtype=float)
        self.heading = np.asarray(heading, dtype=np.int8)
        self.speed = np.asarray(speed, dtype=float)

    @classmethod
    def random(cls, grid: RoadGrid, n: int, rng: np.random.Generator,
               v_min: float = 8.0, v_max: float = 14.0) -> "Fleet":
        if v_min <= 0 or v_max < v_min:
            raise ParameterError(f"invalid speed range [{v_min}, {v_max}]")
        pos = np.empty((n, 2))
        heading = np.empty(n, dtype=np.int8)
        horizontal = rng.random(n) < 0.5
        for i in range(n):
            if horizontal[i]:
                row = rng.integers(0, grid.rows + 1)
                pos[i] = (rng.uniform(0, grid.width), row * grid.spacing)
                heading[i] = rng.choice((0, 2))
            else:
                col = rng.integers(0, grid.cols + 1)
                pos[i] = (col * grid.spacing, rng.uniform(0, grid.height))
                heading[i] = rng.choice((1, 3))
        speed = rng.uniform(v_min, v_max, n)
        return cls(pos, heading, speed)

    @classmethod
    def from_states(cls, states: list[VehicleState]) -> "Fleet":
        lookup = {tuple(int(c) for c in h): i for i, h in enumerate(HEADINGS.tolist())}
        pos = np.array([s.pos for s in states], dtype=float).reshape(-1, 2)
        heading = np.array([lookup[tuple(s.heading)] for s in states], dtype=np.int8)
        speed = np.array([s.speed for s in states], dtype=float)
        return cls(pos, heading, speed)

    def __len__(self) -> int:
        return len(self.speed)

    def copy(self) -> "Fleet":
        return Fleet(self.pos.copy(), self.heading.copy(), self.speed.copy())

    @property
    def velocity(self) -> np.ndarray:
        return HEADINGS[self.heading] * self.speed[:, None]

    def state(self, i: int, grid: RoadGrid | None = None) -> VehicleState:
        h = tuple(int(c) for c in HEADINGS[self.heading[i]])
        x, y = self.pos[i]
        if grid is None:
            segment = ("h" if h[1] == 0 else "v", -1)
        elif h[1] == 0:
            segment = ("h", int(round(y / grid.spacing)))
        else:
            segment = ("v", int(round(x / grid.spacing)))
        return VehicleState(i, Position(float(x), float(y)), h, float(self.speed[i]), segment)

    def states(self, grid: RoadGrid | None = None) -> list[VehicleState]:
        return [self.state(i, grid) for i in range(len(self))]


def _next_intersection_gap(u: np.ndarray, sign: np.ndarray, spacing: float) -> np.ndarray:
    """Distance along the direction of travel to the next grid line."""
    q = u / spacing
    eps = 1e-9
    ahead = np.where(sign > 0, np.floor(q + eps) + 1, np.ceil(q - eps) - 1)
    return np.abs(ahead * spacing - u)


def step_mobility(grid: RoadGrid, fleet: Fleet, dt: float, rng: np.random.Generator,
                  turns: TurnPolicy = TurnPolicy()) -> Fleet:
    """Advance every vehicle by ``speed * dt`` along the street network (in place)."""
    if not dt > 0:
        raise ParameterError(f"dt must be positive, got {dt}")
    h = fleet.heading
    along_x = (h % 2) == 0
    sign = np.where((h == 0) | (h == 1), 1, -1)
    u = np.where(along_x, fleet.pos[:, 0], fleet.pos[:, 1])
    gap = _next_intersection_gap(u, sign, grid.spacing)
    travel = fleet.speed * dt
    crossing = travel >= gap

    free = ~crossing
    fleet.pos[free] += HEADINGS[h[free]] * travel[free, None]

    probs = (turns.straight, turns.left, turns.right)
    for i in np.flatnonzero(crossing):
        _advance_through_intersections(grid, fleet, int(i), float(travel[i]), float(gap[i]), rng, probs)
    return fleet


def _advance_through_intersections(grid, fleet, i, remaining, gap, rng, probs):
    s = float(grid.spacing)
    while True:
        d = HEADINGS[fleet.heading[i]]
        # snap exactly onto the intersection to stop float drift
        x = round((fleet.pos[i, 0] + d[0] * gap) / s) * s
        y = round((fleet.pos[i, 1] + d[1] * gap) / s) * s
        fleet.pos[i] = (x, y)
        remaining -= gap
        choice = rng.choice(3, p=probs)
        hd = int(fleet.heading[i])
        if choice == 1:
            hd = (hd + 1) % 4
        elif choice == 2:
            hd = (hd + 3) % 4
        nd = HEADINGS[hd].astype(float)
        nx_, ny_ = x + nd[0] * s, y + nd[1] * s
        if not (-1e-6 <= nx_ <= grid.width + 1e-6 and -1e-6 <= ny_ <= grid.height + 1e-6):
            hd = (int(fleet.heading[i]) + 2) % 4
        fleet.heading[i] = hd
        if remaining < s:
            fleet.pos[i] += HEADINGS[hd] * remaining
            return
        gap = s


def distance(a, b) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def in_range(a, b, tx_range: float) -> bool:
    if not tx_range > 0:
        raise ParameterError(f"tx_range must be positive, got {tx_range}")
    return distance(a, b) <= tx_range


def closeness_ratio(d_i: float, d_j: float) -> float:
    """Sender-to-receiver distance over candidate-to-receiver distance.

    Values above 1 mean the candidate sits closer to the receiver than the
    sender does.
    """
    if d_j == 0:
        raise DegenerateRatioError("candidate is at the receiver position")
    return d_i / d_j


@dataclass
class _Sample:
    dj: float
    dn: float | None
    t: float


@dataclass
class DirectionTracker:
    """Per ``(candidate, receiver)`` history of candidate-to-receiver distance."""

    samples: dict[tuple[NodeId, NodeId], _Sample] = field(default_factory=dict)

    def last(self, candidate: NodeId, receiver: NodeId) -> _Sample | None:
        return self.samples.get((candidate, receiver))

    def __len__(self) -> int:
        return len(self.samples)


def direction_indicator(
    tracker: DirectionTracker,
    candidate: NodeId,
    candidate_pos,
    candidate_velocity,
    receiver_pos,
    t: float,
    receiver: NodeId = -1,
    sender_pos=None,
    max_age: float | None = None,
) -> int:
    """Return 1 if the candidate is closing in on the receiver, else 0.

    With a previous sample the decision compares the current
    candidate-to-receiver distance against the stored one (a tie counts as
    not approaching). Without one, or when the stored sample is older than
    ``max_age``, the sign of the velocity projection onto the line towards
    the receiver decides. The tracker is updated with the current sample.
    """
    key = (candidate, receiver)
    prev = tracker.samples.get(key)
    if prev is not None and t <= prev.t:
        raise OrderingError(f"sample for {key} at t={t} does not follow t={prev.t}")
    dj = distance(candidate_pos, receiver_pos)
    if prev is not None and (max_age is None or t - prev.t <= max_age):
        beta = 1 if dj < prev.dj else 0
    else:
        rx = receiver_pos[0] - candidate_pos[0]
        ry = receiver_pos[1] - candidate_pos[1]
        beta = 1 if candidate_velocity[0] * rx + candidate_velocity[1] * ry > 0 else 0
    dn = None
    if sender_pos is not None and dj > 0:
        dn = closeness_ratio(distance(sender_pos, receiver_pos), dj)
    tracker.samples[key] = _Sample(dj, dn, t)
    return beta


class TraceMobility:
    """Replay of recorded positions in the ``t node_id x y`` line format.

    Positions between samples are linearly interpolated; before the first
    and after the last sample a node stays put.
    """

    def __init__(self, tracks: dict[NodeId, tuple[np.ndarray, np.ndarray]]):
        self.tracks = tracks

    @classmethod
    def parse(cls, text: str, source: str = "<trace>") -> "TraceMobility":
        raw: dict[NodeId, list[tuple[float, float, float]]] = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 4:
                raise ParameterError(f"{source}:{lineno}: expected 't node_id x y', got {line!r}")
            t, nid, x, y = float(parts[0]), int(parts[1]), float(parts[2]), float(parts[3])
            rows = raw.setdefault(nid, [])
            if rows and t <= rows[-1][0]:
                raise OrderingError(f"{source}:{lineno}: time for node {nid} not increasing")
            rows.append((t, x, y))
        tracks = {}
        for nid, rows in raw.items():
            arr = np.array(rows, dtype=float)
            tracks[nid] = (arr[:, 0], arr[:, 1:])
        return cls(tracks)

    @classmethod
    def load(cls, path: str | Path) -> "TraceMobility":
        return cls.parse(Path(path).read_text(encoding="utf-8"), str(path))

    @property
    def node_ids(self) -> list[NodeId]:
        return sorted(self.tracks)

    def sample(self, t: float, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Positions and velocities of nodes ``0..n-1`` at time ``t``."""
        pos = np.zeros((n, 2))
        vel = np.zeros((n, 2))
        for nid in range(n):
            if nid not in self.tracks:
                raise ParameterError(f"trace has no samples for node {nid}")
            ts, xy = self.tracks[nid]
            if t <= ts[0]:
                pos[nid] = xy[0]
            elif t >= ts[-1]:
                pos[nid] = xy[-1]
            else:
                k = int(np.searchsorted(ts, t, side="right")) - 1
                w = (t - ts[k]) / (ts[k + 1] - ts[k])
                pos[nid] = xy[k] + w * (xy[k + 1] - xy[k])
                vel[nid] = (xy[k + 1] - xy[k]) / (ts[k + 1] - ts[k])
        return pos, vel
