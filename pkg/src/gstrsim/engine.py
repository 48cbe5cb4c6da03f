"""Deterministic discrete-event loop.

Time is kept in integer microseconds so event ordering never depends on
float rounding. Simultaneous events run in a fixed order: mobility first,
then transmission completions, expiries, injections, beacons and finally
cloud polls; ties inside one type go by message id, then insertion order.

Mobility advances in fixed ticks. Each beacon every custodian re-evaluates
the messages it holds; a vehicle that receives a message decides on it
right away using the same snapshot, so a relay chain completes within one
beacon interval at ``v2v_hop_delay`` per hop.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import baselines, gstr, infra, scenarios
from .config import ScenarioConfig
from .errors import ConfigError, MessageExpired
from .gstr import BASE_STATION, DeliverDirect, Hold, Message, Relay, ToBaseStation
from .metrics import MetricsAccumulator, RunRecord
from .mobility import (
    DirectionTracker,
    Fleet,
    Neighbor,
    Position,
    RoadGrid,
    TraceMobility,
    TurnPolicy,
    direction_indicator,
    step_mobility,
)
from .social import SocialGraph, TrustHistory, connected_candidates, connection_score, trust_weight

US = 1_000_000

# event kinds, listed in their same-time priority order
MOBILITY, TRANSMIT, EXPIRE, INJECT, BEACON, POLL = range(6)
EVENT_NAMES = ("mobility_tick", "transmit_complete", "msg_expire", "msg_inject",
               "beacon_tick", "cloud_poll")


def to_us(seconds: float) -> int:
    return int(round(seconds * US))


def rng_streams(seed: int) -> dict[str, np.random.Generator]:
    """Independent generators so protocols see identical mobility and traffic."""
    names = ("mobility", "social", "traffic", "placement")
    children = np.random.SeedSequence(seed).spawn(len(names))
    return {name: np.random.default_rng(s) for name, s in zip(names, children)}


@dataclass
class MessageRecord:
    msg_id: int
    src: int
    dst: int
    injected_at: float
    delivered_at: float | None = None
    expired_at: float | None = None
    discarded_at: float | None = None
    relays: int = 0
    via_cloud: bool = False

    @property
    def outcome(self) -> str:
        if self.delivered_at is not None:
            return "delivered"
        if self.expired_at is not None:
            return "expired"
        if self.discarded_at is not None:
            return "discarded"
        return "undelivered"


@dataclass
class RunResult:
    config: ScenarioConfig
    record: RunRecord
    messages: list[MessageRecord]
    accumulator: MetricsAccumulator
    event_log: list[str] = field(default_factory=list)
    audit_checks: int = 0
    audit_violations: list[str] = field(default_factory=list)
    case_violations: int = 0
    case_drift: int = 0
    deferred_injections: int = 0
    skipped_injections: int = 0
    aborted_transmissions: int = 0
    cloud_stores: int = 0

    def outcome_counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for m in self.messages:
            out[m.outcome] = out.get(m.outcome, 0) + 1
        return out


@dataclass
class _Transit:
    msg_id: int
    src: object  # vehicle id or ("bs", id)
    dst: object
    kind: str  # "v2v", "uplink", "downlink"
    cancelled: bool = False


class Simulation:
    def __init__(self, cfg: ScenarioConfig, social: SocialGraph | None = None,
                 positions: np.ndarray | None = None, velocities: np.ndarray | None = None,
                 traffic: list[tuple[float, int, int]] | None = None, record_events: bool = True):
        self.cfg = cfg.validate()
        self.rngs = rng_streams(cfg.seed)
        self.grid = RoadGrid(cfg.area_width, cfg.area_height, cfg.grid_spacing)
        self.turns = TurnPolicy(cfg.turn_straight, cfg.turn_left, cfg.turn_right)
        n = cfg.num_nodes

        self.trace = TraceMobility.load(cfg.trace) if cfg.trace else None
        self.static = positions is not None
        if self.static:
            self.pos = np.asarray(positions, dtype=float).reshape(n, 2).copy()
            self.vel = (np.zeros((n, 2)) if velocities is None
                        else np.asarray(velocities, dtype=float).reshape(n, 2).copy())
            self.fleet = None
        elif self.trace is not None:
            self.fleet = None
            self.pos, self.vel = self.trace.sample(0.0, n)
        else:
            self.fleet = Fleet.random(self.grid, n, self.rngs["placement"], cfg.speed_min, cfg.speed_max)
            self.pos, self.vel = self.fleet.pos, self.fleet.velocity

        self.social = social if social is not None else scenarios.build_social_graph(cfg, self.rngs["social"])
        if len(self.social) != n:
            raise ConfigError(f"social graph has {len(self.social)} nodes, config says {n}")
        self.adj = scenarios.adjacency_matrix(self.social)
        self.stations = infra.grid_stations(cfg.area_width, cfg.area_height,
                                            cfg.stations.rows, cfg.stations.cols)
        self._centers = np.array([bs.center for bs in self.stations])

        self.tx = cfg.tx_range
        self.beacon_us = to_us(cfg.beacon_interval)
        self.tick_us = to_us(cfg.mobility_tick)
        self.end_us = to_us(cfg.sim_duration)
        self.delays = {k: to_us(v) for k, v in vars(cfg.delays).items()}

        self.now = 0
        self._queue: list = []
        self._seq = itertools.count()
        self._version = 0
        self._geom_version = -1
        self._dist: np.ndarray | None = None
        self._cells: np.ndarray | None = None

        self.history = TrustHistory()
        self.tracker = DirectionTracker()
        self._beta_cache: dict[tuple[int, int, int], int] = {}
        self.store = infra.CloudStore()
        self.messages: dict[int, Message] = {}
        self.records: dict[int, MessageRecord] = {}
        self.custody: dict[int, object] = {}
        self.held: dict[int, list[int]] = {v: [] for v in range(n)}
        self.transits: dict[int, _Transit] = {}
        self._decided: dict[tuple[int, int], int] = {}
        self._next_msg_id = 0
        self.acc = MetricsAccumulator()

        # explicit (t, src, dst) injections replace the random traffic model
        self.traffic = None if traffic is None else sorted(traffic)
        self.record_events = record_events
        self.log: list[str] = []
        self.audit_checks = 0
        self.audit_violations: list[str] = []
        self.case_violations = 0
        self.case_drift = 0
        self.deferred = 0
        self.skipped = 0
        self.aborted = 0
        self.cloud_stores = 0
        self._pending_injections = 0

    # ------------------------------------------------------------------ queue
    def schedule(self, t_us: int, kind: int, payload=None, key: int = -1) -> None:
        heapq.heappush(self._queue, (t_us, kind, key, next(self._seq), payload))

    def _emit(self, event: str, msg_id, frm="-", to="-") -> None:
        if self.record_events:
            self.log.append(f"{self.now / US:.6f} {event} {msg_id} {frm} {to}")

    # --------------------------------------------------------------- geometry
    def _geometry(self) -> None:
        if self._geom_version == self._version:
            return
        diff = self.pos[:, None, :] - self.pos[None, :, :]
        self._dist = np.hypot(diff[..., 0], diff[..., 1])
        d = self.pos[:, None, :] - self._centers[None, :, :]
        d2 = d[..., 0] ** 2 + d[..., 1] ** 2
        self._cells = np.argmin(d2, axis=1)  # argmin keeps the lowest bs_id on ties
        self._geom_version = self._version

    def dist(self, a: int, b: int) -> float:
        self._geometry()
        return float(self._dist[a, b])

    def neighbors(self, v: int) -> list[int]:
        self._geometry()
        row = self._dist[v]
        return [int(u) for u in np.flatnonzero(row <= self.tx) if u != v]

    def snapshot(self, v: int) -> list[Neighbor]:
        return [Neighbor(u, Position(*self.pos[u]), tuple(self.vel[u]), len(self.held[u]))
                for u in self.neighbors(v)]

    def cell(self, v: int) -> int:
        self._geometry()
        return int(self._cells[v])

    def beta(self, c: int, dst: int) -> int:
        """Direction indicator of ``c`` towards ``dst``, sampled once per beacon."""
        if self.dist(c, dst) <= self.tx:
            return 1
        tick = self.now // self.beacon_us
        key = (c, dst, tick)
        hit = self._beta_cache.get(key)
        if hit is None:
            hit = direction_indicator(self.tracker, c, self.pos[c], self.vel[c], self.pos[dst],
                                      self.now / US, receiver=dst,
                                      max_age=1.5 * self.cfg.beacon_interval)
            self._beta_cache[key] = hit
        return hit

    # ---------------------------------------------------------------- custody
    def _take(self, mid: int) -> None:
        where = self.custody.pop(mid, None)
        if where is None:
            return
        if where[0] == "node":
            self.held[where[1]].remove(mid)
        elif where[0] == "cloud":
            self.store.entries.pop(mid, None)
        elif where[0] == "transit":
            self.transits.pop(mid).cancelled = True

    def _give(self, mid: int, node: int) -> None:
        self.custody[mid] = ("node", node)
        self.held[node].append(mid)
        self.held[node].sort()

    def audit(self) -> None:
        """Every live message must have exactly one custodian."""
        self.audit_checks += 1
        seen: dict[int, int] = {}
        for v, mids in self.held.items():
            for m in mids:
                seen[m] = seen.get(m, 0) + 1
        for m in self.store.entries:
            seen[m] = seen.get(m, 0) + 1
        for m in self.transits:
            seen[m] = seen.get(m, 0) + 1
        live = set(self.messages)
        for m in live:
            if seen.get(m, 0) != 1:
                self.audit_violations.append(f"t={self.now / US:.6f} msg {m} has {seen.get(m, 0)} custodians")
        for m in set(seen) - live:
            self.audit_violations.append(f"t={self.now / US:.6f} finished msg {m} still held")

    # ------------------------------------------------------------- lifecycle
    def run(self) -> RunResult:
        cfg = self.cfg
        if not self.static:
            for k in range(1, self.end_us // self.tick_us + 1):
                self.schedule(k * self.tick_us, MOBILITY)
        for k in range(1, self.end_us // self.beacon_us + 1):
            self.schedule(k * self.beacon_us, BEACON)
            self.schedule(k * self.beacon_us, POLL)
        self._schedule_injections()

        while self._queue:
            t, kind, _, _, payload = heapq.heappop(self._queue)
            if t > self.end_us:
                break
            self.now = t
            if kind == MOBILITY:
                self._on_mobility()
            elif kind == TRANSMIT:
                self._on_transmit(payload)
            elif kind == EXPIRE:
                self._on_expire(payload)
            elif kind == INJECT:
                self._on_inject(payload)
            elif kind == BEACON:
                self._on_beacon()
            elif kind == POLL:
                self._on_poll()
        self.now = self.end_us
        self.audit()
        return self._result()

    def _schedule_injections(self) -> None:
        cfg = self.cfg
        if self.traffic is not None:
            for t, src, dst in self.traffic:
                self.schedule(to_us(t), INJECT, payload=(int(src), int(dst)))
            return
        rng = self.rngs["traffic"]
        t = cfg.inject_start
        stop = cfg.injection_stop
        times = []
        while True:
            t += rng.exponential(1.0 / cfg.msg_rate)
            if t >= stop:
                break
            times.append(t)
        for i, t in enumerate(times):
            self.schedule(to_us(t), INJECT, payload=i)

    def _on_mobility(self) -> None:
        dt = self.tick_us / US
        if self.trace is not None:
            self.pos, self.vel = self.trace.sample(self.now / US, self.cfg.num_nodes)
        else:
            step_mobility(self.grid, self.fleet, dt, self.rngs["mobility"], self.turns)
            self.pos, self.vel = self.fleet.pos, self.fleet.velocity
        self._version += 1

    def _on_inject(self, attempt) -> None:
        if isinstance(attempt, tuple):
            self._inject(*attempt)
            return
        cfg = self.cfg
        self._geometry()
        rng = self.rngs["traffic"]
        pairs = scenarios.eligible_pairs(cfg.case, self.adj, self._dist, self.tx,
                                         cfg.max_pair_distance)
        if not pairs:
            # retry at the next beacon while the injection window is open
            nxt = (self.now // self.beacon_us + 1) * self.beacon_us
            if nxt < to_us(cfg.injection_stop):
                self.deferred += 1
                self.schedule(nxt, INJECT, payload=attempt)
            else:
                self.skipped += 1
            return
        src, dst = pairs[int(rng.integers(len(pairs)))]
        if not self._case_holds(src, dst):
            self.case_violations += 1
        self._inject(src, dst)

    def _inject(self, src: int, dst: int) -> None:
        cfg = self.cfg
        mid = self._next_msg_id
        self._next_msg_id += 1
        msg = Message(src, dst, self.now / US, cfg.ttl, msg_id=mid)
        msg.home_bs = self.cell(src)
        self.messages[mid] = msg
        self.records[mid] = MessageRecord(mid, src, dst, self.now / US)
        self.acc.sent()
        self._give(mid, src)
        self._emit("inject", mid, src, dst)
        # expiry fires one microsecond after created_at + ttl (age must exceed ttl)
        self.schedule(self.now + to_us(cfg.ttl) + 1, EXPIRE, payload=mid, key=mid)
        self._decide(src, mid)

    def _case_holds(self, src: int, dst: int) -> bool:
        """Re-derive the case property from the live snapshot of ``src``."""
        case = self.cfg.case
        if case == "free":
            return True
        near = set(self.neighbors(src))
        if dst in near:
            return False
        cands = connected_candidates(self.social, src, dst, near) - {dst}
        if case == "none_connected":
            return not (self.social.friends(src) & self.social.friends(dst))
        if case == "multi_connected":
            return len(cands) >= 2
        return len(cands) == 1

    def _on_beacon(self) -> None:
        self.audit()
        # the case property is only guaranteed at injection; count how often it
        # drifts while the originator still holds the message
        for mid, where in self.custody.items():
            msg = self.messages[mid]
            if where == ("node", msg.src) and not msg.hop_trace and not self._case_holds(msg.src, msg.dst):
                self.case_drift += 1
        for v in range(self.cfg.num_nodes):
            for mid in list(self.held[v]):
                if self.custody.get(mid) == ("node", v):
                    self._decide(v, mid)

    def _on_poll(self) -> None:
        if self.cfg.protocol != "gstr" or not self.store.entries:
            self._purge_cloud()
            return
        self._geometry()
        members: dict[int, list] = {}
        for v in range(self.cfg.num_nodes):
            members.setdefault(int(self._cells[v]), []).append((v, Position(*self.pos[v])))
        self._purge_cloud()
        for bs in self.stations:
            nodes = members.get(bs.bs_id, [])
            if not nodes:
                continue
            out = infra.cloud_poll(self.store, bs.bs_id, nodes, self.social, self.now / US,
                                   select=self._cloud_select)
            for mid, to in out:
                # cloud_poll already dropped the entry; custody moves to the downlink
                self.custody.pop(mid)
                msg = self.messages[mid]
                self._emit("cloud_release" if to != msg.dst else "cloud_deliver", mid,
                           f"bs{bs.bs_id}", to)
                self._start(mid, ("bs", bs.bs_id), to, "downlink",
                            self.delays["cloud_lookup"] + self.delays["cloud_downlink"])

    def _purge_cloud(self) -> None:
        for mid in infra.purge_expired(self.store, self.now / US):
            # expiry events normally clear these first
            self.custody.pop(mid, None)

    def _cloud_select(self, msg: Message, cands: set) -> int | None:
        # release only to a connected node that already has the receiver in range;
        # anything else would just upload the message again
        cands = {c for c in cands if self.dist(c, msg.dst) <= self.tx}
        weights = {c: gstr.TrustLevel.MEDIUM for c in cands}
        betas = {c: self.beta(c, msg.dst) for c in sorted(cands)}
        return gstr.select_trusted_node(cands, weights, betas,
                                        lambda c: connection_score(self.social, msg.src, msg.dst, c))

    def _on_expire(self, mid: int) -> None:
        if mid not in self.messages:
            return
        self._take(mid)
        del self.messages[mid]
        self.records[mid].expired_at = self.now / US
        self.acc.expired()
        self._emit("expire", mid)

    # ------------------------------------------------------------- decisions
    def _decide(self, v: int, mid: int) -> None:
        msg = self.messages[mid]
        tick = self.now // self.beacon_us
        already = self._decided.get((v, mid)) == tick
        if msg.expired(self.now / US):
            return  # the expiry event is already queued
        if self.cfg.protocol == "gstr":
            decision = self._decide_gstr(v, msg, already)
        else:
            decision = self._decide_baseline(v, msg, already)
        if isinstance(decision, Hold):
            return
        self._decided[(v, mid)] = tick
        if isinstance(decision, DeliverDirect):
            self._send_v2v(v, mid, decision.to)
        elif isinstance(decision, Relay):
            self._send_v2v(v, mid, decision.to)
        elif isinstance(decision, ToBaseStation):
            self._take(mid)
            self._emit(f"to_bs_{decision.reason}", mid, v, f"bs{msg.home_bs}")
            self._start(mid, v, ("bs", msg.home_bs), "uplink", self.delays["cloud_uplink"])

    def _decide_gstr(self, v: int, msg: Message, already: bool):
        try:
            return gstr.sender_decide(
                v, msg, self.snapshot(v), self.social, self.history, self.tracker,
                self.cell(v) == msg.home_bs,
                now=self.now / US, carrier_pos=self.pos[v], dst_pos=self.pos[msg.dst],
                tx_range=self.tx, already_decided=already,
                progress_gate=self.cfg.progress_gate,
                beta_fn=lambda nb: self.beta(nb.node, msg.dst),
            )
        except MessageExpired:
            return Hold()

    def _decide_baseline(self, v: int, msg: Message, already: bool):
        if already:
            return Hold()
        used = set(msg.hop_trace) | {msg.src, v}
        snap = [nb for nb in self.snapshot(v) if nb.node not in used or nb.node == msg.dst]
        me, dst_pos = self.pos[v], self.pos[msg.dst]
        state = msg.route_state
        prev_pos = state.get("prev_pos") if state.get("mode") == "perimeter" else None
        proto = self.cfg.protocol
        if proto == "gpsr":
            greedy = baselines.greedy_next_hop(me, dst_pos, snap)
            hop = greedy if greedy is not None else baselines.gpsr_next_hop(me, dst_pos, snap, prev_pos=prev_pos)
        elif proto == "tgpsr":
            trusted = [nb for nb in snap if self._trust_ok(v, msg, nb.node)]
            greedy = baselines.greedy_next_hop(me, dst_pos, trusted)
            hop = greedy if greedy is not None else baselines.gpsr_next_hop(me, dst_pos, trusted, prev_pos=prev_pos)
        else:
            greedy = hop = baselines.gtlr_next_hop(me, dst_pos, snap, self.cfg.gtlr_load_weight)
        if hop is None:
            return Hold()
        state["mode"] = "greedy" if greedy is not None else "perimeter"
        state["prev_pos"] = tuple(me)
        return DeliverDirect(hop) if hop == msg.dst else Relay(hop, gstr.TrustLevel.LOW)

    def _trust_ok(self, v: int, msg: Message, c: int) -> bool:
        w = trust_weight(self.history, self.social, msg.src, msg.dst, c, True, carrier=v)
        return w.weight >= self.cfg.tgpsr_threshold

    # ---------------------------------------------------------- transmission
    def _send_v2v(self, v: int, mid: int, to: int) -> None:
        self._take(mid)
        self._emit("send", mid, v, to)
        self._start(mid, v, to, "v2v", self.delays["v2v_hop_delay"])

    def _start(self, mid: int, frm, to, kind: str, delay_us: int) -> None:
        tr = _Transit(mid, frm, to, kind)
        self.transits[mid] = tr
        self.custody[mid] = ("transit", frm, to)
        self.schedule(self.now + delay_us, TRANSMIT, payload=tr, key=mid)

    def _on_transmit(self, tr: _Transit) -> None:
        if tr.cancelled or self.transits.get(tr.msg_id) is not tr:
            return
        mid = tr.msg_id
        msg = self.messages[mid]
        del self.transits[mid]
        self.custody.pop(mid)
        if tr.kind == "uplink":
            bs = tr.dst[1]
            infra.cloud_put(self.store, msg, bs, self.now / US)
            self.custody[mid] = ("cloud", bs)
            self.cloud_stores += 1
            self._emit("cloud_put", mid, tr.src, f"bs{bs}")
            return
        if tr.kind == "v2v" and self.dist(tr.src, tr.dst) > self.tx:
            self.aborted += 1
            self._emit("abort", mid, tr.src, tr.dst)
            self._give(mid, tr.src)
            return
        frm = BASE_STATION if tr.kind == "downlink" else tr.src
        if tr.dst == msg.dst:
            msg.last_hop = frm
            msg.last_hop_trusted = gstr.hop_is_trusted(self.social, msg, frm)
            self._finish_delivery(msg, frm)
            return
        # relay leg: the receiving vehicle becomes custodian and decides at once
        msg.add_relay(tr.dst, trusted=gstr.hop_is_trusted(self.social, msg, tr.dst))
        # the handoff rule watches the cell where the current custodian took over
        msg.home_bs = self.cell(tr.dst)
        if frm != BASE_STATION:
            gstr.on_relay_success(self.history, frm, tr.dst, self.now / US)
        self._give(mid, tr.dst)
        self._emit("relay", mid, "bs" if frm == BASE_STATION else frm, tr.dst)
        self._decide(tr.dst, mid)

    def _finish_delivery(self, msg: Message, frm) -> None:
        mid = msg.msg_id
        rec = self.records[mid]
        rec.relays = msg.relays
        rec.via_cloud = msg.via_cloud
        del self.messages[mid]
        src_tag = "bs" if frm == BASE_STATION else frm
        if gstr.receiver_accept(msg, msg.dst, self.social):
            rec.delivered_at = self.now / US
            self.acc.delivered(msg.relays, (self.now - to_us(rec.injected_at)) / US)
            self._emit("deliver", mid, src_tag, msg.dst)
        else:
            rec.discarded_at = self.now / US
            self._emit("discard", mid, src_tag, msg.dst)

    def _result(self) -> RunResult:
        cfg = self.cfg
        record = RunRecord.from_accumulator(self.acc, cfg.protocol, cfg.num_nodes, cfg.case, cfg.seed)
        return RunResult(
            config=cfg, record=record,
            messages=[self.records[m] for m in sorted(self.records)],
            accumulator=self.acc, event_log=self.log,
            audit_checks=self.audit_checks, audit_violations=self.audit_violations,
            case_violations=self.case_violations, case_drift=self.case_drift,
            deferred_injections=self.deferred,
            skipped_injections=self.skipped, aborted_transmissions=self.aborted,
            cloud_stores=self.cloud_stores,
        )


def run_scenario(cfg: ScenarioConfig, record_events: bool = True, **kwargs) -> RunResult:
    """Simulate ``cfg.sim_duration`` seconds; identical configs give identical results."""
    return Simulation(cfg, record_events=record_events, **kwargs).run()


def write_event_log(result: RunResult, path: str | Path) -> Path:
    path = Path(path)
    path.write_text("\n".join(result.event_log) + ("\n" if result.event_log else ""), encoding="utf-8")
    return path


def record_from_log(lines: list[str], cfg: ScenarioConfig) -> RunRecord:
    """Rebuild the run's metrics from its event log alone.

    Timestamps are written with microsecond precision, so the result matches
    ``RunResult.record`` exactly.
    """
    acc = MetricsAccumulator()
    injected: dict[str, int] = {}
    relays: dict[str, int] = {}
    for line in lines:
        t, event, mid, *_ = line.split()
        t_us = int(round(float(t) * US))
        if event == "inject":
            injected[mid] = t_us
            relays[mid] = 0
            acc.sent()
        elif event == "relay":
            relays[mid] += 1
        elif event == "deliver":
            acc.delivered(relays[mid], (t_us - injected[mid]) / US)
        elif event == "expire":
            acc.expired()
    return RunRecord.from_accumulator(acc, cfg.protocol, cfg.num_nodes, cfg.case, cfg.seed)
