"""Scenario and sweep configuration, with a small ``key = value`` file format.

Top-level keys (or a ``[scenario]`` section) configure the scenario.
``[social]``, ``[delays]`` and ``[stations]`` sections fill the nested groups
and ``[sweep]`` holds sweep axes. Unknown keys are rejected with the
offending line quoted.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import ConfigError

PROTOCOLS = ("gstr", "gpsr", "tgpsr", "gtlr")
CASES = ("free", "single_connected", "multi_connected", "none_connected")
GRAPH_MODELS = ("watts_strogatz", "erdos_renyi")


@dataclass
class SocialConfig:
    model: str = "watts_strogatz"
    k: int = 8
    p: float = 0.1


@dataclass
class DelayConfig:
    v2v_hop_delay: float = 0.010
    cloud_uplink: float = 0.100
    cloud_downlink: float = 0.100
    cloud_lookup: float = 0.050


@dataclass
class StationConfig:
    rows: int = 3
    cols: int = 3


@dataclass
class ScenarioConfig:
    protocol: str = "gstr"
    num_nodes: int = 100
    case: str = "free"
    seed: int = 1
    area_width: float = 2000.0
    area_height: float = 2000.0
    grid_spacing: float = 200.0
    tx_range: float = 250.0
    beacon_interval: float = 1.0
    mobility_tick: float = 0.1
    sim_duration: float = 300.0
    msg_rate: float = 0.1
    ttl: float = 120.0
    inject_start: float = 5.0
    # None means "stop injecting one TTL before the end" so every message can drain
    inject_stop: float | None = None
    # messages are local: endpoints start at most this far apart (None = anywhere)
    max_pair_distance: float | None = 500.0
    speed_min: float = 8.0
    speed_max: float = 14.0
    turn_straight: float = 0.5
    turn_left: float = 0.25
    turn_right: float = 0.25
    progress_gate: bool = True
    tgpsr_threshold: float = 0.5
    gtlr_load_weight: float = 10.0
    trace: str | None = None
    social: SocialConfig = field(default_factory=SocialConfig)
    delays: DelayConfig = field(default_factory=DelayConfig)
    stations: StationConfig = field(default_factory=StationConfig)

    @property
    def injection_stop(self) -> float:
        if self.inject_stop is not None:
            return self.inject_stop
        return max(self.inject_start, self.sim_duration - self.ttl)

    def validate(self) -> "ScenarioConfig":
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"protocol must be one of {', '.join(PROTOCOLS)}; got {self.protocol!r}")
        if self.case not in CASES:
            raise ConfigError(f"case must be one of {', '.join(CASES)}; got {self.case!r}")
        if self.num_nodes < 2:
            raise ConfigError(f"num_nodes must be >= 2, got {self.num_nodes}")
        positive = ("area_width", "area_height", "grid_spacing", "tx_range", "beacon_interval",
                    "mobility_tick", "sim_duration", "msg_rate", "ttl", "speed_min", "speed_max")
        for name in positive:
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.speed_max < self.speed_min:
            raise ConfigError("speed_max must be >= speed_min")
        for name in ("area_width", "area_height"):
            ratio = getattr(self, name) / self.grid_spacing
            if abs(ratio - round(ratio)) > 1e-9:
                raise ConfigError(f"{name} must be a multiple of grid_spacing")
        if self.inject_start < 0:
            raise ConfigError("inject_start must be >= 0")
        if self.max_pair_distance is not None and not self.max_pair_distance > 0:
            raise ConfigError("max_pair_distance must be positive")
        turns = (self.turn_straight, self.turn_left, self.turn_right)
        if min(turns) < 0 or abs(sum(turns) - 1) > 1e-9:
            raise ConfigError("turn probabilities must be non-negative and sum to 1")
        if self.tgpsr_threshold not in (0.5, 1.0):
            raise ConfigError("tgpsr_threshold must be 0.5 or 1.0")
        if self.gtlr_load_weight < 0:
            raise ConfigError("gtlr_load_weight must be >= 0")
        if self.social.model not in GRAPH_MODELS:
            raise ConfigError(f"social.model must be one of {', '.join(GRAPH_MODELS)}")
        if not 0 <= self.social.p <= 1:
            raise ConfigError("social.p must be in [0, 1]")
        if self.social.model == "watts_strogatz" and not 0 < self.social.k < self.num_nodes:
            raise ConfigError("social.k must satisfy 0 < k < num_nodes")
        for name, v in dataclasses.asdict(self.delays).items():
            if v < 0:
                raise ConfigError(f"delays.{name} must be >= 0")
        if self.stations.rows < 1 or self.stations.cols < 1:
            raise ConfigError("stations.rows and stations.cols must be >= 1")
        return self

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)


@dataclass
class SweepSpec:
    densities: list[int] = field(default_factory=lambda: [40, 80, 120, 160, 200])
    protocols: list[str] = field(default_factory=lambda: ["gstr"])
    cases: list[str] = field(default_factory=lambda: ["free"])
    seeds_per_point: int = 1
    base: ScenarioConfig = field(default_factory=ScenarioConfig)

    def validate(self) -> "SweepSpec":
        if not self.densities or any(d < 2 for d in self.densities):
            raise ConfigError("densities must be a non-empty list of counts >= 2")
        if self.seeds_per_point < 1:
            raise ConfigError("seeds_per_point must be >= 1")
        for p in self.protocols:
            if p not in PROTOCOLS:
                raise ConfigError(f"unknown protocol {p!r} in sweep")
        for c in self.cases:
            if c not in CASES:
                raise ConfigError(f"unknown case {c!r} in sweep")
        self.base.validate()
        return self

    def points(self) -> list[ScenarioConfig]:
        """One config per (protocol, case, density, replicate).

        Replicate ``i`` always runs with ``base.seed + i``, so protocols and
        densities share random streams and extending an axis never shifts
        the seeds of existing points.
        """
        out = []
        for proto in self.protocols:
            for case in self.cases:
                for n in self.densities:
                    for i in range(self.seeds_per_point):
                        out.append(self.base.replace(protocol=proto, case=case, num_nodes=n,
                                                     seed=self.base.seed + i))
        return out


_SECTIONS = {None: ScenarioConfig, "scenario": ScenarioConfig, "social": SocialConfig,
             "delays": DelayConfig, "stations": StationConfig}
_SWEEP_KEYS = {"densities", "protocols", "cases", "seeds_per_point"}


def _field_types(cls) -> dict[str, Any]:
    hints = {}
    for f in dataclasses.fields(cls):
        if f.name in ("social", "delays", "stations"):
            continue
        hints[f.name] = f.type
    return hints


def _coerce(text: str, type_name: str):
    t = str(type_name).replace(" ", "")
    optional = "None" in t
    if optional and text.lower() in ("none", ""):
        return None
    base = t.split("|")[0]
    if base == "bool":
        low = text.lower()
        if low in ("true", "yes", "1", "on"):
            return True
        if low in ("false", "no", "0", "off"):
            return False
        raise ValueError(f"expected a boolean, got {text!r}")
    if base == "int":
        return int(text)
    if base == "float":
        return float(text)
    return text.strip("\"'")


def _coerce_list(text: str, item):
    items = [x.strip() for x in text.replace(",", " ").split()]
    return [item(x) for x in items if x]


def parse_text(text: str, source: str = "<config>") -> tuple[ScenarioConfig, dict]:
    """Parse config text; returns the scenario config and any sweep settings."""
    cfg = ScenarioConfig()
    sweep: dict = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if section not in _SECTIONS and section != "sweep":
                raise ConfigError(f"{source}: unknown section [{section}]", lineno, raw)
            continue
        if "=" not in line:
            raise ConfigError(f"{source}: expected 'key = value'", lineno, raw)
        key, value = (part.strip() for part in line.split("=", 1))
        try:
            if section == "sweep":
                if key not in _SWEEP_KEYS:
                    raise ConfigError(f"{source}: unknown key {key!r} in [sweep]", lineno, raw)
                if key == "densities":
                    sweep[key] = _coerce_list(value, int)
                elif key == "seeds_per_point":
                    sweep[key] = int(value)
                else:
                    sweep[key] = _coerce_list(value, str)
                continue
            cls = _SECTIONS[section]
            types = _field_types(cls)
            if key not in types:
                where = f"[{section}]" if section not in (None, "scenario") else "top level"
                raise ConfigError(f"{source}: unknown key {key!r} at {where}", lineno, raw)
            target = cfg if section in (None, "scenario") else getattr(cfg, section)
            setattr(target, key, _coerce(value, types[key]))
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"{source}: bad value for {key!r}: {exc}", lineno, raw) from None
    try:
        cfg.validate()
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    return cfg, sweep


def parse_config(path: str | Path | None = None, overrides: dict[str, str] | None = None
                 ) -> ScenarioConfig:
    text = Path(path).read_text(encoding="utf-8") if path is not None else ""
    if overrides:
        text += "\n" + _overrides_text(overrides)
    cfg, _ = parse_text(text, str(path) if path is not None else "<overrides>")
    return cfg


def parse_sweep(path: str | Path | None = None, overrides: dict[str, str] | None = None) -> SweepSpec:
    text = Path(path).read_text(encoding="utf-8") if path is not None else ""
    if overrides:
        text += "\n" + _overrides_text(overrides)
    cfg, sweep = parse_text(text, str(path) if path is not None else "<overrides>")
    spec = SweepSpec(base=cfg, **sweep)
    return spec.validate()


def _overrides_text(overrides: dict[str, str]) -> str:
    """Turn ``{"delays.cloud_uplink": "0.2"}``-style overrides into config lines."""
    top = [f"{k} = {v}" for k, v in overrides.items() if "." not in k]
    lines = ["[scenario]"] + top
    for k, v in overrides.items():
        if "." in k:
            sec, kk = k.split(".", 1)
            lines += [f"[{sec}]", f"{kk} = {v}"]
    return "\n".join(lines)


def dump_config(cfg: ScenarioConfig) -> str:
    """Serialise a config so that ``parse_text(dump_config(c))`` reproduces it."""
    lines = []
    for f in dataclasses.fields(cfg):
        if f.name in ("social", "delays", "stations"):
            continue
        lines.append(f"{f.name} = {_fmt(getattr(cfg, f.name))}")
    for sec in ("social", "delays", "stations"):
        lines.append("")
        lines.append(f"[{sec}]")
        obj = getattr(cfg, sec)
        for f in dataclasses.fields(obj):
            lines.append(f"{f.name} = {_fmt(getattr(obj, f.name))}")
    return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)
