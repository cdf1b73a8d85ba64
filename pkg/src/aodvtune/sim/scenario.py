"""Scenario definition for the desk-scale VANET simulator.

A scenario bundles the playground (area, vehicles, mobility source), the
constant-bit-rate traffic matrix, the radio channel, and the energy model.
Scenarios live in keyed text files (``KEY=value``, ``#`` comments) so runs
are easy to version and diff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

__all__ = [
    "ChannelSpec",
    "EnergySpec",
    "CbrSpec",
    "ScenarioSpec",
    "ScenarioError",
    "Flow",
    "derive_flows",
    "load_scenario",
    "parse_scenario",
    "dump_scenario",
]


class ScenarioError(ValueError):
    """A scenario file or spec violates its contract."""


@dataclass(frozen=True)
class ChannelSpec:
    """Shared radio channel: flat rate, circular nominal range, optional
    Nakagami-m fading on received power."""

    bandwidth_bps: float = 6_000_000.0
    nominal_range: float = 250.0
    nakagami_m: float = 3.0
    path_loss_exponent: float = 2.0
    fading_enabled: bool = True

    def __post_init__(self):
        if self.bandwidth_bps <= 0:
            raise ScenarioError("bandwidth must be positive")
        if self.nominal_range <= 0:
            raise ScenarioError("nominal range must be positive")
        if self.nakagami_m < 0.5:
            raise ScenarioError("Nakagami shape must be >= 0.5")
        if self.path_loss_exponent <= 0:
            raise ScenarioError("path loss exponent must be positive")


@dataclass(frozen=True)
class EnergySpec:
    """Power draw while transmitting / receiving; idle power is not modeled."""

    tx_power_w: float = 1.8
    rx_power_w: float = 1.4

    def __post_init__(self):
        if self.tx_power_w <= 0 or self.rx_power_w <= 0:
            raise ScenarioError("power draws must be positive")


@dataclass(frozen=True)
class CbrSpec:
    """Constant-bit-rate traffic: fixed-size packets at a fixed rate.

    ``sources`` defaults to half the vehicles. ``pairs`` pins explicit
    (source, destination) node ids; otherwise pairs come from a seeded
    shuffle. Flow start times are staggered evenly from ``start_min``.
    """

    rate_kbps: float = 512.0
    packet_bytes: int = 512
    duration: float = 30.0
    sources: int | None = None
    start_min: float = 10.0
    pairs: tuple[tuple[int, int], ...] | None = None

    def __post_init__(self):
        if self.rate_kbps <= 0:
            raise ScenarioError("CBR rate must be positive")
        if self.packet_bytes <= 0:
            raise ScenarioError("CBR packet size must be positive")
        if self.duration <= 0:
            raise ScenarioError("CBR duration must be positive")
        if self.start_min < 0:
            raise ScenarioError("CBR start must be >= 0")
        if self.pairs is not None:
            for s, d in self.pairs:
                if s == d:
                    raise ScenarioError(f"CBR pair {s}>{d} sends to itself")


@dataclass(frozen=True)
class ScenarioSpec:
    """Complete simulation scenario; immutable and safe to share."""

    area: tuple[float, float] = (600.0, 400.0)
    vehicle_count: int = 20
    sim_duration: float = 180.0
    mobility: str = "grid"
    trace_path: str | None = None
    block_size: float = 100.0
    speed_range: tuple[float, float] = (8.0, 14.0)
    # When set, pins the mobility realization and the traffic pairing, so
    # replications differ only in channel noise (trace-file mobility is
    # already fixed by nature).
    layout_seed: int | None = None
    cbr: CbrSpec = field(default_factory=CbrSpec)
    channel: ChannelSpec = field(default_factory=ChannelSpec)
    energy: EnergySpec = field(default_factory=EnergySpec)

    def __post_init__(self):
        if self.area[0] <= 0 or self.area[1] <= 0:
            raise ScenarioError("area dimensions must be positive")
        if self.vehicle_count < 2:
            raise ScenarioError("need at least 2 vehicles")
        if self.sim_duration <= 0:
            raise ScenarioError("sim duration must be positive")
        if self.mobility not in ("grid", "trace"):
            raise ScenarioError(f"unknown mobility source {self.mobility!r}")
        if self.mobility == "trace" and not self.trace_path:
            raise ScenarioError("trace mobility needs TRACE_FILE")
        if self.block_size <= 0:
            raise ScenarioError("block size must be positive")
        if not 0 < self.speed_range[0] <= self.speed_range[1]:
            raise ScenarioError("speed range must satisfy 0 < min <= max")
        if self.n_sources > self.vehicle_count // 2:
            raise ScenarioError(
                f"{self.n_sources} CBR sources exceed half of "
                f"{self.vehicle_count} vehicles")
        if self.cbr.duration > self.sim_duration:
            raise ScenarioError("CBR duration exceeds sim duration")
        if self.cbr.start_min + self.cbr.duration > self.sim_duration:
            raise ScenarioError("CBR flows would outlive the simulation")

    @property
    def n_sources(self) -> int:
        if self.cbr.pairs is not None:
            return len(self.cbr.pairs)
        if self.cbr.sources is not None:
            return self.cbr.sources
        return self.vehicle_count // 2


@dataclass(frozen=True)
class Flow:
    """One CBR stream, fully resolved: who, when, and how many packets."""

    src: int
    dst: int
    start: float
    packet_count: int
    interval: float


def derive_flows(spec: ScenarioSpec, rng) -> tuple[Flow, ...]:
    """Resolve the traffic matrix into concrete flows.

    Pairing uses a seeded shuffle (first half sources, next slice
    destinations) unless the scenario pins explicit pairs. Start times are
    staggered evenly over [start_min, sim_duration - duration - 10], which
    degenerates to a common start when the window is empty. The packet count
    is the whole number of packets fitting the rate x duration bit budget.
    """
    cbr = spec.cbr
    k = spec.n_sources
    if k == 0:
        return ()
    if cbr.pairs is not None:
        pairs = cbr.pairs
    else:
        order = list(rng.permutation(spec.vehicle_count))
        pairs = tuple((int(order[i]), int(order[k + i])) for i in range(k))
    rate_bps = cbr.rate_kbps * 1000.0
    bits_per_packet = cbr.packet_bytes * 8
    count = int(rate_bps * cbr.duration // bits_per_packet)
    interval = bits_per_packet / rate_bps
    lo = cbr.start_min
    hi = max(lo, spec.sim_duration - cbr.duration - 10.0)
    flows = []
    for i, (s, d) in enumerate(pairs):
        start = lo if len(pairs) == 1 else lo + i * (hi - lo) / (len(pairs) - 1)
        flows.append(Flow(src=s, dst=d, start=start,
                          packet_count=count, interval=interval))
    return tuple(flows)


# Keyed-text scenario format ------------------------------------------------

_TRUE = {"on", "true", "1", "yes"}
_FALSE = {"off", "false", "0", "no"}


def _parse_bool(value: str, key: str) -> bool:
    v = value.lower()
    if v in _TRUE:
        return True
    if v in _FALSE:
        return False
    raise ScenarioError(f"{key}: expected on/off, got {value!r}")


def _parse_pairs(value: str) -> tuple[tuple[int, int], ...]:
    pairs = []
    for chunk in value.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if ">" not in chunk:
            raise ScenarioError(f"CBR_PAIRS entry {chunk!r} is not SRC>DST")
        s, _, d = chunk.partition(">")
        pairs.append((int(s), int(d)))
    return tuple(pairs)


def parse_scenario(text: str) -> ScenarioSpec:
    """Build a ScenarioSpec from keyed text. Unknown keys are errors."""
    kv: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioError(f"line {lineno}: expected KEY=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip().upper()
        if key in kv:
            raise ScenarioError(f"line {lineno}: duplicate key {key}")
        kv[key] = value.strip()

    def pop(key, default=None):
        return kv.pop(key, default)

    try:
        area_raw = pop("AREA")
        if area_raw is not None:
            w, _, h = area_raw.lower().partition("x")
            area = (float(w), float(h))
        else:
            area = ScenarioSpec.__dataclass_fields__["area"].default

        cbr_kwargs = {}
        if (v := pop("CBR_RATE_KBPS")) is not None:
            cbr_kwargs["rate_kbps"] = float(v)
        if (v := pop("CBR_PACKET_BYTES")) is not None:
            cbr_kwargs["packet_bytes"] = int(v)
        if (v := pop("CBR_DURATION")) is not None:
            cbr_kwargs["duration"] = float(v)
        if (v := pop("CBR_SOURCES")) is not None:
            cbr_kwargs["sources"] = int(v)
        if (v := pop("CBR_START_MIN")) is not None:
            cbr_kwargs["start_min"] = float(v)
        if (v := pop("CBR_PAIRS")) is not None:
            cbr_kwargs["pairs"] = _parse_pairs(v)

        ch_kwargs = {}
        if (v := pop("BANDWIDTH_BPS")) is not None:
            ch_kwargs["bandwidth_bps"] = float(v)
        if (v := pop("NOMINAL_RANGE")) is not None:
            ch_kwargs["nominal_range"] = float(v)
        if (v := pop("NAKAGAMI_M")) is not None:
            ch_kwargs["nakagami_m"] = float(v)
        if (v := pop("PATH_LOSS_EXPONENT")) is not None:
            ch_kwargs["path_loss_exponent"] = float(v)
        if (v := pop("FADING")) is not None:
            ch_kwargs["fading_enabled"] = _parse_bool(v, "FADING")

        en_kwargs = {}
        if (v := pop("TX_POWER_W")) is not None:
            en_kwargs["tx_power_w"] = float(v)
        if (v := pop("RX_POWER_W")) is not None:
            en_kwargs["rx_power_w"] = float(v)

        kwargs = {
            "area": area,
            "cbr": CbrSpec(**cbr_kwargs),
            "channel": ChannelSpec(**ch_kwargs),
            "energy": EnergySpec(**en_kwargs),
        }
        if (v := pop("VEHICLES")) is not None:
            kwargs["vehicle_count"] = int(v)
        if (v := pop("SIM_DURATION")) is not None:
            kwargs["sim_duration"] = float(v)
        if (v := pop("MOBILITY")) is not None:
            kwargs["mobility"] = v.lower()
        if (v := pop("TRACE_FILE")) is not None:
            kwargs["trace_path"] = v
        if (v := pop("BLOCK_SIZE")) is not None:
            kwargs["block_size"] = float(v)
        if (v := pop("LAYOUT_SEED")) is not None:
            kwargs["layout_seed"] = int(v)
        smin = pop("SPEED_MIN")
        smax = pop("SPEED_MAX")
        if smin is not None or smax is not None:
            default = ScenarioSpec.__dataclass_fields__["speed_range"].default
            kwargs["speed_range"] = (
                float(smin) if smin is not None else default[0],
                float(smax) if smax is not None else default[1],
            )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(f"bad scenario value: {exc}") from exc

    if kv:
        raise ScenarioError(f"unknown scenario keys: {', '.join(sorted(kv))}")
    return ScenarioSpec(**kwargs)


def load_scenario(path: str | Path) -> ScenarioSpec:
    path = Path(path)
    spec = parse_scenario(path.read_text())
    # Trace paths are relative to the scenario file.
    if spec.trace_path and not Path(spec.trace_path).is_absolute():
        spec = replace(spec, trace_path=str(path.parent / spec.trace_path))
    return spec


def dump_scenario(spec: ScenarioSpec) -> str:
    lines = [
        f"AREA={spec.area[0]:g}x{spec.area[1]:g}",
        f"VEHICLES={spec.vehicle_count}",
        f"SIM_DURATION={spec.sim_duration!r}",
        f"MOBILITY={spec.mobility}",
    ]
    if spec.trace_path:
        lines.append(f"TRACE_FILE={spec.trace_path}")
    if spec.layout_seed is not None:
        lines.append(f"LAYOUT_SEED={spec.layout_seed}")
    lines += [
        f"BLOCK_SIZE={spec.block_size!r}",
        f"SPEED_MIN={spec.speed_range[0]!r}",
        f"SPEED_MAX={spec.speed_range[1]!r}",
        f"CBR_RATE_KBPS={spec.cbr.rate_kbps!r}",
        f"CBR_PACKET_BYTES={spec.cbr.packet_bytes}",
        f"CBR_DURATION={spec.cbr.duration!r}",
    ]
    if spec.cbr.sources is not None:
        lines.append(f"CBR_SOURCES={spec.cbr.sources}")
    lines.append(f"CBR_START_MIN={spec.cbr.start_min!r}")
    if spec.cbr.pairs is not None:
        lines.append("CBR_PAIRS=" + ",".join(f"{s}>{d}" for s, d in spec.cbr.pairs))
    lines += [
        f"BANDWIDTH_BPS={spec.channel.bandwidth_bps!r}",
        f"NOMINAL_RANGE={spec.channel.nominal_range!r}",
        f"NAKAGAMI_M={spec.channel.nakagami_m!r}",
        f"PATH_LOSS_EXPONENT={spec.channel.path_loss_exponent!r}",
        f"FADING={'on' if spec.channel.fading_enabled else 'off'}",
        f"TX_POWER_W={spec.energy.tx_power_w!r}",
        f"RX_POWER_W={spec.energy.rx_power_w!r}",
    ]
    return "\n".join(lines) + "\n"
