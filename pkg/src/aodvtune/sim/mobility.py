"""Vehicle mobility: built-in Manhattan-grid walker and trace file I/O.

The built-in model lays a grid of intersections over the scenario area
(one block per ``block_size`` meters). Each vehicle starts at a random
intersection, drives at a constant per-vehicle speed, and picks a random
outgoing street at every intersection (no U-turn unless dead-ended).
Positions are sampled once per second.

Trace files are plain text: a ``#vanet-trace v1 width height duration``
header, then one ``t node_id x y`` record per line sorted by time then node.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .scenario import ScenarioSpec

__all__ = [
    "MobilityTrace",
    "TraceError",
    "generate_mobility",
    "load_trace",
    "write_trace",
]


class TraceError(ValueError):
    """A trace file cannot be parsed or fails validation."""


@dataclass(frozen=True, eq=False)
class MobilityTrace:
    """Positions of every node at 1 Hz: arrays are (duration+1, n)."""

    width: float
    height: float
    duration: int
    node_ids: tuple[int, ...]
    xs: np.ndarray
    ys: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    def equals(self, other: "MobilityTrace") -> bool:
        return (self.width == other.width and self.height == other.height
                and self.duration == other.duration
                and self.node_ids == other.node_ids
                and np.array_equal(self.xs, other.xs)
                and np.array_equal(self.ys, other.ys))


def generate_mobility(spec: ScenarioSpec, seed) -> MobilityTrace:
    """Drive ``vehicle_count`` walkers over the grid for the sim duration."""
    rng = np.random.default_rng(seed)
    width, height = spec.area
    block = spec.block_size
    cols = int(width // block) + 1
    rows = int(height // block) + 1
    duration = int(math.floor(spec.sim_duration))
    n = spec.vehicle_count

    def neighbors(ci, cj):
        out = []
        if ci > 0:
            out.append((ci - 1, cj))
        if ci < cols - 1:
            out.append((ci + 1, cj))
        if cj > 0:
            out.append((ci, cj - 1))
        if cj < rows - 1:
            out.append((ci, cj + 1))
        return out

    xs = np.empty((duration + 1, n))
    ys = np.empty((duration + 1, n))
    speeds = spec.speed_range[0] + rng.random(n) * (spec.speed_range[1] - spec.speed_range[0])

    # Per-vehicle edge walk: current intersection, target intersection,
    # offset in meters along the edge. Positions are exact interpolations,
    # so no float drift off the grid.
    state = []
    for _ in range(n):
        ci = int(rng.integers(cols))
        cj = int(rng.integers(rows))
        opts = neighbors(ci, cj)
        if opts:
            ti, tj = opts[int(rng.integers(len(opts)))]
        else:
            ti, tj = ci, cj
        state.append([ci, cj, ti, tj, 0.0])

    def position(s):
        ci, cj, ti, tj, off = s
        frac = off / block
        return ((ci + (ti - ci) * frac) * block, (cj + (tj - cj) * frac) * block)

    for t in range(duration + 1):
        for v in range(n):
            xs[t, v], ys[t, v] = position(state[v])
        if t == duration:
            break
        for v in range(n):
            s = state[v]
            if (s[0], s[1]) == (s[2], s[3]):
                continue
            remaining = speeds[v]
            while remaining > 0:
                to_target = block - s[4]
                if remaining < to_target:
                    s[4] += remaining
                    break
                remaining -= to_target
                s[0], s[1] = s[2], s[3]
                s[4] = 0.0
                opts = neighbors(s[0], s[1])
                back = (2 * s[0] - s[2], 2 * s[1] - s[3])
                forward = [o for o in opts if o != back] if len(opts) > 1 else opts
                s[2], s[3] = forward[int(rng.integers(len(forward)))]
    return MobilityTrace(width=width, height=height, duration=duration,
                         node_ids=tuple(range(n)), xs=xs, ys=ys)


def write_trace(trace: MobilityTrace, path: str | Path) -> None:
    lines = [f"#vanet-trace v1 {trace.width!r} {trace.height!r} {trace.duration}"]
    for t in range(trace.duration + 1):
        for k, node in enumerate(trace.node_ids):
            lines.append(f"{t} {node} {trace.xs[t, k]!r} {trace.ys[t, k]!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_trace(path: str | Path) -> MobilityTrace:
    """Parse and validate a trace file.

    Every node must appear exactly once per second over 0..duration, in
    order, with positions inside the declared area.
    """
    path = Path(path)
    try:
        raw = path.read_text()
    except OSError as exc:
        raise TraceError(f"{path}: {exc}") from exc
    lines = raw.splitlines()
    if not lines:
        raise TraceError(f"{path}: empty trace")
    header = lines[0].split()
    if len(header) != 5 or header[0] != "#vanet-trace" or header[1] != "v1":
        raise TraceError(f"{path}:1: bad header (want '#vanet-trace v1 width height duration')")
    try:
        width, height = float(header[2]), float(header[3])
        duration = int(header[4])
    except ValueError as exc:
        raise TraceError(f"{path}:1: bad header values: {exc}") from exc
    if duration < 0:
        raise TraceError(f"{path}:1: negative duration")

    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 4:
            raise TraceError(f"{path}:{lineno}: expected 't node x y', got {line!r}")
        try:
            t = int(parts[0])
            node = int(parts[1])
            x = float(parts[2])
            y = float(parts[3])
        except ValueError as exc:
            raise TraceError(f"{path}:{lineno}: {exc}") from exc
        if not (0.0 <= x <= width and 0.0 <= y <= height):
            raise TraceError(f"{path}:{lineno}: position ({x}, {y}) outside "
                             f"{width} x {height} area")
        records.append((lineno, t, node, x, y))

    node_ids = tuple(sorted({r[2] for r in records}))
    if not node_ids:
        raise TraceError(f"{path}: no records")
    index = {node: k for k, node in enumerate(node_ids)}
    n = len(node_ids)
    xs = np.full((duration + 1, n), np.nan)
    ys = np.full((duration + 1, n), np.nan)
    last_t = {node: -1 for node in node_ids}
    for lineno, t, node, x, y in records:
        if t > duration:
            raise TraceError(f"{path}:{lineno}: time {t} beyond declared duration {duration}")
        if t <= last_t[node]:
            raise TraceError(f"{path}:{lineno}: timestamps for node {node} not increasing")
        last_t[node] = t
        xs[t, index[node]] = x
        ys[t, index[node]] = y
    if np.isnan(xs).any():
        t_missing, k_missing = map(int, np.argwhere(np.isnan(xs))[0])
        raise TraceError(f"{path}: node {node_ids[k_missing]} has no sample at "
                         f"t={t_missing}; full 1 Hz coverage over 0..{duration} required")
    return MobilityTrace(width=width, height=height, duration=duration,
                         node_ids=node_ids, xs=xs, ys=ys)
