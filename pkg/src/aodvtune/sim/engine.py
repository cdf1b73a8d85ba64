"""Desk-scale discrete-event VANET simulator.

Vehicles move along a sampled trace; half of them (by default) push
constant-bit-rate datagrams to peers. Routing is reactive: routes are found
on demand by expanding-ring request floods, answered by the destination or
any node holding a fresh route, and kept alive only while used. Periodic
hello broadcasts provide neighbor liveness. Per-frame loss comes only from
the fading channel (no MAC contention), and energy is counted for the
transmitting and receiving states alone.

One simulator instance is strictly single-threaded and a pure function of
(config, scenario, seed); parallelism belongs to the evaluation layer.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, replace

import numpy as np

from .. import kernels
from ..params import Genome
from .aodv import AodvConfig, ring_timeout, ring_ttl_sequence
from .channel import reception_probability
from .mobility import MobilityTrace, TraceError, generate_mobility, load_trace
from .scenario import ScenarioError, ScenarioSpec, derive_flows

__all__ = ["SimOutcome", "FrameRecord", "simulate",
           "HELLO_BYTES", "RREQ_BYTES", "RREP_BYTES", "QUEUE_CAP"]

# Control frame sizes follow the routing message formats (no IP/UDP overhead);
# data frames are payload-sized.
HELLO_BYTES = 20
RREQ_BYTES = 24
RREP_BYTES = 20

# Pending data packets buffered per destination while discovery runs.
QUEUE_CAP = 64

_EV_CBR = 0
_EV_RECEIVE = 1
_EV_HELLO = 2
_EV_RING = 3

_K_RREQ = 0
_K_RREP = 1
_K_DATA = 2


@dataclass(frozen=True)
class SimOutcome:
    """Totals of one replication."""

    energy_joules: float
    data_packets_sent: int
    data_packets_delivered: int
    pdr: float
    hello_count: int
    rreq_count: int
    rrep_count: int
    route_discoveries_failed: int

    def to_csv_row(self) -> str:
        return ",".join([
            repr(self.energy_joules), str(self.data_packets_sent),
            str(self.data_packets_delivered), repr(self.pdr),
            str(self.hello_count), str(self.rreq_count),
            str(self.rrep_count), str(self.route_discoveries_failed),
        ])

    CSV_HEADER = ("energy_joules,data_packets_sent,data_packets_delivered,"
                  "pdr,hello_count,rreq_count,rrep_count,route_discoveries_failed")


@dataclass(frozen=True)
class FrameRecord:
    """One transmission, as logged for the energy replay cross-check."""

    kind: str
    size_bytes: int
    sender: int
    receivers: int


def simulate(cfg: AodvConfig | Genome, scenario: ScenarioSpec, seed,
             frame_log: list | None = None) -> SimOutcome:
    """Run one replication. Deterministic given (cfg, scenario, seed).

    ``frame_log``, when given a list, collects a FrameRecord per transmitted
    frame so the energy ledger can be replayed independently.
    """
    if isinstance(cfg, Genome):
        cfg = AodvConfig.from_genome(cfg)
    return _Simulation(cfg, scenario, seed, frame_log).run()


class _Simulation:
    def __init__(self, cfg: AodvConfig, scenario: ScenarioSpec, seed,
                 frame_log: list | None):
        self.cfg = cfg
        self.scenario = scenario
        self.frame_log = frame_log

        ss = np.random.SeedSequence(seed)
        ss_mobility, ss_pairs, ss_channel = ss.spawn(3)
        # layout_seed pins the scenario realization (mobility + pairing) so
        # replications differ only in channel noise.
        layout = scenario.layout_seed
        self.trace = self._resolve_trace(ss_mobility if layout is None else layout)
        self.rng = np.random.default_rng(ss_channel)
        self.flows = self._resolve_flows(
            np.random.default_rng(ss_pairs if layout is None else layout + 1))

        self.n = self.trace.n_nodes
        self.duration = scenario.sim_duration
        self.xs = self.trace.xs
        self.ys = self.trace.ys
        self.max_row = self.xs.shape[0] - 1

        ch = scenario.channel
        self.bw = ch.bandwidth_bps
        self.range2 = ch.nominal_range * ch.nominal_range
        self.fading = ch.fading_enabled
        self.ple = ch.path_loss_exponent
        self.integral_m = ch.nakagami_m == int(ch.nakagami_m)
        self.m_int = int(ch.nakagami_m) if self.integral_m else 0
        self.tx_w = scenario.energy.tx_power_w
        self.rx_w = scenario.energy.rx_power_w
        self.data_bytes = scenario.cbr.packet_bytes
        self.rings = ring_ttl_sequence(cfg)
        self.hello_silence = cfg.allowed_hello_loss * cfg.hello_interval

        n = self.n
        self.energy = [0.0] * n
        self.routes = [dict() for _ in range(n)]      # dst -> [next, hops, expires, refreshable]
        self.last_heard = [dict() for _ in range(n)]  # neighbor -> time
        self.queues = [dict() for _ in range(n)]      # dst -> pending count
        self.discoveries = [dict() for _ in range(n)]  # dst -> (ring_idx, token)
        self.seen_rreqs = [set() for _ in range(n)]
        self.rreq_ids = [0] * n
        self.source_windows = [[] for _ in range(n)]
        for fl in self.flows:
            self.source_windows[fl.src].append(
                (fl.start, fl.start + scenario.cbr.duration))

        self.idx_buf = np.empty(n, dtype=np.int32)
        self.heap = []
        self.seq = 0
        self.sent = 0
        self.delivered = 0
        self.hello_tx = 0
        self.rreq_tx = 0
        self.rrep_tx = 0
        self.disc_failed = 0

    def _resolve_trace(self, mobility_seed) -> MobilityTrace:
        sc = self.scenario
        if sc.mobility == "trace":
            trace = load_trace(sc.trace_path)
            if trace.duration < math.floor(sc.sim_duration):
                raise TraceError(
                    f"trace covers {trace.duration} s but the scenario "
                    f"runs {sc.sim_duration} s")
            if trace.n_nodes != sc.vehicle_count:
                raise ScenarioError(
                    f"trace has {trace.n_nodes} nodes, scenario expects "
                    f"{sc.vehicle_count}")
            return trace
        return generate_mobility(sc, mobility_seed)

    def _resolve_flows(self, rng_pairs):
        flows = derive_flows(self.scenario, rng_pairs)
        if self.scenario.cbr.pairs is not None:
            index = {nid: k for k, nid in enumerate(self.trace.node_ids)}
            mapped = []
            for fl in flows:
                if fl.src not in index or fl.dst not in index:
                    missing = fl.src if fl.src not in index else fl.dst
                    raise ScenarioError(
                        f"unknown node id {missing} in traffic spec")
                mapped.append(replace(fl, src=index[fl.src], dst=index[fl.dst]))
            flows = tuple(mapped)
        return flows

    # -- event machinery --

    def _push(self, t, node, tag, payload):
        self.seq += 1
        heapq.heappush(self.heap, (t, node, self.seq, tag, payload))

    def run(self) -> SimOutcome:
        cfg = self.cfg
        for node in range(self.n):
            if cfg.hello_interval <= self.duration:
                self._push(cfg.hello_interval, node, _EV_HELLO, None)
        for f_idx, fl in enumerate(self.flows):
            self._push(fl.start, fl.src, _EV_CBR, (f_idx, 0))

        heap = self.heap
        duration = self.duration
        while heap:
            t, node, _, tag, payload = heapq.heappop(heap)
            if t > duration:
                break
            if tag == _EV_RECEIVE:
                self._on_receive(t, node, payload)
            elif tag == _EV_CBR:
                self._on_cbr(t, node, payload)
            elif tag == _EV_HELLO:
                self._on_hello(t, node)
            else:
                self._on_ring_timeout(t, node, payload)

        sent = self.sent
        return SimOutcome(
            energy_joules=math.fsum(self.energy),
            data_packets_sent=sent,
            data_packets_delivered=self.delivered,
            pdr=(self.delivered / sent) if sent else 0.0,
            hello_count=self.hello_tx,
            rreq_count=self.rreq_tx,
            rrep_count=self.rrep_tx,
            route_discoveries_failed=self.disc_failed,
        )

    # -- routing state helpers --

    def _active_route(self, node, dst, t):
        entry = self.routes[node].get(dst)
        if entry is None:
            return None
        if entry[2] <= t:
            del self.routes[node][dst]
            return None
        return entry

    def _neighbor_alive(self, node, neighbor, t):
        heard = self.last_heard[node].get(neighbor)
        return heard is None or t - heard <= self.hello_silence

    def _install_route(self, node, dst, next_hop, hops, t,
                       refreshable=True, lifetime=None):
        if dst == node:
            return
        if lifetime is None:
            lifetime = self.cfg.active_route_timeout
        self.routes[node][dst] = [next_hop, hops, t + lifetime, refreshable]

    def _refresh(self, entry, t):
        if entry[3]:
            expiry = t + self.cfg.active_route_timeout
            if expiry > entry[2]:
                entry[2] = expiry

    # -- transmission --

    def _log_frame(self, kind, nbytes, sender, receivers):
        if self.frame_log is not None:
            self.frame_log.append(FrameRecord(kind, nbytes, sender, receivers))

    def _position_row(self, t):
        row = int(t)
        return row if row <= self.max_row else self.max_row

    def _tx_broadcast(self, node, nbytes, payload, t, kind):
        xs = self.xs[self._position_row(t)]
        ys = self.ys[self._position_row(t)]
        u = self.rng.random(self.n)
        ch = self.scenario.channel
        if self.integral_m:
            count = kernels.broadcast_reception(
                xs, ys, node, ch.nominal_range, self.m_int, self.ple,
                self.fading, u, self.idx_buf)
        else:
            count = self._broadcast_fractional_m(xs, ys, node, u)
        airtime = nbytes * 8.0 / self.bw
        self.energy[node] += airtime * self.tx_w
        if count:
            e_rx = airtime * self.rx_w
            rx_t = t + airtime
            idx = self.idx_buf
            for k in range(count):
                j = int(idx[k])
                self.energy[j] += e_rx
                if payload is None:
                    self.last_heard[j][node] = t
                else:
                    self._push(rx_t, j, _EV_RECEIVE, payload)
        self._log_frame(kind, nbytes, node, count)

    def _broadcast_fractional_m(self, xs, ys, node, u):
        ch = self.scenario.channel
        count = 0
        for j in range(self.n):
            if j == node:
                continue
            dx = xs[j] - xs[node]
            dy = ys[j] - ys[node]
            d2 = dx * dx + dy * dy
            if d2 > self.range2:
                continue
            if self.fading and not u[j] < reception_probability(math.sqrt(d2), ch):
                continue
            self.idx_buf[count] = j
            count += 1
        return count

    def _tx_unicast(self, node, receiver, nbytes, payload, t, kind):
        row = self._position_row(t)
        dx = self.xs[row, node] - self.xs[row, receiver]
        dy = self.ys[row, node] - self.ys[row, receiver]
        d2 = dx * dx + dy * dy
        airtime = nbytes * 8.0 / self.bw
        self.energy[node] += airtime * self.tx_w
        u = self.rng.random()
        ok = d2 <= self.range2
        if ok and self.fading:
            ch = self.scenario.channel
            if self.integral_m:
                p = kernels.reception_probability(
                    math.sqrt(d2), ch.nominal_range, self.m_int, self.ple, True)
            else:
                p = reception_probability(math.sqrt(d2), ch)
            ok = u < p
        if ok:
            self.energy[receiver] += airtime * self.rx_w
            self._push(t + airtime, receiver, _EV_RECEIVE, payload)
        self._log_frame(kind, nbytes, node, 1 if ok else 0)

    # -- hello / liveness --

    def _on_hello(self, t, node):
        if self._hello_active(node, t):
            self.hello_tx += 1
            self._tx_broadcast(node, HELLO_BYTES, None, t, "hello")
        nxt = t + self.cfg.hello_interval
        if nxt <= self.duration:
            self._push(nxt, node, _EV_HELLO, None)

    def _hello_active(self, node, t):
        for start, end in self.source_windows[node]:
            if start <= t < end:
                return True
        if self.queues[node] or self.discoveries[node]:
            return True
        routes = self.routes[node]
        expired = [d for d, e in routes.items() if e[2] <= t]
        for d in expired:
            del routes[d]
        return bool(routes)

    # -- traffic --

    def _on_cbr(self, t, src, data):
        f_idx, pkt = data
        fl = self.flows[f_idx]
        self.sent += 1
        self._dispatch_data(src, src, fl.dst, self.cfg.net_diameter, t)
        nxt = pkt + 1
        if nxt < fl.packet_count:
            self._push(fl.start + nxt * fl.interval, src, _EV_CBR, (f_idx, nxt))

    def _dispatch_data(self, node, src, dst, hops_remaining, t):
        entry = self._active_route(node, dst, t)
        if entry is not None and not self._neighbor_alive(node, entry[0], t):
            del self.routes[node][dst]
            entry = None
        if entry is not None:
            self._refresh(entry, t)
            self._tx_unicast(node, entry[0], self.data_bytes,
                             (_K_DATA, src, dst, hops_remaining, node), t, "data")
            return
        if node == src:
            q = self.queues[node]
            q[dst] = min(q.get(dst, 0) + 1, QUEUE_CAP)
            self._ensure_discovery(node, dst, t)
        # intermediate node without a usable route: the packet dies here

    def _flush_queue(self, node, dst, t):
        count = self.queues[node].pop(dst, 0)
        for _ in range(count):
            self._dispatch_data(node, node, dst, self.cfg.net_diameter, t)

    # -- discovery --

    def _ensure_discovery(self, node, dst, t):
        if dst not in self.discoveries[node]:
            self._launch_ring(node, dst, 0, t)

    def _launch_ring(self, node, dst, ring_idx, t):
        ttl = self.rings[ring_idx]
        self.rreq_ids[node] += 1
        rreq_id = self.rreq_ids[node]
        self.seq += 1
        token = self.seq
        self.discoveries[node][dst] = (ring_idx, token)
        self.seen_rreqs[node].add((node, rreq_id))
        self.rreq_tx += 1
        self._tx_broadcast(node, RREQ_BYTES,
                           (_K_RREQ, node, rreq_id, dst, ttl, 0, node),
                           t, "rreq")
        self._push(t + ring_timeout(ttl, self.cfg), node, _EV_RING, (dst, token))

    def _on_ring_timeout(self, t, node, data):
        dst, token = data
        state = self.discoveries[node].get(dst)
        if state is None or state[1] != token:
            return
        if self._active_route(node, dst, t) is not None:
            # Route appeared through cross traffic; discovery is moot.
            del self.discoveries[node][dst]
            self._flush_queue(node, dst, t)
            return
        nxt = state[0] + 1
        if nxt < len(self.rings):
            self._launch_ring(node, dst, nxt, t)
        else:
            del self.discoveries[node][dst]
            self.disc_failed += 1
            self.queues[node].pop(dst, None)

    def _send_rrep(self, node, origin, target, hops_from_target, t):
        rev = self._active_route(node, origin, t)
        if rev is None or hops_from_target + 1 > self.cfg.net_diameter:
            return
        self._refresh(rev, t)
        self.rrep_tx += 1
        self._tx_unicast(node, rev[0], RREP_BYTES,
                         (_K_RREP, origin, target, hops_from_target, node),
                         t, "rrep")

    # -- reception --

    def _on_receive(self, t, node, payload):
        kind = payload[0]
        sender = payload[-1]
        self.last_heard[node][sender] = t
        if kind == _K_DATA:
            _, src, dst, hops_remaining, _ = payload
            self._install_route(node, src, sender,
                                self.cfg.net_diameter - hops_remaining + 1, t)
            if node == dst:
                self.delivered += 1
            elif hops_remaining > 1:
                self._dispatch_data(node, src, dst, hops_remaining - 1, t)
        elif kind == _K_RREQ:
            self._on_rreq(t, node, payload)
        else:
            self._on_rrep(t, node, payload)

    def _on_rreq(self, t, node, payload):
        _, origin, rreq_id, target, ttl_rem, hops, sender = payload
        key = (origin, rreq_id)
        if key in self.seen_rreqs[node]:
            return
        self.seen_rreqs[node].add(key)
        self._install_route(node, origin, sender, hops + 1, t)
        if node == target:
            self._send_rrep(node, origin, target, 0, t)
        elif (entry := self._active_route(node, target, t)) is not None:
            self._send_rrep(node, origin, target, entry[1], t)
        elif ttl_rem > 1:
            self.rreq_tx += 1
            self._tx_broadcast(node, RREQ_BYTES,
                               (_K_RREQ, origin, rreq_id, target,
                                ttl_rem - 1, hops + 1, node),
                               t, "rreq")

    def _on_rrep(self, t, node, payload):
        _, origin, target, hops_from_target, sender = payload
        at_origin = node == origin
        self._install_route(
            node, target, sender, hops_from_target + 1, t,
            refreshable=not at_origin,
            lifetime=self.cfg.my_route_timeout if at_origin
            else self.cfg.active_route_timeout)
        if at_origin:
            self.discoveries[node].pop(target, None)
            self._flush_queue(node, target, t)
        else:
            self._send_rrep(node, origin, target, hops_from_target + 1, t)
