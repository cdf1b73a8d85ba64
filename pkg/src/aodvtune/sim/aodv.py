"""Protocol-parameter view of a genome plus the route-discovery schedule.

Route discovery uses expanding-ring search: request floods start at
TTL_START, grow by TTL_INCREMENT while within TTL_THRESHOLD, then go
network-wide at NET_DIAMETER for the initial attempt plus RREQ_RETRIES
retries. Each ring is awaited for a TTL-scaled timeout capped at
MAX_RREQ_TIMEOUT.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..params import Genome

__all__ = ["AodvConfig", "ring_ttl_sequence", "ring_timeout"]


@dataclass(frozen=True)
class AodvConfig:
    hello_interval: float
    active_route_timeout: float
    my_route_timeout: float
    node_traversal_time: float
    max_rreq_timeout: float
    net_diameter: int
    allowed_hello_loss: int
    rreq_retries: int
    ttl_start: int
    ttl_increment: int
    ttl_threshold: int

    def __post_init__(self):
        for name in ("hello_interval", "active_route_timeout", "my_route_timeout",
                     "node_traversal_time", "max_rreq_timeout"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        for name in ("net_diameter", "ttl_start", "ttl_increment", "ttl_threshold"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        for name in ("allowed_hello_loss", "rreq_retries"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    @classmethod
    def from_genome(cls, g: Genome) -> "AodvConfig":
        v = g.values
        return cls(hello_interval=v[0], active_route_timeout=v[1],
                   my_route_timeout=v[2], node_traversal_time=v[3],
                   max_rreq_timeout=v[4], net_diameter=int(v[5]),
                   allowed_hello_loss=int(v[6]), rreq_retries=int(v[7]),
                   ttl_start=int(v[8]), ttl_increment=int(v[9]),
                   ttl_threshold=int(v[10]))


def ring_ttl_sequence(cfg: AodvConfig) -> tuple[int, ...]:
    """TTLs of successive discovery attempts for one destination."""
    ttls = []
    ttl = cfg.ttl_start
    while ttl <= cfg.ttl_threshold:
        ttls.append(ttl)
        ttl += cfg.ttl_increment
    ttls.extend([cfg.net_diameter] * (1 + cfg.rreq_retries))
    return tuple(ttls)


def ring_timeout(ttl: int, cfg: AodvConfig) -> float:
    """How long to wait for a reply to a ring of the given TTL."""
    if ttl < 1:
        raise ValueError("ttl must be >= 1")
    return min(2.0 * cfg.node_traversal_time * (ttl + 2), cfg.max_rreq_timeout)
