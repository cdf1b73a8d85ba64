"""Channel primitives: frame airtime and per-frame reception probability."""

from __future__ import annotations

import math

from .. import kernels
from .scenario import ChannelSpec

__all__ = ["packet_airtime", "reception_probability"]


def packet_airtime(n_bytes: int, bandwidth_bps: float) -> float:
    """Seconds a frame of ``n_bytes`` occupies the channel."""
    if n_bytes <= 0:
        raise ValueError("frame size must be positive")
    if bandwidth_bps <= 0:
        raise ValueError("bandwidth must be positive")
    return n_bytes * 8.0 / bandwidth_bps


def reception_probability(distance: float, ch: ChannelSpec) -> float:
    """Probability one frame at ``distance`` meters is received.

    Without fading this is a hard cutoff at the nominal range. With fading
    the received power is Nakagami-m distributed around a distance-decayed
    mean, so success is the survival of a gamma variate at the threshold
    deficit x = (d/range)^ple. Integer shapes take the closed-form compiled
    path; fractional shapes go through the regularized incomplete gamma.
    """
    if distance < 0:
        raise ValueError("distance must be >= 0")
    m = ch.nakagami_m
    if m == int(m):
        return kernels.reception_probability(
            distance, ch.nominal_range, int(m),
            ch.path_loss_exponent, ch.fading_enabled)
    if not ch.fading_enabled:
        return 1.0 if distance <= ch.nominal_range else 0.0
    from scipy.special import gammaincc

    x = (distance / ch.nominal_range) ** ch.path_loss_exponent
    return float(gammaincc(m, m * x))
