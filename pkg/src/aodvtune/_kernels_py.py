"""Pure-Python reception kernels; import-time fallback for the compiled core.

Mirrors ``_kernels.pyx`` operation for operation: both use libm exp/pow/sqrt
through identical arithmetic, so results are bit-identical across backends
and the simulator's determinism does not depend on which one is active.
"""

from __future__ import annotations

from math import exp, pow as fpow, sqrt

BACKEND = "python"


def _survival(d2: float, nominal_range: float, m: int, path_loss_exp: float) -> float:
    # Survival of gamma-distributed received power against the mean-power
    # deficit x = (d / range)^ple, closed form for integer shape m.
    if path_loss_exp == 2.0:
        x = d2 / (nominal_range * nominal_range)
    else:
        x = fpow(sqrt(d2) / nominal_range, path_loss_exp)
    mx = m * x
    term = 1.0
    acc = 1.0
    for k in range(1, m):
        term = term * mx / k
        acc += term
    return exp(-mx) * acc


def reception_probability(distance: float, nominal_range: float, m: int,
                          path_loss_exp: float, fading_enabled: bool) -> float:
    """Per-frame reception probability at the given distance."""
    if not fading_enabled:
        return 1.0 if distance <= nominal_range else 0.0
    return _survival(distance * distance, nominal_range, m, path_loss_exp)


def broadcast_reception(xs, ys, sender: int, nominal_range: float, m: int,
                        path_loss_exp: float, fading_enabled: bool,
                        uniforms, out_idx) -> int:
    """Decide reception of one broadcast frame for every candidate node.

    Nodes beyond ``nominal_range`` never receive. ``uniforms`` holds one draw
    per node (the sender's slot is ignored). Receiver indices are written to
    ``out_idx`` in node order; returns how many received.
    """
    n = len(xs)
    sx = xs[sender]
    sy = ys[sender]
    range2 = nominal_range * nominal_range
    count = 0
    for j in range(n):
        if j == sender:
            continue
        dx = xs[j] - sx
        dy = ys[j] - sy
        d2 = dx * dx + dy * dy
        if d2 > range2:
            continue
        if fading_enabled:
            p = _survival(d2, nominal_range, m, path_loss_exp)
            if not uniforms[j] < p:
                continue
        out_idx[count] = j
        count += 1
    return count
