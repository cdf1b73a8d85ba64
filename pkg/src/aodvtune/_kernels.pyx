# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled reception kernels: the per-frame hot path of the simulator.

Must stay arithmetic-identical to ``_kernels_py`` (same libm calls in the
same order); the parity test suite asserts bit-equality between backends.
"""

from libc.math cimport exp, pow, sqrt

BACKEND = "cython"


cdef inline double _survival_c(double d2, double nominal_range, int m,
                               double path_loss_exp) noexcept nogil:
    cdef double x, mx, term, acc
    cdef int k
    if path_loss_exp == 2.0:
        x = d2 / (nominal_range * nominal_range)
    else:
        x = pow(sqrt(d2) / nominal_range, path_loss_exp)
    mx = m * x
    term = 1.0
    acc = 1.0
    for k in range(1, m):
        term = term * mx / k
        acc += term
    return exp(-mx) * acc


def reception_probability(double distance, double nominal_range, int m,
                          double path_loss_exp, bint fading_enabled):
    """Per-frame reception probability at the given distance."""
    if not fading_enabled:
        return 1.0 if distance <= nominal_range else 0.0
    return _survival_c(distance * distance, nominal_range, m, path_loss_exp)


def broadcast_reception(double[::1] xs, double[::1] ys, Py_ssize_t sender,
                        double nominal_range, int m, double path_loss_exp,
                        bint fading_enabled, double[::1] uniforms,
                        int[::1] out_idx):
    """Decide reception of one broadcast frame for every candidate node.

    Nodes beyond ``nominal_range`` never receive. ``uniforms`` holds one draw
    per node (the sender's slot is ignored). Receiver indices are written to
    ``out_idx`` in node order; returns how many received.
    """
    cdef Py_ssize_t n = xs.shape[0]
    cdef double sx = xs[sender]
    cdef double sy = ys[sender]
    cdef double range2 = nominal_range * nominal_range
    cdef Py_ssize_t j
    cdef int count = 0
    cdef double dx, dy, d2, p
    for j in range(n):
        if j == sender:
            continue
        dx = xs[j] - sx
        dy = ys[j] - sy
        d2 = dx * dx + dy * dy
        if d2 > range2:
            continue
        if fading_enabled:
            p = _survival_c(d2, nominal_range, m, path_loss_exp)
            if not uniforms[j] < p:
                continue
        out_idx[count] = j
        count += 1
    return count
