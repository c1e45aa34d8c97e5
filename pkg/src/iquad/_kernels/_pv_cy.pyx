# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled principal-value quadrature kernels.

Literal loop transcriptions of the defining sums: midpoint weights, singular
lines excluded (or the primed lattice staggered by half a pitch).  These are
the hot inner loops of the oracle layer: O(n^4) for the double sums and
O(n^6) for the raw quadruple-kernel sums.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin

cnp.import_array()

BACKEND = "cython"

cdef double PI = 3.141592653589793


cdef void _fill_axis_kernel(double[:, ::1] k, int n, double pitch, bint stagger) nogil:
    cdef int i, j
    cdef double xi, xj, d
    for i in range(n):
        xi = (i - n // 2) * pitch
        for j in range(n):
            xj = (j - n // 2) * pitch
            if stagger:
                d = xj + pitch / 2.0 - xi
                k[i, j] = pitch / d
            else:
                d = xj - xi
                k[i, j] = 0.0 if d == 0.0 else pitch / d


def _axis_kernel(int n, double pitch, bint stagger):
    out = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] view = out
    _fill_axis_kernel(view, n, pitch, stagger)
    return out


def pv_sum2d(cnp.ndarray[double, ndim=2] f, double pitch, bint stagger=False):
    """Raw double sum ``sum f(x',y') pitch^2 / ((x'-x)(y'-y))`` (no 1/pi^2)."""
    cdef int n = f.shape[0]
    cdef cnp.ndarray[double, ndim=2] k = _axis_kernel(n, pitch, stagger)
    cdef cnp.ndarray[double, ndim=2] out = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] fv = f, kv = k, ov = out
    cdef int i, j, a, b
    cdef double acc, kx
    with nogil:
        for i in range(n):
            for j in range(n):
                acc = 0.0
                for a in range(n):
                    kx = kv[i, a]
                    if kx == 0.0:
                        continue
                    for b in range(n):
                        acc += fv[a, b] * kx * kv[j, b]
                ov[i, j] = acc
    return out


def pv_i1_direct(cnp.ndarray[double, ndim=2] phi, cnp.ndarray[double, ndim=2] pupil,
                 double pitch, bint stagger=False):
    """sin-difference kernel over the pupil, output masked to the pupil."""
    cdef int n = phi.shape[0]
    cdef cnp.ndarray[double, ndim=2] k = _axis_kernel(n, pitch, stagger)
    cdef cnp.ndarray[double, ndim=2] out = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] pv = phi, mv = pupil, kv = k, ov = out
    cdef int i, j, a, b
    cdef double acc, kx, center
    with nogil:
        for i in range(n):
            for j in range(n):
                if mv[i, j] == 0.0:
                    continue
                center = pv[i, j]
                acc = 0.0
                for a in range(n):
                    kx = kv[i, a]
                    if kx == 0.0:
                        continue
                    for b in range(n):
                        if mv[a, b] != 0.0:
                            acc += sin(pv[a, b] - center) * kx * kv[j, b]
                ov[i, j] = acc / (PI * PI)
    return out


def pv_ilin_direct(cnp.ndarray[double, ndim=2] phi, cnp.ndarray[double, ndim=2] pupil,
                   double pitch, bint stagger=False):
    """Linear-difference kernel over the pupil, output masked to the pupil."""
    cdef int n = phi.shape[0]
    cdef cnp.ndarray[double, ndim=2] k = _axis_kernel(n, pitch, stagger)
    cdef cnp.ndarray[double, ndim=2] out = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] pv = phi, mv = pupil, kv = k, ov = out
    cdef int i, j, a, b
    cdef double acc, kx, center
    with nogil:
        for i in range(n):
            for j in range(n):
                if mv[i, j] == 0.0:
                    continue
                center = pv[i, j]
                acc = 0.0
                for a in range(n):
                    kx = kv[i, a]
                    if kx == 0.0:
                        continue
                    for b in range(n):
                        if mv[a, b] != 0.0:
                            acc += (pv[a, b] - center) * kx * kv[j, b]
                ov[i, j] = acc / (PI * PI)
    return out


def pv_i1p_direct(cnp.ndarray[double, ndim=2] phi, cnp.ndarray[double, ndim=2] psi,
                  cnp.ndarray[double, ndim=2] pupil, double pitch, bint stagger=False):
    """cos-weighted difference kernel: the pupil-supported derivative part."""
    cdef int n = phi.shape[0]
    cdef cnp.ndarray[double, ndim=2] k = _axis_kernel(n, pitch, stagger)
    cdef cnp.ndarray[double, ndim=2] out = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] pv = phi, qv = psi, mv = pupil, kv = k, ov = out
    cdef int i, j, a, b
    cdef double acc, kx, pc, qc
    with nogil:
        for i in range(n):
            for j in range(n):
                if mv[i, j] == 0.0:
                    continue
                pc = pv[i, j]
                qc = qv[i, j]
                acc = 0.0
                for a in range(n):
                    kx = kv[i, a]
                    if kx == 0.0:
                        continue
                    for b in range(n):
                        if mv[a, b] != 0.0:
                            acc += cos(pv[a, b] - pc) * (qv[a, b] - qc) * kx * kv[j, b]
                ov[i, j] = acc / (PI * PI)
    return out


def pv_i2_raw(cnp.ndarray[double, ndim=2] phi, cnp.ndarray[double, ndim=2] pupil,
              cnp.ndarray[double, ndim=2] detector, double pitch, bint stagger=False):
    """Raw quadruple-kernel sum with ``cos(phi'-phi'') - 1`` over pupil pairs."""
    cdef int n = phi.shape[0]
    cdef cnp.ndarray[double, ndim=2] k = _axis_kernel(n, pitch, stagger)
    cdef cnp.ndarray[double, ndim=2] out = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] pv = phi, mv = pupil, dv = detector, kv = k, ov = out
    cdef int i, j, a, b, c, d
    cdef double acc, w1, kx1, kx2
    with nogil:
        for i in range(n):
            for j in range(n):
                if dv[i, j] == 0.0:
                    continue
                acc = 0.0
                for a in range(n):
                    kx1 = kv[i, a]
                    if kx1 == 0.0:
                        continue
                    for b in range(n):
                        if mv[a, b] == 0.0:
                            continue
                        w1 = kx1 * kv[j, b]
                        for c in range(n):
                            kx2 = kv[i, c]
                            if kx2 == 0.0:
                                continue
                            for d in range(n):
                                if mv[c, d] != 0.0:
                                    acc += (cos(pv[a, b] - pv[c, d]) - 1.0) * w1 * kx2 * kv[j, d]
                ov[i, j] = acc / (2.0 * PI ** 4)
    return out


def pv_i2p_raw(cnp.ndarray[double, ndim=2] phi, cnp.ndarray[double, ndim=2] psi,
               cnp.ndarray[double, ndim=2] pupil, cnp.ndarray[double, ndim=2] detector,
               double pitch, bint stagger=False):
    """Raw quadruple-kernel sum with ``-sin(phi'-phi'')(psi'-psi'')``."""
    cdef int n = phi.shape[0]
    cdef cnp.ndarray[double, ndim=2] k = _axis_kernel(n, pitch, stagger)
    cdef cnp.ndarray[double, ndim=2] out = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] pv = phi, qv = psi, mv = pupil, dv = detector, kv = k, ov = out
    cdef int i, j, a, b, c, d
    cdef double acc, w1, kx1, kx2
    with nogil:
        for i in range(n):
            for j in range(n):
                if dv[i, j] == 0.0:
                    continue
                acc = 0.0
                for a in range(n):
                    kx1 = kv[i, a]
                    if kx1 == 0.0:
                        continue
                    for b in range(n):
                        if mv[a, b] == 0.0:
                            continue
                        w1 = kx1 * kv[j, b]
                        for c in range(n):
                            kx2 = kv[i, c]
                            if kx2 == 0.0:
                                continue
                            for d in range(n):
                                if mv[c, d] != 0.0:
                                    acc += sin(pv[a, b] - pv[c, d]) * (qv[a, b] - qv[c, d]) * w1 * kx2 * kv[j, d]
                ov[i, j] = acc / (-2.0 * PI ** 4)
    return out
