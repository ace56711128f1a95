# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: propagation-matrix assembly and the fused PAT loss/gradient.

Mirrors :mod:`phaseholo._fallback` one-to-one; see there for the maths.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, cos, sin, fabs, hypot

from scipy.linalg.cython_blas cimport zgemv

cnp.import_array()

cdef extern from "math.h" nogil:
    double j1(double x)

cdef extern from "complex.h" nogil:
    double complex cexp(double complex z)
    double creal(double complex z)
    double cimag(double complex z)


cdef inline double _piston(double u) nogil:
    cdef double u2
    if fabs(u) < 1e-4:
        u2 = u * u
        return 1.0 - u2 / 8.0 + u2 * u2 / 192.0
    return 2.0 * j1(u) / u


def piston_directivity(double[::1] u):
    cdef Py_ssize_t i, n = u.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            o[i] = _piston(u[i])
    return out


def propagation_matrix(const double[:, ::1] tpos, const double[:, ::1] tnrm,
                       const double[::1] radii, const double[::1] p_ref,
                       const double[:, ::1] points, double k):
    cdef Py_ssize_t C = points.shape[0], M = tpos.shape[0]
    cdef Py_ssize_t c, m
    cdef double vx, vy, vz, d, cx, cy, cz, s, D, amp
    cdef Py_ssize_t bad_c = -1, bad_m = -1
    G = np.empty((C, M), dtype=np.complex128)
    cdef double complex[:, ::1] g = G
    with nogil:
        for c in range(C):
            for m in range(M):
                vx = points[c, 0] - tpos[m, 0]
                vy = points[c, 1] - tpos[m, 1]
                vz = points[c, 2] - tpos[m, 2]
                d = sqrt(vx * vx + vy * vy + vz * vz)
                if d == 0.0:
                    bad_c = c
                    bad_m = m
                    break
                cx = tnrm[m, 1] * vz - tnrm[m, 2] * vy
                cy = tnrm[m, 2] * vx - tnrm[m, 0] * vz
                cz = tnrm[m, 0] * vy - tnrm[m, 1] * vx
                s = sqrt(cx * cx + cy * cy + cz * cz) / d
                if s > 1.0:
                    s = 1.0
                D = _piston(k * radii[m] * s)
                amp = p_ref[m] * D / d
                g[c, m] = amp * cos(k * d) + 1j * (amp * sin(k * d))
            if bad_c >= 0:
                break
    if bad_c >= 0:
        raise ValueError(f"control point {bad_c} coincides with transducer {bad_m}")
    return G


def pat_loss_grad(const double complex[:, ::1] G, const double[::1] phases,
                  const double[::1] targets, double tiny=1e-12):
    cdef int C = G.shape[0], M = G.shape[1]
    cdef int c, m, one = 1
    cdef double loss = 0.0, a, w
    cdef double complex zone = 1.0, zzero = 0.0
    cdef char trans_t = b"T", trans_n = b"N"
    cdef int n_sing = 0
    if C == 0 or M == 0:
        return 0.0, np.zeros(M), np.zeros(C, dtype=np.complex128), 0
    ex = np.empty(M, dtype=np.complex128)
    coef_a = np.empty(C, dtype=np.complex128)
    q_a = np.empty(M, dtype=np.complex128)
    grad = np.empty(M, dtype=np.float64)
    press = np.empty(C, dtype=np.complex128)
    cdef double complex[::1] e = ex, coef = coef_a, q = q_a, p = press
    cdef double[::1] gd = grad
    cdef double complex* gp = <double complex*> &G[0, 0]
    with nogil:
        for m in range(M):
            e[m] = cos(phases[m]) + 1j * sin(phases[m])
        # row-major G is column-major G^T with leading dimension M: p = G e
        zgemv(&trans_t, &M, &C, &zone, gp, &M, &e[0], &one, &zzero, &p[0], &one)
        for c in range(C):
            a = hypot(creal(p[c]), cimag(p[c]))
            loss += (targets[c] - a) * (targets[c] - a)
            if a < tiny:
                n_sing += 1
                coef[c] = 0.0
            else:
                # w_c conj(u_c)
                w = 2.0 * (targets[c] - a) / a
                coef[c] = w * creal(p[c]) - 1j * w * cimag(p[c])
        # q = G^T coef, grad_m = Im(q_m e_m)
        zgemv(&trans_n, &M, &C, &zone, gp, &M, &coef[0], &one, &zzero, &q[0], &one)
        for m in range(M):
            gd[m] = creal(q[m]) * cimag(e[m]) + cimag(q[m]) * creal(e[m])
    return loss, grad, press, n_sing
