# cython: boundscheck=False, wraparound=False, cdivision=True
"""Cython element kernels (compiled core)."""

import numpy as np

BACKEND = "cython"


def local_stokes_matrices(verts, qw, p1v, p2v, dp2):
    """Batched local matrices on straight triangles; see the numpy twin."""
    verts_ = np.ascontiguousarray(verts, dtype=np.float64)
    qw_ = np.ascontiguousarray(qw, dtype=np.float64)
    p1v_ = np.ascontiguousarray(p1v, dtype=np.float64)
    p2v_ = np.ascontiguousarray(p2v, dtype=np.float64)
    dp2_ = np.ascontiguousarray(dp2, dtype=np.float64)
    cdef double[:, :, ::1] V = verts_
    cdef double[::1] w = qw_
    cdef double[:, ::1] b1 = p1v_
    cdef double[:, ::1] b2 = p2v_
    cdef double[:, :, ::1] d2 = dp2_
    cdef Py_ssize_t ne = V.shape[0]
    cdef Py_ssize_t nq = w.shape[0]

    m1_ = np.zeros((ne, 3, 3))
    m2_ = np.zeros((ne, 6, 6))
    k2_ = np.zeros((ne, 6, 6))
    eps_ = np.zeros((ne, 12, 12))
    div_ = np.zeros((ne, 3, 12))
    cdef double[:, :, ::1] m1 = m1_
    cdef double[:, :, ::1] m2 = m2_
    cdef double[:, :, ::1] k2 = k2_
    cdef double[:, :, ::1] eps = eps_
    cdef double[:, :, ::1] dv = div_

    cdef Py_ssize_t e, q, i, j, k
    cdef double e1x, e1y, e2x, e2y, det, area, wa
    cdef double gl[3][2]
    cdef double gx[6]
    cdef double gy[6]
    cdef double axx, ayy, axy

    for e in range(ne):
        e1x = V[e, 1, 0] - V[e, 0, 0]
        e1y = V[e, 1, 1] - V[e, 0, 1]
        e2x = V[e, 2, 0] - V[e, 0, 0]
        e2y = V[e, 2, 1] - V[e, 0, 1]
        det = e1x * e2y - e1y * e2x
        area = 0.5 * (det if det >= 0 else -det)
        gl[1][0] = e2y / det
        gl[1][1] = -e2x / det
        gl[2][0] = -e1y / det
        gl[2][1] = e1x / det
        gl[0][0] = -gl[1][0] - gl[2][0]
        gl[0][1] = -gl[1][1] - gl[2][1]
        for q in range(nq):
            wa = w[q] * area
            for i in range(6):
                gx[i] = 0.0
                gy[i] = 0.0
                for k in range(3):
                    gx[i] += d2[q, i, k] * gl[k][0]
                    gy[i] += d2[q, i, k] * gl[k][1]
            for i in range(3):
                for j in range(3):
                    m1[e, i, j] += wa * b1[q, i] * b1[q, j]
            for i in range(6):
                for j in range(6):
                    m2[e, i, j] += wa * b2[q, i] * b2[q, j]
                    axx = gx[i] * gx[j]
                    ayy = gy[i] * gy[j]
                    axy = gy[i] * gx[j]
                    k2[e, i, j] += wa * (axx + ayy)
                    eps[e, i, j] += wa * (2.0 * axx + ayy)
                    eps[e, i, j + 6] += wa * axy
                    eps[e, j + 6, i] += wa * axy
                    eps[e, i + 6, j + 6] += wa * (2.0 * ayy + axx)
            for i in range(3):
                for j in range(6):
                    dv[e, i, j] += wa * b1[q, i] * gx[j]
                    dv[e, i, j + 6] += wa * b1[q, i] * gy[j]
    return m1_, m2_, k2_, eps_, div_


def eval_p2(local_coeffs, bary, glam, int order):
    """Evaluate a P2 scalar field at one point per row; see the numpy twin."""
    c_ = np.ascontiguousarray(local_coeffs, dtype=np.complex128)
    b_ = np.ascontiguousarray(bary, dtype=np.float64)
    g_ = np.ascontiguousarray(glam, dtype=np.float64)
    cdef double complex[:, ::1] c = c_
    cdef double[:, ::1] lam = b_
    cdef double[:, :, ::1] gl = g_
    cdef Py_ssize_t m = c.shape[0]

    vals_ = np.empty(m, dtype=np.complex128)
    cdef double complex[::1] vals = vals_
    grads_ = hess_ = None
    cdef double complex[:, ::1] grads = None
    cdef double complex[:, :, ::1] hess = None
    if order >= 1:
        grads_ = np.zeros((m, 2), dtype=np.complex128)
        grads = grads_
    if order >= 2:
        hess_ = np.zeros((m, 2, 2), dtype=np.complex128)
        hess = hess_

    cdef Py_ssize_t p, i, k, d, e
    cdef double l0, l1, l2
    cdef double phi[6]
    cdef double dphi[6][3]
    cdef double gph[6][2]
    cdef double complex acc
    for p in range(m):
        l0 = lam[p, 0]
        l1 = lam[p, 1]
        l2 = lam[p, 2]
        phi[0] = l0 * (2 * l0 - 1)
        phi[1] = l1 * (2 * l1 - 1)
        phi[2] = l2 * (2 * l2 - 1)
        phi[3] = 4 * l1 * l2
        phi[4] = 4 * l0 * l2
        phi[5] = 4 * l0 * l1
        acc = 0
        for i in range(6):
            acc += c[p, i] * phi[i]
        vals[p] = acc
        if order >= 1:
            for i in range(6):
                for k in range(3):
                    dphi[i][k] = 0.0
            dphi[0][0] = 4 * l0 - 1
            dphi[1][1] = 4 * l1 - 1
            dphi[2][2] = 4 * l2 - 1
            dphi[3][1] = 4 * l2
            dphi[3][2] = 4 * l1
            dphi[4][0] = 4 * l2
            dphi[4][2] = 4 * l0
            dphi[5][0] = 4 * l1
            dphi[5][1] = 4 * l0
            for i in range(6):
                for d in range(2):
                    gph[i][d] = 0.0
                    for k in range(3):
                        gph[i][d] += dphi[i][k] * gl[p, k, d]
            for d in range(2):
                acc = 0
                for i in range(6):
                    acc += c[p, i] * gph[i][d]
                grads[p, d] = acc
        if order >= 2:
            for d in range(2):
                for e in range(2):
                    acc = 4 * (c[p, 0] * gl[p, 0, d] * gl[p, 0, e]
                               + c[p, 1] * gl[p, 1, d] * gl[p, 1, e]
                               + c[p, 2] * gl[p, 2, d] * gl[p, 2, e]
                               + c[p, 3] * (gl[p, 1, d] * gl[p, 2, e] + gl[p, 2, d] * gl[p, 1, e])
                               + c[p, 4] * (gl[p, 0, d] * gl[p, 2, e] + gl[p, 2, d] * gl[p, 0, e])
                               + c[p, 5] * (gl[p, 0, d] * gl[p, 1, e] + gl[p, 1, d] * gl[p, 0, e]))
                    hess[p, d, e] = acc
    return vals_, grads_, hess_


def eval_p1(local_coeffs, bary, glam, int order):
    """Evaluate a P1 scalar field at one point per row; see the numpy twin."""
    c_ = np.ascontiguousarray(local_coeffs, dtype=np.complex128)
    b_ = np.ascontiguousarray(bary, dtype=np.float64)
    g_ = np.ascontiguousarray(glam, dtype=np.float64)
    cdef double complex[:, ::1] c = c_
    cdef double[:, ::1] lam = b_
    cdef double[:, :, ::1] gl = g_
    cdef Py_ssize_t m = c.shape[0]

    vals_ = np.empty(m, dtype=np.complex128)
    cdef double complex[::1] vals = vals_
    grads_ = None
    cdef double complex[:, ::1] grads = None
    if order >= 1:
        grads_ = np.zeros((m, 2), dtype=np.complex128)
        grads = grads_
    cdef Py_ssize_t p, i, d
    cdef double complex acc
    for p in range(m):
        vals[p] = c[p, 0] * lam[p, 0] + c[p, 1] * lam[p, 1] + c[p, 2] * lam[p, 2]
        if order >= 1:
            for d in range(2):
                acc = 0
                for i in range(3):
                    acc += c[p, i] * gl[p, i, d]
                grads[p, d] = acc
    hess_ = np.zeros((m, 2, 2), dtype=np.complex128) if order >= 2 else None
    return vals_, grads_, hess_
