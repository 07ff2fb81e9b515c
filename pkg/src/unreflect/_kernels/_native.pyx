# cython: boundscheck=False, wraparound=False, initializedcheck=False
# Compiled kernels. Every expression mirrors numpy_backend.py term for term
# (same operation order, no FMA contraction) so both backends agree bit for bit.

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

NAME = "native"


def grad(double[:, ::1] img):
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1]
    dx_arr = np.zeros((h, w), dtype=np.float64)
    dy_arr = np.zeros((h, w), dtype=np.float64)
    cdef double[:, ::1] dx = dx_arr
    cdef double[:, ::1] dy = dy_arr
    cdef Py_ssize_t i, j
    for i in range(h):
        for j in range(w - 1):
            dx[i, j] = img[i, j + 1] - img[i, j]
    for i in range(h - 1):
        for j in range(w):
            dy[i, j] = img[i + 1, j] - img[i, j]
    return dx_arr, dy_arr


def grad_adjoint(double[:, ::1] dx, double[:, ::1] dy):
    cdef Py_ssize_t h = dx.shape[0], w = dx.shape[1]
    out_arr = np.zeros((h, w), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double s
    for i in range(h):
        for j in range(w):
            s = 0.0
            if j > 0:
                s = s + dx[i, j - 1]
            if j < w - 1:
                s = s - dx[i, j]
            if i > 0:
                s = s + dy[i - 1, j]
            if i < h - 1:
                s = s - dy[i, j]
            out[i, j] = s
    return out_arr


def laplacian(double[:, ::1] img):
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1]
    out_arr = np.empty((h, w), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double c, up, down, left, right, s
    for i in range(h):
        for j in range(w):
            c = img[i, j]
            up = img[i - 1, j] if i > 0 else c
            down = img[i + 1, j] if i < h - 1 else c
            left = img[i, j - 1] if j > 0 else c
            right = img[i, j + 1] if j < w - 1 else c
            s = up + down
            s = s + left
            s = s + right
            out[i, j] = s - 4.0 * c
    return out_arr


def laplacian_adjoint(double[:, ::1] f):
    cdef Py_ssize_t h = f.shape[0], w = f.shape[1]
    out_arr = np.empty((h, w), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double s, coef
    for i in range(h):
        for j in range(w):
            s = 0.0
            if i > 0:
                s = s + f[i - 1, j]
            if i < h - 1:
                s = s + f[i + 1, j]
            if j > 0:
                s = s + f[i, j - 1]
            if j < w - 1:
                s = s + f[i, j + 1]
            coef = -4.0
            if i == 0:
                coef = coef + 1.0
            if i == h - 1:
                coef = coef + 1.0
            if j == 0:
                coef = coef + 1.0
            if j == w - 1:
                coef = coef + 1.0
            out[i, j] = s + coef * f[i, j]
    return out_arr


def d_step(double[:, ::1] gx, double[:, ::1] gy, double[:, ::1] phi,
           double lam, double beta):
    cdef Py_ssize_t h = gx.shape[0], w = gx.shape[1]
    dx_arr = np.empty((h, w), dtype=np.float64)
    dy_arr = np.empty((h, w), dtype=np.float64)
    cdef double[:, ::1] dx = dx_arr
    cdef double[:, ::1] dy = dy_arr
    cdef Py_ssize_t i, j
    cdef double mag, thr
    for i in range(h):
        for j in range(w):
            mag = gx[i, j] * gx[i, j] + gy[i, j] * gy[i, j]
            thr = (lam * phi[i, j]) / beta
            if mag > thr:
                dx[i, j] = gx[i, j]
                dy[i, j] = gy[i, j]
            else:
                dx[i, j] = 0.0
                dy[i, j] = 0.0
    return dx_arr, dy_arr


def adam_update(double[:, ::1] t, double[:, ::1] g, double[:, ::1] m,
                double[:, ::1] v, double lr, double b1, double b2,
                double bc1, double bc2, double eps):
    cdef Py_ssize_t h = t.shape[0], w = t.shape[1]
    cdef double omb1 = 1.0 - b1
    cdef double omb2 = 1.0 - b2
    cdef Py_ssize_t i, j
    cdef double mhat, vhat, den, step
    for i in range(h):
        for j in range(w):
            m[i, j] = b1 * m[i, j] + omb1 * g[i, j]
            v[i, j] = b2 * v[i, j] + omb2 * (g[i, j] * g[i, j])
            mhat = m[i, j] / bc1
            vhat = v[i, j] / bc2
            den = sqrt(vhat) + eps
            step = mhat / den
            step = step * lr
            t[i, j] = t[i, j] - step
