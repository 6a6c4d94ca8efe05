# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled inner loops. Semantics and accumulation order match _pykernels
exactly (tap-ascending float64 adds, no FMA), so results are bit-identical."""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND_NAME = "compiled"


def correlate2d(cnp.float64_t[:, ::1] padded, int kh, int kw,
                cnp.float64_t[:, ::1] kernel):
    cdef Py_ssize_t out_h = padded.shape[0] - kh + 1
    cdef Py_ssize_t out_w = padded.shape[1] - kw + 1
    out_arr = np.zeros((out_h, out_w), dtype=np.float64)
    cdef cnp.float64_t[:, ::1] out = out_arr
    cdef Py_ssize_t y, x, i, j
    cdef double acc, kv
    with nogil:
        for y in range(out_h):
            for x in range(out_w):
                acc = 0.0
                for i in range(kh):
                    for j in range(kw):
                        kv = kernel[i, j] * padded[y + i, x + j]
                        acc = acc + kv
                out[y, x] = acc
    return out_arr


def resample_rows(cnp.float64_t[:, ::1] src, cnp.int64_t[:, ::1] indices,
                  cnp.float64_t[:, ::1] weights):
    cdef Py_ssize_t n_out = indices.shape[0]
    cdef Py_ssize_t n_taps = indices.shape[1]
    cdef Py_ssize_t width = src.shape[1]
    out_arr = np.zeros((n_out, width), dtype=np.float64)
    cdef cnp.float64_t[:, ::1] out = out_arr
    cdef Py_ssize_t o, t, x, row
    cdef double w, term
    with nogil:
        for o in range(n_out):
            for t in range(n_taps):
                row = indices[o, t]
                w = weights[o, t]
                for x in range(width):
                    term = w * src[row, x]
                    out[o, x] = out[o, x] + term
    return out_arr
