# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled kernel for the truncated-Taylor multiply.

Accumulates out[oo[t]] += a[ii[t]] * b[jj[t]] over the precomputed sparse
index triples, in table order, matching the numpy fallback bit for bit.
"""

import numpy as np


def mul_accumulate(Py_ssize_t[::1] ii, Py_ssize_t[::1] jj, Py_ssize_t[::1] oo,
                   double[::1] a, double[::1] b, Py_ssize_t size):
    out_np = np.zeros(size)
    cdef double[::1] out = out_np
    cdef Py_ssize_t t
    cdef Py_ssize_t n = ii.shape[0]
    with nogil:
        for t in range(n):
            out[oo[t]] += a[ii[t]] * b[jj[t]]
    return out_np
