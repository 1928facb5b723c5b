# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled superoperator kernels; same contract as ``_kernels_py``.

Only nonzero superoperator entries are visited (gate unitaries and the
depolarizing channels used here are sparse), and complex products are
spelled out on real/imaginary parts so no libgcc complex helper is called.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef _nonzeros(s, Py_ssize_t size):
    s = np.ascontiguousarray(s, dtype=np.complex128).reshape(size, size)
    rows, cols = np.nonzero(s)
    vals = s[rows, cols]
    return (
        np.ascontiguousarray(rows, dtype=np.intp),
        np.ascontiguousarray(cols, dtype=np.intp),
        np.ascontiguousarray(vals.real),
        np.ascontiguousarray(vals.imag),
    )


cdef void _apply(
    const double[:, ::1] rv,
    double[:, ::1] ov,
    const Py_ssize_t* offs,
    Py_ssize_t width,
    Py_ssize_t mask,
    const Py_ssize_t[::1] si,
    const Py_ssize_t[::1] sk,
    const double[::1] sre,
    const double[::1] sim,
) noexcept nogil:
    # rv/ov hold interleaved (re, im) pairs: column c lives at 2c, 2c+1.
    cdef Py_ssize_t dim = rv.shape[0]
    cdef Py_ssize_t nnz = sre.shape[0]
    cdef Py_ssize_t row, col, e, a, b, i, k, idx
    cdef double vre[16]
    cdef double vim[16]
    cdef double are[16]
    cdef double aim[16]
    cdef Py_ssize_t size = width * width
    for row in range(dim):
        if row & mask:
            continue
        for col in range(dim):
            if col & mask:
                continue
            for a in range(width):
                for b in range(width):
                    idx = a * width + b
                    vre[idx] = rv[row + offs[a], 2 * (col + offs[b])]
                    vim[idx] = rv[row + offs[a], 2 * (col + offs[b]) + 1]
                    are[idx] = 0.0
                    aim[idx] = 0.0
            for e in range(nnz):
                i = si[e]
                k = sk[e]
                are[i] += sre[e] * vre[k] - sim[e] * vim[k]
                aim[i] += sre[e] * vim[k] + sim[e] * vre[k]
            for a in range(width):
                for b in range(width):
                    idx = a * width + b
                    ov[row + offs[a], 2 * (col + offs[b])] = are[idx]
                    ov[row + offs[a], 2 * (col + offs[b]) + 1] = aim[idx]


def _run(rho, superop, Py_ssize_t width, offsets, Py_ssize_t mask):
    r = np.ascontiguousarray(rho, dtype=np.complex128)
    out = np.empty_like(r)
    si, sk, sre, sim = _nonzeros(superop, width * width)
    cdef Py_ssize_t offs[4]
    cdef Py_ssize_t j
    for j in range(width):
        offs[j] = offsets[j]
    cdef const double[:, ::1] rv = r.view(np.float64)
    cdef double[:, ::1] ov = out.view(np.float64)
    cdef const Py_ssize_t[::1] siv = si
    cdef const Py_ssize_t[::1] skv = sk
    cdef const double[::1] srev = sre
    cdef const double[::1] simv = sim
    with nogil:
        _apply(rv, ov, offs, width, mask, siv, skv, srev, simv)
    return out


def apply_superop_1q(rho, superop, int q, int n):
    cdef Py_ssize_t bit = (<Py_ssize_t>1) << (n - 1 - q)
    return _run(rho, superop, 2, (0, bit), bit)


def apply_superop_2q(rho, superop, int q0, int q1, int n):
    cdef Py_ssize_t b0 = (<Py_ssize_t>1) << (n - 1 - q0)
    cdef Py_ssize_t b1 = (<Py_ssize_t>1) << (n - 1 - q1)
    return _run(rho, superop, 4, (0, b1, b0, b0 | b1), b0 | b1)
