# cython: language_level=3
"""Compiled sequential reductions over stacks of small complex matrices."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef void _matmul(const double complex[:, ::1] a, const double complex[:, ::1] b,
                  double complex[:, ::1] out) noexcept nogil:
    cdef Py_ssize_t i, j, k
    cdef Py_ssize_t n = a.shape[0], m = b.shape[1], p = a.shape[1]
    cdef double complex acc
    for i in range(n):
        for j in range(m):
            acc = 0
            for k in range(p):
                acc = acc + a[i, k] * b[k, j]
            out[i, j] = acc


def ordered_product(factors):
    """Return ``factors[N-1] @ ... @ factors[0]`` (identity for ``N == 0``)."""
    cdef double complex[:, :, ::1] f = np.ascontiguousarray(factors, dtype=np.complex128)
    cdef Py_ssize_t n_f = f.shape[0], r = f.shape[1], j
    acc_arr = np.eye(r, dtype=np.complex128)
    tmp_arr = np.empty((r, r), dtype=np.complex128)
    cdef double complex[:, ::1] acc = acc_arr
    cdef double complex[:, ::1] tmp = tmp_arr
    with nogil:
        for j in range(n_f):
            _matmul(f[j], acc, tmp)
            acc[:, :] = tmp
    return acc_arr


def ordered_partials(factors):
    """Return all partial products; entry ``j`` is ``factors[j-1] @ ... @ factors[0]``."""
    cdef double complex[:, :, ::1] f = np.ascontiguousarray(factors, dtype=np.complex128)
    cdef Py_ssize_t n_f = f.shape[0], r = f.shape[1], j
    out_arr = np.empty((n_f + 1, r, r), dtype=np.complex128)
    out_arr[0] = np.eye(r)
    cdef double complex[:, :, ::1] out = out_arr
    with nogil:
        for j in range(n_f):
            _matmul(f[j], out[j], out[j + 1])
    return out_arr


def propagate(props, psi0, bint keep_all=True):
    """Apply ``props`` in order to the column block ``psi0``.

    Returns the stack of all ``N + 1`` states when ``keep_all`` is set,
    otherwise only the final state.
    """
    cdef double complex[:, :, ::1] u = np.ascontiguousarray(props, dtype=np.complex128)
    psi0_arr = np.ascontiguousarray(psi0, dtype=np.complex128)
    cdef Py_ssize_t n_steps = u.shape[0], d = psi0_arr.shape[0], r = psi0_arr.shape[1], j
    cdef double complex[:, :, ::1] out
    cdef double complex[:, ::1] cur
    cdef double complex[:, ::1] nxt
    if keep_all:
        out_arr = np.empty((n_steps + 1, d, r), dtype=np.complex128)
        out_arr[0] = psi0_arr
        out = out_arr
        with nogil:
            for j in range(n_steps):
                _matmul(u[j], out[j], out[j + 1])
        return out_arr
    cur_arr = psi0_arr.copy()
    nxt_arr = np.empty_like(cur_arr)
    cur = cur_arr
    nxt = nxt_arr
    with nogil:
        for j in range(n_steps):
            _matmul(u[j], cur, nxt)
            cur[:, :] = nxt
    return cur_arr
