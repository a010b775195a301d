# distutils: language = c++
# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled lens-chain counter (see ``khop._chains_py`` for the reference).

Each sample's lens points are sorted with a bucket pass followed by an
insertion pass, which is linear in expectation for the uniform positions the
simulator produces and still correct for any input.
"""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t
from libcpp.vector cimport vector

cnp.import_array()


cdef void _bucket_sort(int64_t* a, Py_ssize_t n, vector[int64_t]& tmp,
                       vector[Py_ssize_t]& start) noexcept nogil:
    cdef Py_ssize_t i, j, b, nb
    cdef int64_t lo, hi, x
    cdef double scale
    if n < 2:
        return
    lo = a[0]
    hi = a[0]
    for i in range(1, n):
        if a[i] < lo:
            lo = a[i]
        elif a[i] > hi:
            hi = a[i]
    if lo == hi:
        return
    nb = n
    scale = <double>nb / (<double>(hi - lo) + 1.0)
    start.assign(nb + 1, 0)
    tmp.resize(n)
    for i in range(n):
        b = <Py_ssize_t>((a[i] - lo) * scale)
        if b >= nb:
            b = nb - 1
        start[b + 1] += 1
    for b in range(nb):
        start[b + 1] += start[b]
    for i in range(n):
        b = <Py_ssize_t>((a[i] - lo) * scale)
        if b >= nb:
            b = nb - 1
        tmp[start[b]] = a[i]
        start[b] += 1
    # buckets are ordered, so insertion sort only fixes local inversions
    for i in range(n):
        x = tmp[i]
        j = i
        while j > 0 and a[j - 1] > x:
            a[j] = a[j - 1]
            j -= 1
        a[j] = x


def count_chains(list keys, list offsets, Py_ssize_t n_samples):
    """Count increasing cross-lens chains for every sample of a batch.

    Parameters
    ----------
    keys : list of int64 arrays
        ``keys[j]`` holds the integer positions of lens ``j`` for all samples,
        grouped by sample; order inside a group is arbitrary.
    offsets : list of int64 arrays
        ``offsets[j][s]:offsets[j][s+1]`` is the group of sample ``s``.
    n_samples : int

    Returns
    -------
    numpy.ndarray of int64
    """
    cdef Py_ssize_t m = len(keys)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out = np.zeros(n_samples, dtype=np.int64)
    if m == 0:
        return out
    sorted_keys = [np.array(k, dtype=np.int64, copy=True) for k in keys]
    offs = [np.ascontiguousarray(o, dtype=np.int64) for o in offsets]
    counts = [np.empty(len(k), dtype=np.int64) for k in keys]
    cdef int64_t[::1] kprev, kcur, oprev, ocur, cprev, ccur
    cdef int64_t[::1] res = out
    cdef Py_ssize_t s, j, p, q, a, b, qb
    cdef int64_t acc
    cdef vector[int64_t] tmp
    cdef vector[Py_ssize_t] start
    for j in range(m):
        kcur = sorted_keys[j]
        ocur = offs[j]
        if kcur.shape[0] == 0:
            continue
        with nogil:
            for s in range(n_samples):
                a = ocur[s]
                b = ocur[s + 1]
                _bucket_sort(&kcur[a], b - a, tmp, start)
    ccur = counts[0]
    with nogil:
        for p in range(ccur.shape[0]):
            ccur[p] = 1
    for j in range(1, m):
        kprev = sorted_keys[j - 1]
        oprev = offs[j - 1]
        cprev = counts[j - 1]
        kcur = sorted_keys[j]
        ocur = offs[j]
        ccur = counts[j]
        with nogil:
            for s in range(n_samples):
                q = oprev[s]
                qb = oprev[s + 1]
                acc = 0
                for p in range(ocur[s], ocur[s + 1]):
                    while q < qb and kprev[q] < kcur[p]:
                        acc += cprev[q]
                        q += 1
                    ccur[p] = acc
    ccur = counts[m - 1]
    ocur = offs[m - 1]
    with nogil:
        for s in range(n_samples):
            acc = 0
            for p in range(ocur[s], ocur[s + 1]):
                acc += ccur[p]
            res[s] = acc
    return out
