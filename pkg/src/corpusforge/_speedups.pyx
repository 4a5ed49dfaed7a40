# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled insertion/deletion distance kernel.

This is the inner loop of near-duplicate detection: every candidate sentence
pair costs O(|a|*|b|). The pure-Python twin lives in
corpusforge.similarity; both must return identical values.
"""

from libc.stdlib cimport free, malloc


def indel_distance(str a, str b):
    """Edit distance counting insertions and deletions only.

    Equals len(a) + len(b) - 2*LCS(a, b); computed with a two-row
    longest-common-subsequence DP over code points.
    """
    cdef Py_ssize_t la = len(a)
    cdef Py_ssize_t lb = len(b)
    if la == 0:
        return lb
    if lb == 0:
        return la
    # keep the inner row small
    if lb > la:
        a, b = b, a
        la, lb = lb, la

    cdef Py_UCS4 *ca = <Py_UCS4 *> malloc(la * sizeof(Py_UCS4))
    cdef Py_UCS4 *cb = <Py_UCS4 *> malloc(lb * sizeof(Py_UCS4))
    cdef Py_ssize_t *prev = <Py_ssize_t *> malloc((lb + 1) * sizeof(Py_ssize_t))
    cdef Py_ssize_t *curr = <Py_ssize_t *> malloc((lb + 1) * sizeof(Py_ssize_t))
    if ca == NULL or cb == NULL or prev == NULL or curr == NULL:
        free(ca); free(cb); free(prev); free(curr)
        raise MemoryError()

    cdef Py_ssize_t i, j, lcs
    cdef Py_ssize_t up, left
    cdef Py_UCS4 ch
    try:
        for i in range(la):
            ca[i] = a[i]
        for j in range(lb):
            cb[j] = b[j]
        for j in range(lb + 1):
            prev[j] = 0
        for i in range(1, la + 1):
            curr[0] = 0
            ch = ca[i - 1]
            for j in range(1, lb + 1):
                if ch == cb[j - 1]:
                    curr[j] = prev[j - 1] + 1
                else:
                    up = prev[j]
                    left = curr[j - 1]
                    curr[j] = up if up >= left else left
            prev, curr = curr, prev
        lcs = prev[lb]
    finally:
        free(ca)
        free(cb)
        free(prev)
        free(curr)
    return la + lb - 2 * lcs
