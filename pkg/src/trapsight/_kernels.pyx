# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel implementations (hot per-pixel loops).

Same call surface as trapsight._kernels_py; see trapsight.kernels.
"""

import numpy as np

BACKEND_NAME = "compiled"


def threshold_u8(const unsigned char[:, ::1] gray, int t):
    cdef Py_ssize_t h = gray.shape[0]
    cdef Py_ssize_t w = gray.shape[1]
    cdef Py_ssize_t i, j
    out_arr = np.empty((h, w), dtype=np.uint8)
    cdef unsigned char[:, ::1] out = out_arr
    for i in range(h):
        for j in range(w):
            out[i, j] = 0 if gray[i, j] > t else 255
    return out_arr


def absdiff_u8(const unsigned char[:, ::1] a, const unsigned char[:, ::1] b):
    cdef Py_ssize_t h = a.shape[0]
    cdef Py_ssize_t w = a.shape[1]
    cdef Py_ssize_t i, j
    cdef int d
    out_arr = np.empty((h, w), dtype=np.uint8)
    cdef unsigned char[:, ::1] out = out_arr
    for i in range(h):
        for j in range(w):
            d = a[i, j] - b[i, j]
            out[i, j] = <unsigned char>(d if d >= 0 else -d)
    return out_arr


def equal_count(const unsigned char[:, ::1] a, const unsigned char[:, ::1] b):
    cdef Py_ssize_t h = a.shape[0]
    cdef Py_ssize_t w = a.shape[1]
    cdef Py_ssize_t i, j
    cdef long long n = 0
    for i in range(h):
        for j in range(w):
            if a[i, j] == b[i, j]:
                n += 1
    return n


cdef inline int _find(int[::1] parent, int x):
    cdef int root = x
    cdef int nxt
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:  # path compression
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


def label_stats(const unsigned char[:, ::1] mask):
    """8-connected component statistics of the nonzero pixels of ``mask``.

    Two-pass pixel scan: provisional labels with union-find in pass one,
    per-root accumulation in pass two. Returns
    ``(n, areas, min_x, min_y, max_x, max_y, sum_x, sum_y)``.
    """
    cdef Py_ssize_t h = mask.shape[0]
    cdef Py_ssize_t w = mask.shape[1]
    cdef Py_ssize_t i, j
    cdef int best, cand, root_a, root_b, lbl, n_prov = 0

    labels_arr = np.zeros((h, w), dtype=np.int32)
    cdef int[:, ::1] labels = labels_arr
    # New provisional labels need a background W neighbour, so at most
    # ceil(w / 2) per row.
    parent_arr = np.zeros(h * ((w + 1) // 2) + 2, dtype=np.int32)
    cdef int[::1] parent = parent_arr

    for i in range(h):
        for j in range(w):
            if mask[i, j] == 0:
                continue
            # Already-scanned neighbours: W, NW, N, NE.
            best = 0
            if j > 0 and labels[i, j - 1] != 0:
                best = labels[i, j - 1]
            if i > 0:
                if j > 0 and labels[i - 1, j - 1] != 0:
                    cand = labels[i - 1, j - 1]
                    if best == 0 or cand < best:
                        best = cand
                if labels[i - 1, j] != 0:
                    cand = labels[i - 1, j]
                    if best == 0 or cand < best:
                        best = cand
                if j + 1 < w and labels[i - 1, j + 1] != 0:
                    cand = labels[i - 1, j + 1]
                    if best == 0 or cand < best:
                        best = cand
            if best == 0:
                n_prov += 1
                parent[n_prov] = n_prov
                labels[i, j] = n_prov
            else:
                labels[i, j] = best
                root_a = _find(parent, best)
                if j > 0 and labels[i, j - 1] != 0:
                    root_b = _find(parent, labels[i, j - 1])
                    if root_b != root_a:
                        parent[root_b if root_b > root_a else root_a] = \
                            root_a if root_b > root_a else root_b
                        root_a = root_a if root_b > root_a else root_b
                if i > 0:
                    if j > 0 and labels[i - 1, j - 1] != 0:
                        root_b = _find(parent, labels[i - 1, j - 1])
                        if root_b != root_a:
                            parent[root_b if root_b > root_a else root_a] = \
                                root_a if root_b > root_a else root_b
                            root_a = root_a if root_b > root_a else root_b
                    if labels[i - 1, j] != 0:
                        root_b = _find(parent, labels[i - 1, j])
                        if root_b != root_a:
                            parent[root_b if root_b > root_a else root_a] = \
                                root_a if root_b > root_a else root_b
                            root_a = root_a if root_b > root_a else root_b
                    if j + 1 < w and labels[i - 1, j + 1] != 0:
                        root_b = _find(parent, labels[i - 1, j + 1])
                        if root_b != root_a:
                            parent[root_b if root_b > root_a else root_a] = \
                                root_a if root_b > root_a else root_b

    # Dense component index per provisional root.
    dense_arr = np.zeros(n_prov + 1, dtype=np.int32)
    cdef int[::1] dense = dense_arr
    cdef int n = 0
    for lbl in range(1, n_prov + 1):
        if parent[lbl] == lbl:
            n += 1
            dense[lbl] = n

    areas_arr = np.zeros(n, dtype=np.int64)
    min_x_arr = np.full(n, w, dtype=np.int32)
    min_y_arr = np.full(n, h, dtype=np.int32)
    max_x_arr = np.full(n, -1, dtype=np.int32)
    max_y_arr = np.full(n, -1, dtype=np.int32)
    sum_x_arr = np.zeros(n, dtype=np.int64)
    sum_y_arr = np.zeros(n, dtype=np.int64)
    cdef long long[::1] areas = areas_arr
    cdef int[::1] min_x = min_x_arr
    cdef int[::1] min_y = min_y_arr
    cdef int[::1] max_x = max_x_arr
    cdef int[::1] max_y = max_y_arr
    cdef long long[::1] sum_x = sum_x_arr
    cdef long long[::1] sum_y = sum_y_arr
    cdef int k

    for i in range(h):
        for j in range(w):
            lbl = labels[i, j]
            if lbl == 0:
                continue
            k = dense[_find(parent, lbl)] - 1
            areas[k] += 1
            if j < min_x[k]:
                min_x[k] = j
            if j > max_x[k]:
                max_x[k] = j
            if i < min_y[k]:
                min_y[k] = i
            if i > max_y[k]:
                max_y[k] = i
            sum_x[k] += j
            sum_y[k] += i

    return (n, areas_arr, min_x_arr, min_y_arr, max_x_arr, max_y_arr,
            sum_x_arr, sum_y_arr)
