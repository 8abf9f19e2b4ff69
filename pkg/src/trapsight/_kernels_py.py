"""Pure-Python (numpy) kernel implementations.

Fallback backend used when the compiled extension is unavailable, and the
reference the extension is cross-checked against. Same call surface as
trapsight._kernels; see trapsight.kernels for the contract.

Labeling here is run-based: foreground runs are extracted per row with
numpy, then merged across adjacent rows with a union-find. Cost scales with
the number of runs, not pixels, so large frames with few blobs stay fast.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"


def threshold_u8(gray: np.ndarray, t: int) -> np.ndarray:
    return np.where(gray > t, 0, 255).astype(np.uint8)


def absdiff_u8(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.abs(a.astype(np.int16) - b.astype(np.int16)).astype(np.uint8)


def equal_count(a: np.ndarray, b: np.ndarray) -> int:
    return int(np.count_nonzero(a == b))


def _find(parent: list, i: int) -> int:
    root = i
    while parent[root] != root:
        root = parent[root]
    while parent[i] != root:  # path compression
        parent[i], i = root, parent[i]
    return root


def label_stats(mask: np.ndarray):
    """8-connected component statistics of the nonzero pixels of ``mask``.

    Returns ``(n, areas, min_x, min_y, max_x, max_y, sum_x, sum_y)`` where
    each array has one entry per component, in unspecified order.
    """
    h, w = mask.shape
    fg = mask != 0

    # Per-row runs: (row, start col, end col inclusive).
    run_row: list[int] = []
    run_s: list[int] = []
    run_e: list[int] = []
    row_first = np.zeros(h + 1, dtype=np.int64)  # run index range per row
    for y in range(h):
        row_first[y] = len(run_row)
        line = fg[y]
        if not line.any():
            continue
        padded = np.empty(w + 2, dtype=np.int8)
        padded[0] = padded[-1] = 0
        padded[1:-1] = line
        d = np.diff(padded)
        starts = np.flatnonzero(d == 1)
        ends = np.flatnonzero(d == -1) - 1
        for s, e in zip(starts.tolist(), ends.tolist()):
            run_row.append(y)
            run_s.append(s)
            run_e.append(e)
    row_first[h] = len(run_row)

    n_runs = len(run_row)
    parent = list(range(n_runs))

    # Union runs on adjacent rows; 8-connectivity widens the overlap window
    # by one column on each side.
    for y in range(1, h):
        a0, a1 = row_first[y - 1], row_first[y]
        b0, b1 = row_first[y], row_first[y + 1]
        i, j = a0, b0
        while i < a1 and j < b1:
            if run_s[i] <= run_e[j] + 1 and run_s[j] <= run_e[i] + 1:
                ri, rj = _find(parent, i), _find(parent, j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
            if run_e[i] <= run_e[j]:
                i += 1
            else:
                j += 1

    # Aggregate per root.
    root_index: dict[int, int] = {}
    areas: list[int] = []
    min_x: list[int] = []
    min_y: list[int] = []
    max_x: list[int] = []
    max_y: list[int] = []
    sum_x: list[int] = []
    sum_y: list[int] = []
    for r in range(n_runs):
        root = _find(parent, r)
        k = root_index.get(root)
        y, s, e = run_row[r], run_s[r], run_e[r]
        length = e - s + 1
        if k is None:
            root_index[root] = len(areas)
            areas.append(length)
            min_x.append(s)
            max_x.append(e)
            min_y.append(y)
            max_y.append(y)
            sum_x.append((s + e) * length // 2)
            sum_y.append(y * length)
        else:
            areas[k] += length
            if s < min_x[k]:
                min_x[k] = s
            if e > max_x[k]:
                max_x[k] = e
            if y < min_y[k]:
                min_y[k] = y
            if y > max_y[k]:
                max_y[k] = y
            sum_x[k] += (s + e) * length // 2
            sum_y[k] += y * length

    n = len(areas)
    return (
        n,
        np.asarray(areas, dtype=np.int64),
        np.asarray(min_x, dtype=np.int32),
        np.asarray(min_y, dtype=np.int32),
        np.asarray(max_x, dtype=np.int32),
        np.asarray(max_y, dtype=np.int32),
        np.asarray(sum_x, dtype=np.int64),
        np.asarray(sum_y, dtype=np.int64),
    )
