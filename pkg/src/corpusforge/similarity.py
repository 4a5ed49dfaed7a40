"""Normalized indel similarity: the score behind near-duplicate removal.

similarity(a, b) = 100 * (1 - indel(a, b) / (len(a) + len(b)))
                 = 100 * 2 * LCS(a, b) / (len(a) + len(b))

where indel counts insertions and deletions only. The score is symmetric,
bounded in [0, 100], 100 iff the strings are equal, 0 iff they share no
character; similarity("", "") is defined as 100.

The O(n*m) distance kernel is compiled (corpusforge._speedups); a pure-Python
twin is selected at import when the extension is unavailable or when
FORGE_PURE_PYTHON is set in the environment. ``benchmarks/bench_similarity.py``
compares the two.
"""

from __future__ import annotations

import os


def _indel_distance_py(a: str, b: str) -> int:
    """Two-row LCS dynamic program; interpreted fallback for the C kernel."""
    la, lb = len(a), len(b)
    if la == 0:
        return lb
    if lb == 0:
        return la
    if lb > la:
        a, b = b, a
        la, lb = lb, la
    prev = [0] * (lb + 1)
    for i in range(1, la + 1):
        curr = [0] * (lb + 1)
        ch = a[i - 1]
        for j in range(1, lb + 1):
            if ch == b[j - 1]:
                curr[j] = prev[j - 1] + 1
            else:
                up = prev[j]
                left = curr[j - 1]
                curr[j] = up if up >= left else left
        prev = curr
    return la + lb - 2 * prev[lb]


try:
    from corpusforge._speedups import indel_distance as _indel_distance_c
except ImportError:  # pragma: no cover - depends on build environment
    _indel_distance_c = None

if _indel_distance_c is None or os.environ.get("FORGE_PURE_PYTHON"):
    _indel_distance = _indel_distance_py
    BACKEND = "python"
else:
    _indel_distance = _indel_distance_c
    BACKEND = "c"


def _trim_common_affixes(a: str, b: str) -> tuple[str, str]:
    """Strip shared prefix/suffix; matching characters never cost anything."""
    start = 0
    stop_a, stop_b = len(a), len(b)
    limit = min(stop_a, stop_b)
    while start < limit and a[start] == b[start]:
        start += 1
    while stop_a > start and stop_b > start and a[stop_a - 1] == b[stop_b - 1]:
        stop_a -= 1
        stop_b -= 1
    return a[start:stop_a], b[start:stop_b]


def indel_distance(a: str, b: str) -> int:
    """Insertions + deletions needed to turn ``a`` into ``b``."""
    a, b = _trim_common_affixes(a, b)
    return _indel_distance(a, b)


def similarity(a: str, b: str) -> float:
    """Indel similarity in [0, 100]; see the module docstring for the formula."""
    total = len(a) + len(b)
    if total == 0:
        return 100.0
    return 100.0 * (1.0 - indel_distance(a, b) / total)


def similarity_upper_bound(len_a: int, len_b: int) -> float:
    """Best score two strings of these lengths can reach (LCS <= min length).

    Used to skip the DP for pairs whose lengths alone rule out exceeding a
    threshold.
    """
    total = len_a + len_b
    if total == 0:
        return 100.0
    return 200.0 * min(len_a, len_b) / total
