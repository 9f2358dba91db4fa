"""Minimum-cost bipartite assignment of task users to helpers."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

UNMATCHED = -1
BRUTE_FORCE_LIMIT = 8


@dataclass(frozen=True)
class MatchingOutcome:
    assignment: np.ndarray  # helper index per user, UNMATCHED if none
    total: float
    n_helpers: int

    @property
    def matrix(self) -> np.ndarray:
        u = np.zeros((len(self.assignment), self.n_helpers), dtype=int)
        for i, j in enumerate(self.assignment):
            if j != UNMATCHED:
                u[i, j] = 1
        return u


def _as_cost(cost) -> np.ndarray:
    a = np.asarray(cost, dtype=float)
    if a.ndim != 2:
        raise ValueError("cost must be a 2-D matrix")
    if not np.all(np.isfinite(a)):
        raise ValueError("cost matrix contains non-finite entries")
    return a


def _total(a: np.ndarray, assignment) -> float:
    return math.fsum(a[i, j] for i, j in enumerate(assignment) if j != UNMATCHED)


def _hungarian_rows(a: list, n: int, m: int) -> list:
    """Kuhn-Munkres with potentials for ``n <= m``; O(n^2 m).

    Each row is inserted by a shortest augmenting path over the reduced costs.
    Among equal reduced costs the lowest column index wins, which keeps the
    result deterministic.
    """
    inf = math.inf
    u = [0.0] * (n + 1)
    v = [0.0] * (m + 1)
    p = [0] * (m + 1)  # p[j]: row (1-based) matched to column j, 0 = free
    way = [0] * (m + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [inf] * (m + 1)
        used = [False] * (m + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            row = a[i0 - 1]
            ui0 = u[i0]
            delta, j1 = inf, 0
            for j in range(1, m + 1):
                if not used[j]:
                    cur = row[j - 1] - ui0 - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta, j1 = minv[j], j
            for j in range(m + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    assignment = [UNMATCHED] * n
    for j in range(1, m + 1):
        if p[j]:
            assignment[p[j] - 1] = j - 1
    return assignment


def solve_assignment(cost) -> MatchingOutcome:
    """Minimum total cost assignment, one helper per user at most.

    With more helpers than users every user is matched. If users outnumber
    helpers the surplus users stay ``UNMATCHED``; pad with blank helpers
    beforehand to avoid that.
    """
    a = _as_cost(cost)
    n, m = a.shape
    if n == 0 or m == 0:
        return MatchingOutcome(np.full(n, UNMATCHED, dtype=int), 0.0, m)
    if n <= m:
        assignment = _hungarian_rows(a.tolist(), n, m)
    else:
        cols = _hungarian_rows(a.T.tolist(), m, n)
        assignment = [UNMATCHED] * n
        for j, i in enumerate(cols):
            assignment[i] = j
    return MatchingOutcome(np.array(assignment, dtype=int), _total(a, assignment), m)


def brute_force_assignment(cost) -> MatchingOutcome:
    """Exhaustive search over all injective maps; lexicographically first optimum."""
    a = _as_cost(cost)
    n, m = a.shape
    if n > BRUTE_FORCE_LIMIT or m > BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute force limited to {BRUTE_FORCE_LIMIT}x{BRUTE_FORCE_LIMIT}")
    best, best_total = None, math.inf
    if n <= m:
        for perm in itertools.permutations(range(m), n):
            t = _total(a, perm)
            if t < best_total:
                best, best_total = list(perm), t
    else:
        for rows in itertools.permutations(range(n), m):
            assignment = [UNMATCHED] * n
            for j, i in enumerate(rows):
                assignment[i] = j
            t = _total(a, assignment)
            if t < best_total:
                best, best_total = assignment, t
    return MatchingOutcome(np.array(best, dtype=int), _total(a, best), m)


def assignment_is_valid(outcome: MatchingOutcome) -> bool:
    """Each user on at most one helper and vice versa."""
    u = outcome.matrix
    return bool(np.all(u.sum(axis=0) <= 1) and np.all(u.sum(axis=1) <= 1))
