"""Shared test utilities: independent brute-force oracles and data generators."""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np

from gcrlab import BipartitePattern, clique_sum, generate, is_chordal_bipartite


def random_pattern(rng: np.random.Generator, max_m: int = 8, max_n: int = 8,
                   p_edge: float = 0.5) -> BipartitePattern:
    m = int(rng.integers(1, max_m + 1))
    n = int(rng.integers(1, max_n + 1))
    edges = frozenset((i, j) for i in range(1, m + 1) for j in range(1, n + 1)
                      if rng.random() < p_edge)
    return BipartitePattern(m, n, edges)


def random_chordal_pattern(rng: np.random.Generator, max_rows: int = 12,
                           max_cols: int = 12) -> BipartitePattern:
    """Random biclique clique-sums, rejection-sampled to chordal instances."""
    while True:
        m0 = int(rng.integers(1, 4))
        n0 = int(rng.integers(1, 4))
        g = generate("complete", [m0, n0])
        blocks = [(list(range(1, m0 + 1)), list(range(1, n0 + 1)))]
        for _ in range(int(rng.integers(1, 7))):
            a = int(rng.integers(1, 4))
            b = int(rng.integers(1, 4))
            if g.m + a > max_rows or g.n + b > max_cols:
                break
            host_rows, host_cols = blocks[int(rng.integers(0, len(blocks)))]
            ga = int(rng.integers(0, len(host_rows) + 1))
            gb = int(rng.integers(0, len(host_cols) + 1))
            rows1 = sorted(rng.choice(host_rows, ga, replace=False).tolist())
            cols1 = sorted(rng.choice(host_cols, gb, replace=False).tolist())
            new_block = generate("complete", [ga + a, gb + b])
            new_rows = list(range(g.m + 1, g.m + a + 1))
            new_cols = list(range(g.n + 1, g.n + b + 1))
            g = clique_sum(g, new_block, rows1, cols1,
                           list(range(1, ga + 1)), list(range(1, gb + 1)))
            blocks.append((rows1 + new_rows, cols1 + new_cols))
        if is_chordal_bipartite(g)[0]:
            return g


def brute_max_biclique(g: BipartitePattern) -> int:
    """Exhaustive balanced-biclique size, independent of the search code."""
    best = 0
    for r in range(1, min(g.m, g.n) + 1):
        hit = False
        for rows in itertools.combinations(range(1, g.m + 1), r):
            for cols in itertools.combinations(range(1, g.n + 1), r):
                if all((i, j) in g.edges for i in rows for j in cols):
                    hit = True
                    break
            if hit:
                break
        if not hit:
            break
        best = r
    return best


def brute_has_long_induced_cycle(g: BipartitePattern) -> bool:
    """Exhaustive check for an induced cycle of length >= 6 (small graphs)."""
    for k in range(3, min(g.m, g.n) + 1):
        for rows in itertools.combinations(range(1, g.m + 1), k):
            for cols in itertools.combinations(range(1, g.n + 1), k):
                sub = [(i, j) for i in rows for j in cols if (i, j) in g.edges]
                if len(sub) != 2 * k:
                    continue
                deg: dict = {}
                for i, j in sub:
                    deg[("r", i)] = deg.get(("r", i), 0) + 1
                    deg[("c", j)] = deg.get(("c", j), 0) + 1
                if any(deg.get(("r", i), 0) != 2 for i in rows):
                    continue
                if any(deg.get(("c", j), 0) != 2 for j in cols):
                    continue
                adj: dict = {}
                for i, j in sub:
                    adj.setdefault(("r", i), []).append(("c", j))
                    adj.setdefault(("c", j), []).append(("r", i))
                start = ("r", rows[0])
                seen = {start}
                stack = [start]
                while stack:
                    v = stack.pop()
                    for u in adj[v]:
                        if u not in seen:
                            seen.add(u)
                            stack.append(u)
                if len(seen) == 2 * k:
                    return True
    return False


def bareiss_det(mat) -> int:
    """Exact integer determinant by fraction-free elimination."""
    a = [[int(v) for v in row] for row in mat]
    n = len(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for swap in range(k + 1, n):
                if a[swap][k] != 0:
                    a[k], a[swap] = a[swap], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


# the diagonal-free 4x4 data with no real rank-2 completion, used in several tests
RANK3_CUBE_DATA = np.array([
    [0.0, -1.5, -1.0, 1.0],
    [-5.0, 0.0, 1.0, -2.0],
    [-2.0, 1.0, 0.0, -1.0],
    [1.0, -1.0, -1.0, 0.0],
])


def cube_partial(values: np.ndarray):
    from gcrlab import PartialMatrix

    pat = generate("cube")
    vals = {(i, j): float(values[i - 1, j - 1])
            for i in range(1, 5) for j in range(1, 5) if i != j}
    return PartialMatrix(pat, vals)


def projection_quadratic_coeffs(a: dict) -> tuple[Fraction, Fraction, Fraction]:
    """Coefficients of the degree-2 polynomial (in the first diagonal entry)
    cutting out the projection of rank-2 completions, via exact 3-point
    interpolation of the defining determinant expression.

    Independent oracle for the printed discriminant: disc == b^2 - 4ac.
    """
    def det2(m):
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]

    def det3(m):
        return (m[0][0] * det2([[m[1][1], m[1][2]], [m[2][1], m[2][2]]])
                - m[0][1] * det2([[m[1][0], m[1][2]], [m[2][0], m[2][2]]])
                + m[0][2] * det2([[m[1][0], m[1][1]], [m[2][0], m[2][1]]]))

    def p_of(x: Fraction) -> Fraction:
        d1 = det2([[x, a[1, 3]], [a[2, 1], a[2, 3]]])
        d2 = det3([[x, a[1, 2], a[1, 4]],
                   [a[3, 1], a[3, 2], a[3, 4]],
                   [a[4, 1], a[4, 2], Fraction(0)]])
        d3 = det2([[x, a[1, 2]], [a[3, 1], a[3, 2]]])
        d4 = det3([[x, a[1, 3], a[1, 4]],
                   [a[2, 1], a[2, 3], a[2, 4]],
                   [a[4, 1], a[4, 3], Fraction(0)]])
        return d1 * d2 - d3 * d4

    p0, p1, p2 = p_of(Fraction(0)), p_of(Fraction(1)), p_of(Fraction(-1))
    alpha = (p1 + p2) / 2 - p0
    beta = (p1 - p2) / 2
    gamma = p0
    return alpha, beta, gamma
