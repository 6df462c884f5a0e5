"""Patterns of specified entries and their combinatorial operations.

A bipartite pattern records which entries of an m x n matrix are specified,
as edges (i, j) between row vertices [m] and column vertices [n]. A symmetric
pattern does the same for an n x n symmetric matrix via a semisimple graph
(loops allowed, loop = diagonal entry). Vertex indices are 1-based in the
API; serialized files are 0-based.

All pattern values are immutable and hashable; operations are pure functions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence, Union

import numpy as np


class BicliqueBudgetError(RuntimeError):
    """Exact balanced-biclique search exceeded its node budget."""


class HoleSearchBudgetError(RuntimeError):
    """Chordless-cycle search exceeded its node budget."""


@dataclass(frozen=True)
class BipartitePattern:
    m: int
    n: int
    edges: frozenset

    def __post_init__(self):
        if self.m < 0 or self.n < 0:
            raise ValueError("vertex counts must be non-negative")
        object.__setattr__(self, "edges", frozenset((int(i), int(j)) for i, j in self.edges))
        for i, j in self.edges:
            if not (1 <= i <= self.m and 1 <= j <= self.n):
                raise ValueError(f"edge ({i},{j}) out of range for {self.m}x{self.n}")

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def nonedges(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(1, self.m + 1) for j in range(1, self.n + 1)
                if (i, j) not in self.edges]

    def transpose(self) -> "BipartitePattern":
        return BipartitePattern(self.n, self.m, frozenset((j, i) for i, j in self.edges))

    def with_edge(self, i: int, j: int) -> "BipartitePattern":
        return BipartitePattern(self.m, self.n, self.edges | {(i, j)})

    def without_edge(self, i: int, j: int) -> "BipartitePattern":
        if (i, j) not in self.edges:
            raise ValueError(f"({i},{j}) is not an edge")
        return BipartitePattern(self.m, self.n, self.edges - {(i, j)})

    def delete_vertex(self, side: str, v: int) -> "BipartitePattern":
        """Remove a row or column vertex, shifting later indices down by one."""
        if side == "row":
            if not 1 <= v <= self.m:
                raise ValueError(f"row {v} out of range")
            edges = frozenset((i - (i > v), j) for i, j in self.edges if i != v)
            return BipartitePattern(self.m - 1, self.n, edges)
        if side == "col":
            if not 1 <= v <= self.n:
                raise ValueError(f"col {v} out of range")
            edges = frozenset((i, j - (j > v)) for i, j in self.edges if j != v)
            return BipartitePattern(self.m, self.n - 1, edges)
        raise ValueError("side must be 'row' or 'col'")

    def degree(self, side: str, v: int) -> int:
        if side == "row":
            return sum(1 for i, _ in self.edges if i == v)
        return sum(1 for _, j in self.edges if j == v)


@dataclass(frozen=True)
class SymmetricPattern:
    n: int
    edges: frozenset  # unordered pairs stored as (i, j) with i <= j; (i, i) is a loop

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("vertex count must be non-negative")
        norm = frozenset((min(int(i), int(j)), max(int(i), int(j))) for i, j in self.edges)
        object.__setattr__(self, "edges", norm)
        for i, j in self.edges:
            if not (1 <= i <= self.n and j <= self.n):
                raise ValueError(f"edge ({i},{j}) out of range for n={self.n}")

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def nonedges(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(1, self.n + 1) for j in range(i, self.n + 1)
                if (i, j) not in self.edges]

    def has_edge(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.edges

    def with_edge(self, i: int, j: int) -> "SymmetricPattern":
        return SymmetricPattern(self.n, self.edges | {(min(i, j), max(i, j))})


Pattern = Union[BipartitePattern, SymmetricPattern]


@lru_cache(maxsize=None)
def row_neighbors(pattern: BipartitePattern) -> tuple[frozenset, ...]:
    """row_neighbors(G)[i-1] is the set of columns adjacent to row i."""
    out = [set() for _ in range(pattern.m)]
    for i, j in pattern.edges:
        out[i - 1].add(j)
    return tuple(frozenset(s) for s in out)


@lru_cache(maxsize=None)
def col_neighbors(pattern: BipartitePattern) -> tuple[frozenset, ...]:
    out = [set() for _ in range(pattern.n)]
    for i, j in pattern.edges:
        out[j - 1].add(i)
    return tuple(frozenset(s) for s in out)


# ---------------------------------------------------------------------------
# generators


def _circulant(n: int, l: int) -> BipartitePattern:
    # row i misses columns i, i+1, ..., i+n-l-1 (mod n, representatives in [n])
    if not (1 <= l <= n):
        raise ValueError(f"need 1 <= l <= n, got l={l}, n={n}")
    missing = [frozenset(((i - 1 + t) % n) + 1 for t in range(n - l)) for i in range(1, n + 1)]
    edges = {(i, j) for i in range(1, n + 1) for j in range(1, n + 1)
             if j not in missing[i - 1]}
    return BipartitePattern(n, n, frozenset(edges))


def _tree_path(m: int, n: int) -> BipartitePattern:
    if abs(m - n) > 1:
        raise ValueError("alternating path needs |m - n| <= 1")
    edges = set()
    if m >= n:
        edges.update((i, i) for i in range(1, n + 1))
        edges.update((i + 1, i) for i in range(1, m))
    else:
        edges.update((i, i) for i in range(1, m + 1))
        edges.update((i, i + 1) for i in range(1, n))
    return BipartitePattern(m, n, frozenset(edges))


def _tree_random(m: int, n: int, seed: Optional[int]) -> BipartitePattern:
    """Uniform spanning tree of K_{m,n} by the random-walk (first entry) method."""
    if m < 1 or n < 1:
        raise ValueError("both sides must be non-empty")
    rng = np.random.default_rng(seed)
    edges = set()
    seen_rows, seen_cols = {1}, set()
    side, cur = "row", 1
    while len(seen_rows) < m or len(seen_cols) < n:
        if side == "row":
            nxt = int(rng.integers(1, n + 1))
            if nxt not in seen_cols:
                seen_cols.add(nxt)
                edges.add((cur, nxt))
            side, cur = "col", nxt
        else:
            nxt = int(rng.integers(1, m + 1))
            if nxt not in seen_rows:
                seen_rows.add(nxt)
                edges.add((nxt, cur))
            side, cur = "row", nxt
    return BipartitePattern(m, n, frozenset(edges))


def generate(family: str, params: Sequence[int] = (), seed: Optional[int] = None) -> Pattern:
    """Build a named pattern family.

    Bipartite families: complete [m n], tree-path [m n], tree-star [m n],
    tree-random [m n] (seeded), cycle [k] (the even cycle C_{2k}),
    triangular [n] (entries on and below the diagonal), circulant [n l],
    crown [n] (= circulant n n-1), cube (= circulant 4 3).
    Symmetric families: sym-complete [n], sym-knk1 [n] (complete block plus an
    isolated looped vertex), sym-join-family [n] (2n x 2n, all entries known
    except the anti-diagonal; alias sym-antidiagonal).
    """
    params = [int(x) for x in params]
    fam = family.lower().replace("_", "-")
    if fam == "complete":
        m, n = params
        return BipartitePattern(m, n, frozenset((i, j) for i in range(1, m + 1)
                                                for j in range(1, n + 1)))
    if fam == "tree-path":
        return _tree_path(*params)
    if fam == "tree-star":
        m, n = params
        if m != 1 and n != 1:
            raise ValueError("star needs one side of size 1")
        return BipartitePattern(m, n, frozenset((i, j) for i in range(1, m + 1)
                                                for j in range(1, n + 1)))
    if fam == "tree-random":
        m, n = params
        return _tree_random(m, n, seed)
    if fam == "cycle":
        (k,) = params
        if k < 2:
            raise ValueError("even cycle needs k >= 2")
        edges = {(i, i) for i in range(1, k + 1)} | {(i % k + 1, i) for i in range(1, k + 1)}
        return BipartitePattern(k, k, frozenset(edges))
    if fam == "triangular":
        (n,) = params
        return BipartitePattern(n, n, frozenset((i, j) for i in range(1, n + 1)
                                                for j in range(1, i + 1)))
    if fam == "circulant":
        n, l = params
        return _circulant(n, l)
    if fam == "crown":
        (n,) = params
        return _circulant(n, n - 1)
    if fam == "cube":
        return _circulant(4, 3)
    if fam == "sym-complete":
        (n,) = params
        return SymmetricPattern(n, frozenset((i, j) for i in range(1, n + 1)
                                             for j in range(i, n + 1)))
    if fam == "sym-knk1":
        (n,) = params
        edges = {(i, j) for i in range(1, n + 1) for j in range(i, n + 1)}
        edges.add((n + 1, n + 1))
        return SymmetricPattern(n + 1, frozenset(edges))
    if fam in ("sym-join-family", "sym-antidiagonal"):
        (n,) = params
        size = 2 * n
        edges = {(i, j) for i in range(1, size + 1) for j in range(i, size + 1)
                 if i + j != size + 1}
        return SymmetricPattern(size, frozenset(edges))
    raise ValueError(f"unknown family {family!r}")


# ---------------------------------------------------------------------------
# k-core


def k_core_support(pattern: BipartitePattern, k: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Surviving (rows, cols) of the k-core, in original labels."""
    if k < 1:
        raise ValueError("k must be positive")
    rows = set(range(1, pattern.m + 1))
    cols = set(range(1, pattern.n + 1))
    radj = {i: set(s) for i, s in enumerate(row_neighbors(pattern), start=1)}
    cadj = {j: set(s) for j, s in enumerate(col_neighbors(pattern), start=1)}
    changed = True
    while changed:
        changed = False
        for i in list(rows):
            if len(radj[i] & cols) < k:
                rows.discard(i)
                changed = True
        for j in list(cols):
            if len(cadj[j] & rows) < k:
                cols.discard(j)
                changed = True
    return tuple(sorted(rows)), tuple(sorted(cols))


def k_core(pattern: BipartitePattern, k: int) -> BipartitePattern:
    """Maximal subpattern with all degrees >= k, reindexed to 1..m', 1..n'."""
    rows, cols = k_core_support(pattern, k)
    rmap = {v: i + 1 for i, v in enumerate(rows)}
    cmap = {v: j + 1 for j, v in enumerate(cols)}
    edges = frozenset((rmap[i], cmap[j]) for i, j in pattern.edges
                      if i in rmap and j in cmap)
    return BipartitePattern(len(rows), len(cols), edges)


def empty_core_threshold(pattern: BipartitePattern) -> int:
    """Smallest k whose k-core is empty."""
    k = 1
    while True:
        rows, cols = k_core_support(pattern, k)
        if not rows and not cols:
            return k
        k += 1


# ---------------------------------------------------------------------------
# balanced bicliques

DEFAULT_BICLIQUE_BUDGET = 2_000_000


def max_biclique(pattern: BipartitePattern, induced: bool = False,
                 node_budget: int = DEFAULT_BICLIQUE_BUDGET
                 ) -> tuple[int, tuple[tuple[int, ...], tuple[int, ...]]]:
    """Largest r with a complete K_{r,r} between some rows A and columns B.

    For bipartite patterns on fixed parts, a K_{r,r} subgraph automatically
    induces K_{r,r} (no extra edges can exist inside A or B), so the induced
    flag does not change the answer; it is kept for callers that want to state
    which variant they mean. Branch-and-bound over row subsets in degree
    order; raises BicliqueBudgetError past node_budget expansions.
    """
    del induced  # identical search either way, see docstring
    if pattern.num_edges == 0:
        return 0, ((), ())
    transposed = pattern.m > pattern.n
    pat = pattern.transpose() if transposed else pattern
    radj = row_neighbors(pat)
    order = sorted(range(1, pat.m + 1), key=lambda i: -len(radj[i - 1]))
    all_cols = frozenset(range(1, pat.n + 1))
    best = 0
    best_wit: tuple[tuple[int, ...], tuple[int, ...]] = ((), ())
    nodes = 0
    limit = min(pat.m, pat.n)

    def walk(idx: int, chosen: list[int], common: frozenset) -> None:
        nonlocal best, best_wit, nodes
        nodes += 1
        if nodes > node_budget:
            raise BicliqueBudgetError(f"budget {node_budget} exceeded")
        value = min(len(chosen), len(common))
        if value > best:
            best = value
            best_wit = (tuple(sorted(chosen[:value])), tuple(sorted(common)[:value]))
        if best == limit:
            return
        for t in range(idx, len(order)):
            v = order[t]
            nc = common & radj[v - 1]
            if min(len(chosen) + 1 + (len(order) - t - 1), len(nc)) <= best:
                continue
            chosen.append(v)
            walk(t + 1, chosen, nc)
            chosen.pop()
            if best == limit:
                return

    walk(0, [], all_cols)
    r, (rows, cols) = best, best_wit
    if transposed:
        rows, cols = cols, rows
    return r, (rows, cols)


def greedy_biclique(pattern: BipartitePattern) -> tuple[int, tuple[tuple[int, ...], tuple[int, ...]]]:
    """Cheap balanced-biclique lower bound: greedy prefix in degree order, both sides."""
    best = 0
    best_wit: tuple[tuple[int, ...], tuple[int, ...]] = ((), ())
    for pat, flip in ((pattern, False), (pattern.transpose(), True)):
        radj = row_neighbors(pat)
        order = sorted(range(1, pat.m + 1), key=lambda i: -len(radj[i - 1]))
        common = frozenset(range(1, pat.n + 1))
        chosen: list[int] = []
        for v in order:
            nc = common & radj[v - 1]
            if not nc:
                continue
            chosen.append(v)
            common = nc
            value = min(len(chosen), len(common))
            if value > best:
                rows = tuple(sorted(chosen[:value]))
                cols = tuple(sorted(common)[:value])
                best = value
                best_wit = (cols, rows) if flip else (rows, cols)
    return best, best_wit


def max_loop_clique(pattern: SymmetricPattern, exact_limit: int = 18) -> int:
    """Largest r with a fully specified principal r x r block (clique incl. loops).

    Exact branch-and-bound up to exact_limit vertices, greedy beyond.
    """
    looped = [v for v in range(1, pattern.n + 1) if (v, v) in pattern.edges]
    adj = {v: {w for w in looped if w != v and pattern.has_edge(v, w)} for v in looped}
    if not looped:
        return 0
    if pattern.n <= exact_limit:
        best = 0

        def grow(cand: list[int], size: int) -> None:
            nonlocal best
            if size + len(cand) <= best:
                return
            if not cand:
                best = max(best, size)
                return
            v = cand[0]
            grow([w for w in cand[1:] if w in adj[v]], size + 1)
            grow(cand[1:], size)

        grow(sorted(looped, key=lambda v: -len(adj[v])), 0)
        return best
    order = sorted(looped, key=lambda v: -len(adj[v]))
    clique: list[int] = []
    for v in order:
        if all(v in adj[w] for w in clique):
            clique.append(v)
    return len(clique)


# ---------------------------------------------------------------------------
# bisimplicial edges and chordality


def find_bisimplicial_edge(pattern: BipartitePattern) -> Optional[tuple[int, int]]:
    """An edge (i, j) whose endpoint neighborhoods induce a complete bipartite
    block, or None."""
    radj = row_neighbors(pattern)
    cadj = col_neighbors(pattern)
    for i, j in sorted(pattern.edges):
        cols = radj[i - 1]
        rows = cadj[j - 1]
        if all(cols <= radj[r - 1] for r in rows):
            return (i, j)
    return None


@dataclass(frozen=True)
class TraceStep:
    vertex: int
    side: str                      # 'row' or 'col'
    neighborhood: tuple[int, ...]  # opposite-side labels adjacent at deletion time
    edge: Optional[tuple[int, int]]  # bisimplicial edge used, None for isolated vertices


@dataclass(frozen=True)
class EliminationTrace:
    steps: tuple[TraceStep, ...]


class _LabelGraph:
    """Mutable label-preserving view used by elimination and hole search."""

    def __init__(self, pattern: BipartitePattern):
        self.rows = set(range(1, pattern.m + 1))
        self.cols = set(range(1, pattern.n + 1))
        self.radj = {i: set(s) for i, s in enumerate(row_neighbors(pattern), start=1)}
        self.cadj = {j: set(s) for j, s in enumerate(col_neighbors(pattern), start=1)}

    def delete(self, side: str, v: int) -> None:
        if side == "row":
            for j in self.radj.pop(v):
                self.cadj[j].discard(v)
            self.rows.discard(v)
        else:
            for i in self.cadj.pop(v):
                self.radj[i].discard(v)
            self.cols.discard(v)

    def bisimplicial(self) -> Optional[tuple[int, int]]:
        for i in sorted(self.rows):
            for j in sorted(self.radj[i]):
                if all(self.radj[i] <= self.radj[r] for r in self.cadj[j]):
                    return (i, j)
        return None

    def num_edges(self) -> int:
        return sum(len(s) for s in self.radj.values())


def _build_trace(pattern: BipartitePattern) -> Optional[EliminationTrace]:
    """Bisimplicial vertex elimination; None if it gets stuck with edges left."""
    g = _LabelGraph(pattern)
    steps: list[TraceStep] = []

    def drop_isolated() -> None:
        for i in sorted(g.rows):
            if not g.radj[i]:
                steps.append(TraceStep(i, "row", (), None))
                g.delete("row", i)
        for j in sorted(g.cols):
            if not g.cadj[j]:
                steps.append(TraceStep(j, "col", (), None))
                g.delete("col", j)

    drop_isolated()
    while g.num_edges():
        edge = g.bisimplicial()
        if edge is None:
            return None
        i, j = edge
        if len(g.radj[i]) <= len(g.cadj[j]):
            steps.append(TraceStep(i, "row", tuple(sorted(g.radj[i])), edge))
            g.delete("row", i)
        else:
            steps.append(TraceStep(j, "col", tuple(sorted(g.cadj[j])), edge))
            g.delete("col", j)
        drop_isolated()
    drop_isolated()
    return EliminationTrace(tuple(steps))


def replay_trace(pattern: BipartitePattern, trace: EliminationTrace) -> bool:
    """Check that replaying the deletions reproduces every recorded neighborhood."""
    g = _LabelGraph(pattern)
    for step in trace.steps:
        adj = g.radj if step.side == "row" else g.cadj
        if step.vertex not in adj or tuple(sorted(adj[step.vertex])) != step.neighborhood:
            return False
        g.delete(step.side, step.vertex)
    return not g.rows and not g.cols


DEFAULT_HOLE_BUDGET = 5_000_000


def shortest_long_hole(pattern: BipartitePattern, node_budget: int = DEFAULT_HOLE_BUDGET
                       ) -> Optional[tuple[tuple[str, int], ...]]:
    """Shortest chordless cycle of length >= 6, as ((side, label), ...), or None.

    Iterative deepening over cycle length; within a length, depth-first search
    over induced paths anchored at their minimal vertex.
    """
    verts = [("row", i) for i in range(1, pattern.m + 1)] + \
            [("col", j) for j in range(1, pattern.n + 1)]
    radj = row_neighbors(pattern)
    cadj = col_neighbors(pattern)

    def nbrs(v):
        side, x = v
        if side == "row":
            return [("col", j) for j in sorted(radj[x - 1])]
        return [("row", i) for i in sorted(cadj[x - 1])]

    adj = {v: set(nbrs(v)) for v in verts}
    order = {v: k for k, v in enumerate(verts)}
    nodes = 0

    def search(length: int) -> Optional[tuple]:
        # grow induced paths anchored at their minimal vertex; the start vertex
        # may only be touched again by the closing edge
        def extend(path: list) -> Optional[tuple]:
            nonlocal nodes
            v0 = path[0]
            final = len(path) == length - 1
            for u in nbrs(path[-1]):
                nodes += 1
                if nodes > node_budget:
                    raise HoleSearchBudgetError(f"budget {node_budget} exceeded")
                if order[u] <= order[v0] or u in path:
                    continue
                if any(w in adj[u] for w in path[1:-1]):
                    continue
                if final:
                    if v0 in adj[u]:
                        return tuple(path) + (u,)
                    continue
                # adjacency back to the anchor is a chord except for the
                # second vertex, where it is the first cycle edge
                if len(path) >= 2 and v0 in adj[u]:
                    continue
                found = extend(path + [u])
                if found:
                    return found
            return None

        for v0 in verts:
            found = extend([v0])
            if found:
                return found
        return None

    max_len = 2 * min(pattern.m, pattern.n)
    for length in range(6, max_len + 1, 2):
        found = search(length)
        if found:
            return found
    return None


def is_chordal_bipartite(pattern: BipartitePattern
                         ) -> tuple[bool, Union[EliminationTrace, tuple]]:
    """Decide chordal bipartiteness (every induced cycle has length 4).

    Returns (True, EliminationTrace) or (False, witness hole). The trace is
    produced by bisimplicial vertex elimination, which always completes on a
    chordal pattern; the decision itself comes from the hole search, since a
    stuck-free elimination alone does not certify chordality.
    """
    hole = shortest_long_hole(pattern)
    if hole is not None:
        return False, hole
    trace = _build_trace(pattern)
    if trace is None:
        raise AssertionError("hole-free pattern must admit a bisimplicial elimination")
    return True, trace


# ---------------------------------------------------------------------------
# clique sums and mutations


def clique_sum(g1: BipartitePattern, g2: BipartitePattern,
               rows1: Sequence[int], cols1: Sequence[int],
               rows2: Sequence[int], cols2: Sequence[int]) -> BipartitePattern:
    """Glue g1 and g2 along complete bipartite blocks of equal shape.

    rows1/cols1 name the glued block inside g1, rows2/cols2 the corresponding
    vertices of g2 (identified pairwise in the order given). Unglued vertices
    of g2 are appended after those of g1.
    """
    rows1, cols1 = list(rows1), list(cols1)
    rows2, cols2 = list(rows2), list(cols2)
    if len(rows1) != len(rows2) or len(cols1) != len(cols2):
        raise ValueError("glued blocks must have equal shape")
    for g, rr, cc, name in ((g1, rows1, cols1, "first"), (g2, rows2, cols2, "second")):
        for i in rr:
            for j in cc:
                if (i, j) not in g.edges:
                    raise ValueError(f"glue block not complete in {name} summand at ({i},{j})")
    rmap = {}
    for a, b in zip(rows2, rows1):
        rmap[a] = b
    next_row = g1.m
    for i in range(1, g2.m + 1):
        if i not in rmap:
            next_row += 1
            rmap[i] = next_row
    cmap = {}
    for a, b in zip(cols2, cols1):
        cmap[a] = b
    next_col = g1.n
    for j in range(1, g2.n + 1):
        if j not in cmap:
            next_col += 1
            cmap[j] = next_col
    edges = set(g1.edges) | {(rmap[i], cmap[j]) for i, j in g2.edges}
    out = BipartitePattern(next_row, next_col, frozenset(edges))
    expected = g1.num_edges + g2.num_edges - len(rows1) * len(cols1)
    if out.num_edges != expected:
        raise AssertionError("clique sum edge-count identity violated")
    return out


def add_looped_suspension(pattern: SymmetricPattern) -> SymmetricPattern:
    """Add a vertex adjacent to all others, carrying its own loop."""
    v = pattern.n + 1
    edges = set(pattern.edges) | {(i, v) for i in range(1, v + 1)}
    return SymmetricPattern(v, frozenset(edges))


def sym_join(g1: SymmetricPattern, g2: SymmetricPattern) -> SymmetricPattern:
    """Disjoint union plus all edges between the two vertex sets."""
    shift = g1.n
    edges = set(g1.edges)
    edges.update((i + shift, j + shift) for i, j in g2.edges)
    edges.update((i, j + shift) for i in range(1, g1.n + 1) for j in range(1, g2.n + 1))
    return SymmetricPattern(g1.n + g2.n, frozenset(edges))


def mutate(pattern: Pattern, op: str, *args) -> Pattern:
    """Dispatch for the small mutation vocabulary used throughout."""
    if op == "delete_vertex":
        side, v = args
        if not isinstance(pattern, BipartitePattern):
            raise ValueError("delete_vertex expects a bipartite pattern")
        return pattern.delete_vertex(side, v)
    if op == "add_edge":
        i, j = args
        return pattern.with_edge(i, j)
    if op == "add_looped_suspension":
        if not isinstance(pattern, SymmetricPattern):
            raise ValueError("add_looped_suspension expects a symmetric pattern")
        return add_looped_suspension(pattern)
    if op == "sym_join":
        (other,) = args
        if not (isinstance(pattern, SymmetricPattern) and isinstance(other, SymmetricPattern)):
            raise ValueError("sym_join expects two symmetric patterns")
        return sym_join(pattern, other)
    raise ValueError(f"unknown mutation {op!r}")


# ---------------------------------------------------------------------------
# serialization (0-based on disk)


def pattern_to_json(pattern: Pattern) -> dict:
    if isinstance(pattern, BipartitePattern):
        return {"kind": "bipartite", "m": pattern.m, "n": pattern.n,
                "edges": sorted([i - 1, j - 1] for i, j in pattern.edges)}
    return {"kind": "symmetric", "n": pattern.n,
            "edges": sorted([i - 1, j - 1] for i, j in pattern.edges)}


def pattern_from_json(doc: dict) -> Pattern:
    kind = doc.get("kind")
    if kind == "bipartite":
        edges = frozenset((int(i) + 1, int(j) + 1) for i, j in doc["edges"])
        return BipartitePattern(int(doc["m"]), int(doc["n"]), edges)
    if kind == "symmetric":
        edges = frozenset((int(i) + 1, int(j) + 1) for i, j in doc["edges"])
        return SymmetricPattern(int(doc["n"]), edges)
    raise ValueError(f"unknown pattern kind {kind!r}")


def pattern_from_mask(text: str) -> BipartitePattern:
    """Parse an ASCII grid: '*' = specified, '?' = unspecified, one row per line."""
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if not lines:
        return BipartitePattern(0, 0, frozenset())
    width = len(lines[0])
    edges = set()
    for i, ln in enumerate(lines, start=1):
        if len(ln) != width:
            raise ValueError("ragged mask grid")
        for j, ch in enumerate(ln, start=1):
            if ch == "*":
                edges.add((i, j))
            elif ch != "?":
                raise ValueError(f"mask characters must be '*' or '?', got {ch!r}")
    return BipartitePattern(len(lines), width, frozenset(edges))


def pattern_to_mask(pattern: BipartitePattern) -> str:
    rows = []
    for i in range(1, pattern.m + 1):
        rows.append("".join("*" if (i, j) in pattern.edges else "?"
                            for j in range(1, pattern.n + 1)))
    return "\n".join(rows)


def load_pattern(path: str) -> Pattern:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return pattern_from_json(json.loads(text))
    return pattern_from_mask(text)


def save_pattern(pattern: Pattern, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(pattern_to_json(pattern), fh, indent=1)
        fh.write("\n")
