"""Generic completion rank engine via tangent-space projection rank.

For a random rank-r point with kernel basis v_1..v_{n-r} and cokernel
functionals c_1..c_{m-r}, the tangent space to the rank-r variety is cut out
by the bilinear constraints c_i A v_j = 0. The coordinate projection onto the
specified entries is surjective iff its image has dimension |E|, which reduces
to two exact ranks of the constraint matrix (all columns vs. columns indexed
by unspecified entries). A surjectivity verdict from any single point is a
certificate; a failure can in principle be a field coincidence, which is why
verdicts are voted over several seeds.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from . import ffmat
from .ffmat import DEFAULT_PRIME
from .pattern import (
    BipartitePattern,
    SymmetricPattern,
    Pattern,
    empty_core_threshold,
    greedy_biclique,
    max_biclique,
    max_loop_clique,
)

DEFAULT_SEEDS = (101, 202, 303)

# exact biclique search is only attempted below this many vertices
_EXACT_BICLIQUE_VERTEX_LIMIT = 26


class SeedDisagreementError(RuntimeError):
    """Randomized verdicts disagreed in a way majority voting cannot repair."""


class CertificateMismatchError(RuntimeError):
    """A valid-looking certificate contradicts the engine's computed rank."""


@dataclass(frozen=True)
class TangentReport:
    """Outcome of one tangent-projection rank evaluation at one random point."""

    r: int
    dim_image: int
    surjective: bool
    injective: bool
    rank_constraints: int
    rank_constraints_nonedges: int
    num_edges: int
    num_coords: int
    seeds: tuple[int, ...]

    @property
    def dim_tangent(self) -> int:
        return self.num_coords - self.rank_constraints

    def to_json(self) -> dict:
        return {
            "r": self.r,
            "dim_image": self.dim_image,
            "surjective": self.surjective,
            "injective": self.injective,
            "rank_C": self.rank_constraints,
            "rank_C_nonE": self.rank_constraints_nonedges,
            "seeds": list(self.seeds),
        }


@dataclass(frozen=True)
class GcrReport:
    gcr: int
    tangent: tuple[TangentReport, ...]
    dimension_bound: int
    biclique_bound: int
    biclique_exact: bool
    core_bound: Optional[int]
    mtr_upper: Optional[int]
    max_completion_rank_upper: int
    symmetric: bool
    seeds: tuple[int, ...]
    unanimous: bool

    def to_json(self) -> dict:
        return {
            "gcr": self.gcr,
            "bounds": {
                "dimension": self.dimension_bound,
                "biclique": self.biclique_bound,
                "biclique_exact": self.biclique_exact,
                "core_mtr": self.core_bound,
                "mtr_upper": self.mtr_upper,
                "max_completion_rank_upper": self.max_completion_rank_upper,
            },
            "symmetric": self.symmetric,
            "seeds": list(self.seeds),
            "unanimous": self.unanimous,
            "tangent": [t.to_json() for t in self.tangent],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)


def dimension_bound(pattern: Pattern) -> int:
    """Smallest k whose rank-k variety has dimension at least |E|."""
    e = pattern.num_edges
    if isinstance(pattern, BipartitePattern):
        m, n = pattern.m, pattern.n
        k = 0
        while k * (m + n) - k * k < e:
            k += 1
        return k
    n = pattern.n
    k = 0
    while n * k - k * (k - 1) // 2 < e:
        k += 1
    return k


def _sym_coords(n: int) -> list[tuple[int, int]]:
    # diagonal first, then off-diagonal pairs in lexicographic order
    return [(a, a) for a in range(1, n + 1)] + \
        [(a, b) for a in range(1, n + 1) for b in range(a + 1, n + 1)]


def tangent_projection(pattern: Pattern, r: int, seed: int,
                       prime: int = DEFAULT_PRIME) -> TangentReport:
    """Rank data of the specified-coordinate projection of a random tangent space."""
    if isinstance(pattern, BipartitePattern):
        m, n = pattern.m, pattern.n
        if not (0 <= r <= min(m, n)):
            raise ValueError(f"r={r} out of range for {m}x{n}")
        point = ffmat.random_ranked_point(m, n, r, seed, prime)
        cons = ffmat.kron_mod(point.cokernel, point.kernel.T, prime)
        num_coords = m * n
        edge_idx = sorted((i - 1) * n + (j - 1) for i, j in pattern.edges)
        nonedge_idx = sorted(set(range(num_coords)) - set(edge_idx))
    else:
        n = pattern.n
        if not (0 <= r <= n):
            raise ValueError(f"r={r} out of range for symmetric {n}x{n}")
        point = ffmat.random_sym_ranked_point(n, r, seed, prime)
        kernel = point.kernel
        d = n - r
        iu = np.triu_indices(n, k=1)
        rows = []
        for i in range(d):
            for j in range(i, d):
                outer = ffmat.mul_mod(kernel[:, i][:, None], kernel[:, j][None, :], prime)
                sym = ffmat.add_mod(outer, outer.T, prime)
                rows.append(np.concatenate([np.diagonal(outer), sym[iu]]))
        cons = np.array(rows, dtype=np.uint64).reshape(d * (d + 1) // 2, n * (n + 1) // 2)
        coords = _sym_coords(n)
        pos = {c: k for k, c in enumerate(coords)}
        num_coords = len(coords)
        edge_idx = sorted(pos[c] for c in pattern.edges)
        nonedge_idx = sorted(set(range(num_coords)) - set(edge_idx))

    rank_c = ffmat.rank_mod(cons, prime)
    if nonedge_idx:
        rank_ne = ffmat.rank_mod(cons[:, nonedge_idx], prime)
    else:
        rank_ne = 0
    num_edges = len(edge_idx)
    dim_image = num_edges - rank_c + rank_ne
    return TangentReport(
        r=r,
        dim_image=dim_image,
        surjective=dim_image == num_edges,
        injective=rank_ne == len(nonedge_idx),
        rank_constraints=rank_c,
        rank_constraints_nonedges=rank_ne,
        num_edges=num_edges,
        num_coords=num_coords,
        seeds=(seed,),
    )


def _vote(pattern: Pattern, r: int, seeds: Sequence[int],
          prime: int) -> tuple[bool, bool, list[TangentReport]]:
    """Majority-vote surjectivity at rank r. A positive verdict is a proof, so a
    negative majority against any positive vote is reported as disagreement."""
    reports = [tangent_projection(pattern, r, s, prime) for s in seeds]
    yes = sum(t.surjective for t in reports)
    no = len(reports) - yes
    if yes == no:
        raise SeedDisagreementError(f"tied vote at r={r}; rerun with fresh seeds")
    majority = yes > no
    if not majority and yes > 0:
        raise SeedDisagreementError(
            f"minority surjectivity certificate at r={r} contradicts majority")
    return majority, (yes == 0 or no == 0), reports


def _biclique_lower(pattern: BipartitePattern) -> tuple[int, bool]:
    if pattern.m + pattern.n <= _EXACT_BICLIQUE_VERTEX_LIMIT:
        value, _ = max_biclique(pattern)
        return value, True
    value, _ = greedy_biclique(pattern)
    return value, False


def gcr(pattern: BipartitePattern, seeds: Optional[Sequence[int]] = None,
        prime: int = DEFAULT_PRIME) -> GcrReport:
    """Generic completion rank of a bipartite pattern, with bounds and certificates."""
    if not isinstance(pattern, BipartitePattern):
        raise TypeError("gcr expects a bipartite pattern; use sgcr for symmetric ones")
    seeds = tuple(seeds) if seeds else DEFAULT_SEEDS
    m, n = pattern.m, pattern.n
    dim_lb = dimension_bound(pattern)
    bic_lb, bic_exact = _biclique_lower(pattern)
    collected: list[TangentReport] = []
    value = 0
    unanimous = True
    if min(m, n) > 0 and pattern.num_edges > 0:
        for r in range(max(dim_lb, bic_lb), min(m, n) + 1):
            surj, unan, reports = _vote(pattern, r, seeds, prime)
            collected.extend(reports)
            if surj:
                value, unanimous = r, unan
                break
        else:
            raise AssertionError("projection must be surjective at r = min(m, n)")
    core_k = empty_core_threshold(pattern)
    return GcrReport(
        gcr=value,
        tangent=tuple(collected),
        dimension_bound=dim_lb,
        biclique_bound=bic_lb,
        biclique_exact=bic_exact,
        core_bound=core_k - 1,
        mtr_upper=max(2 * value - 1, 0),
        max_completion_rank_upper=2 * value,
        symmetric=False,
        seeds=seeds,
        unanimous=unanimous,
    )


def sgcr(pattern: SymmetricPattern, seeds: Optional[Sequence[int]] = None,
         prime: int = DEFAULT_PRIME) -> GcrReport:
    """Generic symmetric completion rank of a semisimple pattern."""
    if not isinstance(pattern, SymmetricPattern):
        raise TypeError("sgcr expects a symmetric pattern")
    seeds = tuple(seeds) if seeds else DEFAULT_SEEDS
    n = pattern.n
    dim_lb = dimension_bound(pattern)
    clique_lb = max_loop_clique(pattern)
    collected: list[TangentReport] = []
    value = 0
    unanimous = True
    if n > 0 and pattern.num_edges > 0:
        for r in range(max(dim_lb, clique_lb), n + 1):
            surj, unan, reports = _vote(pattern, r, seeds, prime)
            collected.extend(reports)
            if surj:
                value, unanimous = r, unan
                break
        else:
            raise AssertionError("projection must be surjective at r = n")
    return GcrReport(
        gcr=value,
        tangent=tuple(collected),
        dimension_bound=dim_lb,
        biclique_bound=clique_lb,
        biclique_exact=True,
        core_bound=None,
        mtr_upper=None,
        max_completion_rank_upper=2 * value,
        symmetric=True,
        seeds=seeds,
        unanimous=unanimous,
    )


# ---------------------------------------------------------------------------
# partition certificates


def verify_partition_certificate(pattern: BipartitePattern, r: int,
                                 row_blocks: Sequence[Sequence[int]],
                                 col_blocks: Sequence[Sequence[int]],
                                 engine_check: bool = True,
                                 seeds: Optional[Sequence[int]] = None,
                                 prime: int = DEFAULT_PRIME
                                 ) -> tuple[bool, list[tuple[int, int, int]]]:
    """Check the exactly-one-unspecified-entry-per-block-pair certificate.

    Row blocks partition the rows into m-r parts and column blocks the columns
    into n-r parts; the certificate is valid when every block pair contains
    exactly one unspecified entry. Validity proves the generic completion rank
    equals r, which is cross-checked against the engine unless disabled.
    Returns (valid, violations) where violations lists (row_block, col_block,
    unspecified_count) for offending pairs.
    """
    m, n = pattern.m, pattern.n
    if pattern.num_edges != r * (m + n - r):
        raise ValueError(
            f"certificate needs |E| = r(m+n-r) = {r * (m + n - r)}, got {pattern.num_edges}")
    row_blocks = [tuple(sorted(int(v) for v in blk)) for blk in row_blocks]
    col_blocks = [tuple(sorted(int(v) for v in blk)) for blk in col_blocks]

    def check_partition(blocks, count, universe, name):
        if len(blocks) != count:
            raise ValueError(f"{name} must have {count} blocks, got {len(blocks)}")
        if count == 0:
            return  # no constraint pairs on this side, nothing to cover
        flat = [v for blk in blocks for v in blk]
        if sorted(flat) != sorted(universe):
            raise ValueError(f"{name} blocks must partition 1..{len(universe)}")

    check_partition(row_blocks, m - r, range(1, m + 1), "row partition")
    check_partition(col_blocks, n - r, range(1, n + 1), "column partition")

    violations = []
    for bi, rows in enumerate(row_blocks):
        for bj, cols in enumerate(col_blocks):
            count = sum(1 for i in rows for j in cols if (i, j) not in pattern.edges)
            if count != 1:
                violations.append((bi, bj, count))
    valid = not violations
    if valid and engine_check:
        report = gcr(pattern, seeds=seeds, prime=prime)
        if report.gcr != r:
            raise CertificateMismatchError(
                f"certificate says {r} but engine computed {report.gcr}")
    return valid, violations


def build_circulant_certificate(n: int, k: int
                                ) -> tuple[int, list[tuple[int, ...]], list[tuple[int, ...]]]:
    """Partition certificate for the circulant pattern on [n] x [n] with
    n*l specified entries, l = n - k^2/n; needs k | n and n | k^2.

    Returns (l, row_blocks, col_blocks); the blocks witness generic completion
    rank n - k.
    """
    if k < 1 or n < 1:
        raise ValueError("n and k must be positive")
    if n % k != 0:
        raise ValueError(f"{k} does not divide {n}")
    if (k * k) % n != 0:
        raise ValueError(f"{n} does not divide {k * k}")
    step = k * k // n
    l = n - step
    if l < 1:
        raise ValueError(f"l = n - k^2/n = {l} leaves no specified entries")
    reps = n // k
    row_blocks = [tuple(i + t * k for t in range(reps)) for i in range(1, k + 1)]
    col_blocks = [
        tuple((a - 1) * k + b + q * step for q in range(reps))
        for a in range(1, reps + 1)
        for b in range(1, step + 1)
    ]
    return l, row_blocks, col_blocks


# ---------------------------------------------------------------------------
# combination rules and deletion checks


def clique_sum_combine(r1: int, r2: int, glue_m: int, glue_n: int) -> Optional[int]:
    """Combined rank of a clique sum: max of the summands, valid only when that
    max is at least both glued block dimensions; None when the rule is silent."""
    top = max(r1, r2)
    if top >= max(glue_m, glue_n):
        return top
    return None


class DeletionCheck(NamedTuple):
    status: str        # 'holds' | 'hypothesis-unmet' | 'violated'
    gcr_full: int
    gcr_deleted: int
    degree: int


def vertex_deletion_check(pattern: BipartitePattern, side: str, v: int,
                          seeds: Optional[Sequence[int]] = None,
                          prime: int = DEFAULT_PRIME) -> DeletionCheck:
    """Deleting a degree-k vertex keeps the rank when the remainder has rank >= k."""
    k = pattern.degree(side, v)
    reduced = pattern.delete_vertex(side, v)
    g_red = gcr(reduced, seeds=seeds, prime=prime).gcr
    g_full = gcr(pattern, seeds=seeds, prime=prime).gcr
    if g_red < k:
        return DeletionCheck("hypothesis-unmet", g_full, g_red, k)
    return DeletionCheck("holds" if g_full == g_red else "violated", g_full, g_red, k)
