"""Constructive completions: exact chordal elimination and numerical fitting.

The chordal path rebuilds a matrix by reversing a bisimplicial elimination:
each reinserted vertex contributes a column (or row) that is solved into the
span of the already completed block whenever its specified entries allow it,
so the rank never grows beyond the fully specified block that forces it.

The floating path is a plain alternating-least-squares fitter over the
specified entries, used as a real-completability probe; its failures are
evidence, never proof, and results are labelled accordingly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import ffmat
from .pattern import (
    BipartitePattern,
    SymmetricPattern,
    Pattern,
    is_chordal_bipartite,
    max_biclique,
    pattern_from_json,
    pattern_to_json,
)


class MinorVanishingError(ValueError):
    """A specified block that the construction relies on is rank deficient."""


class NotChordalError(ValueError):
    """Chordal completion was asked for a pattern with a long induced cycle."""


class CompletionRankError(RuntimeError):
    """The constructed completion missed the target rank (degenerate data)."""


@dataclass(frozen=True)
class PartialMatrix:
    """Values for exactly the specified entries of a pattern.

    Over F_p (prime is set) values are residues; over the reals (prime None)
    they are floats. Symmetric values are keyed by (i, j) with i <= j.
    """

    pattern: Pattern
    values: dict
    prime: Optional[int] = None

    def __post_init__(self):
        if isinstance(self.pattern, SymmetricPattern):
            norm = {(min(i, j), max(i, j)): v for (i, j), v in self.values.items()}
        else:
            norm = dict(self.values)
        if set(norm) != set(self.pattern.edges):
            raise ValueError("value keys must equal the pattern's edge set")
        if self.prime is not None:
            norm = {k: int(v) % self.prime for k, v in norm.items()}
        else:
            norm = {k: float(v) for k, v in norm.items()}
        object.__setattr__(self, "values", norm)

    @property
    def is_exact(self) -> bool:
        return self.prime is not None


def random_partial(pattern: Pattern, seed: int, prime: Optional[int] = None) -> PartialMatrix:
    """Generic data on a pattern: uniform residues over F_p, standard normal reals."""
    rng = np.random.default_rng(seed)
    edges = sorted(pattern.edges)
    if prime is not None:
        vals = {e: int(v) for e, v in zip(edges, rng.integers(0, prime, len(edges)))}
    else:
        vals = {e: float(v) for e, v in zip(edges, rng.standard_normal(len(edges)))}
    return PartialMatrix(pattern, vals, prime)


def dense_and_mask(x: PartialMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Dense array with zeros at unspecified entries, plus the specified mask."""
    if isinstance(x.pattern, BipartitePattern):
        m, n = x.pattern.m, x.pattern.n
        dense = np.zeros((m, n), dtype=np.uint64 if x.is_exact else float)
        mask = np.zeros((m, n), dtype=bool)
        for (i, j), v in x.values.items():
            dense[i - 1, j - 1] = v
            mask[i - 1, j - 1] = True
        return dense, mask
    n = x.pattern.n
    dense = np.zeros((n, n), dtype=np.uint64 if x.is_exact else float)
    mask = np.zeros((n, n), dtype=bool)
    for (i, j), v in x.values.items():
        dense[i - 1, j - 1] = dense[j - 1, i - 1] = v
        mask[i - 1, j - 1] = mask[j - 1, i - 1] = True
    return dense, mask


@dataclass(frozen=True)
class CompletionResult:
    matrix: np.ndarray
    rank: int
    method: str
    prime: Optional[int]
    exact: Optional[bool] = None            # exact entry agreement (F_p path)
    max_deviation: Optional[float] = None   # worst specified-entry deviation (float path)

    def to_json(self) -> dict:
        mat = self.matrix
        rows = [[int(v) for v in row] for row in mat] if self.prime is not None \
            else [[float(v) for v in row] for row in mat]
        return {"rank": self.rank, "method": self.method, "prime": self.prime,
                "exact": self.exact, "max_deviation": self.max_deviation, "matrix": rows}


# ---------------------------------------------------------------------------
# span-preserving column fits


def _fit_in_span(m_full: np.ndarray, positions: Sequence[int], vals: np.ndarray,
                 prime: Optional[int], rng: Optional[np.random.Generator]) -> np.ndarray:
    """Vector in the column span of m_full matching vals at the given rows."""
    k = len(positions)
    if prime is not None:
        sub = m_full[np.asarray(positions, dtype=int), :] if k else \
            np.zeros((0, m_full.shape[1]), dtype=np.uint64)
        if ffmat.rank_mod(sub, prime) != k:
            raise MinorVanishingError("specified rows of the completed block are dependent")
        coef = ffmat.solve_mod(sub, np.asarray(vals, dtype=np.uint64), prime) if k \
            else np.zeros(m_full.shape[1], dtype=np.uint64)
        if rng is not None and k < m_full.shape[1]:
            null = ffmat.nullspace_mod(sub, prime)
            if null.shape[1]:
                mix = ffmat.random_residues(rng, (null.shape[1],), prime)
                coef = ffmat.add_mod(coef, ffmat.mat_mul_mod(null, mix[:, None], prime)[:, 0],
                                     prime)
        return ffmat.mat_mul_mod(m_full, coef[:, None], prime)[:, 0]
    sub = np.asarray(m_full, dtype=float)[np.asarray(positions, dtype=int), :] if k else \
        np.zeros((0, m_full.shape[1]))
    if k and ffmat.rank_float(sub) != k:
        raise MinorVanishingError("specified rows of the completed block are dependent")
    if k:
        coef, *_ = np.linalg.lstsq(sub, np.asarray(vals, dtype=float), rcond=None)
    else:
        coef = np.zeros(m_full.shape[1])
    if rng is not None:
        _, s, vt = np.linalg.svd(sub) if k else (None, np.zeros(0), np.eye(m_full.shape[1]))
        null_dim = m_full.shape[1] - k
        if null_dim > 0:
            coef = coef + vt[k:].T @ rng.standard_normal(null_dim)
    return np.asarray(m_full, dtype=float) @ coef


def fit_column(m_full: np.ndarray, specified: dict, prime: Optional[int] = None,
               rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Complete a partial column against a rank-r matrix without raising its rank.

    specified maps 1-based row indices to values; needs at most r specified
    entries whose rows form a full-rank block of m_full, otherwise
    MinorVanishingError. The returned column lies in the column span, so the
    augmented matrix keeps rank r. With no specified entries and no rng, the
    zero column is returned.
    """
    m_full = np.asarray(m_full)
    rank = ffmat.rank_mod(m_full, prime) if prime is not None else ffmat.rank_float(m_full)
    if len(specified) > rank:
        raise ValueError(f"{len(specified)} specified entries exceed rank {rank}")
    rows = sorted(specified)
    positions = [i - 1 for i in rows]
    vals = [specified[i] for i in rows]
    return _fit_in_span(m_full, positions, np.asarray(vals), prime, rng)


# ---------------------------------------------------------------------------
# chordal completion


def chordal_complete(x: PartialMatrix, seed: int = 0) -> CompletionResult:
    """Complete a chordal-bipartite partial matrix to its generic rank.

    Reverses a bisimplicial elimination: every reinserted vertex with k
    specified entries is fitted into the span of the current block when
    k <= rank, and filled generically (rank goes up by one) when the fully
    specified block it closes forces the larger rank. Fails with a diagnostic
    when a specified block the construction uses is singular.
    """
    if not isinstance(x.pattern, BipartitePattern):
        raise TypeError("chordal completion works on bipartite patterns")
    flag, witness = is_chordal_bipartite(x.pattern)
    if not flag:
        raise NotChordalError(f"pattern has a chordless cycle through {witness}")
    prime = x.prime
    rng = np.random.default_rng(seed)
    dtype = np.uint64 if prime is not None else float
    mat = np.zeros((0, 0), dtype=dtype)
    act_rows: list[int] = []
    act_cols: list[int] = []

    def current_rank() -> int:
        if mat.size == 0:
            return 0
        return ffmat.rank_mod(mat, prime) if prime is not None else ffmat.rank_float(mat)

    def random_value():
        if prime is not None:
            return np.uint64(int(rng.integers(0, prime)))
        return rng.standard_normal()

    for step in reversed(witness.steps):
        r_cur = current_rank()
        if step.side == "col":
            specified = {act_rows.index(i): x.values[(i, step.vertex)]
                         for i in step.neighborhood}
            if len(specified) <= r_cur:
                pos = sorted(specified)
                col = _fit_in_span(mat, pos, np.asarray([specified[p] for p in pos]),
                                   prime, rng)
            else:
                col = np.asarray([random_value() for _ in act_rows], dtype=dtype)
                for p, v in specified.items():
                    col[p] = v
            at = int(np.searchsorted(np.asarray(act_cols), step.vertex))
            mat = np.insert(mat, at, col, axis=1) if mat.size or act_rows else \
                np.zeros((len(act_rows), 1), dtype=dtype)
            act_cols.insert(at, step.vertex)
        else:
            specified = {act_cols.index(j): x.values[(step.vertex, j)]
                         for j in step.neighborhood}
            if len(specified) <= r_cur:
                pos = sorted(specified)
                row = _fit_in_span(mat.T, pos, np.asarray([specified[p] for p in pos]),
                                   prime, rng)
            else:
                row = np.asarray([random_value() for _ in act_cols], dtype=dtype)
                for p, v in specified.items():
                    row[p] = v
            at = int(np.searchsorted(np.asarray(act_rows), step.vertex))
            mat = np.insert(mat, at, row, axis=0) if mat.size or act_cols else \
                np.zeros((1, len(act_cols)), dtype=dtype)
            act_rows.insert(at, step.vertex)

    if act_rows != list(range(1, x.pattern.m + 1)) or act_cols != list(range(1, x.pattern.n + 1)):
        raise AssertionError("elimination trace did not cover the pattern")

    achieved = current_rank()
    target = max_biclique(x.pattern)[0]
    if achieved != target:
        raise CompletionRankError(
            f"completion reached rank {achieved}, the fully specified block forces {target}; "
            "the data is degenerate for this pattern")
    if prime is not None:
        exact = all(int(mat[i - 1, j - 1]) == v for (i, j), v in x.values.items())
        if not exact:
            raise AssertionError("exact path must reproduce specified entries")
        return CompletionResult(mat, achieved, "chordal-elimination", prime, exact=True)
    dev = max((abs(float(mat[i - 1, j - 1]) - v) for (i, j), v in x.values.items()),
              default=0.0)
    return CompletionResult(mat, achieved, "chordal-elimination", None, max_deviation=dev)


# ---------------------------------------------------------------------------
# alternating least squares over the specified entries


@dataclass(frozen=True)
class FitOptions:
    restarts: int = 20
    max_iters: int = 500
    tol_residual: float = 1e-6
    seed: int = 0


@dataclass(frozen=True)
class FitResult:
    residual: float
    rel_residual: float
    completable: bool
    rank: int
    factors: tuple
    restarts: int
    note: str = "optimizer-evidence"
    signature: Optional[tuple[int, int]] = None

    def to_json(self) -> dict:
        return {"residual": self.residual, "rel_residual": self.rel_residual,
                "completable": self.completable, "rank": self.rank,
                "restarts": self.restarts, "note": self.note,
                "signature": list(self.signature) if self.signature else None}


def _als_once(dense: np.ndarray, mask: np.ndarray, r: int, rng: np.random.Generator,
              max_iters: int, warm: Optional[tuple] = None) -> tuple[float, np.ndarray, np.ndarray]:
    m, n = dense.shape
    norm = np.linalg.norm(dense[mask]) or 1.0
    if r == 0:
        z = np.zeros((m, 0)), np.zeros((n, 0))
        return float(np.linalg.norm(dense[mask])), *z
    if warm is not None:
        u0, v0 = warm
        u = np.hstack([u0, np.zeros((m, r - u0.shape[1]))]) if u0.shape[1] < r else u0[:, :r]
        v = np.hstack([v0, np.zeros((n, r - v0.shape[1]))]) if v0.shape[1] < r else v0[:, :r]
        u, v = u.copy(), v.copy()
    else:
        u = rng.standard_normal((m, r))
        v = rng.standard_normal((n, r))
    row_cols = [np.flatnonzero(mask[i]) for i in range(m)]
    col_rows = [np.flatnonzero(mask[:, j]) for j in range(n)]
    prev = np.inf
    for _ in range(max_iters):
        for i in range(m):
            cols = row_cols[i]
            if cols.size:
                u[i], *_ = np.linalg.lstsq(v[cols], dense[i, cols], rcond=None)
        for j in range(n):
            rows = col_rows[j]
            if rows.size:
                v[j], *_ = np.linalg.lstsq(u[rows], dense[rows, j], rcond=None)
        resid = float(np.linalg.norm(((u @ v.T) - dense)[mask]))
        if resid < 1e-14 * norm or prev - resid < 1e-13 * norm:
            prev = resid
            break
        prev = resid
    return prev, u, v


def lowrank_fit(x: PartialMatrix, r: int, opts: Optional[FitOptions] = None,
                warm_start: Optional[tuple] = None) -> FitResult:
    """Best-effort rank-r factor fit of the specified entries (ALS, restarts).

    Success (small relative residual) is strong evidence of real rank-r
    completability; failure after all restarts is evidence against it, not a
    proof. Restart seeds derive from opts.seed, so results are reproducible,
    and passing the factors of a lower-rank fit as warm_start guarantees the
    residual does not exceed that fit's.
    """
    opts = opts or FitOptions()
    if isinstance(x.pattern, SymmetricPattern):
        raise TypeError("use sym_lowrank_fit for symmetric patterns")
    if x.is_exact:
        raise TypeError("low-rank fitting works on real-valued data")
    if r > min(x.pattern.m, x.pattern.n):
        raise ValueError("r exceeds the matrix dimensions")
    dense, mask = dense_and_mask(x)
    norm = np.linalg.norm(dense[mask]) or 1.0
    seeds = np.random.SeedSequence(opts.seed).spawn(max(1, opts.restarts))
    best = (np.inf, -1, None, None)
    starts: list[Optional[tuple]] = [None] * opts.restarts
    if r > 0:
        # deterministic spectral start from the zero-filled matrix
        uu, ss, vv = np.linalg.svd(dense * mask, full_matrices=False)
        scale = np.sqrt(ss[:r])
        starts = [(uu[:, :r] * scale, vv[:r].T * scale)] + starts
    if warm_start is not None:
        starts = [warm_start] + starts
    for idx, start in enumerate(starts):
        rng = np.random.default_rng(seeds[min(idx, len(seeds) - 1)])
        resid, u, v = _als_once(dense, mask, r, rng, opts.max_iters, warm=start)
        if resid < best[0]:
            best = (resid, idx, u, v)
        if best[0] < 1e-14 * norm:
            break
    resid, _, u, v = best
    rel = float(resid / norm)
    return FitResult(residual=float(resid), rel_residual=rel,
                     completable=bool(rel < opts.tol_residual), rank=r,
                     factors=(u, v), restarts=len(starts))


def lowrank_profile(x: PartialMatrix, ranks: Sequence[int],
                    opts: Optional[FitOptions] = None) -> dict[int, FitResult]:
    """Fits over increasing ranks with warm-started chaining; residuals are
    non-increasing in r by construction."""
    opts = opts or FitOptions()
    out: dict[int, FitResult] = {}
    warm = None
    for r in sorted(ranks):
        res = lowrank_fit(x, r, opts, warm_start=warm)
        out[r] = res
        warm = res.factors
    return out


def sym_lowrank_fit(x: PartialMatrix, r: int, opts: Optional[FitOptions] = None) -> FitResult:
    """Symmetric rank-r fit over all inertia signatures diag(+1.. -1..).

    Minimizes the specified-entry residual of U J U^T for each of the r+1
    signature classes and reports the best; indefinite real completions are
    reachable this way while a plain U U^T parameterization would miss them.
    """
    from scipy.optimize import least_squares

    opts = opts or FitOptions()
    if not isinstance(x.pattern, SymmetricPattern):
        raise TypeError("sym_lowrank_fit expects a symmetric pattern")
    if x.is_exact:
        raise TypeError("low-rank fitting works on real-valued data")
    n = x.pattern.n
    if r > n:
        raise ValueError("r exceeds the matrix dimension")
    edges = sorted(x.pattern.edges)
    targets = np.asarray([x.values[e] for e in edges])
    norm = np.linalg.norm(targets) or 1.0
    if r == 0:
        rel = float(np.linalg.norm(targets)) / norm
        return FitResult(float(np.linalg.norm(targets)), rel, rel < opts.tol_residual,
                         0, (np.zeros((n, 0)),), 0, signature=(0, 0))
    ii = np.asarray([i - 1 for i, _ in edges])
    jj = np.asarray([j - 1 for _, j in edges])
    seeds = np.random.SeedSequence(opts.seed).spawn(opts.restarts * (r + 1))
    best = (np.inf, None, None)
    trial = 0
    for plus in range(r, -1, -1):
        j_diag = np.concatenate([np.ones(plus), -np.ones(r - plus)])
        for _ in range(max(1, opts.restarts // 2)):
            rng = np.random.default_rng(seeds[trial % len(seeds)])
            trial += 1
            u0 = rng.standard_normal(n * r)

            def resid_fn(flat, jd=j_diag):
                u = flat.reshape(n, r)
                full = (u * jd) @ u.T
                return full[ii, jj] - targets

            sol = least_squares(resid_fn, u0, method="trf", max_nfev=400)
            resid = float(np.linalg.norm(sol.fun))
            if resid < best[0]:
                best = (resid, sol.x.reshape(n, r), (plus, r - plus))
            if best[0] < 1e-12 * norm:
                break
        if best[0] < 1e-12 * norm:
            break
    resid, u, sig = best
    rel = float(resid / norm)
    return FitResult(residual=float(resid), rel_residual=rel,
                     completable=bool(rel < opts.tol_residual), rank=r,
                     factors=(u,), restarts=trial, signature=sig)


# ---------------------------------------------------------------------------
# serialization: pattern JSON extended with a values list


def partial_to_json(x: PartialMatrix) -> dict:
    doc = pattern_to_json(x.pattern)
    if x.is_exact:
        doc["prime"] = x.prime
        doc["values"] = sorted([i - 1, j - 1, int(v)] for (i, j), v in x.values.items())
    else:
        doc["values"] = sorted([i - 1, j - 1, repr(float(v))] for (i, j), v in x.values.items())
    return doc


def partial_from_json(doc: dict) -> PartialMatrix:
    pattern = pattern_from_json(doc)
    prime = doc.get("prime")
    vals = {}
    for i, j, v in doc["values"]:
        key = (int(i) + 1, int(j) + 1)
        vals[key] = int(v) if prime is not None else float(v)
    return PartialMatrix(pattern, vals, prime)


def load_partial(path: str) -> PartialMatrix:
    with open(path, "r", encoding="utf-8") as fh:
        return partial_from_json(json.load(fh))


def save_partial(x: PartialMatrix, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(partial_to_json(x), fh, indent=1)
        fh.write("\n")
