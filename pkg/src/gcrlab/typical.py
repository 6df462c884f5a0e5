"""Real typical-rank detection: exact certificates plus sampling harnesses.

Two exact certificates are implemented. For the 4x4 diagonal-free pattern,
the projection of the rank-2 completions onto the coordinates including one
diagonal entry is a hypersurface of degree 2 in that entry; a negative
discriminant of that quadratic proves the data has no real rank-2 completion.
For the complete-block-plus-isolated-loop pattern, the completion rank is
full exactly when the loop value lies outside the range of the quadratic form
of the block, which is decided by definiteness.

Everything else is Monte Carlo with the low-rank fitter and is labelled
optimizer evidence, never proof.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .complete import (
    FitOptions,
    PartialMatrix,
    dense_and_mask,
    lowrank_fit,
    random_partial,
    sym_lowrank_fit,
)
from .gcr import DEFAULT_SEEDS, gcr, sgcr
from .pattern import BipartitePattern, generate


class BoundaryCaseError(ValueError):
    """Nearly singular block or zero loop value; the rank class is undecided."""


class FormulaMismatchError(RuntimeError):
    """Engine-computed rank disagrees with the closed form it must match."""


_CUBE = generate("cube")

# default relative-residual threshold below which a fit counts as a completion
_FIT_SUCCESS_TOL = 1e-8


@dataclass(frozen=True)
class TypicalSampleReport:
    pattern_id: str
    trials: int
    seed: int
    classes: dict                      # rank -> {"count", "frequency", "certificate"}
    unclassified: int
    options: dict = field(default_factory=dict)
    per_trial: Optional[tuple] = None  # rank class per trial, 0 = unclassified

    def frequency(self, rank: int) -> float:
        info = self.classes.get(rank)
        return info["frequency"] if info else 0.0

    def to_json(self) -> dict:
        return {
            "pattern": self.pattern_id,
            "trials": self.trials,
            "seed": self.seed,
            "classes": {str(r): dict(v) for r, v in sorted(self.classes.items())},
            "unclassified": self.unclassified,
            "options": dict(self.options),
        }

    def csv_rows(self) -> list[tuple]:
        rows = [("trial", "rank_class", "certificate")]
        if self.per_trial is None:
            return rows
        cert = {r: v["certificate"] for r, v in self.classes.items()}
        for t, r in enumerate(self.per_trial):
            rows.append((t, r, cert.get(r, "unclassified" if r == 0 else "")))
        return rows


# ---------------------------------------------------------------------------
# the 4x4 diagonal-free pattern


def _disc4(a: np.ndarray) -> np.ndarray:
    """Discriminant certificate on arrays of shape (..., 4, 4), 0-based entries.

    Written against the labelling where the first diagonal entry is the one
    projected onto; negative values prove no real rank-2 completion exists.
    """
    def e(i, j):
        return a[..., i - 1, j - 1]

    quartic = (e(1, 3) * e(2, 4) * e(3, 2) * e(4, 1)
               - e(1, 2) * e(2, 3) * e(3, 4) * e(4, 1)
               - e(1, 4) * e(2, 3) * e(3, 1) * e(4, 2)
               - e(1, 3) * e(2, 1) * e(3, 4) * e(4, 2)
               + e(1, 2) * e(2, 4) * e(3, 1) * e(4, 3)
               + e(1, 4) * e(2, 1) * e(3, 2) * e(4, 3))
    cubic = e(2, 3) * e(3, 4) * e(4, 2) - e(2, 4) * e(3, 2) * e(4, 3)
    sextic = (e(1, 2) * e(1, 4) * e(2, 3) * e(3, 1) * e(4, 1)
              - e(1, 2) * e(1, 3) * e(2, 4) * e(3, 1) * e(4, 1)
              - e(1, 3) * e(1, 4) * e(2, 1) * e(3, 2) * e(4, 1)
              + e(1, 2) * e(1, 3) * e(2, 1) * e(3, 4) * e(4, 1)
              + e(1, 3) * e(1, 4) * e(2, 1) * e(3, 1) * e(4, 2)
              - e(1, 2) * e(1, 4) * e(2, 1) * e(3, 1) * e(4, 3))
    return quartic * quartic - 4 * cubic * sextic


def _cube_array(x) -> np.ndarray:
    if isinstance(x, PartialMatrix):
        if not (isinstance(x.pattern, BipartitePattern) and x.pattern == _CUBE):
            raise ValueError("expected the 4x4 diagonal-free pattern")
        if x.is_exact:
            raise ValueError("discriminant certificate needs real values")
        dense, _ = dense_and_mask(x)
        return dense
    arr = np.asarray(x, dtype=float)
    if arr.shape[-2:] != (4, 4):
        raise ValueError("expected 4x4 data")
    return arr


def cube_discriminant(x, corner: int = 1) -> float:
    """Exact rank-2 obstruction for 4x4 data with unspecified diagonal.

    Evaluates the discriminant of the degree-2 projection polynomial in the
    diagonal entry numbered `corner` (the other three diagonal entries are
    projected away). A negative value certifies the data has no real rank-2
    completion. Diagonal entries of the input are ignored.
    """
    arr = _cube_array(x)
    if not 1 <= corner <= 4:
        raise ValueError("corner must be in 1..4")
    shifted = np.roll(arr, shift=-(corner - 1), axis=(-2, -1))
    return float(_disc4(shifted))


def cube_discriminants(x) -> np.ndarray:
    """All four sibling discriminants (one per diagonal entry), shape (..., 4)."""
    arr = _cube_array(x)
    return np.stack([_disc4(np.roll(arr, shift=-k, axis=(-2, -1))) for k in range(4)],
                    axis=-1)


def _cube_fit_batch(data: np.ndarray, r: int, restarts: int, iters: int,
                    seed: int) -> np.ndarray:
    """Relative ALS residuals at rank r for a batch of diagonal-free 4x4 samples.

    Same alternating scheme as lowrank_fit, vectorized across the batch; used
    by the sampler where instance-at-a-time fitting would dominate runtime.
    """
    b = data.shape[0]
    mask = ~np.eye(4, dtype=bool)
    row_cols = [np.flatnonzero(mask[i]) for i in range(4)]
    col_rows = [np.flatnonzero(mask[:, j]) for j in range(4)]
    norms = np.linalg.norm((data * mask).reshape(b, -1), axis=1)
    norms = np.where(norms == 0, 1.0, norms)
    best = np.full(b, np.inf)
    seeds = np.random.SeedSequence(seed).spawn(restarts)
    eye = 1e-12 * np.eye(r)
    for ss in seeds:
        rng = np.random.default_rng(ss)
        u = rng.standard_normal((b, 4, r))
        v = rng.standard_normal((b, 4, r))
        for _ in range(iters):
            for i in range(4):
                cols = row_cols[i]
                vs = v[:, cols, :]
                g = vs.transpose(0, 2, 1) @ vs + eye
                rhs = vs.transpose(0, 2, 1) @ data[:, i, cols, None]
                u[:, i, :] = np.linalg.solve(g, rhs)[..., 0]
            for j in range(4):
                rows = col_rows[j]
                us = u[:, rows, :]
                g = us.transpose(0, 2, 1) @ us + eye
                rhs = us.transpose(0, 2, 1) @ data[:, rows, j, None]
                v[:, j, :] = np.linalg.solve(g, rhs)[..., 0]
        resid = np.linalg.norm(((u @ v.transpose(0, 2, 1) - data) * mask).reshape(b, -1),
                               axis=1)
        best = np.minimum(best, resid / norms)
    return best


def cube_typical_sample(trials: int, seed: int = 0,
                        opts: Optional[FitOptions] = None,
                        keep_per_trial: bool = False) -> TypicalSampleReport:
    """Sample Gaussian diagonal-free 4x4 data and split it by real rank class.

    Rank 3 is certified exactly by a negative sibling discriminant; rank 2 is
    confirmed by the optimizer on the remaining trials (evidence only).
    """
    opts = opts or FitOptions(restarts=3, max_iters=120)
    rng = np.random.default_rng(seed)
    data = rng.standard_normal((trials, 4, 4))
    data[:, np.arange(4), np.arange(4)] = 0.0
    classes: dict[int, dict] = {}
    per_trial = np.zeros(trials, dtype=int)
    if trials:
        discs = np.stack([_disc4(np.roll(data, shift=-k, axis=(1, 2))) for k in range(4)],
                         axis=1)
        rank3 = (discs < 0).any(axis=1)
        rest = np.flatnonzero(~rank3)
        rank2 = np.zeros(trials, dtype=bool)
        if rest.size:
            rel = _cube_fit_batch(data[rest], 2, opts.restarts, opts.max_iters, seed)
            rank2[rest] = rel < _FIT_SUCCESS_TOL
        per_trial[rank3] = 3
        per_trial[rank2] = 2
        classes = {
            3: {"count": int(rank3.sum()), "frequency": float(rank3.mean()),
                "certificate": "exact-certificate"},
            2: {"count": int(rank2.sum()), "frequency": float(rank2.mean()),
                "certificate": "optimizer-evidence"},
        }
    return TypicalSampleReport(
        pattern_id="circulant(4,3)",
        trials=trials,
        seed=seed,
        classes=classes,
        unclassified=int((per_trial == 0).sum()) if trials else 0,
        options={"restarts": opts.restarts, "max_iters": opts.max_iters,
                 "fit_tol": _FIT_SUCCESS_TOL},
        per_trial=tuple(int(v) for v in per_trial) if keep_per_trial else None,
    )


# ---------------------------------------------------------------------------
# complete block plus isolated loop


def knk1_boundary(a: np.ndarray, lam: float, tol: float = 1e-10) -> int:
    """Exact rank class of block-plus-loop data: n + 1 exactly when the loop
    value is outside the range of the block's quadratic form.

    That happens iff the block is positive definite with lam < 0 or negative
    definite with lam > 0. Near-singular blocks and lam == 0 are refused.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n) or not np.allclose(a, a.T):
        raise ValueError("block must be square symmetric")
    eig = np.linalg.eigvalsh(a)
    scale = float(np.max(np.abs(eig))) or 1.0
    if float(np.min(np.abs(eig))) <= tol * scale:
        raise BoundaryCaseError("block is numerically singular")
    if lam == 0.0:
        raise BoundaryCaseError("zero loop value sits on the boundary")
    pos = bool(np.all(eig > 0))
    neg = bool(np.all(eig < 0))
    if (pos and lam < 0) or (neg and lam > 0):
        return n + 1
    return n


def knk1_typical_sample(n: int, trials: int, seed: int = 0,
                        optimizer_subsample: int = 0,
                        opts: Optional[FitOptions] = None) -> TypicalSampleReport:
    """Gaussian sampling of block-plus-loop data, classified by the exact
    boundary test; optionally cross-checked against the symmetric fitter."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    ranks = np.zeros(trials, dtype=int)
    samples = []
    for t in range(trials):
        g = rng.standard_normal((n, n))
        a = (g + g.T) / 2.0
        lam = float(rng.standard_normal())
        try:
            ranks[t] = knk1_boundary(a, lam)
        except BoundaryCaseError:
            ranks[t] = 0
        samples.append((a, lam))
    agreement = None
    if optimizer_subsample and trials:
        opts = opts or FitOptions(restarts=6, seed=seed)
        pattern = generate("sym-knk1", [n])
        idx = rng.choice(trials, size=min(optimizer_subsample, trials), replace=False)
        agree = 0
        for t in idx:
            a, lam = samples[t]
            vals = {(i, j): a[i - 1, j - 1] for i in range(1, n + 1) for j in range(i, n + 1)}
            vals[(n + 1, n + 1)] = lam
            fit = sym_lowrank_fit(PartialMatrix(pattern, vals), n, opts)
            optimizer_rank = n if fit.rel_residual < _FIT_SUCCESS_TOL * 10 else n + 1
            agree += int(optimizer_rank == ranks[t])
        agreement = agree / len(idx)
    classes = {}
    for r in (n, n + 1):
        count = int((ranks == r).sum())
        classes[r] = {"count": count,
                      "frequency": count / trials if trials else 0.0,
                      "certificate": "exact-certificate"}
    options = {"n": n}
    if agreement is not None:
        options["optimizer_agreement"] = agreement
        options["optimizer_subsample"] = int(optimizer_subsample)
    return TypicalSampleReport(
        pattern_id=f"sym-knk1({n})",
        trials=trials,
        seed=seed,
        classes=classes,
        unclassified=int((ranks == 0).sum()),
        options=options,
        per_trial=tuple(int(v) for v in ranks),
    )


# ---------------------------------------------------------------------------
# the anti-diagonal family


def _triangular_floor(n: int) -> int:
    """Largest k with k(k+1)/2 <= n."""
    k = int((math.isqrt(1 + 8 * n) - 1) // 2)
    while (k + 1) * (k + 2) // 2 <= n:
        k += 1
    while k * (k + 1) // 2 > n:
        k -= 1
    return k


@dataclass(frozen=True)
class GnReport:
    n: int
    sgcr_formula: int
    sgcr_engine: int
    typical_ranks: tuple[int, ...]
    typical_count: int
    witness_determinants_negative: bool

    def to_json(self) -> dict:
        return {"n": self.n, "sgcr": self.sgcr_engine,
                "sgcr_formula": self.sgcr_formula,
                "typical_ranks": list(self.typical_ranks),
                "typical_count": self.typical_count,
                "witness_determinants_negative": self.witness_determinants_negative}


def full_rank_witness_determinants(n: int, fills: int = 100, seed: int = 0
                                   ) -> np.ndarray:
    """Determinants of random completions of the block-plus-loop witness.

    The witness fixes the block to the identity, the loop to -1 and the rest
    of the specified entries to 0; every completion has determinant
    -1 - sum of squares of the filled entries, hence full rank over the reals.
    Raises if any computed determinant strays from that closed form.
    """
    rng = np.random.default_rng(seed)
    out = np.empty(fills)
    for t in range(fills):
        x = rng.standard_normal(n)
        mat = np.eye(n + 1)
        mat[n, n] = -1.0
        mat[:n, n] = x
        mat[n, :n] = x
        det = float(np.linalg.det(mat))
        expect = -1.0 - float(x @ x)
        if abs(det - expect) > 1e-8 * max(1.0, abs(expect)):
            raise FormulaMismatchError(f"determinant {det} != {expect}")
        out[t] = det
    return out


def gn_report(n: int, seeds: Optional[Sequence[int]] = None, fills: int = 100,
              seed: int = 0) -> GnReport:
    """Closed-form and engine view of the 2n x 2n anti-diagonal family.

    The generic symmetric completion rank is 2n - k with k the largest integer
    whose triangular number is at most n; every rank from there up to 2n is
    typical, which the witness determinant check supports at the top end.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    k = _triangular_floor(n)
    formula = 2 * n - k
    engine = sgcr(generate("sym-join-family", [n]), seeds=seeds or DEFAULT_SEEDS).gcr
    if engine != formula:
        raise FormulaMismatchError(f"engine sgcr {engine} != closed form {formula}")
    dets = full_rank_witness_determinants(n, fills=fills, seed=seed)
    return GnReport(
        n=n,
        sgcr_formula=formula,
        sgcr_engine=engine,
        typical_ranks=tuple(range(formula, 2 * n + 1)),
        typical_count=k + 1,
        witness_determinants_negative=bool(np.all(dets < 0)),
    )


# ---------------------------------------------------------------------------
# generic evidence harness


def typical_scan(pattern: BipartitePattern, r: int, trials: int, seed: int = 0,
                 opts: Optional[FitOptions] = None,
                 engine_seeds: Optional[Sequence[int]] = None) -> TypicalSampleReport:
    """Optimizer-only evidence that rank r occurs with positive probability.

    A trial supports r when the fitter succeeds at r but fails at r - 1 on all
    restarts. All conclusions are labelled optimizer evidence.
    """
    opts = opts or FitOptions(restarts=8, max_iters=200)
    low = gcr(pattern, seeds=engine_seeds).gcr
    if not (low <= r <= min(pattern.m, pattern.n)):
        raise ValueError(f"r={r} outside [{low}, {min(pattern.m, pattern.n)}]")
    hits = 0
    per_trial = []
    root = np.random.SeedSequence(seed)
    for sub in root.spawn(trials):
        trial_seed = int(sub.generate_state(1)[0])
        x = random_partial(pattern, trial_seed)
        fit_r = lowrank_fit(x, r, opts)
        ok_r = fit_r.rel_residual < _FIT_SUCCESS_TOL
        if r > 0:
            fit_below = lowrank_fit(x, r - 1, opts)
            ok_below = fit_below.rel_residual < _FIT_SUCCESS_TOL
        else:
            ok_below = False
        support = ok_r and not ok_below
        hits += int(support)
        per_trial.append(r if support else 0)
    return TypicalSampleReport(
        pattern_id=f"bipartite({pattern.m},{pattern.n},|E|={pattern.num_edges})",
        trials=trials,
        seed=seed,
        classes={r: {"count": hits, "frequency": hits / trials if trials else 0.0,
                     "certificate": "optimizer-evidence"}},
        unclassified=trials - hits,
        options={"restarts": opts.restarts, "max_iters": opts.max_iters},
        per_trial=tuple(per_trial),
    )
