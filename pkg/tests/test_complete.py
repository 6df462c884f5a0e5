import json

import numpy as np
import pytest

from gcrlab import (
    DEFAULT_PRIME,
    BipartitePattern,
    FitOptions,
    PartialMatrix,
    chordal_complete,
    fit_column,
    gcr,
    generate,
    lowrank_fit,
    random_partial,
    sym_lowrank_fit,
)
from gcrlab import ffmat
from gcrlab.complete import (
    MinorVanishingError,
    NotChordalError,
    dense_and_mask,
    lowrank_profile,
    partial_from_json,
    partial_to_json,
)
from helpers import RANK3_CUBE_DATA, cube_partial, random_chordal_pattern

SEEDS = (101, 202, 303)


# ---------------------------------------------------------------------------
# PartialMatrix plumbing


def test_partial_matrix_validates_keys():
    cube = generate("cube")
    with pytest.raises(ValueError):
        PartialMatrix(cube, {(1, 2): 1.0})
    vals = {e: 1.0 for e in cube.edges}
    x = PartialMatrix(cube, vals)
    dense, mask = dense_and_mask(x)
    assert mask.sum() == 12 and not mask.diagonal().any()


def test_partial_matrix_symmetric_normalizes_keys():
    g = generate("sym-complete", [2])
    x = PartialMatrix(g, {(1, 1): 1.0, (2, 1): 5.0, (2, 2): 2.0})
    assert x.values[(1, 2)] == 5.0
    dense, _ = dense_and_mask(x)
    assert dense[0, 1] == dense[1, 0] == 5.0


def test_partial_serialization_roundtrip():
    for prime in (None, DEFAULT_PRIME):
        x = random_partial(generate("triangular", [4]), seed=3, prime=prime)
        doc = json.loads(json.dumps(partial_to_json(x)))
        y = partial_from_json(doc)
        assert y.pattern == x.pattern and y.prime == x.prime
        assert y.values == x.values


# ---------------------------------------------------------------------------
# column fitting


def test_fit_column_dependent_rows_rejected():
    # two equal specified rows with different targets admit no span solution
    m_full = np.array([[1.0, 1.0], [1.0, 1.0], [0.0, 1.0]])
    with pytest.raises(MinorVanishingError):
        fit_column(m_full, {1: 1.0, 2: 2.0})


def test_fit_column_zero_specified_gives_zero_column():
    m_full = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert np.allclose(fit_column(m_full, {}), 0.0)


def test_fit_column_keeps_rank_and_matches_entries():
    rng = np.random.default_rng(41)
    u = ffmat.random_residues(rng, (4, 2))
    v = ffmat.random_residues(rng, (2, 3))
    m_full = ffmat.mat_mul_mod(u, v)
    spec = {1: 7, 3: 11}
    col = fit_column(m_full, spec, prime=DEFAULT_PRIME)
    assert int(col[0]) == 7 and int(col[2]) == 11
    augmented = np.concatenate([m_full, col[:, None]], axis=1)
    assert ffmat.rank_mod(augmented) == 2


def test_fit_column_too_many_entries():
    m_full = np.array([[1.0, 0.0], [0.0, 0.0], [0.0, 0.0]])
    with pytest.raises(ValueError):
        fit_column(m_full, {1: 1.0, 2: 0.0})


# ---------------------------------------------------------------------------
# chordal completion


def test_chordal_complete_triangular_exact():
    t6 = generate("triangular", [6])
    x = random_partial(t6, seed=5, prime=DEFAULT_PRIME)
    res = chordal_complete(x, seed=1)
    assert res.rank == 3 and res.exact
    assert all(int(res.matrix[i - 1, j - 1]) == v for (i, j), v in x.values.items())


def test_chordal_complete_fully_specified():
    k33 = generate("complete", [3, 3])
    x = random_partial(k33, seed=2, prime=DEFAULT_PRIME)
    res = chordal_complete(x)
    assert res.rank <= 3 and res.exact
    assert all(int(res.matrix[i - 1, j - 1]) == v for (i, j), v in x.values.items())


def test_chordal_complete_block_with_pendant_tree():
    # complete 2x2 block with a pendant path hanging off one row
    edges = {(i, j) for i in (1, 2) for j in (1, 2)} | {(1, 3), (3, 3)}
    g = BipartitePattern(3, 3, frozenset(edges))
    x = random_partial(g, seed=9, prime=DEFAULT_PRIME)
    res = chordal_complete(x, seed=0)
    assert res.rank == 2 and res.exact


def test_chordal_complete_rejects_long_holes():
    x = random_partial(generate("cycle", [3]), seed=1, prime=DEFAULT_PRIME)
    with pytest.raises(NotChordalError):
        chordal_complete(x)


def test_chordal_complete_vanishing_minor_diagnostic():
    # fully specified 3x2 block [[1,1],[1,1],[0,1]] plus a column specified in
    # rows 1 and 2 with different values: no rank-2 completion exists
    edges = {(i, j) for i in (1, 2, 3) for j in (1, 2)} | {(1, 3), (2, 3)}
    g = BipartitePattern(3, 3, frozenset(edges))
    vals = {(1, 1): 1, (1, 2): 1, (2, 1): 1, (2, 2): 1, (3, 1): 0, (3, 2): 1,
            (1, 3): 1, (2, 3): 2}
    x = PartialMatrix(g, vals, prime=DEFAULT_PRIME)
    with pytest.raises(MinorVanishingError):
        chordal_complete(x)


def test_chordal_complete_random_instances_both_fields():
    rng = np.random.default_rng(42)
    for t in range(15):
        g = random_chordal_pattern(rng)
        x = random_partial(g, seed=int(rng.integers(2**31)), prime=DEFAULT_PRIME)
        res = chordal_complete(x, seed=t)
        assert res.exact
        assert res.rank == gcr(g, seeds=SEEDS).gcr
        xf = random_partial(g, seed=int(rng.integers(2**31)))
        resf = chordal_complete(xf, seed=t)
        assert resf.max_deviation < 1e-8


# ---------------------------------------------------------------------------
# low-rank fitting


def test_lowrank_fit_tree_rank_one():
    tree = generate("tree-random", [4, 4], seed=6)
    rng = np.random.default_rng(7)
    vals = {e: float(rng.uniform(0.5, 2.0)) for e in sorted(tree.edges)}
    x = PartialMatrix(tree, vals)
    fit = lowrank_fit(x, 1, FitOptions(restarts=5, seed=1))
    assert fit.rel_residual < 1e-10 and fit.completable


def test_lowrank_fit_cube_reference_matrix():
    x = cube_partial(RANK3_CUBE_DATA)
    fit2 = lowrank_fit(x, 2, FitOptions(restarts=50, seed=3))
    fit3 = lowrank_fit(x, 3, FitOptions(restarts=50, seed=3))
    assert fit2.rel_residual > 1e-2 and not fit2.completable
    assert fit3.rel_residual < 1e-8 and fit3.completable


def test_lowrank_fit_fully_specified_recovers_rank():
    rng = np.random.default_rng(8)
    data = rng.standard_normal((5, 3)) @ rng.standard_normal((3, 6))
    g = generate("complete", [5, 6])
    x = PartialMatrix(g, {(i, j): data[i - 1, j - 1] for i, j in g.edges})
    fit = lowrank_fit(x, 3, FitOptions(restarts=5, seed=2))
    assert fit.rel_residual < 1e-10


def test_lowrank_profile_monotone():
    x = cube_partial(RANK3_CUBE_DATA)
    prof = lowrank_profile(x, [0, 1, 2, 3, 4], FitOptions(restarts=6, seed=4))
    resids = [prof[r].rel_residual for r in (0, 1, 2, 3, 4)]
    assert all(resids[i] >= resids[i + 1] - 1e-12 for i in range(4))
    assert prof[4].rel_residual < 1e-10


def test_lowrank_fit_argument_checks():
    x = cube_partial(RANK3_CUBE_DATA)
    with pytest.raises(ValueError):
        lowrank_fit(x, 5)
    exact = random_partial(generate("cube"), seed=0, prime=DEFAULT_PRIME)
    with pytest.raises(TypeError):
        lowrank_fit(exact, 2)
    with pytest.raises(TypeError):
        lowrank_fit(random_partial(generate("sym-complete", [3]), seed=0), 1)


# ---------------------------------------------------------------------------
# symmetric fitting


def _knk1_partial(block: np.ndarray, lam: float) -> PartialMatrix:
    n = block.shape[0]
    g = generate("sym-knk1", [n])
    vals = {(i, j): float(block[i - 1, j - 1])
            for i in range(1, n + 1) for j in range(i, n + 1)}
    vals[(n + 1, n + 1)] = lam
    return PartialMatrix(g, vals)


def test_sym_fit_identity_block_positive_loop():
    fit = sym_lowrank_fit(_knk1_partial(np.eye(3), 4.0), 3,
                          FitOptions(restarts=8, seed=5))
    assert fit.rel_residual < 1e-6 and fit.completable


def test_sym_fit_identity_block_negative_loop_fails():
    fit = sym_lowrank_fit(_knk1_partial(np.eye(3), -1.0), 3,
                          FitOptions(restarts=8, seed=5))
    assert fit.rel_residual > 1e-3 and not fit.completable


def test_sym_fit_full_pattern_exact():
    rng = np.random.default_rng(9)
    u = rng.standard_normal((3, 3))
    data = u @ u.T
    g = generate("sym-complete", [3])
    x = PartialMatrix(g, {(i, j): data[i - 1, j - 1] for i, j in g.edges})
    fit = sym_lowrank_fit(x, 3, FitOptions(restarts=4, seed=6))
    assert fit.rel_residual < 1e-6
    assert fit.signature is not None
