import numpy as np
import pytest

from gcrlab import ffmat
from gcrlab.ffmat import (
    DEFAULT_PRIME,
    InconsistentSystemError,
    mat_mul_mod,
    mul_mod,
    nullspace_mod,
    random_ranked_point,
    random_residues,
    random_sym_ranked_point,
    rank_float,
    rank_mod,
    solve_mod,
    solve_underdetermined,
)

SMALL_PRIME = 1_000_003
BIG_ODD_PRIME = 2_305_843_009_213_693_967  # a prime above 2^61 - 1, object path


def test_mul_mod_matches_python_ints():
    rng = np.random.default_rng(0)
    for p in (DEFAULT_PRIME, SMALL_PRIME):
        a = rng.integers(0, p, 500, dtype=np.uint64)
        b = rng.integers(0, p, 500, dtype=np.uint64)
        c = mul_mod(a, b, p)
        for i in range(500):
            assert int(c[i]) == (int(a[i]) * int(b[i])) % p


def test_mul_mod_extreme_values():
    p = DEFAULT_PRIME
    specials = [0, 1, 2, p - 1, p - 2, 2**31 - 1, 2**31, 2**31 + 1, 2**45 + 12345, 2**60]
    for x in specials:
        for y in specials:
            got = int(mul_mod(np.uint64([x]), np.uint64([y]), p)[0])
            assert got == (x * y) % p


def test_rank_trivial_cases():
    assert rank_mod(np.eye(3, dtype=np.uint64)) == 3
    assert rank_mod(np.zeros((4, 7), dtype=np.uint64)) == 0
    u = random_residues(np.random.default_rng(5), (6, 1))
    v = random_residues(np.random.default_rng(6), (1, 4))
    assert rank_mod(mat_mul_mod(u, v)) == 1


def test_rank_permutation_and_transpose_invariance():
    rng = np.random.default_rng(1)
    for _ in range(40):
        m, n = int(rng.integers(1, 9)), int(rng.integers(1, 9))
        r = int(rng.integers(0, min(m, n) + 1))
        a = mat_mul_mod(random_residues(rng, (m, r)), random_residues(rng, (r, n)))
        base = rank_mod(a)
        perm_r = rng.permutation(m)
        perm_c = rng.permutation(n)
        assert rank_mod(a[perm_r][:, perm_c]) == base
        assert rank_mod(a.T) == base


def test_rank_agrees_across_primes():
    rng = np.random.default_rng(2)
    for _ in range(60):
        m, n = int(rng.integers(1, 13)), int(rng.integers(1, 13))
        ints = rng.integers(-10, 11, (m, n))
        a61 = ffmat.as_residues(ints, DEFAULT_PRIME)
        asm = ffmat.as_residues(ints, SMALL_PRIME)
        assert rank_mod(a61, DEFAULT_PRIME) == rank_mod(asm, SMALL_PRIME)


def test_object_path_prime_above_word_split():
    rng = np.random.default_rng(3)
    a = rng.integers(0, BIG_ODD_PRIME, 50).astype(object)
    b = rng.integers(0, BIG_ODD_PRIME, 50).astype(object)
    a = ffmat.as_residues(a, BIG_ODD_PRIME)
    b = ffmat.as_residues(b, BIG_ODD_PRIME)
    c = mul_mod(a, b, BIG_ODD_PRIME)
    for i in range(50):
        assert int(c[i]) == (int(a[i]) * int(b[i])) % BIG_ODD_PRIME


def test_rank_float_examples():
    assert rank_float(np.eye(3)) == 3
    assert rank_float(np.zeros((3, 5))) == 0
    rng = np.random.default_rng(4)
    a = rng.standard_normal((5, 2)) @ rng.standard_normal((2, 6))
    assert rank_float(a) == 2
    with pytest.raises(ValueError):
        rank_float(np.array([[1.0, np.inf]]))
    with pytest.raises(ValueError):
        rank_float(np.eye(2), tol=0.0)


def test_ff_float_agreement_on_integer_matrices():
    rng = np.random.default_rng(7)
    for _ in range(200):
        m, n = int(rng.integers(1, 13)), int(rng.integers(1, 13))
        ints = rng.integers(-10, 11, (m, n))
        assert rank_mod(ffmat.as_residues(ints)) == rank_float(ints.astype(float))


def test_ranked_point_certificates_many_seeds():
    rng = np.random.default_rng(8)
    for seed in range(100):
        m, n = int(rng.integers(1, 8)), int(rng.integers(1, 8))
        r = int(rng.integers(0, min(m, n) + 1))
        pt = random_ranked_point(m, n, r, seed=seed)
        pt.verify()  # raises on any certificate failure
        assert pt.rank == r


def test_ranked_point_edge_ranks():
    zero = random_ranked_point(3, 3, 0, seed=1)
    assert not np.any(zero.matrix)
    assert zero.kernel.shape == (3, 3)
    full = random_ranked_point(4, 4, 4, seed=1)
    assert full.kernel.shape == (4, 0)
    assert rank_mod(full.matrix) == 4
    pt = random_ranked_point(5, 4, 2, seed=3)
    assert rank_mod(pt.matrix) == 2
    assert not np.any(mat_mul_mod(pt.matrix, pt.kernel))
    assert not np.any(mat_mul_mod(pt.cokernel, pt.matrix))


def test_ranked_point_minors_vanish():
    # every (r+1)x(r+1) minor of a rank-r matrix is singular
    rng = np.random.default_rng(9)
    pt = random_ranked_point(6, 7, 3, seed=11)
    for _ in range(25):
        rows = rng.choice(6, 4, replace=False)
        cols = rng.choice(7, 4, replace=False)
        assert rank_mod(pt.matrix[np.ix_(rows, cols)]) < 4


def test_sym_ranked_point():
    for seed in range(30):
        n = 2 + seed % 6
        r = seed % (n + 1)
        pt = random_sym_ranked_point(n, r, seed=seed)
        assert np.all(pt.matrix == pt.matrix.T)
        assert rank_mod(pt.matrix) == r
        assert not np.any(mat_mul_mod(pt.matrix, pt.kernel))


def test_solve_examples():
    a = ffmat.as_residues([[1, 0], [0, 0]])
    x = solve_mod(a, ffmat.as_residues([1, 0]))
    assert int(x[0]) == 1
    b = ffmat.as_residues([3, 1, 4])
    assert np.all(solve_mod(np.eye(3, dtype=np.uint64), b) == b)
    with pytest.raises(InconsistentSystemError):
        solve_mod(ffmat.as_residues([[1, 0], [0, 0]]), ffmat.as_residues([0, 1]))


def test_solve_underdetermined_full_row_rank_exact_residual():
    rng = np.random.default_rng(10)
    a = random_residues(rng, (2, 5))
    x0 = random_residues(rng, (5, 1))
    b = mat_mul_mod(a, x0)[:, 0]
    x = solve_underdetermined(a, b, p=DEFAULT_PRIME)
    assert np.all(mat_mul_mod(a, x[:, None])[:, 0] == b)


def test_solve_underdetermined_float():
    rng = np.random.default_rng(11)
    a = rng.standard_normal((3, 6))
    x0 = rng.standard_normal(6)
    b = a @ x0
    x = solve_underdetermined(a, b)
    assert np.linalg.norm(a @ x - b) < 1e-10 * np.linalg.norm(b)
    bad_a = np.array([[1.0, 0.0], [1.0, 0.0]])
    with pytest.raises(InconsistentSystemError):
        solve_underdetermined(bad_a, np.array([0.0, 1.0]))


def test_format_mod_renders_rows():
    a = ffmat.as_residues([[1, 2], [3, 4]])
    assert ffmat.format_mod(a) == "1 2\n3 4"


def test_nullspace_is_kernel():
    rng = np.random.default_rng(12)
    for _ in range(30):
        m, n = int(rng.integers(1, 8)), int(rng.integers(1, 8))
        a = random_residues(rng, (m, n))
        ns = nullspace_mod(a)
        assert rank_mod(a) + ns.shape[1] == n
        if ns.shape[1]:
            assert not np.any(mat_mul_mod(a, ns))
