"""Exact dense linear algebra over a prime field plus floating-point rank.

Matrices over F_p are numpy uint64 arrays with entries reduced into [0, p).
The default prime is the Mersenne prime 2^61 - 1; multiplication for it is
done with a 31-bit split so everything stays inside uint64 vector ops.
Smaller primes (p^2 < 2^63) use native products; other primes fall back to
Python-int arithmetic through object arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

DEFAULT_PRIME = (1 << 61) - 1

_M61 = np.uint64(DEFAULT_PRIME)
_MASK31 = np.uint64((1 << 31) - 1)
_MASK30 = np.uint64((1 << 30) - 1)
_SMALL_PRIME_LIMIT = 3_037_000_499  # p*p must stay below 2^63


class SingularDrawError(RuntimeError):
    """Random draws kept producing degenerate kernel/cokernel bases."""


class InconsistentSystemError(ValueError):
    """Right-hand side is not in the column space of the matrix."""


def _mul_m61(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # split both factors as x1*2^31 + x0; 2^61 = 1 mod p folds everything back
    a = np.asarray(a, dtype=np.uint64)
    b = np.asarray(b, dtype=np.uint64)
    a1 = a >> np.uint64(31)
    a0 = a & _MASK31
    b1 = b >> np.uint64(31)
    b0 = b & _MASK31
    hi = (a1 * b1) << np.uint64(1)                      # 2^62 = 2 mod p
    mid = a1 * b0 + a0 * b1                             # < 2^62
    mid = (mid >> np.uint64(30)) + ((mid & _MASK30) << np.uint64(31))
    s = hi + mid + (a0 * b0)                            # < 2^64, no overflow
    s = (s & _M61) + (s >> np.uint64(61))
    s = (s & _M61) + (s >> np.uint64(61))
    return np.where(s >= _M61, s - _M61, s)


def mul_mod(a, b, p: int = DEFAULT_PRIME) -> np.ndarray:
    """Elementwise (broadcasting) product of residue arrays mod p."""
    if p == DEFAULT_PRIME:
        return _mul_m61(a, b)
    a = np.asarray(a, dtype=np.uint64)
    b = np.asarray(b, dtype=np.uint64)
    if p <= _SMALL_PRIME_LIMIT:
        return (a * b) % np.uint64(p)
    big = (a.astype(object) * b.astype(object)) % p
    return np.asarray(big, dtype=object).astype(np.uint64)


def add_mod(a, b, p: int = DEFAULT_PRIME) -> np.ndarray:
    a = np.asarray(a, dtype=np.uint64)
    b = np.asarray(b, dtype=np.uint64)
    return (a + b) % np.uint64(p)


def sub_mod(a, b, p: int = DEFAULT_PRIME) -> np.ndarray:
    a = np.asarray(a, dtype=np.uint64)
    b = np.asarray(b, dtype=np.uint64)
    return (a + (np.uint64(p) - b)) % np.uint64(p)


def as_residues(values, p: int = DEFAULT_PRIME) -> np.ndarray:
    """Coerce an integer array-like (possibly negative) into residues mod p."""
    arr = np.asarray(values, dtype=object)
    arr = np.vectorize(lambda x: int(x) % p, otypes=[object])(arr) if arr.size else arr
    return arr.astype(np.uint64)


def random_residues(rng: np.random.Generator, shape, p: int = DEFAULT_PRIME) -> np.ndarray:
    return rng.integers(0, p, size=shape, dtype=np.uint64)


def mat_mul_mod(a: np.ndarray, b: np.ndarray, p: int = DEFAULT_PRIME) -> np.ndarray:
    """Matrix product over F_p, accumulating one rank-one slice at a time."""
    a = np.asarray(a, dtype=np.uint64)
    b = np.asarray(b, dtype=np.uint64)
    m, k = a.shape
    k2, n = b.shape
    if k != k2:
        raise ValueError(f"shape mismatch {a.shape} @ {b.shape}")
    out = np.zeros((m, n), dtype=np.uint64)
    for j in range(k):
        out = add_mod(out, mul_mod(a[:, j][:, None], b[j][None, :], p), p)
    return out


def kron_mod(a: np.ndarray, b: np.ndarray, p: int = DEFAULT_PRIME) -> np.ndarray:
    """Kronecker product over F_p."""
    a = np.asarray(a, dtype=np.uint64)
    b = np.asarray(b, dtype=np.uint64)
    ma, na = a.shape
    mb, nb = b.shape
    out = mul_mod(a[:, None, :, None], b[None, :, None, :], p)
    return out.reshape(ma * mb, na * nb)


def rank_mod(a: np.ndarray, p: int = DEFAULT_PRIME) -> int:
    """Rank over F_p by Gaussian elimination, pivoting on the first nonzero."""
    a = np.array(a, dtype=np.uint64, copy=True)
    m, n = a.shape if a.ndim == 2 else (a.shape[0], 1)
    if a.ndim == 1:
        a = a.reshape(m, 1)
    if m == 0 or n == 0:
        return 0
    r = 0
    for c in range(n):
        if r == m:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
        inv = np.uint64(pow(int(a[r, c]), -1, p))
        a[r, c:] = mul_mod(a[r, c:], inv, p)
        rows = r + 1 + np.flatnonzero(a[r + 1:, c])
        if rows.size:
            f = a[rows, c]
            a[np.ix_(rows, np.arange(c, n))] = sub_mod(
                a[np.ix_(rows, np.arange(c, n))], mul_mod(f[:, None], a[r, c:][None, :], p), p
            )
        r += 1
    return r


def rref_mod(a: np.ndarray, p: int = DEFAULT_PRIME) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over F_p; returns (R, pivot column indices)."""
    a = np.array(a, dtype=np.uint64, copy=True)
    m, n = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(n):
        if r == m:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
        inv = np.uint64(pow(int(a[r, c]), -1, p))
        a[r] = mul_mod(a[r], inv, p)
        rows = np.flatnonzero(a[:, c])
        rows = rows[rows != r]
        if rows.size:
            f = a[rows, c]
            a[rows] = sub_mod(a[rows], mul_mod(f[:, None], a[r][None, :], p), p)
        pivots.append(c)
        r += 1
    return a, pivots


def nullspace_mod(a: np.ndarray, p: int = DEFAULT_PRIME) -> np.ndarray:
    """Basis of the right kernel over F_p, as columns of an (n, n-rank) array."""
    a = np.asarray(a, dtype=np.uint64)
    m, n = a.shape
    if m == 0:
        return np.eye(n, dtype=np.uint64)
    red, pivots = rref_mod(a, p)
    free = [c for c in range(n) if c not in pivots]
    basis = np.zeros((n, len(free)), dtype=np.uint64)
    for k, fc in enumerate(free):
        basis[fc, k] = 1
        for i, pc in enumerate(pivots):
            val = int(red[i, fc])
            if val:
                basis[pc, k] = np.uint64(p - val)
    return basis


def solve_mod(a: np.ndarray, b: np.ndarray, p: int = DEFAULT_PRIME) -> np.ndarray:
    """One particular solution of A x = b over F_p (free variables set to 0)."""
    a = np.asarray(a, dtype=np.uint64)
    b = np.asarray(b, dtype=np.uint64).reshape(-1)
    m, n = a.shape
    aug = np.concatenate([a, b[:, None]], axis=1)
    red, pivots = rref_mod(aug, p)
    if n in pivots:
        raise InconsistentSystemError("system has no solution over F_p")
    x = np.zeros(n, dtype=np.uint64)
    for i, pc in enumerate(pivots):
        x[pc] = red[i, n]
    return x


def rank_float(a: np.ndarray, tol: float = 1e-9) -> int:
    """Numerical rank: number of singular values above tol * sigma_max."""
    a = np.asarray(a, dtype=float)
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    if a.size == 0 or min(a.shape) == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def solve_underdetermined(a: np.ndarray, b: np.ndarray, p: Optional[int] = None,
                          tol: float = 1e-10) -> np.ndarray:
    """Particular solution of A x = b; exact over F_p, least-squares over floats.

    The floating path raises InconsistentSystemError when the residual exceeds
    tol * ||b||, mirroring the exact consistency check.
    """
    if p is not None:
        return solve_mod(a, b, p)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float).reshape(-1)
    if a.shape[0] == 0:
        return np.zeros(a.shape[1])
    x, *_ = np.linalg.lstsq(a, b, rcond=None)
    resid = np.linalg.norm(a @ x - b)
    if resid > tol * max(np.linalg.norm(b), 1.0):
        raise InconsistentSystemError(f"residual {resid:.3e} too large")
    return x


@dataclass(frozen=True)
class RankedPoint:
    """A matrix of known exact rank with certified kernel/cokernel bases.

    kernel columns v satisfy M v = 0; cokernel rows c satisfy c M = 0.
    The symmetric variant carries no cokernel (it equals the kernel transposed).
    """

    matrix: np.ndarray
    rank: int
    kernel: np.ndarray
    cokernel: Optional[np.ndarray]
    prime: int

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def verify(self) -> None:
        p = self.prime
        m, n = self.matrix.shape
        if self.kernel.shape != (n, n - self.rank):
            raise SingularDrawError("kernel basis has wrong shape")
        if np.any(mat_mul_mod(self.matrix, self.kernel, p)):
            raise SingularDrawError("kernel certificate failed")
        if self.cokernel is not None:
            if self.cokernel.shape != (m - self.rank, m):
                raise SingularDrawError("cokernel basis has wrong shape")
            if np.any(mat_mul_mod(self.cokernel, self.matrix, p)):
                raise SingularDrawError("cokernel certificate failed")
            if rank_mod(self.cokernel, p) != m - self.rank:
                raise SingularDrawError("cokernel rows dependent")
        if rank_mod(self.kernel, p) != n - self.rank:
            raise SingularDrawError("kernel columns dependent")
        if rank_mod(self.matrix, p) != self.rank:
            raise SingularDrawError("matrix rank does not match")


_MAX_REDRAWS = 8


def random_ranked_point(m: int, n: int, r: int, seed: int,
                        p: int = DEFAULT_PRIME) -> RankedPoint:
    """Random m x n matrix over F_p of exact rank r with certified bases.

    Draws the cokernel functionals and kernel vectors first, then realizes a
    matrix with that kernel/cokernel as B X A where B spans the right null
    space of the cokernel, A spans the left null space of the kernel, and X
    is a random invertible r x r mixing block.
    """
    if not (0 <= r <= min(m, n)):
        raise ValueError(f"rank {r} out of range for {m}x{n}")
    rng = np.random.default_rng(seed)
    for _ in range(_MAX_REDRAWS):
        coker = random_residues(rng, (m - r, m), p)
        ker = random_residues(rng, (n, n - r), p)
        if rank_mod(coker, p) != m - r or rank_mod(ker, p) != n - r:
            continue
        col_span = nullspace_mod(coker, p)          # m x r
        row_span = nullspace_mod(ker.T, p).T        # r x n
        mix = random_residues(rng, (r, r), p)
        if rank_mod(mix, p) != r:
            continue
        mat = mat_mul_mod(mat_mul_mod(col_span, mix, p), row_span, p)
        point = RankedPoint(mat, r, ker, coker, p)
        try:
            point.verify()
        except SingularDrawError:
            continue
        return point
    raise SingularDrawError(f"no full-rank draw after {_MAX_REDRAWS} tries")


def random_sym_ranked_point(n: int, r: int, seed: int,
                            p: int = DEFAULT_PRIME) -> RankedPoint:
    """Random symmetric n x n matrix over F_p of exact rank r with kernel basis."""
    if not (0 <= r <= n):
        raise ValueError(f"rank {r} out of range for symmetric {n}x{n}")
    rng = np.random.default_rng(seed)
    for _ in range(_MAX_REDRAWS):
        ker = random_residues(rng, (n, n - r), p)
        if rank_mod(ker, p) != n - r:
            continue
        row_span = nullspace_mod(ker.T, p).T        # r x n
        mix = random_residues(rng, (r, r), p)
        mix_sym = add_mod(mix, mix.T, p)
        if rank_mod(mix_sym, p) != r:
            continue
        mat = mat_mul_mod(mat_mul_mod(row_span.T, mix_sym, p), row_span, p)
        point = RankedPoint(mat, r, ker, None, p)
        try:
            point.verify()
            if np.any(mat != mat.T):
                raise SingularDrawError("matrix not symmetric")
        except SingularDrawError:
            continue
        return point
    raise SingularDrawError(f"no full-rank symmetric draw after {_MAX_REDRAWS} tries")


def format_mod(a: np.ndarray) -> str:
    """Dense row-major decimal rendering, for debugging dumps."""
    a = np.asarray(a)
    return "\n".join(" ".join(str(int(x)) for x in row) for row in a)
