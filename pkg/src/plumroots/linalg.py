"""Exact integer/rational linear algebra.

Everything here runs over ``int`` and ``fractions.Fraction``; no floats ever
enter a computation.  Matrices are immutable tuples of row tuples, small
enough (s <= ~12) that asymptotics are irrelevant and correctness is
everything.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterator, Sequence

IntMatrix = tuple[tuple[int, ...], ...]
FracMatrix = tuple[tuple[Fraction, ...], ...]
Vector = tuple


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, x, y) with a*x + b*y = g = gcd(a, b) >= 0."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def mat(rows: Sequence[Sequence]) -> tuple:
    return tuple(tuple(row) for row in rows)


def identity(n: int) -> IntMatrix:
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


def transpose(a):
    return tuple(zip(*a)) if a else ()


def mat_mul(a, b):
    bt = tuple(zip(*b))
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in bt) for row in a)


def mat_vec(a, v):
    return tuple(sum(x * y for x, y in zip(row, v)) for row in a)


def vec_dot(u, v):
    return sum(x * y for x, y in zip(u, v))


def vec_add(u, v):
    return tuple(x + y for x, y in zip(u, v))


def vec_sub(u, v):
    return tuple(x - y for x, y in zip(u, v))


def vec_scale(c, v):
    return tuple(c * x for x in v)


def quadratic_value(a, y):
    """y^T a y, exact."""
    return vec_dot(y, mat_vec(a, y))


def det(a: Sequence[Sequence[int]]) -> int:
    """Fraction-free Bareiss determinant of an integer matrix."""
    n = len(a)
    if n == 0:
        return 1
    m = [list(map(int, row)) for row in a]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def leading_principal_minors(a: Sequence[Sequence[int]]) -> tuple[int, ...]:
    """Determinants of the k x k upper-left blocks, k = 1..n."""
    n = len(a)
    return tuple(det([row[: k + 1] for row in a[: k + 1]]) for k in range(n))


def is_negative_definite(a: Sequence[Sequence[int]]) -> bool:
    """Alternating-sign test on leading principal minors, exact integers."""
    for k, minor in enumerate(leading_principal_minors(a), start=1):
        if (-1) ** k * minor <= 0:
            return False
    return True


def invert(a) -> FracMatrix:
    """Exact inverse over Fraction (entries may be int or Fraction)."""
    n = len(a)
    aug = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
           for i, row in enumerate(a)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("matrix is singular")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv_p = 1 / aug[col][col]
        aug[col] = [x * inv_p for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return tuple(tuple(row[n:]) for row in aug)


def solve(a, b) -> tuple[Fraction, ...]:
    """Solve a x = b exactly."""
    return mat_vec(invert(a), tuple(Fraction(x) for x in b))


def smith_normal_form(a: Sequence[Sequence[int]]) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Smith normal form with transforms: returns (d, p, q) with p a q = d.

    p and q are unimodular; d is (rectangular) diagonal with nonnegative
    entries satisfying the divisibility chain d_1 | d_2 | ...
    """
    m = len(a)
    n = len(a[0]) if m else 0
    d = [list(map(int, row)) for row in a]
    p = [list(r) for r in identity(m)]
    q = [list(r) for r in identity(n)]

    def swap_rows(i, j):
        d[i], d[j] = d[j], d[i]
        p[i], p[j] = p[j], p[i]

    def swap_cols(i, j):
        for row in d:
            row[i], row[j] = row[j], row[i]
        for row in q:
            row[i], row[j] = row[j], row[i]

    def combine_rows(i, j, x, y, z, w):
        # (row_i, row_j) <- (x*row_i + y*row_j, z*row_i + w*row_j); det must be +-1
        for mrow in (d, p):
            ri, rj = mrow[i], mrow[j]
            mrow[i] = [x * u + y * v for u, v in zip(ri, rj)]
            mrow[j] = [z * u + w * v for u, v in zip(ri, rj)]

    def combine_cols(i, j, x, y, z, w):
        for mrow in (d, q):
            for row in mrow:
                u, v = row[i], row[j]
                row[i] = x * u + y * v
                row[j] = z * u + w * v

    def clear_position(t):
        """Zero out row t and column t beyond the pivot at (t, t)."""
        while True:
            dirty = False
            for i in range(t + 1, m):
                if d[i][t]:
                    g, x, y = xgcd(d[t][t], d[i][t])
                    combine_rows(t, i, x, y, -(d[i][t] // g), d[t][t] // g)
                    dirty = True
            for j in range(t + 1, n):
                if d[t][j]:
                    g, x, y = xgcd(d[t][t], d[t][j])
                    combine_cols(t, j, x, y, -(d[t][j] // g), d[t][t] // g)
                    dirty = True
            if not any(d[i][t] for i in range(t + 1, m)) and \
               not any(d[t][j] for j in range(t + 1, n)):
                return
            if not dirty:  # pragma: no cover - xgcd steps always progress
                return

    rank_bound = min(m, n)
    for t in range(rank_bound):
        # move a nonzero entry of minimal magnitude into the pivot slot
        candidates = [(abs(d[i][j]), i, j)
                      for i in range(t, m) for j in range(t, n) if d[i][j]]
        if not candidates:
            break
        _, pi, pj = min(candidates)
        if pi != t:
            swap_rows(t, pi)
        if pj != t:
            swap_cols(t, pj)
        clear_position(t)

    # divisibility chain d_t | d_{t+1}
    t = 0
    while t + 1 < rank_bound:
        if d[t + 1][t + 1] and d[t][t] and d[t + 1][t + 1] % d[t][t] != 0:
            combine_cols(t, t + 1, 1, 0, 1, 1)  # col_t += col_{t+1}
            clear_position(t)
            t = 0
            continue
        t += 1

    for t in range(rank_bound):
        if d[t][t] < 0:
            d[t] = [-x for x in d[t]]
            p[t] = [-x for x in p[t]]
    return mat(d), mat(p), mat(q)


def ldlt(a) -> tuple[tuple[Fraction, ...], FracMatrix]:
    """Exact LDL^T of a symmetric positive definite matrix.

    Returns (dvec, u) such that y^T a y = sum_i dvec[i] * (y_i + sum_{j>i}
    u[i][j] y_j)^2, with u unit upper triangular.  Raises ValueError if some
    pivot is not positive.
    """
    n = len(a)
    q = [[Fraction(x) for x in row] for row in a]
    for i in range(n):
        if q[i][i] <= 0:
            raise ValueError("matrix is not positive definite")
        for j in range(i + 1, n):
            q[j][i] = q[i][j]
            q[i][j] = q[i][j] / q[i][i]
        for k in range(i + 1, n):
            for l in range(k, n):
                q[k][l] = q[k][l] - q[k][i] * q[i][l]
    dvec = tuple(q[i][i] for i in range(n))
    u = tuple(tuple(q[i][j] if j > i else Fraction(int(i == j))
                    for j in range(n)) for i in range(n))
    return dvec, u


def _floor_frac(x) -> int:
    return x.numerator // x.denominator if isinstance(x, Fraction) else int(x)


def fincke_pohst(a, center, bound) -> Iterator[tuple[tuple[int, ...], Fraction]]:
    """All integer x with (x - center)^T a (x - center) <= bound.

    a must be symmetric positive definite; center is a rational vector and
    bound a rational number.  Yields (x, value) pairs in a deterministic
    order.  Pure Fraction arithmetic: the per-coordinate ranges come from
    walking outward from the real center until the diagonal term overshoots
    the remaining budget, which is exact.
    """
    n = len(center)
    bound = Fraction(bound)
    if n == 0:
        if bound >= 0:
            yield (), Fraction(0)
        return
    if bound < 0:
        return
    dvec, u = ldlt(a)
    center = tuple(Fraction(c) for c in center)
    x = [0] * n

    def level(i: int, used: Fraction) -> Iterator[tuple[tuple[int, ...], Fraction]]:
        rem = bound - used
        # S_i depends on the already-chosen coordinates j > i
        s_i = sum((u[i][j] * (x[j] - center[j]) for j in range(i + 1, n)),
                  Fraction(0))
        target = center[i] - s_i
        k = _floor_frac(target)
        while True:  # walk down
            val = dvec[i] * (k - target) ** 2
            if val > rem:
                break
            x[i] = k
            if i == 0:
                yield tuple(x), used + val
            else:
                yield from level(i - 1, used + val)
            k -= 1
        k = _floor_frac(target) + 1
        while True:  # walk up
            val = dvec[i] * (k - target) ** 2
            if val > rem:
                break
            x[i] = k
            if i == 0:
                yield tuple(x), used + val
            else:
                yield from level(i - 1, used + val)
            k += 1

    yield from level(n - 1, Fraction(0))


def minimal_norm(a, center) -> Fraction:
    """min over integer x of (x - center)^T a (x - center), exact."""
    n = len(center)
    center = tuple(Fraction(c) for c in center)
    x0 = tuple(_floor_frac(c + Fraction(1, 2)) for c in center)
    best = quadratic_value(a, vec_sub(x0, center))
    if n == 0 or best == 0:
        return Fraction(best)
    for _, val in fincke_pohst(a, center, best):
        if val < best:
            best = val
    return Fraction(best)
