"""Step, elementary and good integer matrices.

Matrices are plain ``list[list[int]]`` (row major, Python ints, so no
overflow).  Descriptor indices are 1-based, matching particle labels:
column ``i`` of a configuration matrix is particle ``i`` and particle 0 is
the stationary one.

Step lists come in *product order*: ``steps[0] @ steps[1] @ ...`` equals the
matrix they describe.  Right-multiplying a configuration by that product
applies ``steps[0]`` first, which is the order moves are emitted in.  The
one exception is :func:`reduce_vector`, whose steps are listed in the order
they are left-applied to the vector.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

IntMatrix = list


class NotGoodError(ValueError):
    pass


# --------------------------------------------------------------------------
# dense helpers


def identity(n: int) -> IntMatrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def matmul(a: IntMatrix, b: IntMatrix) -> IntMatrix:
    bt = list(zip(*b))
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


def matvec(a: IntMatrix, v: Sequence[int]) -> list:
    return [sum(x * y for x, y in zip(row, v)) for row in a]


def transpose(a: IntMatrix) -> IntMatrix:
    return [list(r) for r in zip(*a)]


def det(a: IntMatrix) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    m = [list(r) for r in a]
    n = len(m)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for r in range(k + 1, n):
                if m[r][k]:
                    m[k], m[r] = m[r], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def product(steps: Iterable["Step"], n: int) -> IntMatrix:
    """Ordered product of step matrices (identity for an empty list)."""
    m = identity(n)
    for s in steps:
        s.right_apply(m)
    return m


def inverse_steps(steps: Sequence["Step"]) -> list:
    return [s.inverse() for s in reversed(steps)]


# Long step lists repeat the same step many times in a row, so they are also
# handled as runs: ``(step, count)`` stands for ``step`` repeated ``count`` times.


def compress(steps: Iterable["Step"]) -> list:
    runs: list = []
    for s in steps:
        if runs and runs[-1][0] == s:
            runs[-1] = (s, runs[-1][1] + 1)
        else:
            runs.append((s, 1))
    return runs


def append_run(runs: list, step: "Step", count: int) -> None:
    if count <= 0:
        return
    if runs and runs[-1][0] == step:
        runs[-1] = (step, runs[-1][1] + count)
    else:
        runs.append((step, count))


def expand_runs(runs: Iterable) -> Iterator["Step"]:
    for s, k in runs:
        for _ in range(k):
            yield s


def runs_product(runs: Iterable, n: int) -> IntMatrix:
    m = identity(n)
    for s, k in runs:
        s.right_apply(m, k)
    return m


def inverse_runs(runs: Sequence) -> list:
    return [(s.inverse(), k) for s, k in reversed(runs)]


def runs_length(runs: Iterable) -> int:
    return sum(k for _, k in runs)


# --------------------------------------------------------------------------
# descriptors


@dataclass(frozen=True)
class Step:
    """Identity of size ``n`` with entry ``(row, col)`` replaced by ``value`` (+2 or -2)."""

    n: int
    row: int
    col: int
    value: int

    def __post_init__(self):
        if self.row == self.col:
            raise ValueError("a step matrix changes an off-diagonal entry")
        if not (1 <= self.row <= self.n and 1 <= self.col <= self.n):
            raise ValueError(f"step index out of range for n={self.n}")
        if self.value not in (2, -2):
            raise ValueError("step value must be +2 or -2")

    def matrix(self) -> IntMatrix:
        m = identity(self.n)
        m[self.row - 1][self.col - 1] = self.value
        return m

    def inverse(self) -> Step:
        return Step(self.n, self.row, self.col, -self.value)

    def transpose(self) -> Step:
        return Step(self.n, self.col, self.row, self.value)

    def lift(self, n: int, shift: int = 0) -> Step:
        return Step(n, self.row + shift, self.col + shift, self.value)

    def left_apply(self, m: IntMatrix, times: int = 1) -> None:
        """In place ``m <- S^times m`` (row op: row ``row`` += times * value * row ``col``)."""
        src, dst = m[self.col - 1], m[self.row - 1]
        f = times * self.value
        for k in range(len(dst)):
            dst[k] += f * src[k]

    def right_apply(self, m: IntMatrix, times: int = 1) -> None:
        """In place ``m <- m S^times`` (column op: col ``col`` += times * value * col ``row``)."""
        r, c = self.row - 1, self.col - 1
        f = times * self.value
        for line in m:
            line[c] += f * line[r]


@dataclass(frozen=True)
class Elementary:
    """Jump of particle ``i`` over particle ``j`` (``j == 0``: over the stationary one).

    ``j == 0`` is the first kind (identity with diagonal entry ``i`` set to -1);
    ``j >= 1`` is the second kind, which additionally has entry ``(j, i)`` = 2.
    """

    i: int
    j: int = 0

    def matrix(self, n: int) -> IntMatrix:
        if not 1 <= self.i <= n or not 0 <= self.j <= n or self.i == self.j:
            raise ValueError(f"invalid elementary matrix ({self.i}, {self.j}) for n={n}")
        m = identity(n)
        m[self.i - 1][self.i - 1] = -1
        if self.j:
            m[self.j - 1][self.i - 1] = 2
        return m


def step_matrix(desc: Step) -> IntMatrix:
    return desc.matrix()


def elementary_matrix(desc: Elementary, n: int) -> IntMatrix:
    return desc.matrix(n)


def step_to_elementary(s: Step) -> tuple:
    """Two jumps realising a step, in application order.

    With ``-2`` at ``(j, i)`` the step equals ``A_ij A_i``; with ``+2`` it is
    ``A_i A_ij``.  Either way particle ``i`` jumps twice.
    """
    i, j = s.col, s.row
    if s.value == -2:
        return Elementary(i, j), Elementary(i, 0)
    return Elementary(i, 0), Elementary(i, j)


# --------------------------------------------------------------------------
# characterisation and reduction


def is_good(m: IntMatrix) -> bool:
    n = len(m)
    if any(len(row) != n for row in m):
        return False
    for i in range(n):
        for j in range(n):
            x = m[i][j]
            if not isinstance(x, int):
                return False
            if i == j and x % 4 != 1:
                return False
            if i != j and x % 2:
                return False
    return det(m) == 1


def reduce_vector(v: Sequence[int]) -> tuple:
    """Shrink ``v`` with step matrices until its entries lie in ``{0, g, -g}``.

    Returns ``(steps, r)`` where the steps are listed in the order they are
    left-applied: ``steps[-1] @ ... @ steps[0] @ v == r``.  Each step strictly
    lowers the Euclidean norm.  Among eligible pairs the one with the largest
    decrease wins; ties go to the smallest ``(index_a, index_b)``.
    """
    runs, r = reduce_vector_runs(v)
    return list(expand_runs(runs)), r


def reduce_vector_runs(v: Sequence[int]) -> tuple:
    """Same as :func:`reduce_vector` but the steps come back as runs."""
    r = [int(x) for x in v]
    n = len(r)
    if not any(r):
        raise ValueError("cannot reduce the zero vector")
    steps: list = []
    while True:
        best_gain, best = 0, None
        mags = [abs(x) for x in r]
        for ia in range(n):
            a = mags[ia]
            if not a:
                continue
            for ib in range(n):
                b = mags[ib]
                if b > a:
                    gain = a * (b - a)
                    if gain > best_gain:
                        best_gain, best = gain, (ia, ib)
        if best is None:
            return steps, r
        ia, ib = best
        a, b = r[ia], r[ib]
        c = -2 if (a > 0) == (b > 0) else 2
        # when b dominates a many times over, the same step repeats; batch it
        reps = 1
        if mags[ib] > 4 * mags[ia]:
            reps = max(1, (mags[ib] - 2 * mags[ia]) // (2 * mags[ia]))
            others = [m for k, m in enumerate(mags) if k != ib and m > mags[ia]]
            if others:
                reps = 1
        append_run(steps, Step(n, ib + 1, ia + 1, c), reps)
        r[ib] = b + reps * c * a


def normalize_to_en(v: Sequence[int], runs: bool = False) -> tuple:
    """Good ``A`` with ``A v = e_n`` for ``v`` even except a last entry = 1 mod 4.

    Returns ``(A, steps)`` with ``steps`` in product order (as runs if asked).
    """
    v = [int(x) for x in v]
    n = len(v)
    if n == 0 or v[-1] % 4 != 1 or any(x % 2 for x in v[:-1]):
        raise ValueError("need all entries even except the last, which must be 1 mod 4")
    if math.gcd(*v) != 1:
        raise ValueError("vector is not primitive")
    left, r = reduce_vector_runs(v)
    assert r == [0] * (n - 1) + [1], r
    out = left[::-1]
    return runs_product(out, n), (out if runs else list(expand_runs(out)))


def factor_good(m: IntMatrix, runs: bool = False) -> list:
    """Write a good matrix as an ordered product of step matrices.

    Clears the last column to ``e_n`` by vector reduction, recurses on the
    leading block, then zeroes the last row with powers of steps.
    """
    if not is_good(m):
        raise NotGoodError("matrix is not good")
    out = _factor(m)
    return out if runs else list(expand_runs(out))


def _factor(m: IntMatrix) -> list:
    n = len(m)
    if n <= 1:
        return []
    work = [list(r) for r in m]
    out: list = []
    col = [row[-1] for row in work]
    if col != [0] * (n - 1) + [1]:
        red, r = reduce_vector_runs(col)
        if r != [0] * (n - 1) + [1]:
            raise NotGoodError("last column does not reduce to e_n")
        for s, k in red:
            s.left_apply(work, k)
            # m = L_1^-1 L_2^-1 ... work, so inverses come out in application order
            append_run(out, s.inverse(), k)
    block = [row[:-1] for row in work[:-1]]
    for s, k in _factor(block):
        append_run(out, s.lift(n), k)
    # block is now the identity; clear the even last row
    for i, x in enumerate(work[-1][:-1]):
        if x:
            append_run(out, Step(n, n, i + 1, 2 if x > 0 else -2), abs(x) // 2)
    return out


def triangularize(y: IntMatrix, runs: bool = False) -> tuple:
    """Good ``A0`` making every below-diagonal entry of ``A0 @ y`` zero.

    ``y`` is ``n x d`` with ``n >= d``, odd diagonal and even below-diagonal
    entries.  Returns ``(A0, steps)`` with steps in product order.
    """
    n = len(y)
    d = len(y[0]) if n else 0
    if n < d:
        raise ValueError("need at least as many rows as columns")
    for i in range(n):
        for j in range(min(i + 1, d)):
            if i == j and y[i][j] % 2 == 0:
                raise ValueError("diagonal entries must be odd")
            if i > j and y[i][j] % 2:
                raise ValueError("below-diagonal entries must be even")
    left: list = []
    work = [list(r) for r in y]
    for k in range(d):
        col = [work[i][k] for i in range(k, n)]
        if all(x == 0 for x in col[1:]):
            continue
        red, r = reduce_vector_runs(col)
        assert all(x == 0 for x in r[1:]), r
        for s, c in red:
            lifted = s.lift(n, k)
            lifted.left_apply(work, c)
            append_run(left, lifted, c)
    out = left[::-1]
    return runs_product(out, n), (out if runs else list(expand_runs(out)))
