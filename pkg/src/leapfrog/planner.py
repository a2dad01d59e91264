"""Approximate any real d x n matrix by ``P @ A`` with ``A`` good, and certify plans.

The construction peels one dimension per level: a short vector ``v`` with
``P v`` tiny is sent to ``e_n`` by a good ``A1``, a rational reflection
rotates ``P v`` onto the last axis, the remaining ``(d-1) x (n-1)`` block is
approximated recursively and the last row is fixed by even multiples of the
tiny last column.  Internals run on dyadic rationals; every returned matrix
is checked against the exact inputs before it leaves this module.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import goodmat as gm
from .goodmat import Step, identity, normalize_to_en, triangularize
from .lattice import (
    Effort,
    EffortExhausted,
    _matrix,
    _lll_integral,
    approx_cvp,
    grow_radius,
    short_parity_vector,
    validate_instance,
)
from .scalar import Scalar, as_scalar, eval_interval, householder_to_last_axis, sqrt


class InstanceError(ValueError):
    pass


@dataclass
class ApproxResult:
    A: list
    runs: list  # (step, count) in product order: A == steps[0] @ steps[1] @ ...
    error: Scalar  # sup over entries of |P A - X|
    tolerance: Fraction
    trace: list = field(default_factory=list)  # |P v| per recursion level, outermost first

    @property
    def depth(self) -> int:
        return len(self.trace)

    @property
    def step_count(self) -> int:
        return gm.runs_length(self.runs)

    def steps(self):
        """Iterate the individual step matrices (there may be very many)."""
        return gm.expand_runs(self.runs)


def parity_round(z: Fraction, parity: int) -> int:
    """Nearest integer congruent to ``parity`` mod 2; ties go toward -inf."""
    lo = 2 * math.floor((z - parity) / 2) + parity
    return lo if z - lo <= lo + 2 - z else lo + 2


def _ceil_sqrt(k: int) -> int:
    r = math.isqrt(k)
    return r if r * r == k else r + 1


def _rnd(x: Fraction, bits: int) -> Fraction:
    return Fraction(round(x * (1 << bits)), 1 << bits)


def _num(x, bits: int) -> Fraction:
    if isinstance(x, Scalar):
        return x.approx(bits)
    return Fraction(x)


def _maxbits(m) -> int:
    return max((abs(x).bit_length() for row in m for x in row), default=0)


def _as_fraction(x) -> Fraction:
    s = as_scalar(x)
    if s.is_rational():
        return s.as_fraction()
    # rational lower bound for a positive irrational tolerance
    return eval_interval(s, 64).lo


class _Ctx:
    def __init__(self, effort: Effort, extra_bits: int = 0):
        self.effort = effort
        self.base = effort.precision + extra_bits
        self.trace: list = []


# --------------------------------------------------------------------------
# keeping completions small
#
# A good matrix is only pinned down by one column (or one row); the rest is
# free up to multiplication by another good matrix.  Picking the remaining
# columns LLL-short keeps the numbers, and so the tolerances handed down the
# recursion, under control.


def _int_inverse(m) -> list:
    n = len(m)
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(m)]
    for c in range(n):
        p = next(r for r in range(c, n) if a[r][c])
        a[c], a[p] = a[p], a[c]
        piv = a[c][c]
        a[c] = [x / piv for x in a[c]]
        for r in range(n):
            if r != c and a[r][c]:
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    out = [[x for x in row[n:]] for row in a]
    assert all(x.denominator == 1 for row in out for x in row)
    return [[int(x) for x in row] for row in out]


def _lift_mod2(q) -> list:
    """Integer matrix of determinant 1 congruent to ``q`` (invertible over GF(2))."""
    k = len(q)
    w = [[x % 2 for x in row] for row in q]
    ops = []
    for c in range(k):
        if not w[c][c]:
            r = next(r for r in range(c + 1, k) if w[r][c])
            w[c] = [(x + y) % 2 for x, y in zip(w[c], w[r])]
            ops.append((c, r))
        for r in range(k):
            if r != c and w[r][c]:
                w[r] = [(x + y) % 2 for x, y in zip(w[r], w[c])]
                ops.append((r, c))
    # ops reduce q to I; over GF(2) each op is its own inverse, so q = E_1 E_2 ...
    m = identity(k)
    for i, j in ops:
        for line in m:  # m <- m (I + e_i e_j^T)
            line[j] += line[i]
    return m


def _to_good(h, keep_last_col: bool) -> list:
    """Nearby good matrix ``h T`` with ``T`` small.

    ``h`` is unimodular and congruent mod 2 to a matrix of the same shape as
    ``T``: either last column ``e_n`` (``keep_last_col``) or last row ``e_n``.
    """
    n = len(h)
    h = [list(r) for r in h]
    if gm.det(h) == -1:
        for row in h:
            row[0] = -row[0]
    hinv = [[x % 2 for x in row] for row in _int_inverse(h)]
    t = identity(n)
    q = _lift_mod2([row[: n - 1] for row in hinv[: n - 1]])
    for i in range(n - 1):
        t[i][: n - 1] = q[i]
    if keep_last_col:
        assert [row[-1] for row in hinv] == [0] * (n - 1) + [1]
        t[n - 1][: n - 1] = hinv[n - 1][: n - 1]
    else:
        assert hinv[n - 1] == [0] * (n - 1) + [1]
        for i in range(n - 1):
            t[i][n - 1] = hinv[i][n - 1]
    g = gm.matmul(h, t)
    flips = [j for j in range(n) if g[j][j] % 4 == 3]
    assert len(flips) % 2 == 0 and (not keep_last_col or n - 1 not in flips)
    for row in g:
        for j in flips:
            row[j] = -row[j]
    assert gm.is_good(g)
    return g


def _reduce_mod_last(a1inv) -> list:
    """Good matrix with the same last column as ``a1inv`` and short other columns."""
    n = len(a1inv)
    if n == 1:
        return a1inv
    v = [row[-1] for row in a1inv]
    vv = sum(x * x for x in v)
    cols = [[row[j] for row in a1inv] for j in range(n - 1)]
    proj = [[vv * c[i] - sum(x * y for x, y in zip(c, v)) * v[i] for i in range(n)] for c in cols]
    _, u, _, _ = _lll_integral(proj, Fraction(99, 100))
    red = []
    for k in range(n - 1):
        c = [sum(cols[i][r] * u[i][k] for i in range(n - 1)) for r in range(n)]
        q = round(Fraction(sum(x * y for x, y in zip(c, v)), vv))
        red.append([x - q * y for x, y in zip(c, v)])
    h = [[red[j][i] for j in range(n - 1)] + [v[i]] for i in range(n)]
    return _to_good(h, keep_last_col=True)


def _reduce_kernel_basis(nmat) -> list:
    """Good matrix whose first ``n-1`` columns span the same lattice as ``nmat``'s, kept short."""
    n = len(nmat)
    cols = [[row[j] for row in nmat] for j in range(n - 1)]
    last = [row[-1] for row in nmat]
    if n > 2:
        _, u, _, _ = _lll_integral(cols, Fraction(99, 100))
        cols = [[sum(cols[i][r] * u[i][k] for i in range(n - 1)) for r in range(n)] for k in range(n - 1)]
    gram = [[Fraction(sum(x * y for x, y in zip(a, b))) for b in cols] for a in cols]
    rhs = [Fraction(sum(x * y for x, y in zip(a, last))) for a in cols]
    coef = _solve(gram, rhs)
    t = [round(c) for c in coef]
    last = [x - sum(t[k] * cols[k][i] for k in range(n - 1)) for i, x in enumerate(last)]
    h = [[cols[j][i] for j in range(n - 1)] + [last[i]] for i in range(n)]
    return _to_good(h, keep_last_col=False)


def _solve(a, b) -> list:
    n = len(a)
    m = [list(row) + [y] for row, y in zip(a, b)]
    for c in range(n):
        p = next(r for r in range(c, n) if m[r][c])
        m[c], m[p] = m[p], m[c]
        for r in range(n):
            if r != c and m[r][c]:
                f = m[r][c] / m[c][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return [m[i][n] / m[i][i] for i in range(n)]


def _extend(runs: list, more) -> None:
    for s, k in more:
        gm.append_run(runs, s, k)


def _zero_lastcol(P, X, n: int, tol: Fraction, ctx: _Ctx):
    """Good ``A`` with ``|P A - X|`` entrywise within ``tol``; X's last column is zero.

    Returns ``(A, runs)``.
    """
    d = len(P)
    if d == 0:
        return identity(n), []
    delta = tol / (2 * _ceil_sqrt(d))
    v = short_parity_vector(P, delta, ctx.effort, start_radius=1).v
    a1, a1_runs = normalize_to_en(v, runs=True)
    a1inv = _reduce_mod_last(gm.runs_product(gm.inverse_runs(a1_runs), n))
    runs = gm.inverse_runs(a1_runs)
    _extend(runs, gm.factor_good(gm.matmul(a1, a1inv), runs=True))

    xmax = max((abs(x) for row in X for x in row), default=Fraction(0))
    bits = (ctx.base + 2 * _maxbits(a1inv) + 2 * math.ceil(1 / tol).bit_length()
            + math.ceil(xmax + 1).bit_length() + 16)
    Pn = [[_num(x, bits) for x in row] for row in P]
    pv = [sum(p * c for p, c in zip(row, v)) for row in Pn]
    refl, _ = householder_to_last_axis([Scalar(x) for x in pv])
    O = refl.rational_matrix(bits)
    OP = [[_rnd(sum(O[i][k] * Pn[k][j] for k in range(d)), bits) for j in range(n)] for i in range(d)]
    D = [[sum(OP[i][k] * a1inv[k][j] for k in range(n)) for j in range(n)] for i in range(d)]
    eps_s = D[d - 1][n - 1]
    if eps_s <= 0:
        raise EffortExhausted("short vector lost its length to rounding; raise precision")
    ctx.trace.append(eps_s)
    OX = [[_rnd(sum(O[i][k] * X[k][j] for k in range(d)), bits) for j in range(n)] for i in range(d)]

    if d == 1:
        bp, bp_runs = identity(n - 1), []
    else:
        sub_P = [row[: n - 1] for row in D[: d - 1]]
        sub_X = [row[: n - 1] for row in OX[: d - 1]]
        bp, bp_runs = _good(sub_P, sub_X, n - 1, tol / 2, ctx)
    w = D[d - 1][: n - 1]
    y = []
    for i in range(n - 1):
        reach = sum(w[k] * bp[k][i] for k in range(n - 1))
        y.append(parity_round((OX[d - 1][i] - reach) / eps_s, 0))

    _extend(runs, ((s.lift(n), k) for s, k in bp_runs))
    for i, yi in enumerate(y):
        gm.append_run(runs, Step(n, n, i + 1, 2 if yi > 0 else -2), abs(yi) // 2)
    B = [list(row) + [0] for row in bp] + [y + [1]]
    return gm.matmul(a1inv, B), runs


def _good(P, X, n: int, tol: Fraction, ctx: _Ctx):
    """Good ``A`` with ``|P A - X|`` entrywise within ``tol`` (X numeric, d >= 1).

    Returns ``(A, runs)``.
    """
    d = len(X)
    eps_r = tol / 2
    Y = [[parity_round(X[j][i] / eps_r, int(i == j)) for j in range(d)] for i in range(n)]
    a0, a0_runs = triangularize(Y, runs=True)
    # a0^-1 with its first n-1 columns shortened; its inverse still clears the last row
    nmat = _reduce_kernel_basis(gm.runs_product(gm.inverse_runs(a0_runs), n))
    a0 = _int_inverse(nmat)
    AY = gm.matmul(a0, Y)
    assert all(x == 0 for x in AY[-1])
    X0 = [[eps_r * AY[j][i] for j in range(n)] for i in range(d)]
    M = gm.transpose(nmat)  # (a0^T)^-1
    # M = W^T (a0_tri^T)^-1 with W = a0_tri nmat good and small
    w = gm.matmul(gm.runs_product(a0_runs, n), nmat)
    m_runs = gm.factor_good(gm.transpose(w), runs=True)
    _extend(m_runs, ((s.transpose().inverse(), k) for s, k in a0_runs))
    norm1 = max(sum(abs(M[i][j]) for i in range(n)) for j in range(n))
    B, b_runs = _zero_lastcol(P, X0, n, (tol / 2) / norm1, ctx)
    _extend(b_runs, m_runs)
    return gm.matmul(B, M), b_runs


def sup_error(P, A, X) -> Scalar:
    """Exact ``max_ij |(P A - X)_ij|``."""
    P = _matrix(P)
    X = _matrix(X)
    n = len(A)
    worst = Scalar(0)
    for i, row in enumerate(P):
        for j in range(n):
            e = sum((p * A[k][j] for k, p in enumerate(row) if A[k][j]), Scalar(0)) - X[i][j]
            e = abs(e)
            if e > worst:
                worst = e
    return worst


def _certified_le(err: Scalar, tol: Fraction, precision: int) -> bool:
    iv = eval_interval(err, 2 * precision)
    if iv.hi <= tol:
        return True
    if iv.lo > tol:
        return False
    return err <= tol


def _prepare(P, X, effort):
    effort = effort or Effort()
    P = _matrix(P)
    X = _matrix(X)
    check = validate_instance(P)
    if not check:
        raise InstanceError(check.reason)
    if len(X) != len(P) or any(len(r) != len(P[0]) for r in X):
        raise InstanceError("target matrix shape does not match P")
    return P, X, effort


def _run(P, X, tol, effort, core) -> ApproxResult:
    d, n = len(P), len(P[0])
    internal = tol
    last_err = None
    for attempt in range(effort.max_retries):
        ctx = _Ctx(effort, extra_bits=32 * attempt)
        Xn = [[x.approx(ctx.base + 64) for x in row] for row in X]
        A, runs = core(P, Xn, n, internal, ctx)
        err = sup_error(P, A, X)
        if _certified_le(err, tol, effort.precision):
            assert gm.is_good(A)
            return ApproxResult(A=A, runs=runs, error=err, tolerance=tol, trace=ctx.trace)
        last_err = err
        internal /= 2
    raise EffortExhausted(f"could not meet tolerance {tol} (last error ~{float(last_err):.3g})")


def approx_zero_lastcol(P, X, tol, effort: Effort | None = None) -> ApproxResult:
    """Good ``A`` with ``|P A - X|`` entrywise within ``tol``, for X with zero last column."""
    P, X, effort = _prepare(P, X, effort)
    if any(not row[-1].is_zero() for row in X):
        raise InstanceError("last column of X must be exactly zero")
    return _run(P, X, _as_fraction(tol), effort, _zero_lastcol)


def approx_good(P, X, tol, effort: Effort | None = None) -> ApproxResult:
    """Good ``A`` with ``|P A - X|`` entrywise within ``tol``.

    Returns the identity when ``P`` itself is already close enough.
    """
    P, X, effort = _prepare(P, X, effort)
    tol = _as_fraction(tol)
    n = len(P[0])
    err = sup_error(P, identity(n), X)
    if _certified_le(err, tol, effort.precision):
        return ApproxResult(A=identity(n), runs=[], error=err, tolerance=tol)
    return _run(P, X, tol, effort, _good)


# --------------------------------------------------------------------------
# plan certificates


@dataclass
class PlanCertificate:
    """What a plan promises, checkable without re-running the search.

    Positions are absolute: ``p0`` is particle 0's start and ``P`` holds the
    offsets of the others.  Particle 0 ends at ``p0 + 2 P w0`` and particle
    ``i`` at ``p0 + (P A0)_i + 2 P w0``.  ``w_prime = A0^-1 w0`` gives the
    same translation when it is applied after the stationary phase.
    """

    P: list
    p0: list
    targets: list
    eps: Fraction
    A0: list
    a0_runs: list
    w0: list
    w_prime: list
    predicted: list
    budget: dict

    @property
    def n(self) -> int:
        return len(self.A0)

    @property
    def d(self) -> int:
        return len(self.P)

    def check(self) -> bool:
        if gm.matvec(self.A0, self.w_prime) != self.w0 or not gm.is_good(self.A0):
            return False
        return predicted_finals(self.P, self.p0, self.A0, self.w0) == self.predicted


def predicted_finals(P, p0, A0, w0) -> list:
    d, n = len(P), len(A0)
    shift = [p0[r] + 2 * sum((P[r][k] * w0[k] for k in range(n) if w0[k]), Scalar(0)) for r in range(d)]
    out = [shift]
    for j in range(n):
        col = [sum((P[r][k] * A0[k][j] for k in range(n) if A0[k][j]), Scalar(0)) for r in range(d)]
        out.append([shift[r] + col[r] for r in range(d)])
    return out


def max_deviation(points, targets) -> Scalar:
    worst = Scalar(0)
    for p, q in zip(points, targets):
        d2 = sum(((a - b) * (a - b) for a, b in zip(p, q)), Scalar(0))
        if d2 > worst:
            worst = d2
    return sqrt(worst)


def plan_certificate(P, targets: Sequence, eps, effort: Effort | None = None, p0=None) -> PlanCertificate:
    """Certificate for moving particle ``i`` to within ``eps`` of ``targets[i]``.

    ``w0`` puts ``2 P w0`` within ``eps/2`` of ``q0 - p0``; ``A0`` puts every
    column of ``P A0`` within ``eps/2`` (Euclidean) of ``q_i - q0``.
    """
    effort = effort or Effort()
    P = _matrix(P)
    d, n = len(P), len(P[0])
    check = validate_instance(P)
    if not check:
        raise InstanceError(check.reason)
    p0 = [Scalar(0)] * d if p0 is None else [as_scalar(x) for x in p0]
    targets = [[as_scalar(x) for x in q] for q in targets]
    if len(targets) != n + 1 or any(len(q) != d for q in targets):
        raise InstanceError("need n+1 targets of dimension d")
    eps = _as_fraction(eps)
    if eps <= 0:
        raise InstanceError("eps must be positive")

    half = [(targets[0][r] - p0[r]) / 2 for r in range(d)]
    cvp = grow_radius(lambda R: approx_cvp(P, half, effort, radius=R), effort,
                      lambda res: res.distance <= eps / 4, start=1)
    w0 = cvp.v

    col_tol = eps / (2 * _ceil_sqrt(d))
    Q = [[targets[j + 1][r] - targets[0][r] for j in range(n)] for r in range(d)]
    res = approx_good(P, Q, col_tol, effort)
    A0 = res.A
    a0inv = gm.runs_product(gm.inverse_runs(res.runs), n)
    w_prime = gm.matvec(a0inv, w0)
    predicted = predicted_finals(P, p0, A0, w0)
    budget = {
        "eps": eps,
        "translation": eps / 4,
        "translation_achieved": cvp.distance,
        "matrix_entry_tol": col_tol,
        "matrix_achieved": res.error,
        "recursion_eps": res.trace,
    }
    cert = PlanCertificate(P=P, p0=p0, targets=targets, eps=eps, A0=A0, a0_runs=res.runs,
                           w0=w0, w_prime=w_prime, predicted=predicted, budget=budget)
    assert gm.matvec(A0, w_prime) == w0
    return cert


def estimated_moves(cert: PlanCertificate, order: str = "translate-first") -> int:
    n = cert.n
    w = cert.w0 if order == "translate-first" else cert.w_prime
    return 2 * gm.runs_length(cert.a0_runs) + 2 * n * sum(abs(x) for x in w)
