"""Lattice search kernel for the group G(P) = {P v : v integer}.

Closest-vector queries are answered exactly inside a coefficient box
``|v_i| <= R``: the box is relaxed to the quadratic form
``|P v - t|^2 + lam |v|^2``, the weighted embedding lattice is LLL reduced,
and Schnorr-Euchner enumeration visits every integer point whose form value
could still beat the incumbent.  Nothing inside the box is missed, so small
radii agree with brute force.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .scalar import (
    DEFAULT_PRECISION,
    Scalar,
    as_scalar,
    eval_interval,
    sqrt,
)


class EffortExhausted(RuntimeError):
    pass


@dataclass(frozen=True)
class Effort:
    """Search budget.

    ``radius`` seeds the coefficient box and ``max_radius`` caps its growth
    (doubling).  ``max_nodes`` bounds one enumeration; ``time_limit`` is a
    wall-clock cap in seconds for adaptive loops.
    """

    radius: int = 32
    max_radius: int = 1 << 64
    precision: int = DEFAULT_PRECISION
    max_nodes: int = 400_000
    time_limit: float | None = None
    max_retries: int = 6

    def __post_init__(self):
        if min(self.radius, self.max_radius, self.precision, self.max_nodes, self.max_retries) <= 0:
            raise ValueError("effort settings must be positive")


# --------------------------------------------------------------------------
# LLL


def _lll_integral(cols: list, delta: Fraction):
    """Integral LLL (all-integer Gram-Schmidt) on integer column vectors.

    Returns ``(reduced, U, d, lam)``; ``reduced[k] = sum_i U[i][k] cols[i]``.
    ``d[k]`` is the Gram determinant of the first ``k`` vectors and
    ``lam[k][j] = d[j+1] * mu_kj``.
    """
    b = [list(c) for c in cols]
    n = len(b)
    h = [[int(i == k) for i in range(n)] for k in range(n)]  # h[k] = column k of U
    p, q = delta.numerator, delta.denominator
    d = [1] + [0] * n
    lam = [[0] * n for _ in range(n)]

    def dot(x, y):
        return sum(a * c for a, c in zip(x, y))

    def gso(k):
        for j in range(k + 1):
            u = dot(b[k], b[j])
            for i in range(j):
                u = (d[i + 1] * u - lam[k][i] * lam[j][i]) // d[i]
            if j < k:
                lam[k][j] = u
            else:
                if u == 0:
                    raise ValueError("basis vectors are linearly dependent")
                d[k + 1] = u

    def red(k, l):
        if 2 * abs(lam[k][l]) > d[l + 1]:
            qq = (2 * lam[k][l] + d[l + 1]) // (2 * d[l + 1])
            bk, bl = b[k], b[l]
            for t in range(len(bk)):
                bk[t] -= qq * bl[t]
            hk, hl = h[k], h[l]
            for t in range(n):
                hk[t] -= qq * hl[t]
            lam[k][l] -= qq * d[l + 1]
            for i in range(l):
                lam[k][i] -= qq * lam[l][i]

    def swap(k, kmax):
        b[k], b[k - 1] = b[k - 1], b[k]
        h[k], h[k - 1] = h[k - 1], h[k]
        for j in range(k - 1):
            lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
        lm = lam[k][k - 1]
        bb = (d[k - 1] * d[k + 1] + lm * lm) // d[k]
        for i in range(k + 1, kmax + 1):
            t = lam[i][k]
            lam[i][k] = (d[k + 1] * lam[i][k - 1] - lm * t) // d[k]
            lam[i][k - 1] = (bb * t + lm * lam[i][k]) // d[k + 1]
        d[k] = bb

    if n == 0:
        return b, [], d, lam
    gso(0)
    k, kmax = 1, 0
    while k < n:
        if k > kmax:
            kmax = k
            gso(k)
        red(k, k - 1)
        lm = lam[k][k - 1]
        if q * d[k + 1] * d[k - 1] < p * d[k] * d[k] - q * lm * lm:
            swap(k, kmax)
            k = max(1, k - 1)
            continue
        for l in range(k - 2, -1, -1):
            red(k, l)
        k += 1
    u = [[h[k][i] for k in range(n)] for i in range(n)]
    return b, u, d, lam


def lll_reduce(basis: Sequence[Sequence], delta=Fraction(99, 100), precision: int = DEFAULT_PRECISION):
    """LLL-reduce the columns of a real basis.

    ``basis`` is a list of column vectors.  Entries are scaled by
    ``2**precision`` and rounded, the integer lattice is reduced, and the
    exact input is multiplied by the unimodular transform.  Returns
    ``(reduced_columns, U)`` with ``reduced = basis @ U``.
    """
    delta = Fraction(delta)
    if not Fraction(1, 4) < delta < 1:
        raise ValueError("delta must lie in (1/4, 1)")
    cols = [[as_scalar(x) for x in c] for c in basis]
    if all(x.is_rational() and x.as_fraction().denominator == 1 for c in cols for x in c):
        ints = [[int(x.as_fraction()) for x in c] for c in cols]
    else:
        ints = [[round(x.approx(precision + 2) * (1 << precision)) for x in c] for c in cols]
    _, u, _, _ = _lll_integral(ints, delta)
    n = len(cols)
    out = [[sum((cols[i][r] * u[i][k] for i in range(n)), Scalar(0)) for r in range(len(cols[0]))]
           for k in range(n)]
    return out, u


# --------------------------------------------------------------------------
# closest vectors in a coefficient box


@dataclass
class CVPResult:
    v: list
    distance: Scalar
    radius: int
    exhausted: bool = False
    nodes: int = 0

    def distance_upper(self, precision: int = DEFAULT_PRECISION) -> Fraction:
        return eval_interval(self.distance, precision).hi


def _matrix(P) -> list:
    return [[as_scalar(x) for x in row] for row in P]


def _residual(P: list, v: Sequence[int], t: Sequence[Scalar]) -> list:
    return [sum((p * c for p, c in zip(row, v) if c), Scalar(0)) - ti for row, ti in zip(P, t)]


def _d2_exact(P, v, t) -> Scalar:
    return sum((r * r for r in _residual(P, v, t)), Scalar(0))


def _approx_matrix(P: list, bits: int) -> list:
    return [[x.approx(bits) for x in row] for row in P]


class _Search:
    """One box-constrained closest-vector query."""

    def __init__(self, P, t, radius, bits, exclude_exact, max_nodes):
        self.P, self.t = P, t
        self.d, self.n = len(P), len(P[0])
        self.R = radius
        self.bits = bits
        self.Pq = _approx_matrix(P, bits)
        self.tq = [x.approx(bits) for x in t]
        self.exclude_exact = exclude_exact
        self.max_nodes = max_nodes
        self.nodes = 0
        self.exhausted = False
        # absolute error of an approximate residual entry inside the box
        self.err = Fraction(self.n * radius + 1, 1 << bits)
        self.best_d2: Fraction | None = None
        self.cands: list = []

    def approx_d2(self, v) -> Fraction:
        return sum(((sum(p * c for p, c in zip(row, v) if c) - ti) ** 2
                    for row, ti in zip(self.Pq, self.tq)), Fraction(0))

    def offer(self, v) -> None:
        if any(abs(c) > self.R for c in v):
            return
        d2 = self.approx_d2(v)
        slack = 4 * self.err * (1 + 2 * _sqrt_up(d2)) + self.err * self.err * 4 * self.d
        if self.exclude_exact and d2 <= slack and _d2_exact(self.P, v, self.t).is_zero():
            return
        if self.best_d2 is None or d2 < self.best_d2:
            self.best_d2 = d2
            self.cands = [(d2, tuple(v))] + [c for c in self.cands if c[0] <= d2 + slack]
        elif d2 <= self.best_d2 + slack:
            self.cands.append((d2, tuple(v)))

    def winner(self):
        """Exact minimiser among near-ties.

        Exact ties go to the shorter coefficient vector, then the
        lexicographically smaller one.
        """
        best_d2 = self.best_d2
        slack = 4 * self.err * (1 + 2 * _sqrt_up(best_d2)) + self.err * self.err * 4 * self.d
        pool = sorted({c[1] for c in self.cands if c[0] <= best_d2 + slack},
                      key=lambda v: (sum(x * x for x in v), v))
        if len(pool) == 1:
            v = list(pool[0])
            return v, _d2_exact(self.P, v, self.t)
        scored = [(_d2_exact(self.P, list(v), self.t), v) for v in pool]
        best = scored[0]
        for s in scored[1:]:
            if s[0] < best[0]:
                best = s
        return list(best[1]), best[0]

    # -- embedding ----------------------------------------------------------

    def reduced_basis(self, b_lam: Fraction):
        """Weighted embedding ``[s e_i ; K p_i]``, LLL reduced."""
        K = 1 << self.bits
        scale = math.isqrt(self.n) + 1
        s = max(1, math.floor(K * b_lam / (self.R * scale)))
        cols = []
        for j in range(self.n):
            col = [0] * self.n + [round(K * self.Pq[i][j]) for i in range(self.d)]
            col[j] = s
            cols.append(col)
        target = [0] * self.n + [round(K * x) for x in self.tq]
        b, u, dd, lam = _lll_integral(cols, Fraction(99, 100))
        return s, K, b, u, dd, lam, target

    def run(self, incumbent: list) -> None:
        self.offer(incumbent)
        if self.best_d2 is None:
            return
        b_lam = _sqrt_up(self.best_d2)
        if b_lam == 0:
            return
        for _ in range(6):
            s, K, b, u, dd, lam, target = self.reduced_basis(b_lam)
            geom = _Geometry(b, u, dd, lam, target)
            x0 = geom.babai()
            self.offer(geom.coeffs(x0))
            new = _sqrt_up(self.best_d2)
            if new == 0 or new * 2 > b_lam:
                break
            b_lam = new
        if self.best_d2 == 0:
            return
        self.enumerate(geom, s, K, b_lam)

    def enumerate(self, geom, s, K, b_lam) -> None:
        n = self.n
        # form value of any box point with residual <= b:  s^2 n R^2 + (K b + E)^2
        E = math.isqrt(self.d) + 1
        E = E * (n * self.R + 1)
        base = s * s * n * self.R * self.R

        def bound_for(d2: Fraction) -> float:
            kb = K * _sqrt_up(d2) + E
            return float((base + kb * kb - geom.perp2) / geom.scale) * (1 + 1e-9) + 1e-12

        B, mu, e = geom.floats()
        x0 = geom.x0
        z = [0] * n
        r2 = bound_for(self.best_d2)
        current = [self.best_d2]

        # depth-first Schnorr-Euchner over z = x - x0, last index first
        partial = [0.0] * (n + 1)
        center = [0.0] * n
        step = [0] * n
        delta_sign = [0] * n
        k = n - 1
        center[k] = e[k]
        z[k] = round(center[k])
        step[k] = 0
        delta_sign[k] = 1 if center[k] >= z[k] else -1
        while True:
            self.nodes += 1
            if self.nodes > self.max_nodes:
                self.exhausted = True
                return
            diff = z[k] - center[k]
            val = partial[k + 1] + B[k] * diff * diff
            if val <= r2:
                if k == 0:
                    x = [x0[i] + z[i] for i in range(n)]
                    self.offer(geom.coeffs(x))
                    if self.best_d2 < current[0]:
                        current[0] = self.best_d2
                        r2 = bound_for(self.best_d2)
                    self._next(z, center, step, delta_sign, k)
                else:
                    partial[k] = val
                    k -= 1
                    c = e[k] - sum(mu[j][k] * z[j] for j in range(k + 1, n))
                    center[k] = c
                    z[k] = round(c)
                    step[k] = 0
                    delta_sign[k] = 1 if c >= z[k] else -1
            else:
                k += 1
                if k == n:
                    return
                self._next(z, center, step, delta_sign, k)

    @staticmethod
    def _next(z, center, step, delta_sign, k):
        # zig-zag around the centre: c, c+1, c-1, c+2, ... (sign by side)
        step[k] += 1
        off = (step[k] + 1) // 2
        if step[k] % 2 == 1:
            z[k] = round(center[k]) + delta_sign[k] * off
        else:
            z[k] = round(center[k]) - delta_sign[k] * off


def _sqrt_up(x: Fraction) -> Fraction:
    """Rational upper bound for sqrt(x), tight to about 2**-64 relative."""
    if x <= 0:
        return Fraction(0)
    num, den = x.numerator, x.denominator
    shift = 128
    r = math.isqrt((num << (2 * shift)) // den) + 1
    return Fraction(r, 1 << shift)


class _Geometry:
    """Gram-Schmidt data of a reduced embedding plus an exact Babai point."""

    def __init__(self, b, u, dd, lam, target):
        self.b, self.u, self.dd, self.lam = b, u, dd, lam
        self.n = len(b)
        n = self.n
        Bq = [Fraction(dd[i + 1], dd[i]) for i in range(n)]
        muq = [[Fraction(lam[i][j], dd[j + 1]) if j < i else Fraction(int(i == j)) for j in range(n)]
               for i in range(n)]
        y = []
        for i in range(n):
            acc = Fraction(sum(a * c for a, c in zip(target, b[i])))
            for j in range(i):
                acc -= muq[i][j] * y[j] * Bq[j]
            y.append(acc / Bq[i])
        self.Bq, self.muq, self.y = Bq, muq, y
        self.scale = max(Bq)
        # squared distance from the target to the span of the lattice
        self.perp2 = sum(a * a for a in target) - sum(yi * yi * bi for yi, bi in zip(y, Bq))
        self.x0: list = []

    def babai(self) -> list:
        n = self.n
        x = [0] * n
        for i in range(n - 1, -1, -1):
            c = self.y[i] - sum(self.muq[j][i] * x[j] for j in range(i + 1, n))
            x[i] = math.floor(c + Fraction(1, 2))
        self.x0 = x
        return x

    def coeffs(self, x) -> list:
        return [sum(self.u[i][k] * x[k] for k in range(self.n)) for i in range(self.n)]

    def floats(self):
        n = self.n
        x0 = self.x0
        B = [float(self.Bq[i] / self.scale) for i in range(n)]
        mu = [[float(self.muq[i][j]) for j in range(n)] for i in range(n)]
        e = []
        for i in range(n):
            c = self.y[i] - x0[i] - sum(self.muq[j][i] * x0[j] for j in range(i + 1, n))
            e.append(float(c))
        return B, mu, e


def approx_cvp(P, t, effort: Effort | None = None, radius: int | None = None,
               exclude_exact: bool = False) -> CVPResult:
    """Integer ``v`` with ``|v_i| <= radius`` minimising ``|P v - t|``.

    ``exclude_exact`` skips coefficient vectors with ``P v == t`` exactly
    (for ``t = 0`` that asks for a short nonzero combination).  The returned
    distance is an exact scalar.  If the node budget runs out the best point
    seen so far is returned with ``exhausted`` set.
    """
    effort = effort or Effort()
    P = _matrix(P)
    t = [as_scalar(x) for x in t]
    R = radius if radius is not None else effort.radius
    d, n = len(P), len(P[0])
    if len(t) != d:
        raise ValueError("target dimension does not match P")
    bits = effort.precision + 2 * R.bit_length() + 16
    search = _Search(P, t, R, bits, exclude_exact, effort.max_nodes)
    start = [0] * n
    if exclude_exact and _d2_exact(P, start, t).is_zero():
        start = None
        for j in range(n):
            e = [int(i == j) for i in range(n)]
            search.offer(e)
        if search.best_d2 is None:
            raise EffortExhausted("no admissible candidate in the box")
        start = list(search.winner()[0])
    search.run(start)
    if search.best_d2 is None:
        raise EffortExhausted("no admissible candidate in the box")
    v, d2 = search.winner()
    return CVPResult(v=v, distance=sqrt(d2), radius=R, exhausted=search.exhausted, nodes=search.nodes)


def brute_force_cvp(P, t, radius: int, exclude_exact: bool = False):
    """Exhaustive box search; an independent oracle for tests."""
    import itertools

    P = _matrix(P)
    t = [as_scalar(x) for x in t]
    best = None
    for v in itertools.product(range(-radius, radius + 1), repeat=len(P[0])):
        d2 = _d2_exact(P, v, t)
        if exclude_exact and d2.is_zero():
            continue
        if best is None or d2 < best[0]:
            best = (d2, list(v))
        elif d2 == best[0] and (sum(x * x for x in v), list(v)) < (sum(x * x for x in best[1]), best[1]):
            best = (d2, list(v))
    return best[1], sqrt(best[0])


def grow_radius(query, effort: Effort, accept, start: int | None = None):
    """Double the box radius from ``start`` until ``accept(result)`` holds."""
    R = start if start is not None else effort.radius
    deadline = None if effort.time_limit is None else time.monotonic() + effort.time_limit
    last = None
    while R <= effort.max_radius:
        res = query(R)
        last = res
        if accept(res):
            return res
        if deadline is not None and time.monotonic() > deadline:
            break
        R *= 2
    raise EffortExhausted(f"no acceptable point up to radius {min(R, effort.max_radius)}"
                          + (f" (best distance ~{float(last.distance):.3g})" if last else ""))


# --------------------------------------------------------------------------
# short vectors with parity structure


@dataclass
class ParityVector:
    v: list
    norm: Scalar
    seed: list
    radius: int


def short_parity_vector(P, delta, effort: Effort | None = None, start_radius: int = 1) -> ParityVector:
    """Primitive ``v``, even except a last entry = 1 (mod 4), with ``0 < |P v| < delta``.

    Searches for ``v0`` with ``P v0`` near ``P e_n / 2``, doubles it, takes
    away ``e_n``, divides by the (odd) content and fixes the sign.
    """
    effort = effort or Effort()
    P = _matrix(P)
    delta = as_scalar(delta)
    if delta.sign() <= 0:
        raise ValueError("delta must be positive")
    d, n = len(P), len(P[0])
    half_last = [row[-1] / 2 for row in P]
    found: list = []

    def query(R):
        res = approx_cvp(P, half_last, effort, radius=R, exclude_exact=True)
        v1 = [2 * c for c in res.v]
        v1[-1] -= 1
        k = math.gcd(*v1)
        v = [c // k for c in v1]
        if v[-1] % 4 != 1:
            v = [-c for c in v]
        pv = [sum((p * c for p, c in zip(row, v) if c), Scalar(0)) for row in P]
        nrm = sqrt(sum((x * x for x in pv), Scalar(0)))
        found.append(ParityVector(v=v, norm=nrm, seed=res.v, radius=R))
        return res

    def accept(res):
        cand = found[-1]
        return not cand.norm.is_zero() and cand.norm < delta

    grow_radius(query, effort, accept, start=start_radius)
    out = found[-1]
    assert out.v[-1] % 4 == 1 and all(c % 2 == 0 for c in out.v[:-1])
    assert math.gcd(*out.v) == 1
    return out


# --------------------------------------------------------------------------
# instance validation and density certificates


@dataclass
class Validation:
    ok: bool
    reason: str = ""

    def __bool__(self):
        return self.ok


def _rank(M: list) -> int:
    """Rank by exact elimination over the surd field."""
    rows = [list(r) for r in M]
    rank, col = 0, 0
    ncols = len(rows[0]) if rows else 0
    while rank < len(rows) and col < ncols:
        piv = next((i for i in range(rank, len(rows)) if not rows[i][col].is_zero()), None)
        if piv is None:
            col += 1
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = rows[rank][col].inverse()
        for i in range(rank + 1, len(rows)):
            f = rows[i][col] * inv
            if not f.is_zero():
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[rank])]
        rank += 1
        col += 1
    return rank


def validate_instance(P) -> Validation:
    P = _matrix(P)
    d = len(P)
    n = len(P[0]) if d else 0
    if d == 0 or n == 0:
        return Validation(False, "empty configuration matrix")
    if n <= d:
        return Validation(False, f"n={n} <= d={d}: G(P) cannot be dense")
    if _rank(P) < d:
        return Validation(False, "columns do not span R^d")
    return Validation(True)


@dataclass
class DensityVerdict:
    kind: str  # "dense" | "not_dense" | "unknown"
    w: list | None = None
    wTP: list | None = None
    residual: Fraction | None = None
    evidence: list = field(default_factory=list)
    reason: str = ""
    proof: str = ""
    effort: dict = field(default_factory=dict)

    def check(self, P) -> bool:
        """Re-verify the carried evidence against ``P``."""
        P = _matrix(P)
        if self.kind == "not_dense":
            if not any(not x.is_zero() for x in self.w):
                return False
            for j in range(len(P[0])):
                val = sum((self.w[i] * P[i][j] for i in range(len(P))), Scalar(0))
                iv = eval_interval(val, 2 * DEFAULT_PRECISION)
                nearest = round(iv.mid)
                if max(abs(iv.lo - nearest), abs(iv.hi - nearest)) > (self.residual or 0):
                    return False
            return True
        if self.kind == "dense":
            for ev in self.evidence:
                got = _d2_exact(P, ev["v"], ev["target"])
                if got > as_scalar(ev["tolerance"]) ** 2:
                    return False
            return True
        return True


def _solve_left(P: list, rhs: list) -> list | None:
    """Some ``w`` with ``w^T P = rhs`` (exact), or None."""
    d, n = len(P), len(P[0])
    # rows of the system: for each column j, sum_i w_i P[i][j] = rhs[j]
    A = [[P[i][j] for i in range(d)] + [as_scalar(rhs[j])] for j in range(n)]
    where = [-1] * d
    row = 0
    for col in range(d):
        piv = next((r for r in range(row, n) if not A[r][col].is_zero()), None)
        if piv is None:
            continue
        A[row], A[piv] = A[piv], A[row]
        inv = A[row][col].inverse()
        A[row] = [x * inv for x in A[row]]
        for r in range(n):
            if r != row and not A[r][col].is_zero():
                f = A[r][col]
                A[r] = [a - f * b for a, b in zip(A[r], A[row])]
        where[col] = row
        row += 1
    for r in range(row, n):
        if not A[r][d].is_zero():
            return None
    w = [Scalar(0)] * d
    free = [c for c in range(d) if where[c] < 0]
    if free and all(as_scalar(x).is_zero() for x in rhs):
        w[free[0]] = Scalar(1)
    for c in range(d):
        if where[c] >= 0:
            r = where[c]
            w[c] = A[r][d] - sum((A[r][f] * w[f] for f in free), Scalar(0))
    return w


def _rational_kernel(rows: list, nvars: int) -> list | None:
    """A nonzero rational solution of ``rows @ x = 0`` or None."""
    A = [list(r) for r in rows]
    where = [-1] * nvars
    rank = 0
    for col in range(nvars):
        piv = next((r for r in range(rank, len(A)) if A[r][col] != 0), None)
        if piv is None:
            continue
        A[rank], A[piv] = A[piv], A[rank]
        inv = 1 / A[rank][col]
        A[rank] = [x * inv for x in A[rank]]
        for r in range(len(A)):
            if r != rank and A[r][col] != 0:
                f = A[r][col]
                A[r] = [a - f * b for a, b in zip(A[r], A[rank])]
        where[col] = rank
        rank += 1
    free = [c for c in range(nvars) if where[c] < 0]
    if not free:
        return None
    x = [Fraction(0)] * nvars
    x[free[0]] = Fraction(1)
    for c in range(nvars):
        if where[c] >= 0:
            x[c] = -A[where[c]][free[0]]
    return x


def _integer_scale(w: list, wTP: list) -> tuple:
    den = 1
    for x in wTP:
        den = math.lcm(den, x.as_fraction().denominator)
    w = [x * den for x in w]
    return w, [x * den for x in wTP]


def _algebraic_dual(P: list):
    """Exact search for ``w != 0`` with rational ``w^T P``.

    Entries live in Q(sqrt(p) : p in S); write ``w = sum_s w_s sqrt(s)`` over
    squarefree products ``s`` of primes in ``S`` and demand that every
    irrational component of ``w^T P`` vanishes: a rational linear system.
    Returns ``w`` or None when only ``w = 0`` works (then G(P) is dense).
    """
    primes = set()
    for row in P:
        for x in row:
            primes |= x.radicand_primes()
    primes = sorted(primes)
    basis = [1]
    for p in primes:
        basis = basis + [b * p for b in basis]
    d, n = len(P), len(P[0])
    nv = d * len(basis)
    eqs: dict = {}
    for j in range(n):
        for r in range(d):
            for si, s in enumerate(basis):
                for m2, c in P[r][j].terms.items():
                    g = math.gcd(s, m2)
                    m = (s // g) * (m2 // g)
                    if m == 1:
                        continue
                    key = (j, m)
                    eqs.setdefault(key, [Fraction(0)] * nv)[r * len(basis) + si] += g * c
    x = _rational_kernel(list(eqs.values()), nv)
    if x is None:
        return None
    w = []
    for r in range(d):
        acc = Scalar(0)
        for si, s in enumerate(basis):
            if x[r * len(basis) + si]:
                acc = acc + x[r * len(basis) + si] * Scalar.sqrt_int(s)
        w.append(acc)
    return w


def _not_dense(P, w, reason, proof) -> DensityVerdict:
    wTP = [sum((w[i] * P[i][j] for i in range(len(P))), Scalar(0)) for j in range(len(P[0]))]
    w, wTP = _integer_scale(w, wTP)
    return DensityVerdict("not_dense", w=w, wTP=wTP, residual=Fraction(0), reason=reason, proof=proof)


PROBE_SCALES = (Fraction(1), Fraction(1, 2), Fraction(1, 4))


def density_certificate(P, effort: Effort | None = None, tol=Fraction(1, 1000)) -> DensityVerdict:
    """Decide density of G(P) with machine-checkable evidence.

    Non-density comes with an exact dual vector ``w`` (``w^T P`` integral).
    Density comes with closest-vector approximations of the probe targets
    ``+-s e_i`` (s in 1, 1/2, 1/4) below ``tol``; when every entry is a surd
    the absence of a dual is also proven algebraically.
    """
    effort = effort or Effort()
    P = _matrix(P)
    d = len(P)
    n = len(P[0]) if d else 0
    tol = as_scalar(tol)
    if n <= d or _rank(P) < d:
        if _rank(P) < d:
            w = _solve_left(P, [0] * n)
            reason = "columns do not span R^d"
        else:
            w = _solve_left(P, [1] + [0] * (n - 1))
            reason = f"n={n} <= d={d}: G(P) is a lattice"
        return _not_dense(P, w, reason, "observation: dense needs n > d")
    for i, row in enumerate(P):
        if all(x.is_rational() for x in row):
            den = 1
            for x in row:
                den = math.lcm(den, x.as_fraction().denominator)
            w = [Scalar(den if k == i else 0) for k in range(d)]
            return _not_dense(P, w, f"row {i + 1} is rational", "rational row")
    proof = ""
    if all(x.is_exact for row in P for x in row):
        w = _algebraic_dual(P)
        if w is not None:
            return _not_dense(P, w, "rational dual vector", "exact surd linear algebra")
        proof = "no nonzero w with rational w^T P (exact surd linear algebra)"

    evidence = []
    for i in range(d):
        for s in PROBE_SCALES:
            for sgn in (1, -1):
                target = [Scalar(sgn * s if k == i else 0) for k in range(d)]
                try:
                    res = grow_radius(lambda R: approx_cvp(P, target, effort, radius=R),
                                      effort, lambda r: r.distance <= tol)
                except EffortExhausted as exc:
                    return DensityVerdict("unknown", reason=str(exc), proof=proof,
                                          evidence=evidence,
                                          effort={"max_radius": effort.max_radius,
                                                  "precision": effort.precision})
                evidence.append({"target": target, "v": res.v, "distance": res.distance,
                                 "tolerance": tol})
    return DensityVerdict("dense", evidence=evidence, proof=proof,
                          reason="all probes approximated below tolerance")
