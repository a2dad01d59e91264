import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from leapfrog.lattice import (
    Effort,
    EffortExhausted,
    approx_cvp,
    density_certificate,
    lll_reduce,
    short_parity_vector,
    validate_instance,
)
from leapfrog.scalar import Scalar, sqrt

P1 = [[Scalar(1), sqrt(2)]]
P2 = [[Scalar(1), Scalar(0), sqrt(2)], [Scalar(0), Scalar(1), sqrt(3)]]


def oracle_cvp(P, t, radius, exclude_exact=False):
    """Exhaustive search; ties go to the smaller |v|^2, then lexicographically."""
    best = None
    for v in itertools.product(range(-radius, radius + 1), repeat=len(P[0])):
        r = [sum((P[i][j] * v[j] for j in range(len(v))), Scalar(0)) - t[i] for i in range(len(P))]
        d2 = sum((x * x for x in r), Scalar(0))
        if exclude_exact and d2.is_zero():
            continue
        key = (sum(x * x for x in v), list(v))
        if best is None or d2 < best[0] or (d2 == best[0] and key < best[1]):
            best = (d2, key)
    return best[1][1], best[0]


def test_lll_identity_unchanged():
    red, u = lll_reduce([[1, 0], [0, 1]])
    assert u == [[1, 0], [0, 1]]
    assert red == [[1, 0], [0, 1]]


def test_lll_finds_short_vector():
    red, u = lll_reduce([[201, 1], [200, 1]])
    red = [[int(x.as_fraction()) for x in c] for c in red]
    assert [1, 0] in red or [-1, 0] in red


@given(st.lists(st.integers(-40, 40), min_size=9, max_size=9))
def test_lll_transform_is_unimodular(entries):
    cols = [entries[0:3], entries[3:6], entries[6:9]]
    det = (cols[0][0] * (cols[1][1] * cols[2][2] - cols[2][1] * cols[1][2])
           - cols[1][0] * (cols[0][1] * cols[2][2] - cols[2][1] * cols[0][2])
           + cols[2][0] * (cols[0][1] * cols[1][2] - cols[1][1] * cols[0][2]))
    if det == 0:
        return
    red, u = lll_reduce(cols)
    red = [[int(x.as_fraction()) for x in c] for c in red]
    for k in range(3):
        assert red[k] == [sum(cols[i][r] * u[i][k] for i in range(3)) for r in range(3)]
    du = (u[0][0] * (u[1][1] * u[2][2] - u[1][2] * u[2][1]) - u[0][1] * (u[1][0] * u[2][2] - u[1][2] * u[2][0])
          + u[0][2] * (u[1][0] * u[2][1] - u[1][1] * u[2][0]))
    assert abs(du) == 1
    # Lovász condition at 0.99 on the exact Gram-Schmidt data
    gs = []
    for b in red:
        v = [Fraction(x) for x in b]
        for g in gs:
            mu = sum(Fraction(a) * c for a, c in zip(b, g)) / sum(c * c for c in g)
            v = [x - mu * c for x, c in zip(v, g)]
        gs.append(v)
    for k in range(1, 3):
        nk = sum(c * c for c in gs[k])
        nk1 = sum(c * c for c in gs[k - 1])
        mu = sum(Fraction(a) * c for a, c in zip(red[k], gs[k - 1])) / nk1
        assert nk >= (Fraction(99, 100) - mu * mu) * nk1


def test_cvp_documented_example():
    res = approx_cvp(P1, [sqrt(2) / 2], radius=10)
    assert res.v == [5, -3]
    assert abs(float(res.distance) - 0.0503) < 1e-4


def test_cvp_exact_lattice_point():
    t = [2 + 3 * sqrt(2)]
    res = approx_cvp(P1, t, radius=10)
    assert res.v == [2, 3] and res.distance.is_zero()


def test_cvp_short_nonzero_combination():
    res = approx_cvp(P1, [0], radius=10, exclude_exact=True)
    assert res.v == [-7, 5]
    assert abs(float(res.distance) - 0.07107) < 1e-5


@given(st.integers(-30, 30), st.integers(-30, 30), st.integers(2, 8))
def test_cvp_matches_oracle_1d(a, b, radius):
    t = [Fraction(a, 7) + Fraction(b, 11) * sqrt(3)]
    P = [[Scalar(1), sqrt(3)]]
    got = approx_cvp(P, t, radius=radius)
    v, d2 = oracle_cvp(P, t, radius)
    assert got.v == v and got.distance * got.distance == d2


@given(st.integers(-5, 5), st.integers(-5, 5), st.integers(1, 3))
def test_cvp_matches_oracle_2d(a, b, radius):
    t = [Fraction(a, 3), Fraction(b, 4) + sqrt(2) / 5]
    got = approx_cvp(P2, t, radius=radius)
    v, d2 = oracle_cvp(P2, t, radius)
    assert got.v == v
    assert got.distance * got.distance == d2


@given(st.integers(2, 6))
def test_cvp_exclude_exact_matches_oracle(radius):
    P = [[Scalar(1), sqrt(5), sqrt(7)]]
    got = approx_cvp(P, [0], radius=radius, exclude_exact=True)
    v, d2 = oracle_cvp(P, [Scalar(0)], radius, exclude_exact=True)
    assert got.v == v


def test_cvp_large_radius_is_accurate():
    res = approx_cvp(P1, [Fraction(1, 3)], radius=10**12)
    assert float(res.distance) < 1e-9
    assert all(abs(x) <= 10**12 for x in res.v)


def test_short_parity_vector_documented():
    pv = short_parity_vector(P1, Fraction(1, 5))
    assert pv.v == [10, -7]
    assert abs(float(pv.norm) - 0.1005) < 1e-4
    assert pv.seed == [5, -3]


def test_short_parity_vector_delta_two_self_check():
    pv = short_parity_vector(P1, 2)
    v = pv.v
    assert v[-1] % 4 == 1 and all(x % 2 == 0 for x in v[:-1]) and math.gcd(*v) == 1
    assert 0 < float(pv.norm) < 2


def _check_parity_vector(P, pv, delta):
    v = pv.v
    assert v[-1] % 4 == 1 and all(x % 2 == 0 for x in v[:-1])
    assert math.gcd(*v) == 1
    pvec = [sum((row[j] * v[j] for j in range(len(v))), Scalar(0)) for row in P]
    n2 = sum((x * x for x in pvec), Scalar(0))
    assert not n2.is_zero() and n2 < Scalar(delta) ** 2


def test_short_parity_vector_halving():
    delta = Fraction(1, 2)
    for _ in range(25):
        pv = short_parity_vector(P1, delta)
        _check_parity_vector(P1, pv, delta)
        delta /= 2


def test_short_parity_vector_2d():
    for k in range(1, 6):
        delta = Fraction(1, 10**k)
        _check_parity_vector(P2, short_parity_vector(P2, delta), delta)


def test_short_parity_vector_not_dense_exhausts():
    with pytest.raises(EffortExhausted):
        short_parity_vector([[Scalar(1), Scalar(Fraction(1, 2))]], Fraction(1, 10),
                            Effort(max_radius=1 << 12))


def test_validate_instance_cases():
    assert not validate_instance([[1]])
    assert "n=1" in validate_instance([[1]]).reason
    assert validate_instance(P2)
    line = validate_instance([[1, 2, sqrt(2)], [2, 4, 2 * sqrt(2)]])
    assert not line and "span" in line.reason


def test_density_rational_row():
    v = density_certificate([[Fraction(1, 2), Fraction(1, 3)]])
    assert v.kind == "not_dense"
    assert v.w == [6] and v.wTP == [3, 2]
    assert v.check([[Fraction(1, 2), Fraction(1, 3)]])


def test_density_dense_instances():
    for P in (P1, P2):
        v = density_certificate(P)
        assert v.kind == "dense"
        assert len(v.evidence) == 6 * len(P)
        assert all(float(ev["distance"]) <= 1e-3 for ev in v.evidence)
        assert v.check(P)
        assert v.w is None


def test_density_hidden_dual():
    # columns (1, 0), (0, 1), (sqrt2, sqrt2): w = (1, -1) gives w^T P = (1, -1, 0)
    P = [[Scalar(1), Scalar(0), sqrt(2)], [Scalar(0), Scalar(1), sqrt(2)]]
    v = density_certificate(P)
    assert v.kind == "not_dense" and v.check(P)
    assert all(x.is_rational() and x.as_fraction().denominator == 1 for x in v.wTP)


def test_density_surd_dual():
    # sqrt2 * (1, sqrt2) = (sqrt2, 2)... w = sqrt2 makes w^T P rational only for (sqrt2, 2)
    P = [[sqrt(2), Scalar(2) * sqrt(2), sqrt(8)]]
    v = density_certificate(P)
    assert v.kind == "not_dense" and v.check(P)


def test_density_observation_n_le_d():
    P = [[Scalar(1), sqrt(2)], [sqrt(3), Scalar(5)]]
    v = density_certificate(P)
    assert v.kind == "not_dense" and v.check(P)


def test_density_unknown_when_effort_is_tiny():
    # entries leave the surd field, so only probes can answer
    P = [[Scalar(1), sqrt(2 + sqrt(2))]]
    v = density_certificate(P, Effort(max_radius=4), tol=Fraction(1, 10**6))
    assert v.kind == "unknown"
    assert v.w is None


@given(st.lists(st.fractions(min_value=-20, max_value=20, max_denominator=30), min_size=4, max_size=8),
       st.integers(1, 2))
def test_density_rational_always_not_dense(entries, d):
    n = len(entries) // d
    P = [entries[r * n:(r + 1) * n] for r in range(d)]
    if n == 0:
        return
    v = density_certificate(P)
    assert v.kind == "not_dense"
    assert any(x != 0 for x in v.w)
    assert all(x.is_rational() and x.as_fraction().denominator == 1 for x in v.wTP)
    assert v.check(P)
