"""Acceptance gate: one pass/fail line per criterion, at the stated counts and budgets.

Run ``pytest tests/test_acceptance.py -v`` (the lines are repeated in the
terminal summary) or ``python tests/test_acceptance.py`` for the lines alone.
"""
import json
import math
import random
import time
from fractions import Fraction

from leapfrog import goodmat as gm
from leapfrog.cli import main as cli_main
from leapfrog.goodmat import Step
from leapfrog.kinematics import (
    Configuration,
    bfs_reachable,
    compile_plan,
    simulate,
    trajectory,
    translation_gadget,
)
from leapfrog.lattice import brute_force_cvp, density_certificate, short_parity_vector
from leapfrog.planner import PlanCertificate, approx_good, predicted_finals, sup_error
from leapfrog.scalar import Scalar, eval_interval, sqrt

SEED = 20240601
P1 = [[Scalar(1), sqrt(2)]]
P2 = [[Scalar(1), Scalar(0), sqrt(2)], [Scalar(0), Scalar(1), sqrt(3)]]

RESULTS: list = []


def report(number, title, ok, detail, seconds, budget):
    within = seconds < budget
    status = "PASS" if ok and within else "FAIL"
    line = f"criterion {number} [{status}] {title}: {detail}; {seconds:.2f}s (limit {budget}s)"
    RESULTS.append(line)
    print(line)
    return ok and within


def random_steps(rng, n, length):
    out = []
    for _ in range(length):
        i, j = rng.sample(range(1, n + 1), 2)
        out.append(Step(n, i, j, rng.choice((2, -2))))
    return out


def step_products(seed=SEED, count=1000):
    rng = random.Random(seed)
    mats = []
    for _ in range(count):
        n = rng.randint(2, 6)
        mats.append((n, gm.product(random_steps(rng, n, rng.randint(0, 30)), n)))
    return mats


def _violator(rng, kind):
    """Integer matrix failing exactly one of: det 1, even off-diagonal, diagonal 1 mod 4."""
    while True:
        n = rng.randint(2, 6)
        m = gm.product(random_steps(rng, n, rng.randint(0, 12)), n)
        if kind == "det":
            k = rng.randrange(n)
            m[k][k] += 4 * rng.choice((1, -1, 2))
        elif kind == "parity":
            i, j = rng.sample(range(n), 2)
            for row in m:  # m <- m (I + e_i e_j^T): det stays 1, entry (j, j) picks up m[j][i]
                row[j] += row[i]
        else:
            i, j = rng.sample(range(n), 2)
            for row in m:
                row[i], row[j] = -row[i], -row[j]
        det_ok = gm.det(m) == 1
        off_ok = all(m[a][b] % 2 == 0 for a in range(n) for b in range(n) if a != b)
        diag_ok = all(m[a][a] % 4 == 1 for a in range(n))
        failing = [not det_ok, not off_ok, not diag_ok]
        if sum(failing) == 1 and failing[("det", "parity", "diag").index(kind)]:
            return m


def criterion_1():
    t = time.perf_counter()
    mats = step_products()
    good_ok = all(gm.is_good(m) for _, m in mats)
    rng = random.Random(SEED + 1)
    kinds = ("det", "parity", "diag")
    bad = [_violator(rng, kinds[k % 3]) for k in range(1000)]
    bad_ok = not any(gm.is_good(m) for m in bad)
    dt = time.perf_counter() - t
    return report(1, "good-matrix characterization", good_ok and bad_ok,
                  f"1000/1000 products good={good_ok}, 1000 single violations rejected={bad_ok}", dt, 5)


def criterion_2():
    mats = step_products()
    t = time.perf_counter()
    ok = all(gm.product(gm.factor_good(m), n) == m for n, m in mats)
    dt = time.perf_counter() - t
    return report(2, "factorization round-trip", ok, "product(factor_good(M)) == M for 1000 products", dt, 30)


def criterion_3():
    rng = random.Random(SEED + 3)
    t = time.perf_counter()
    ok = True
    for _ in range(1000):
        n = rng.randint(1, 8)
        v = [rng.randint(-10**6, 10**6) for _ in range(n)]
        if not any(v):
            v[0] = 1
        g = math.gcd(*v)
        runs, r = gm.reduce_vector_runs(v)
        w = list(v)
        for s, k in runs:
            a = s.value * w[s.col - 1]
            b = s.row - 1
            # norm after j repetitions is convex in j, so checking the last repetition covers the run
            before_last = w[b] + (k - 1) * a
            if (before_last + a) ** 2 >= before_last ** 2:
                ok = False
            w[b] += k * a
        ok = ok and w == r and set(abs(x) for x in r) <= {0, g}
    dt = time.perf_counter() - t
    return report(3, "vector reduction", ok, "1000 vectors: entries in {0, +-gcd}, norm drops every step", dt, 5)


def criterion_4():
    rng = random.Random(SEED + 4)
    t = time.perf_counter()
    ok = True
    for _ in range(500):
        d = rng.randint(1, 3)
        n = rng.randint(d, 6)
        y = [[(2 * rng.randint(-50, 49) + 1) if i == j else
              (2 * rng.randint(-50, 50) if i > j else rng.randint(-100, 100)) for j in range(d)]
             for i in range(n)]
        a0, _ = gm.triangularize(y)
        out = gm.matmul(a0, y)
        ok = ok and gm.is_good(a0) and all(out[i][j] == 0 for i in range(n) for j in range(d) if i > j)
    dt = time.perf_counter() - t
    return report(4, "triangularization", ok, "500 parity-valid matrices cleared below the diagonal", dt, 10)


def criterion_5():
    rng = random.Random(SEED + 5)
    cases = [(P1, Fraction(1, 100)), (P1, Fraction(1, 10**4)), (P2, Fraction(1, 100))]
    ok, worst_t, count, worst_ratio = True, 0.0, 0, 0.0
    total = time.perf_counter()
    for P, tol in cases:
        for _ in range(20):
            X = [[Scalar(Fraction(rng.randint(-10000, 10000), 1000)) for _ in P[0]] for _ in P]
            t = time.perf_counter()
            res = approx_good(P, X, tol)
            err = sup_error(P, res.A, X)
            hi = eval_interval(err, 256).hi
            dt = time.perf_counter() - t
            worst_t = max(worst_t, dt)
            worst_ratio = max(worst_ratio, float(hi / tol))
            ok = ok and gm.is_good(res.A) and hi <= tol and dt < 10
            count += 1
    total = time.perf_counter() - total
    return report(5, "matrix approximation end-to-end", ok,
                  f"{count} cases good A with 256-bit sup-error <= tol (worst error/tol {worst_ratio:.3f}, "
                  f"slowest case {worst_t:.2f}s, total {total:.1f}s)", worst_t, 10)


def criterion_6(tmp_dir):
    rng = random.Random(SEED + 6)
    ok, worst_t, worst_dev, moves = True, 0.0, 0.0, []
    for k in range(10):
        targets = [str(Fraction(rng.randint(-5000, 5000), 1000)) for _ in range(3)]
        inst = tmp_dir / f"inst{k}.json"
        inst.write_text(json.dumps({"positions": ["0", "1", "sqrt(2)"], "targets": targets, "eps": "1/1000"}))
        plan = tmp_dir / f"plan{k}.json"
        t = time.perf_counter()
        code_plan = cli_main(["plan", str(inst), "-o", str(plan)])
        code_sim = cli_main(["simulate", str(plan)])
        dt = time.perf_counter() - t
        data = json.loads(plan.read_text())
        pf_moves = len(data["moves"])
        # replay independently of the CLI and compare with the certificate
        from leapfrog.io import read_plan

        with open(plan) as fh:
            pf = read_plan(fh)
        final = simulate(pf.initial, pf.moves)
        exact = [list(p) for p in final.positions] == pf.certificate.predicted
        devs = [abs(final.positions[i][0] - Scalar(Fraction(targets[i]))) for i in range(3)]
        his = [eval_interval(x, 256).hi for x in devs]
        worst_dev = max(worst_dev, float(max(his)))
        ok = ok and code_plan == 0 and code_sim == 0 and exact and max(his) <= Fraction(1, 1000) and dt < 30
        worst_t = max(worst_t, dt)
        moves.append(pf_moves)
    return report(6, "plan and replay end-to-end", ok,
                  f"10 plans ({min(moves)}-{max(moves)} moves), worst deviation {worst_dev:.2e} <= 1e-3, "
                  f"exact replay equals certificate", worst_t, 30)


def criterion_7():
    rng = random.Random(SEED + 7)
    t = time.perf_counter()
    ok = True
    for _ in range(50):
        d = rng.randint(1, 2)
        n = rng.randint(d + 1, 4)
        P = [[Fraction(rng.randint(-50, 50), rng.randint(1, 12)) for _ in range(n)] for _ in range(d)]
        v = density_certificate(P)
        ok = ok and v.kind == "not_dense" and all(
            x.is_rational() and x.as_fraction().denominator == 1 for x in v.wTP) and v.check(P)
    dense = [density_certificate(P).kind for P in (P1, P2)]
    ok = ok and dense == ["dense", "dense"]
    small = [
        [[Scalar(1)]],
        [[Scalar(1), sqrt(2)], [sqrt(3), Scalar(1)]],
        [[sqrt(2)], [sqrt(3)]],
        [[Scalar(1), sqrt(5), Scalar(2)], [sqrt(2), Scalar(0), Scalar(1)], [Scalar(1), Scalar(1), sqrt(7)]],
    ]
    obs = [density_certificate(P).kind for P in small]
    ok = ok and all(k == "not_dense" for k in obs)
    dt = time.perf_counter() - t
    return report(7, "density certificates", ok,
                  "50 rational NotDense with integral w^T P, both surd instances Dense, n <= d NotDense", dt, 10)


def criterion_8():
    t = time.perf_counter()
    got = bfs_reachable(Configuration([0, 1]), (-20, 20))
    want = {((2 * a,), (2 * a + s,)) for a in range(-10, 11) for s in (1, -1) if -20 <= 2 * a + s <= 20}
    ok = got == want
    # compiled plans on integer instances never leave the brute-force closure
    P = [[Scalar(1), Scalar(3)]]
    rng = random.Random(SEED + 8)
    for _ in range(3):
        steps = random_steps(rng, 2, 2)
        runs = gm.compress(steps)
        A0 = gm.runs_product(runs, 2)
        w_prime = [rng.randint(-1, 1), rng.randint(-1, 1)]
        w0 = gm.matvec(A0, w_prime)
        p0 = [Scalar(0)]
        cert = PlanCertificate(P=P, p0=p0, targets=None, eps=Fraction(1), A0=A0, a0_runs=runs, w0=w0,
                               w_prime=w_prime, predicted=predicted_finals(P, p0, A0, w0), budget={})
        for order in ("translate-first", "stationary-first"):
            plan = compile_plan(cert, order)
            path = [c.as_ints() for c in trajectory(plan.initial, plan.moves())]
            bound = max(abs(x) for c in path for p in c for x in p)
            closure = bfs_reachable(Configuration([0, 1, 3]), (-bound, bound))
            ok = ok and all(c in closure for c in path)
    gadget = simulate(Configuration([0, 1, 5]), translation_gadget(Configuration([0, 1, 5]), 1, 1))
    ok = ok and gadget == Configuration([2, 3, 7])
    dt = time.perf_counter() - t
    return report(8, "oracle equivalence", ok,
                  "(0,1) closure is {(2a, 2a+-1)}, plan paths inside BFS closures, gadget (0,1,5) -> (2,3,7)", dt, 10)


def criterion_9():
    t = time.perf_counter()
    pv = short_parity_vector(P1, Fraction(1, 5))
    v = pv.v
    post = (math.gcd(*v) == 1 and v[-1] % 4 == 1 and all(x % 2 == 0 for x in v[:-1])
            and not pv.norm.is_zero() and pv.norm < Fraction(1, 5))
    seed, _ = brute_force_cvp(P1, [sqrt(2) / 2], 10)
    oracle_v = [2 * seed[0], 2 * seed[1] - 1]
    oracle_norm = abs(oracle_v[0] + oracle_v[1] * sqrt(2))
    ok = post and oracle_v == [10, -7] and abs(float(oracle_norm) - 0.1005) < 1e-4 and v == oracle_v
    dt = time.perf_counter() - t
    return report(9, "short parity vector", ok,
                  f"v={v}, |Pv|={float(pv.norm):.4f} < 0.2; radius-10 oracle gives {oracle_v}", dt, 1)


def test_criterion_1_characterization():
    assert criterion_1()


def test_criterion_2_factor_round_trip():
    assert criterion_2()


def test_criterion_3_vector_reduction():
    assert criterion_3()


def test_criterion_4_triangularization():
    assert criterion_4()


def test_criterion_5_matrix_approximation():
    assert criterion_5()


def test_criterion_6_plan_and_replay(tmp_path, capsys):
    ok = criterion_6(tmp_path)
    capsys.readouterr()  # drop the CLI's JSON chatter, keep the verdict line
    print(RESULTS[-1])
    assert ok


def test_criterion_7_density():
    assert criterion_7()


def test_criterion_8_oracles():
    assert criterion_8()


def test_criterion_9_parity_vector():
    assert criterion_9()


if __name__ == "__main__":
    import contextlib
    import io
    import pathlib
    import tempfile

    with tempfile.TemporaryDirectory() as tmp:
        outcomes = [criterion_1(), criterion_2(), criterion_3(), criterion_4(), criterion_5()]
        with contextlib.redirect_stdout(io.StringIO()):
            outcomes.append(criterion_6(pathlib.Path(tmp)))
        print(RESULTS[-1])
        outcomes += [criterion_7(), criterion_8(), criterion_9()]
    print(f"{sum(outcomes)}/{len(outcomes)} criteria passed")
    raise SystemExit(0 if all(outcomes) else 1)
