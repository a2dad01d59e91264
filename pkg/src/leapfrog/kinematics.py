"""Legal moves: compile matrices into jumps, replay them exactly, check the result.

A move ``Move(i, j)`` sends particle ``i`` to ``2 p_j - p_i``.  Replay never
touches real numbers: every position stays of the form ``p_0 + sum_k c_k
(p_k - p_0)`` for the *initial* positions, and a jump only updates the
integer coefficient vector ``c``.  Exact positions are formed once at the end.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from . import goodmat as gm
from .goodmat import Elementary, Step
from .scalar import Scalar, as_scalar, eval_interval, sqrt


@dataclass(frozen=True)
class Move:
    jumper: int
    over: int

    def __post_init__(self):
        if self.jumper == self.over:
            raise ValueError("a particle cannot jump over itself")
        if self.jumper < 0 or self.over < 0:
            raise ValueError("particle indices are non-negative")


class Configuration:
    """Absolute positions of particles ``0..n``; each position is a d-vector of Scalars."""

    __slots__ = ("positions",)

    def __init__(self, positions: Iterable):
        pts = []
        for p in positions:
            if isinstance(p, (list, tuple)):
                pts.append(tuple(as_scalar(x) for x in p))
            else:
                pts.append((as_scalar(p),))
        if len(pts) < 1:
            raise ValueError("a configuration needs at least one particle")
        d = len(pts[0])
        if any(len(p) != d for p in pts):
            raise ValueError("all positions must have the same dimension")
        self.positions = tuple(pts)

    @property
    def n(self) -> int:
        return len(self.positions) - 1

    @property
    def d(self) -> int:
        return len(self.positions[0])

    @classmethod
    def from_matrix(cls, P, p0=None) -> "Configuration":
        """Particle 0 at ``p0`` (origin by default), particle ``i`` at ``p0 + P[:, i-1]``."""
        d, n = len(P), len(P[0])
        base = [Scalar(0)] * d if p0 is None else [as_scalar(x) for x in p0]
        pts = [tuple(base)]
        for j in range(n):
            pts.append(tuple(base[r] + as_scalar(P[r][j]) for r in range(d)))
        return cls(pts)

    def difference_matrix(self) -> list:
        p0 = self.positions[0]
        return [[p[r] - p0[r] for p in self.positions[1:]] for r in range(self.d)]

    def __eq__(self, other) -> bool:
        return isinstance(other, Configuration) and self.positions == other.positions

    def __hash__(self):
        return hash(self.positions)

    def __repr__(self) -> str:
        return "Configuration(%s)" % [[x.to_expr() for x in p] for p in self.positions]

    def as_ints(self) -> tuple:
        out = []
        for p in self.positions:
            row = []
            for x in p:
                if not (x.is_rational() and x.as_fraction().denominator == 1):
                    raise ValueError("configuration is not integral")
                row.append(int(x.as_fraction()))
            out.append(tuple(row))
        return tuple(out)


def _check_move(m: Move, n: int) -> None:
    if m.jumper > n or m.over > n:
        raise IndexError(f"move {m} refers to a particle beyond {n}")


def apply_move(c: Configuration, m: Move) -> Configuration:
    _check_move(m, c.n)
    pts = list(c.positions)
    pj, pi = pts[m.over], pts[m.jumper]
    pts[m.jumper] = tuple(2 * a - b for a, b in zip(pj, pi))
    return Configuration(pts)


# --------------------------------------------------------------------------
# compilation


def elementary_move(e: Elementary) -> Move:
    return Move(e.i, e.j)


def compile_stationary(steps: Iterable[Step]) -> list:
    """Jumps realising a product of steps; particle 0 never moves."""
    moves = []
    for s in steps:
        for e in gm.step_to_elementary(s):
            moves.append(elementary_move(e))
    return moves


def translation_gadget(c: Configuration | int, j: int, k: int) -> list:
    """Jumps translating every particle by ``2 k (p_j - p_0)``.

    One repetition: 0 over j, j over 0, then each other particle over 0 and
    over j.  Negative ``k`` replays the forward list backwards, which undoes
    it because every jump is its own inverse while its pivot stays put.
    """
    n = c if isinstance(c, int) else c.n
    if n < 1 or not 1 <= j <= n:
        raise ValueError("need 1 <= j <= n")
    once = [Move(0, j), Move(j, 0)]
    for i in range(1, n + 1):
        if i != j:
            once.extend([Move(i, 0), Move(i, j)])
    if k < 0:
        once.reverse()
    return once * abs(k)


@dataclass
class Block:
    """A short move list repeated ``repeat`` times, tagged with its origin."""

    moves: tuple
    repeat: int
    phase: str  # "stationary" or "translation"
    coordinate: int | None = None  # translated coordinate j for gadgets

    def __len__(self) -> int:
        return len(self.moves) * self.repeat


@dataclass
class Plan:
    n: int
    d: int
    initial: Configuration
    blocks: list = field(default_factory=list)
    certificate: object = None
    order: str = "translate-first"

    def __len__(self) -> int:
        return sum(len(b) for b in self.blocks)

    def moves(self) -> Iterator[Move]:
        for b in self.blocks:
            for _ in range(b.repeat):
                yield from b.moves

    def tagged_moves(self) -> Iterator[tuple]:
        """``(move, phase, coordinate, repetition)`` for every move."""
        for b in self.blocks:
            for r in range(b.repeat):
                for m in b.moves:
                    yield m, b.phase, b.coordinate, r

    def phase_summary(self) -> list:
        out, start = [], 0
        for b in self.blocks:
            out.append({"phase": b.phase, "coordinate": b.coordinate, "start": start,
                        "count": len(b), "repeat": b.repeat, "period": len(b.moves)})
            start += len(b)
        return out

    def counts(self) -> dict:
        total = {"stationary": 0, "translation": 0}
        for b in self.blocks:
            total[b.phase] += len(b)
        total["total"] = total["stationary"] + total["translation"]
        return total


def _stationary_blocks(runs: Sequence) -> list:
    out = []
    for s, k in runs:
        moves = tuple(elementary_move(e) for e in gm.step_to_elementary(s))
        out.append(Block(moves, k, "stationary"))
    return out


def _translation_blocks(n: int, w: Sequence[int]) -> list:
    out = []
    for j, k in enumerate(w, start=1):
        if k:
            out.append(Block(tuple(translation_gadget(n, j, 1 if k > 0 else -1)), abs(k), "translation", j))
    return out


def compile_plan(cert, order: str = "translate-first") -> Plan:
    """Move plan for a certificate.

    ``translate-first`` shifts by ``2 P w0`` using the original differences
    and then runs the stationary phase; ``stationary-first`` runs the
    stationary phase and then shifts by ``w'`` with the new differences.
    Both land on the certificate's predicted finals.
    """
    n, d = cert.n, cert.d
    initial = Configuration.from_matrix(cert.P, cert.p0)
    stationary = _stationary_blocks(cert.a0_runs)
    if order == "translate-first":
        blocks = _translation_blocks(n, cert.w0) + stationary
    elif order == "stationary-first":
        blocks = stationary + _translation_blocks(n, cert.w_prime)
    else:
        raise ValueError(f"unknown order {order!r}")
    plan = Plan(n=n, d=d, initial=initial, blocks=blocks, certificate=cert, order=order)
    final = simulate(initial, plan.moves())
    if [list(p) for p in final.positions] != cert.predicted:
        raise ValueError("certificate inconsistent: replay misses the predicted finals")
    return plan


# --------------------------------------------------------------------------
# replay


class _Replay:
    """Coefficient-space state for a configuration."""

    def __init__(self, initial: Configuration):
        self.initial = initial
        n = initial.n
        self.coef = [[0] * n] + [[int(k == i) for k in range(n)] for i in range(n)]

    def step(self, m: Move) -> None:
        n = self.initial.n
        if m.jumper > n or m.over > n:
            raise IndexError(f"move {m} refers to a particle beyond {n}")
        ci, cj = self.coef[m.jumper], self.coef[m.over]
        self.coef[m.jumper] = [2 * b - a for a, b in zip(ci, cj)]

    def configuration(self) -> Configuration:
        pts = self.initial.positions
        p0 = pts[0]
        diffs = [[p[r] - p0[r] for r in range(len(p0))] for p in pts[1:]]
        out = []
        for c in self.coef:
            pos = []
            for r in range(len(p0)):
                acc = p0[r]
                for k, ck in enumerate(c):
                    if ck:
                        acc = acc + ck * diffs[k][r]
                pos.append(acc)
            out.append(tuple(pos))
        return Configuration(out)

    def approx(self, bits: int) -> list:
        pts = self.initial.positions
        p0 = [x.approx(bits) for x in pts[0]]
        diffs = [[x.approx(bits) - p0[r] for r, x in enumerate(p)] for p in pts[1:]]
        return [[p0[r] + sum(ck * diffs[k][r] for k, ck in enumerate(c) if ck) for r in range(len(p0))]
                for c in self.coef]


def simulate(initial: Configuration, moves: Iterable[Move]) -> Configuration:
    """Exact final configuration after ``moves``."""
    st = _Replay(initial)
    for m in moves:
        st.step(m)
    return st.configuration()


def trajectory(initial: Configuration, moves: Iterable[Move]) -> Iterator[Configuration]:
    """Every configuration along the way, starting with ``initial`` (exact; for small plans)."""
    st = _Replay(initial)
    yield st.configuration()
    for m in moves:
        st.step(m)
        yield st.configuration()


# --------------------------------------------------------------------------
# verification


@dataclass
class VerifyReport:
    passed: bool | None  # None: undecided at this precision
    max_deviation: Scalar
    worst_particle: int
    eps: Fraction
    deviation_bounds: tuple  # certified (lo, hi) for the max deviation
    precision: int

    @property
    def gap(self) -> Fraction:
        """How far the deviation's upper bound exceeds eps (negative when inside)."""
        return self.deviation_bounds[1] - self.eps

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "max_deviation": float(self.deviation_bounds[1]),
            "max_deviation_expr": self.max_deviation.to_expr(),
            "worst_particle": self.worst_particle,
            "eps": str(self.eps),
            "precision": self.precision,
        }


def verify(final: Configuration, targets, eps, precision: int = 256) -> VerifyReport:
    """Pass iff every particle lies within ``eps`` of its target (Euclidean).

    The decision is certified with interval arithmetic at ``precision`` bits;
    if the intervals straddle ``eps`` the report says so instead of guessing.
    """
    tgt = targets if isinstance(targets, Configuration) else Configuration(targets)
    if tgt.n != final.n or tgt.d != final.d:
        raise ValueError("final configuration and targets differ in shape")
    eps = as_scalar(eps)
    eps2 = eval_interval(eps * eps, precision)
    worst, worst_i, lo_max, hi_max = Scalar(0), 0, Fraction(0), Fraction(0)
    verdict: bool | None = True
    for i, (p, q) in enumerate(zip(final.positions, tgt.positions)):
        d2 = sum(((a - b) * (a - b) for a, b in zip(p, q)), Scalar(0))
        iv = eval_interval(d2, precision)
        if i == 0 or iv.hi > hi_max:
            worst, worst_i = d2, i
        lo_max, hi_max = max(lo_max, iv.lo), max(hi_max, iv.hi)
        if iv.lo > eps2.hi:
            verdict = False
        elif iv.hi > eps2.lo and verdict is not False:
            verdict = None
    dev = sqrt(worst)
    lo = eval_interval(sqrt(Scalar(lo_max)), precision).lo if lo_max else Fraction(0)
    hi = eval_interval(sqrt(Scalar(hi_max)), precision).hi if hi_max else Fraction(0)
    eps_f = eps.as_fraction() if eps.is_rational() else eval_interval(eps, precision).mid
    return VerifyReport(verdict, dev, worst_i, eps_f, (lo, hi), precision)


# --------------------------------------------------------------------------
# brute-force reachability


class StateSpaceOverflow(RuntimeError):
    def __init__(self, message: str, partial: set):
        super().__init__(message)
        self.partial = partial


def bfs_reachable(c, box, move_cap: int | None = None, max_states: int = 500_000) -> set:
    """All integer configurations reachable from ``c`` without leaving ``box``.

    ``box`` is ``(lo, hi)`` bounding every coordinate; ``move_cap`` limits the
    number of jumps (``None``: no limit).  Configurations are tuples of
    integer tuples.
    """
    start = c.as_ints() if isinstance(c, Configuration) else tuple(
        tuple(p) if isinstance(p, (list, tuple)) else (p,) for p in c)
    lo, hi = box
    n1 = len(start)
    seen = {start}
    frontier = deque([(start, 0)])
    while frontier:
        state, depth = frontier.popleft()
        if move_cap is not None and depth >= move_cap:
            continue
        for i in range(n1):
            for j in range(n1):
                if i == j:
                    continue
                new_p = tuple(2 * b - a for a, b in zip(state[i], state[j]))
                if any(x < lo or x > hi for x in new_p):
                    continue
                nxt = state[:i] + (new_p,) + state[i + 1:]
                if nxt not in seen:
                    seen.add(nxt)
                    if len(seen) > max_states:
                        raise StateSpaceOverflow(f"more than {max_states} states", seen)
                    frontier.append((nxt, depth + 1))
    return seen


# --------------------------------------------------------------------------
# trajectory export


def _fmt(x: Fraction, digits: int) -> str:
    return f"{float(x):.{digits}g}" if digits <= 17 else Scalar(x).to_decimal(digits)


def export_csv(initial: Configuration, moves: Iterable[Move], out, digits: int = 17, stride: int = 1) -> int:
    """Write ``step,particle,x1..xd`` rows; returns the number of steps replayed."""
    st = _Replay(initial)
    bits = int(digits * 3.33) + 16
    d = initial.d
    out.write("step,particle," + ",".join(f"x{r + 1}" for r in range(d)) + "\n")

    def dump(step):
        for i, p in enumerate(st.approx(bits)):
            out.write(f"{step},{i}," + ",".join(_fmt(x, digits) for x in p) + "\n")

    dump(0)
    count = 0
    for count, m in enumerate(moves, start=1):
        st.step(m)
        if count % stride == 0:
            dump(count)
    if count % stride:
        dump(count)
    return count


def export_svg(initial: Configuration, moves: Iterable[Move], out, size: int = 600, stride: int = 1) -> int:
    """One polyline per particle through its positions (2D configurations only)."""
    if initial.d != 2:
        raise ValueError("SVG export needs a 2D configuration")
    st = _Replay(initial)
    paths = [[] for _ in range(initial.n + 1)]

    def record():
        for i, p in enumerate(st.approx(64)):
            paths[i].append((float(p[0]), float(p[1])))

    record()
    count = 0
    for count, m in enumerate(moves, start=1):
        st.step(m)
        if count % stride == 0:
            record()
    if count % stride:
        record()
    xs = [x for path in paths for x, _ in path]
    ys = [y for path in paths for _, y in path]
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    span = max(x1 - x0, y1 - y0) or 1.0
    pad = 10

    def tx(x, y):
        return pad + (x - x0) / span * (size - 2 * pad), size - pad - (y - y0) / span * (size - 2 * pad)

    colours = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2"]
    out.write(f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}">\n')
    for i, path in enumerate(paths):
        pts = " ".join("%.3f,%.3f" % tx(x, y) for x, y in path)
        colour = colours[i % len(colours)]
        out.write(f'  <polyline fill="none" stroke="{colour}" stroke-width="1" points="{pts}"/>\n')
        cx, cy = tx(*path[-1])
        out.write(f'  <circle cx="{cx:.3f}" cy="{cy:.3f}" r="3" fill="{colour}"/>\n')
    out.write("</svg>\n")
    return count
