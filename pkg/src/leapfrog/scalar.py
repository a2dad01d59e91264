"""Exact real scalars over quadratic surds, with directed interval evaluation.

Every number the expression grammar can denote lives in a multiquadratic
field Q(sqrt(p1), ..., sqrt(pk)).  Such values are kept in an exact normal
form: a finite sum of ``c * sqrt(m)`` with rational ``c`` and squarefree
``m``.  Sums, products and quotients stay in normal form, so zero tests and
sign tests on them are exact.

Square roots of values that are not rational (Euclidean norms, mostly)
leave the field.  Those become expression-tree nodes evaluated by outward
rounded interval arithmetic; tests on them are decided by refinement and
fail loudly with :class:`PrecisionExhausted` rather than guessing.
"""
from __future__ import annotations

import ast
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence, Union

Number = Union[int, Fraction, "Scalar"]

DEFAULT_PRECISION = 128
MAX_REFINE_BITS = 1 << 15
_FACTOR_LIMIT = 10**12


class PrecisionExhausted(ArithmeticError):
    """An interval still straddles the decision point at maximum effort."""


class ScalarSyntaxError(ValueError):
    pass


# --------------------------------------------------------------------------
# intervals


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, x) -> bool:
        return self.lo <= x <= self.hi

    def excludes_zero(self) -> bool:
        return self.lo > 0 or self.hi < 0

    def mag(self) -> Fraction:
        return max(abs(self.lo), abs(self.hi))

    def mig(self) -> Fraction:
        if self.lo <= 0 <= self.hi:
            return Fraction(0)
        return min(abs(self.lo), abs(self.hi))

    def __add__(self, other: Interval) -> Interval:
        return Interval(self.lo + other.lo, self.hi + other.hi)

    def __sub__(self, other: Interval) -> Interval:
        return Interval(self.lo - other.hi, self.hi - other.lo)

    def __neg__(self) -> Interval:
        return Interval(-self.hi, -self.lo)

    def __mul__(self, other: Interval) -> Interval:
        ps = (self.lo * other.lo, self.lo * other.hi,
              self.hi * other.lo, self.hi * other.hi)
        return Interval(min(ps), max(ps))

    def __truediv__(self, other: Interval) -> Interval:
        if not other.excludes_zero():
            raise _Straddle()
        return self * Interval(1 / other.hi, 1 / other.lo)


class _Straddle(Exception):
    pass


def _floor_dyadic(x: Fraction, bits: int) -> Fraction:
    return Fraction(math.floor(x * (1 << bits)), 1 << bits)


def _ceil_dyadic(x: Fraction, bits: int) -> Fraction:
    return Fraction(math.ceil(x * (1 << bits)), 1 << bits)


def _outward(iv: Interval, bits: int) -> Interval:
    return Interval(_floor_dyadic(iv.lo, bits), _ceil_dyadic(iv.hi, bits))


def _sqrt_interval(iv: Interval, bits: int) -> Interval:
    lo = max(iv.lo, Fraction(0))
    if iv.hi < 0:
        raise ValueError("square root of a negative value")
    scale = 1 << (2 * bits)
    lo_n = math.isqrt(math.floor(lo * scale))
    hi_n = math.isqrt(math.ceil(iv.hi * scale))
    if hi_n * hi_n < iv.hi * scale:
        hi_n += 1
    return Interval(Fraction(lo_n, 1 << bits), Fraction(hi_n, 1 << bits))


# --------------------------------------------------------------------------
# squarefree bookkeeping


@lru_cache(maxsize=4096)
def _factor(k: int) -> tuple:
    out = []
    p = 2
    while p * p <= k:
        while k % p == 0:
            out.append(p)
            k //= p
        p += 1 if p == 2 else 2
    if k > 1:
        out.append(k)
    return tuple(out)


def _split_square(k: int) -> tuple[int, int]:
    """Return (s, m) with k == s*s*m and m squarefree."""
    s, m = 1, 1
    counts: dict[int, int] = {}
    for p in _factor(k):
        counts[p] = counts.get(p, 0) + 1
    for p, e in counts.items():
        s *= p ** (e // 2)
        if e % 2:
            m *= p
    return s, m


def _mul_radicands(a: int, b: int) -> tuple[int, int]:
    g = math.gcd(a, b)
    return g, (a // g) * (b // g)


# --------------------------------------------------------------------------
# Scalar


class Scalar:
    """Immutable exact real.

    ``_terms`` holds the surd normal form ``((m, c), ...)`` sorted by radicand,
    or is ``None`` for a tree node, in which case ``_node`` is ``(op, args)``.
    """

    __slots__ = ("_terms", "_node")

    def __init__(self, value: Number = 0):
        if isinstance(value, Scalar):
            self._terms, self._node = value._terms, value._node
            return
        if isinstance(value, bool) or not isinstance(value, (int, Fraction)):
            raise TypeError(f"cannot make a Scalar from {type(value).__name__}")
        q = Fraction(value)
        self._terms = ((1, q),) if q else ()
        self._node = None

    @classmethod
    def _from_terms(cls, terms: dict) -> Scalar:
        s = cls.__new__(cls)
        s._terms = tuple(sorted((m, c) for m, c in terms.items() if c))
        s._node = None
        return s

    @classmethod
    def _tree(cls, op: str, *args: Scalar) -> Scalar:
        s = cls.__new__(cls)
        s._terms = None
        s._node = (op, args)
        return s

    @classmethod
    def sqrt_int(cls, k: int) -> Scalar:
        if k <= 0:
            raise ValueError("sqrt of a non-positive integer")
        if k > _FACTOR_LIMIT:
            r = math.isqrt(k)
            if r * r == k:
                return cls(r)
            return cls._tree("sqrt", cls(k))
        s, m = _split_square(k)
        return cls._from_terms({m: Fraction(s)})

    # -- structure ---------------------------------------------------------

    @property
    def is_exact(self) -> bool:
        """True when the value is held in surd normal form."""
        return self._terms is not None

    @property
    def terms(self) -> dict:
        if self._terms is None:
            raise ValueError("tree scalar has no surd normal form")
        return dict(self._terms)

    def is_rational(self) -> bool:
        return self._terms is not None and all(m == 1 for m, _ in self._terms)

    def as_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self._terms[0][1] if self._terms else Fraction(0)

    def radicand_primes(self) -> set:
        out = set()
        for m, _ in self.terms.items():
            out.update(_factor(m) if m <= _FACTOR_LIMIT else (m,))
        return out

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other: Number) -> Scalar:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self._terms is not None and other._terms is not None:
            acc = dict(self._terms)
            for m, c in other._terms:
                acc[m] = acc.get(m, 0) + c
            return Scalar._from_terms(acc)
        return Scalar._tree("add", self, other)

    __radd__ = __add__

    def __neg__(self) -> Scalar:
        if self._terms is not None:
            return Scalar._from_terms({m: -c for m, c in self._terms})
        return Scalar._tree("neg", self)

    def __pos__(self) -> Scalar:
        return self

    def __sub__(self, other: Number) -> Scalar:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other: Number) -> Scalar:
        return _coerce(other) - self

    def __mul__(self, other: Number) -> Scalar:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self._terms is not None and other._terms is not None:
            acc: dict[int, Fraction] = {}
            for m1, c1 in self._terms:
                for m2, c2 in other._terms:
                    g, m = _mul_radicands(m1, m2)
                    acc[m] = acc.get(m, 0) + g * c1 * c2
            return Scalar._from_terms(acc)
        if self._node is not None and other._node is not None and self._node[0] == other._node[0] == "sqrt":
            a, b = self._node[1][0], other._node[1][0]
            if a is b or (a._terms is not None and b._terms is not None and a._terms == b._terms):
                return a
        return Scalar._tree("mul", self, other)

    __rmul__ = __mul__

    def __truediv__(self, other: Number) -> Scalar:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other._terms is not None:
            return self * other.inverse()
        return Scalar._tree("div", self, other)

    def __rtruediv__(self, other: Number) -> Scalar:
        return _coerce(other) / self

    def inverse(self) -> Scalar:
        if self._terms is None:
            return Scalar._tree("div", Scalar(1), self)
        if not self._terms:
            raise ZeroDivisionError("division by exact zero")
        if self.is_rational():
            return Scalar(1 / self._terms[0][1])
        # multiply by Galois conjugates until the value is rational
        num, cur = Scalar(1), self
        for p in sorted(self.radicand_primes()):
            conj = Scalar._from_terms(
                {m: (-c if m % p == 0 else c) for m, c in cur._terms})
            num, cur = num * conj, cur * conj
        return num * Scalar(1 / cur.as_fraction())

    def __pow__(self, k: int) -> Scalar:
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        out, base = Scalar(1), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __abs__(self) -> Scalar:
        return -self if self.sign() < 0 else self

    # -- ordering ----------------------------------------------------------

    def sign(self) -> int:
        """Exact sign for normal-form values; refined sign for trees."""
        if self._terms is not None:
            if not self._terms:
                return 0
            if self.is_rational():
                return 1 if self._terms[0][1] > 0 else -1
        bits = 64
        while bits <= MAX_REFINE_BITS:
            iv = self._raw_interval(bits)
            if iv.lo > 0:
                return 1
            if iv.hi < 0:
                return -1
            bits *= 2
        raise PrecisionExhausted(f"cannot decide the sign of {self}")

    def is_zero(self) -> bool:
        if self._terms is not None:
            return not self._terms
        return self.sign() == 0

    def __eq__(self, other) -> bool:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return (self - other).sign() == 0

    def __hash__(self) -> int:
        if self._terms is None:
            raise TypeError("tree scalars are unhashable")
        if self.is_rational():
            return hash(self.as_fraction())
        return hash(self._terms)

    def __lt__(self, other: Number) -> bool:
        return (self - _coerce(other)).sign() < 0

    def __le__(self, other: Number) -> bool:
        return (self - _coerce(other)).sign() <= 0

    def __gt__(self, other: Number) -> bool:
        return (self - _coerce(other)).sign() > 0

    def __ge__(self, other: Number) -> bool:
        return (self - _coerce(other)).sign() >= 0

    def __bool__(self) -> bool:
        return not self.is_zero()

    # -- evaluation --------------------------------------------------------

    def _raw_interval(self, bits: int) -> Interval:
        """Enclosure of the value; leaves accurate to about 2**-bits."""
        if self._terms is not None:
            return _nf_interval(self._terms, bits)
        op, args = self._node
        if op == "sqrt":
            return _sqrt_interval(args[0]._raw_interval(2 * bits + 4), bits)
        if op == "neg":
            return -args[0]._raw_interval(bits)
        a = args[0]._raw_interval(bits)
        b = args[1]._raw_interval(bits)
        if op == "add":
            r = a + b
        elif op == "mul":
            r = a * b
        else:
            r = a / b
        return _outward(r, bits + 8)

    def approx(self, bits: int) -> Fraction:
        """Dyadic rational within 2**-bits of the value."""
        if self.is_rational():
            return self.as_fraction()
        iv = eval_interval(self, bits + 2)
        return _floor_dyadic(iv.mid, bits + 2)

    def __float__(self) -> float:
        return float(self.approx(60))

    def to_decimal(self, digits: int = 20) -> str:
        bits = int(digits * 3.33) + 8
        x = self.approx(bits)
        scaled = round(x * 10**digits)
        sign = "-" if scaled < 0 else ""
        scaled = abs(scaled)
        whole, frac = divmod(scaled, 10**digits)
        frac_s = str(frac).rjust(digits, "0").rstrip("0")
        return f"{sign}{whole}" + (f".{frac_s}" if frac_s else "")

    # -- printing ----------------------------------------------------------

    def to_expr(self) -> str:
        """Render in the parseable expression grammar."""
        if self._terms is not None:
            if not self._terms:
                return "0"
            parts = []
            for m, c in self._terms:
                mag = abs(c)
                if m == 1:
                    body = _fmt_q(mag)
                elif mag == 1:
                    body = f"sqrt({m})"
                else:
                    body = f"{_fmt_q(mag)}*sqrt({m})"
                parts.append(("-" if c < 0 else "+", body))
            head_sign, head = parts[0]
            out = ("-" if head_sign == "-" else "") + head
            for s, body in parts[1:]:
                out += f" {s} {body}"
            return out
        op, args = self._node
        if op == "sqrt":
            return f"sqrt({args[0].to_expr()})"
        if op == "neg":
            return f"-({args[0].to_expr()})"
        sym = {"add": "+", "mul": "*", "div": "/"}[op]
        return f"({args[0].to_expr()}) {sym} ({args[1].to_expr()})"

    def __str__(self) -> str:
        return self.to_expr()

    def __repr__(self) -> str:
        return f"Scalar({self.to_expr()!r})"


def _fmt_q(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _coerce(x) -> Scalar:
    if isinstance(x, Scalar):
        return x
    if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
        return Scalar(x)
    return NotImplemented


def _nf_interval(terms: tuple, bits: int) -> Interval:
    if not terms:
        return Interval(Fraction(0), Fraction(0))
    weight = sum(abs(c) for m, c in terms if m != 1)
    b = bits + max(0, math.ceil(math.log2(weight + 1))) + 1 if weight else bits
    lo = hi = Fraction(0)
    one = 1 << b
    for m, c in terms:
        if m == 1:
            lo += c
            hi += c
            continue
        s = math.isqrt(m << (2 * b))
        r_lo, r_hi = Fraction(s, one), Fraction(s + 1, one)
        if c > 0:
            lo += c * r_lo
            hi += c * r_hi
        else:
            lo += c * r_hi
            hi += c * r_lo
    return Interval(lo, hi)


def as_scalar(x) -> Scalar:
    s = _coerce(x)
    if s is NotImplemented:
        if isinstance(x, str):
            return parse_scalar(x)
        raise TypeError(f"cannot interpret {x!r} as a Scalar")
    return s


def sqrt(x: Number) -> Scalar:
    """Square root of a non-negative scalar."""
    x = as_scalar(x)
    if x.is_rational():
        q = x.as_fraction()
        if q < 0:
            raise ValueError("square root of a negative value")
        if q == 0:
            return Scalar(0)
        a, b = q.numerator, q.denominator
        ra, rb = math.isqrt(a), math.isqrt(b)
        if ra * ra == a and rb * rb == b:
            return Scalar(Fraction(ra, rb))
        return Scalar.sqrt_int(a * b) / b
    if x.sign() < 0:
        raise ValueError("square root of a negative value")
    return Scalar._tree("sqrt", x)


def eval_interval(s: Number, precision: int = DEFAULT_PRECISION) -> Interval:
    """Enclose ``s`` in ``[lo, hi]`` with hi - lo <= 2**(1-precision) * max(1, |s|)."""
    if precision < 16:
        raise ValueError("precision must be at least 16 bits")
    s = as_scalar(s)
    if s.is_rational():
        q = s.as_fraction()
        return Interval(q, q)
    if s.is_exact:
        return _nf_interval(s._terms, precision)
    guard = 16
    while True:
        try:
            iv = s._raw_interval(precision + guard)
        except _Straddle:
            iv = None
        if iv is not None:
            if iv.width <= Fraction(2, 1 << precision) * max(Fraction(1), iv.mig()):
                return iv
        guard *= 2
        if precision + guard > MAX_REFINE_BITS:
            raise PrecisionExhausted(f"cannot evaluate {s} to {precision} bits")


# --------------------------------------------------------------------------
# parsing


def parse_scalar(text: str) -> Scalar:
    """Parse an expression such as ``"10 - 7*sqrt(2)"`` or ``"-3/4"``.

    Accepted: integers, decimal literals (read exactly), ``sqrt(...)``,
    unary minus and ``+ - * /`` with parentheses.
    """
    if not isinstance(text, str):
        raise TypeError("expression must be a string")
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ScalarSyntaxError(f"bad expression {text!r}: {exc.msg}") from None
    return _walk(tree.body, text.strip())


def _walk(node, src: str) -> Scalar:
    if isinstance(node, ast.Constant):
        if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
            raise ScalarSyntaxError(f"unexpected literal in {src!r}")
        if isinstance(node.value, int):
            return Scalar(node.value)
        literal = ast.get_source_segment(src, node)
        return Scalar(Fraction(literal))
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        inner = _walk(node.operand, src)
        return -inner if isinstance(node.op, ast.USub) else inner
    if isinstance(node, ast.BinOp) and isinstance(node.op, (ast.Add, ast.Sub, ast.Mult, ast.Div)):
        a, b = _walk(node.left, src), _walk(node.right, src)
        if isinstance(node.op, ast.Add):
            return a + b
        if isinstance(node.op, ast.Sub):
            return a - b
        if isinstance(node.op, ast.Mult):
            return a * b
        if b.is_exact and b.is_zero():
            raise ZeroDivisionError(f"division by exact zero in {src!r}")
        return a / b
    if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
            and node.func.id == "sqrt" and len(node.args) == 1 and not node.keywords):
        arg = _walk(node.args[0], src)
        if arg.is_rational() and arg.as_fraction() <= 0:
            raise ValueError(f"sqrt of a non-positive value in {src!r}")
        return sqrt(arg)
    raise ScalarSyntaxError(f"unsupported syntax in {src!r}")


# --------------------------------------------------------------------------
# vectors and the Householder map


def norm(x: Sequence[Number]) -> Scalar:
    return sqrt(sum((as_scalar(a) * a for a in x), Scalar(0)))


def dot(x: Iterable[Number], y: Iterable[Number]) -> Scalar:
    return sum((as_scalar(a) * b for a, b in zip(x, y)), Scalar(0))


@dataclass(frozen=True)
class Reflection:
    """Householder map ``v -> v - 2 (u.v / u.u) u``; identity when ``normal`` is None.

    ``normal`` is kept unnormalised so that it stays exact whenever the
    reflected vector's norm is.
    """

    dim: int
    normal: tuple | None

    @property
    def unit_normal(self) -> tuple | None:
        if self.normal is None:
            return None
        n = norm(self.normal)
        return tuple(u / n for u in self.normal)

    def apply(self, x: Sequence[Number]) -> list:
        x = [as_scalar(a) for a in x]
        if self.normal is None:
            return x
        uu = dot(self.normal, self.normal)
        k = 2 * dot(self.normal, x) / uu
        return [a - k * u for a, u in zip(x, self.normal)]

    def matrix(self) -> list:
        return [list(col) for col in zip(*(self.apply(e) for e in _basis(self.dim)))]

    def rational_matrix(self, bits: int) -> list:
        """Exactly orthogonal rational matrix close to this reflection.

        Any rational normal gives an exactly orthogonal rational reflection,
        so only the alignment with the last axis is approximate.
        """
        if self.normal is None:
            return [[Fraction(int(i == j)) for j in range(self.dim)] for i in range(self.dim)]
        u = [a.approx(bits) for a in self.normal]
        uu = sum(a * a for a in u)
        return [[Fraction(int(i == j)) - 2 * u[i] * u[j] / uu for j in range(self.dim)]
                for i in range(self.dim)]


def _basis(d: int):
    for i in range(d):
        yield [Scalar(int(i == j)) for j in range(d)]


def householder_to_last_axis(x: Sequence[Number], precision: int = DEFAULT_PRECISION):
    """Reflection ``O`` with ``O x = eps * f_d`` and ``eps = |x| > 0``.

    Returns ``(reflection, eps)``.  A vector already pointing along ``+f_d``
    gets the identity.
    """
    x = [as_scalar(a) for a in x]
    if not x:
        raise ValueError("empty vector")
    nonzero = False
    for a in x:
        if a.is_exact:
            if not a.is_zero():
                nonzero = True
                break
        elif eval_interval(a, precision).excludes_zero():
            nonzero = True
            break
    if not nonzero:
        raise PrecisionExhausted("vector is indistinguishable from 0")
    if all(a.is_exact and a.is_zero() for a in x[:-1]) and x[-1].sign() > 0:
        return Reflection(len(x), None), x[-1]
    eps = norm(x)
    u = list(x)
    u[-1] = u[-1] - eps
    return Reflection(len(x), tuple(u)), eps
