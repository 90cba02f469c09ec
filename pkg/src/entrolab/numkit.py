"""Exact rational and certified interval arithmetic.

Everything certified in this package bottoms out here: arbitrary-precision
rationals (`fractions.Fraction`), closed intervals with rational endpoints,
outward dyadic rounding, enclosures of log2 and 2**x, and sign-change root
isolation for iterated quadratic-family expressions evaluated step by step
(never through expanded polynomial coefficients).

All functions are pure; all values are immutable and safe to share between
threads or processes.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Literal, Optional, Union

Rational = Fraction

RationalLike = Union[Fraction, int, str]

_ZERO = Fraction(0)
_ONE = Fraction(1)
_HALF = Fraction(1, 2)


class PrecisionError(ValueError):
    """An enclosure cannot be produced at the requested precision."""


def parse_rational(text: RationalLike) -> Fraction:
    """Parse "p/q", integer, or decimal/scientific text into an exact Fraction.

    Decimal inputs are exact: "3.5" becomes 7/2, never a float.
    """
    if isinstance(text, Fraction):
        return text
    if isinstance(text, float):
        raise TypeError("refusing to convert a float; pass a string or Fraction")
    return Fraction(text)


def format_rational(q: Fraction) -> str:
    """Canonical "p/q" form with positive denominator."""
    return f"{q.numerator}/{q.denominator}"


def _sign(q: Fraction) -> int:
    if q > 0:
        return 1
    if q < 0:
        return -1
    return 0


def floor_log2(q: Fraction) -> int:
    """Largest e with 2**e <= q, for q > 0."""
    if q <= 0:
        raise ValueError("floor_log2 requires a positive argument")
    e = q.numerator.bit_length() - q.denominator.bit_length()
    while Fraction(1) <= q / Fraction(2) ** (e + 1):
        e += 1
    while q < Fraction(2) ** e:
        e -= 1
    return e


def dyadic_floor(q: Fraction, bits: int) -> Fraction:
    """Largest multiple of 2**-bits that is <= q."""
    scaled = q * (1 << bits)
    return Fraction(scaled.numerator // scaled.denominator, 1 << bits)


def dyadic_ceil(q: Fraction, bits: int) -> Fraction:
    """Smallest multiple of 2**-bits that is >= q."""
    scaled = q * (1 << bits)
    return Fraction(-((-scaled.numerator) // scaled.denominator), 1 << bits)


@dataclass(frozen=True)
class RatInterval:
    """Closed interval [lo, hi] with exact rational endpoints."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "lo", parse_rational(self.lo))
        object.__setattr__(self, "hi", parse_rational(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"interval endpoints out of order: {self.lo} > {self.hi}")

    @classmethod
    def point(cls, q: RationalLike) -> "RatInterval":
        q = parse_rational(q)
        return cls(q, q)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def contains(self, q: Fraction) -> bool:
        return self.lo <= q <= self.hi

    def contains_interval(self, other: "RatInterval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def strictly_contains(self, other: "RatInterval") -> bool:
        return self.lo < other.lo and other.hi < self.hi

    def intersects(self, other: "RatInterval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def intersect(self, other: "RatInterval") -> "RatInterval":
        lo = max(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        if lo > hi:
            raise ValueError("empty intersection")
        return RatInterval(lo, hi)

    def hull(self, other: "RatInterval") -> "RatInterval":
        return RatInterval(min(self.lo, other.lo), max(self.hi, other.hi))

    def outward(self, bits: int) -> "RatInterval":
        """Round both endpoints outward to dyadics with denominator 2**bits."""
        return RatInterval(dyadic_floor(self.lo, bits), dyadic_ceil(self.hi, bits))

    def clamp(self, lo: Fraction, hi: Fraction) -> "RatInterval":
        return RatInterval(min(max(self.lo, lo), hi), min(max(self.hi, lo), hi))

    def __add__(self, other: object) -> "RatInterval":
        if isinstance(other, RatInterval):
            return RatInterval(self.lo + other.lo, self.hi + other.hi)
        q = parse_rational(other)  # type: ignore[arg-type]
        return RatInterval(self.lo + q, self.hi + q)

    __radd__ = __add__

    def __sub__(self, other: object) -> "RatInterval":
        if isinstance(other, RatInterval):
            return RatInterval(self.lo - other.hi, self.hi - other.lo)
        q = parse_rational(other)  # type: ignore[arg-type]
        return RatInterval(self.lo - q, self.hi - q)

    def __neg__(self) -> "RatInterval":
        return RatInterval(-self.hi, -self.lo)

    def __mul__(self, other: object) -> "RatInterval":
        if isinstance(other, RatInterval):
            products = (
                self.lo * other.lo,
                self.lo * other.hi,
                self.hi * other.lo,
                self.hi * other.hi,
            )
            return RatInterval(min(products), max(products))
        q = parse_rational(other)  # type: ignore[arg-type]
        if q >= 0:
            return RatInterval(self.lo * q, self.hi * q)
        return RatInterval(self.hi * q, self.lo * q)

    __rmul__ = __mul__

    def __truediv__(self, other: object) -> "RatInterval":
        q = parse_rational(other)  # type: ignore[arg-type]
        if q == 0:
            raise ZeroDivisionError("interval divided by zero")
        if q > 0:
            return RatInterval(self.lo / q, self.hi / q)
        return RatInterval(self.hi / q, self.lo / q)

    def __str__(self) -> str:
        return f"[{self.lo}, {self.hi}]"

    def to_json(self) -> list[str]:
        return [format_rational(self.lo), format_rational(self.hi)]

    @classmethod
    def from_json(cls, data: list[str]) -> "RatInterval":
        if not isinstance(data, (list, tuple)) or len(data) != 2:
            raise ValueError("interval JSON must be a two-element array")
        return cls(parse_rational(data[0]), parse_rational(data[1]))


# ---------------------------------------------------------------------------
# Certified log2 / exp2
# ---------------------------------------------------------------------------


def _log2_point(q: Fraction, bits: int) -> tuple[Fraction, Fraction]:
    """Dyadic bracket [lo, hi] of log2(q) with hi - lo <= 2**-bits, q > 0."""
    if q <= 0:
        raise ValueError("log2 requires a positive argument")
    num, den = q.numerator, q.denominator
    if num & (num - 1) == 0 and den & (den - 1) == 0:
        # exact power of two
        e = Fraction(num.bit_length() - den.bit_length())
        return e, e
    e = floor_log2(q)
    m = q / Fraction(2) ** e  # mantissa in [1, 2)
    k = bits + 2
    w = k + bits + 8
    scale = 1 << w
    # Directed-rounded mantissa brackets at w bits: lo path rounds down,
    # hi path rounds up, so the true value stays between them throughout.
    mlo = m.numerator * scale // m.denominator
    mhi = -((-m.numerator * scale) // m.denominator)
    elo = ehi = 0
    top = 1 << (w + 1)
    for _ in range(k):
        mlo = (mlo * mlo) >> w
        mhi = -((-mhi * mhi) >> w)
        elo <<= 1
        ehi <<= 1
        while mlo >= top:
            mlo >>= 1
            elo += 1
        while mhi >= top:
            mhi = -((-mhi) >> 1)
            ehi += 1
    denom = 1 << k
    return Fraction(e) + Fraction(elo, denom), Fraction(e) + Fraction(ehi + 1, denom)


def log2_enclosure(x: Union[RatInterval, Fraction], bits: int) -> RatInterval:
    """Dyadic interval containing log2 of every point of ``x``.

    The result is at most 2**-bits wider than the exact image. Raises
    ValueError when x reaches 0 or below.
    """
    if not isinstance(x, RatInterval):
        x = RatInterval.point(x)
    if x.lo <= 0:
        raise ValueError("log2 enclosure requires a strictly positive interval")
    lo, _ = _log2_point(x.lo, bits + 1)
    _, hi = _log2_point(x.hi, bits + 1)
    return RatInterval(lo, hi)


def _sqrt_chain(depth: int, w: int) -> list[tuple[int, int]]:
    """Integer brackets (scaled by 2**w) of 2**(2**-m) for m = 0..depth."""
    lo = hi = 2 << w
    chain = [(lo, hi)]
    for _ in range(depth):
        lo = isqrt(lo << w)
        s = isqrt(hi << w)
        hi = s if s * s == (hi << w) else s + 1
        chain.append((lo, hi))
    return chain


def _exp2_unit(q: Fraction, bits: int) -> tuple[Fraction, Fraction]:
    """Bracket of 2**q for 0 <= q <= 1."""
    if q == 0:
        return _ONE, _ONE
    if q == 1:
        return Fraction(2), Fraction(2)
    prec = bits + 8
    w = bits + 16
    scale = 1 << w
    scaled = q * (1 << prec)
    ulo = scaled.numerator // scaled.denominator
    uhi = -((-scaled.numerator) // scaled.denominator)
    chain = _sqrt_chain(prec, w)
    plo = phi = scale
    for j in range(prec):
        m = prec - j  # weight 2**(j - prec) -> chain index m
        if (ulo >> j) & 1:
            plo = (plo * chain[m][0]) >> w
        if (uhi >> j) & 1:
            phi = -((-phi * chain[m][1]) >> w)
    if (uhi >> prec) & 1:  # uhi rounded all the way up to 1
        phi = -((-phi * chain[0][1]) >> w)
    return Fraction(plo, scale), Fraction(phi + 1, scale)


def exp2_enclosure(h: Union[RatInterval, Fraction], bits: int) -> RatInterval:
    """Dyadic interval containing 2**t for every t in ``h``; needs h >= 0."""
    if not isinstance(h, RatInterval):
        h = RatInterval.point(h)
    if h.lo < 0:
        raise ValueError("exp2 enclosure requires a nonnegative interval")

    def one_side(q: Fraction) -> tuple[Fraction, Fraction]:
        n = q.numerator // q.denominator
        frac = q - n
        lo, hi = _exp2_unit(frac, bits)
        return lo * (1 << n), hi * (1 << n)

    lo, _ = one_side(h.lo)
    _, hi = one_side(h.hi)
    return RatInterval(lo, hi)


def simplest_rational_in(lo: Fraction, hi: Fraction) -> Fraction:
    """The rational with the smallest denominator in the closed interval."""
    if lo > hi:
        raise ValueError("empty interval")
    if lo == hi:
        return lo
    if lo <= 0 <= hi:
        return _ZERO
    if hi < 0:
        return -simplest_rational_in(-hi, -lo)
    # 0 < lo < hi: walk the continued-fraction of the interval.
    p0, q0, p1, q1 = 0, 1, 1, 0  # accumulated mediant transform
    a, b = lo, hi
    while True:
        n = a.numerator // a.denominator  # floor(a)
        ceil_a = -((-a.numerator) // a.denominator)
        if Fraction(ceil_a) <= b:
            n = ceil_a
            num, den = n * p1 + p0, n * q1 + q0
            return Fraction(num, den)
        # same integer part; recurse on reciprocal fractional parts
        p0, q0, p1, q1 = p1, q1, n * p1 + p0, n * q1 + q0
        a, b = 1 / (b - n), 1 / (a - n)


# ---------------------------------------------------------------------------
# Iterated quadratic-family expressions
# ---------------------------------------------------------------------------


def logistic_step_range(r: RatInterval, x: RatInterval) -> RatInterval:
    """Exact range of r*x*(1-x) over the box r-by-x.

    The one-step image is exact because x*(1-x) has a single interior
    maximum at 1/2; only reuse of r across iterations introduces slack.
    """

    def g(t: Fraction) -> Fraction:
        return t * (1 - t)

    glo_candidates = (g(x.lo), g(x.hi))
    gmin = min(glo_candidates)
    if x.lo <= _HALF <= x.hi:
        gmax = Fraction(1, 4)
    else:
        gmax = max(glo_candidates)
    grange = RatInterval(gmin, gmax)
    return r * grange


def logistic_orbit_enclosures(
    r: RatInterval,
    x0: RatInterval,
    n: int,
    bits: Optional[int] = None,
) -> list[RatInterval]:
    """Enclosures of x0, f(x0), ..., f^n(x0) for the family r*x*(1-x).

    With ``bits`` set, endpoints are rounded outward to that dyadic
    precision after every step, capping denominator growth; the enclosures
    stay sound either way.
    """
    out = [x0]
    x = x0
    for _ in range(n):
        x = logistic_step_range(r, x)
        if r.lo >= 0 and r.hi <= 4 and x0.lo >= 0 and x0.hi <= 1:
            x = x.clamp(_ZERO, _ONE)
        if bits is not None:
            x = x.outward(bits)
        out.append(x)
    return out


ExprKind = Literal["parameter", "state", "orbit"]


@dataclass(frozen=True)
class IterMapExpr:
    """An iterated quadratic-family expression, evaluated without expansion.

    kind "parameter": r -> f_r^n(base) - base, the defining expression for
    parameters whose critical orbit closes up after n steps.
    kind "state": x -> f_r^n(x) - x at a fixed parameter, whose roots are
    the n-periodic points.
    kind "orbit": x -> f_r^n(x), a plain iterate (no subtraction).
    """

    kind: ExprKind
    iterations: int
    base: Optional[Fraction] = None
    param: Optional[RatInterval] = None

    def __post_init__(self) -> None:
        if self.iterations < 1:
            raise ValueError("iteration count must be >= 1")
        if self.kind == "parameter":
            if self.base is None:
                raise ValueError("parameter-kind expression needs a base point")
            object.__setattr__(self, "base", parse_rational(self.base))
            if not (0 <= self.base <= 1):
                raise ValueError("base point must lie in [0, 1]")
        else:
            if self.param is None:
                raise ValueError("state/orbit expressions need a parameter")
            p = self.param
            if not isinstance(p, RatInterval):
                p = RatInterval.point(p)
            object.__setattr__(self, "param", p)
            if p.lo < 0 or p.hi > 4:
                raise ValueError("parameter must lie in [0, 4]")

    @property
    def domain(self) -> RatInterval:
        return RatInterval(0, 4) if self.kind == "parameter" else RatInterval(0, 1)

    def evaluate(self, x: RatInterval, bits: Optional[int] = None) -> RatInterval:
        """Interval enclosure of the expression over ``x``."""
        if not self.domain.contains_interval(x):
            raise ValueError(f"input {x} outside expression domain {self.domain}")
        if self.kind == "parameter":
            orbit = logistic_orbit_enclosures(x, RatInterval.point(self.base), self.iterations, bits)
            return orbit[-1] - self.base
        orbit = logistic_orbit_enclosures(self.param, x, self.iterations, bits)
        if self.kind == "state":
            return orbit[-1] - x
        return orbit[-1]

    def sign_at(self, t: Fraction) -> int:
        """Exact sign of the expression at a rational point."""
        t = parse_rational(t)
        if self.kind == "parameter":
            x = self.base
            for _ in range(self.iterations):
                x = t * x * (1 - x)
            return _sign(x - self.base)
        if not self.param.is_point:
            raise ValueError("exact sign needs a point parameter")
        r = self.param.lo
        x = t
        for _ in range(self.iterations):
            x = r * x * (1 - x)
        if self.kind == "state":
            return _sign(x - t)
        return _sign(x)

    def value_at(self, t: Fraction) -> Fraction:
        """Exact value at a rational point."""
        t = parse_rational(t)
        if self.kind == "parameter":
            x = self.base
            for _ in range(self.iterations):
                x = t * x * (1 - x)
            return x - self.base
        if not self.param.is_point:
            raise ValueError("exact value needs a point parameter")
        r = self.param.lo
        x = t
        for _ in range(self.iterations):
            x = r * x * (1 - x)
        return x - t if self.kind == "state" else x

    def derivative_enclosure(self, x: RatInterval, bits: Optional[int] = None) -> RatInterval:
        """Enclosure of d(expr)/d(variable) over ``x``."""
        if self.kind == "parameter":
            r = x
            xi = RatInterval.point(self.base)
            u = RatInterval.point(0)
            for _ in range(self.iterations):
                gx = logistic_step_range(RatInterval.point(1), xi)  # x*(1-x)
                one_minus_2x = RatInterval.point(1) - xi * Fraction(2)
                u = gx + r * one_minus_2x * u
                xi = logistic_step_range(r, xi).clamp(_ZERO, _ONE)
                if bits is not None:
                    u = u.outward(bits)
                    xi = xi.outward(bits)
            return u
        r = self.param
        xi = x
        v = RatInterval.point(1)
        for _ in range(self.iterations):
            one_minus_2x = RatInterval.point(1) - xi * Fraction(2)
            v = r * one_minus_2x * v
            xi = logistic_step_range(r, xi).clamp(_ZERO, _ONE)
            if bits is not None:
                v = v.outward(bits)
                xi = xi.outward(bits)
        if self.kind == "state":
            return v - 1
        return v


def critical_orbit_expr(period: int, base: RationalLike = Fraction(1, 2)) -> IterMapExpr:
    """r -> f_r^period(base) - base; roots are parameters where the orbit of
    ``base`` closes up with period dividing ``period``."""
    return IterMapExpr("parameter", period, base=parse_rational(base))


def periodic_point_expr(r: Union[Fraction, RatInterval], period: int) -> IterMapExpr:
    """x -> f_r^period(x) - x at a fixed parameter."""
    if not isinstance(r, RatInterval):
        r = RatInterval.point(r)
    return IterMapExpr("state", period, param=r)


def orbit_value_expr(r: Union[Fraction, RatInterval], n: int) -> IterMapExpr:
    """x -> f_r^n(x), a plain iterate with no subtraction."""
    if not isinstance(r, RatInterval):
        r = RatInterval.point(r)
    return IterMapExpr("orbit", n, param=r)


# ---------------------------------------------------------------------------
# Root isolation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RootIsolation:
    """Result of a root isolation scan.

    ``roots`` are pairwise-disjoint intervals, each either degenerate at an
    exact rational root or carrying a verified sign change at its rational
    endpoints. ``unresolved`` are subintervals at the width floor where a
    sign could not be certified (tangential roots, near misses); they are
    reported, never silently dropped.
    """

    roots: tuple[RatInterval, ...]
    unresolved: tuple[RatInterval, ...]


def _scan_enclosure(expr: IterMapExpr, cell: RatInterval, bits: int) -> RatInterval:
    plain = expr.evaluate(cell, bits)
    mid = RatInterval.point(cell.mid)
    half = cell.width / 2
    centered = expr.evaluate(mid, bits) + expr.derivative_enclosure(cell, bits) * RatInterval(-half, half)
    lo = max(plain.lo, centered.lo)
    hi = min(plain.hi, centered.hi)
    if lo > hi:  # both sound, so a crossing order would be a bug
        raise AssertionError("inconsistent enclosures")
    return RatInterval(lo, hi)


def root_isolate(
    expr: IterMapExpr,
    domain: RatInterval,
    min_width: Fraction,
    *,
    bits: int = 128,
) -> RootIsolation:
    """Isolate the sign-change roots of ``expr`` on ``domain``.

    Certified interval bisection: cells whose enclosure excludes zero are
    discarded; exact rational roots hit during bisection come back as
    degenerate [q, q] intervals.
    """
    min_width = parse_rational(min_width)
    if min_width <= 0:
        raise ValueError("min_width must be positive")
    if not expr.domain.contains_interval(domain):
        raise ValueError("domain outside expression domain")

    signs: dict[Fraction, int] = {}

    def sgn(t: Fraction) -> int:
        s = signs.get(t)
        if s is None:
            s = expr.sign_at(t)
            signs[t] = s
        return s

    roots: list[RatInterval] = []
    unresolved: list[RatInterval] = []

    def nudge(point: Fraction, direction: int) -> tuple[Fraction, int]:
        step = min_width / 4
        for _ in range(48):
            cand = point + direction * step
            s = sgn(cand)
            if s != 0:
                return cand, s
            roots.append(RatInterval.point(cand))
            step /= 2
        raise PrecisionError("could not step off a zero of the expression")

    lo, hi = domain.lo, domain.hi
    slo = sgn(lo)
    if slo == 0:
        roots.append(RatInterval.point(lo))
        lo, slo = nudge(lo, +1)
    shi = sgn(hi)
    if shi == 0:
        roots.append(RatInterval.point(hi))
        hi, shi = nudge(hi, -1)

    stack: list[tuple[Fraction, Fraction, int, int]] = [(lo, hi, slo, shi)]
    while stack:
        a, b, sa, sb = stack.pop()
        if a >= b:
            continue
        enc = _scan_enclosure(expr, RatInterval(a, b), bits)
        if enc.lo > 0 or enc.hi < 0:
            continue
        w = b - a
        if w <= min_width:
            if sa * sb < 0:
                roots.append(RatInterval(a, b))
            else:
                unresolved.append(RatInterval(a, b))
            continue
        mid = (a + b) / 2
        sm = sgn(mid)
        if sm == 0:
            roots.append(RatInterval.point(mid))
            m1, s1 = nudge(mid, -1)
            m2, s2 = nudge(mid, +1)
            if s1 == s2:
                # even-order residue around the exact zero; flag the band
                unresolved.append(RatInterval(m1, m2))
            stack.append((a, m1, sa, s1))
            stack.append((m2, b, s2, sb))
        else:
            stack.append((a, mid, sa, sm))
            stack.append((mid, b, sm, sb))

    roots = sorted(set(roots), key=lambda r: (r.lo, r.hi))
    # separate intervals that share an endpoint so the result is disjoint
    changed = True
    while changed:
        changed = False
        for i in range(len(roots) - 1):
            cur, nxt = roots[i], roots[i + 1]
            if cur.hi >= nxt.lo and not (cur.is_point and nxt.is_point):
                if not cur.is_point:
                    roots[i] = refine_root(expr, cur, cur.width / 4)
                if not nxt.is_point:
                    roots[i + 1] = refine_root(expr, nxt, nxt.width / 4)
                changed = True
    unresolved.sort(key=lambda r: (r.lo, r.hi))
    return RootIsolation(tuple(roots), tuple(unresolved))


def refine_root(expr: IterMapExpr, root: RatInterval, target_width: Fraction) -> RatInterval:
    """Shrink a sign-change interval by bisection, preserving the change."""
    if root.is_point:
        return root
    target_width = parse_rational(target_width)
    a, b = root.lo, root.hi
    sa, sb = expr.sign_at(a), expr.sign_at(b)
    if sa * sb >= 0:
        raise ValueError("interval does not carry a sign change")
    while b - a > target_width:
        m = (a + b) / 2
        sm = expr.sign_at(m)
        if sm == 0:
            return RatInterval.point(m)
        if sm == sa:
            a = m
        else:
            b = m
    return RatInterval(a, b)
