"""The quadratic family pipeline: superattracting centers, critical-orbit
Markov partitions, certified center entropies, attracting-cycle detection,
and the bracketing ("sandwich") computation of the entropy at an arbitrary
parameter.

Centers are parameters where the critical orbit closes up; each one carries
an induced subshift of finite type whose certified Perron bound gives the
entropy of the map there. Since the entropy is weakly increasing in the
parameter, centers on both sides of a query bracket its entropy, and the
brackets tighten as the enumerated period grows.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence, Union

from .numkit import (
    IterMapExpr,
    RatInterval,
    RationalLike,
    critical_orbit_expr,
    logistic_orbit_enclosures,
    logistic_step_range,
    parse_rational,
    periodic_point_expr,
    refine_root,
    root_isolate,
)
from .symbolic import SFT, EntropyBound, Provenance, sft_entropy

_ZERO = Fraction(0)
_ONE = Fraction(1)
_HALF = Fraction(1, 2)

CACHE_ENV_VAR = "ENTROLAB_CACHE"
CACHE_SCHEMA = 1

DEFAULT_EPS = Fraction(1, 10**7)
DEFAULT_ROOT_WIDTH = Fraction(1, 1 << 24)
_SEPARATION_FLOOR = Fraction(1, 1 << 300)
_COINCIDENCE_WIDTH = Fraction(1, 1 << 70)


class Verdict(Enum):
    YES = "YES"
    NO = "NO"
    UNRESOLVED = "UNRESOLVED"


class Side(Enum):
    BELOW = "BELOW"
    ABOVE = "ABOVE"
    AT = "AT"


class RefinementBudgetError(RuntimeError):
    """Orbit separation could not be certified at the precision cap."""


class BudgetExceeded(RuntimeError):
    """The sandwich ran out of budget; carries the best sound bound."""

    def __init__(self, best: EntropyBound):
        super().__init__(
            f"budget exhausted; best enclosure [{best.lo}, {best.hi}]"
        )
        self.best = best


@dataclass(frozen=True)
class Center:
    """A superattracting parameter with its induced Markov model."""

    r_enc: RatInterval
    period: int
    orbit_order: tuple[int, ...]  # rank of f^k(c), k = 1..period, in [0, 1]
    sft: SFT
    entropy: EntropyBound

    @property
    def exact(self) -> bool:
        return self.r_enc.is_point

    def to_json(self) -> dict:
        return {
            "type": "center",
            "period": self.period,
            "r_enc": self.r_enc.to_json(),
            "orbit_order": list(self.orbit_order),
            "sft": self.sft.to_json(),
            "entropy": self.entropy.to_json(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "Center":
        return cls(
            RatInterval.from_json(data["r_enc"]),
            int(data["period"]),
            tuple(int(v) for v in data["orbit_order"]),
            SFT.from_json(data["sft"]),
            EntropyBound.from_json(data["entropy"]),
        )


@dataclass(frozen=True)
class BracketSample:
    """A parameter with entropy information usable on one side of a query.

    BELOW samples carry a valid lower bound for the entropy at any
    parameter >= d (entropy.lo); ABOVE samples a valid upper bound for any
    parameter <= d (entropy.hi). AT samples enclose the value itself.
    """

    d: Fraction
    entropy: EntropyBound
    side: Side
    witness_period: int


@dataclass(frozen=True)
class EnumerationResult:
    centers: tuple[Center, ...]
    unresolved: tuple[RatInterval, ...]


# ---------------------------------------------------------------------------
# Markov partition from the critical orbit
# ---------------------------------------------------------------------------


class _SeparationError(Exception):
    pass


def _markov_data(
    r_enc: RatInterval, period: int
) -> tuple[tuple[RatInterval, ...], SFT, tuple[int, ...]]:
    # enclosures of f(c), ..., f^{p-1}(c); the closing point f^p(c) is c itself
    orbit: list[tuple[int, RatInterval]] = []
    x = RatInterval.point(_HALF)
    for k in range(1, period):
        x = logistic_step_range(r_enc, x).clamp(_ZERO, _ONE)
        orbit.append((k, x))
    orbit.append((period, RatInterval.point(_HALF)))
    for _, iv in orbit:
        if iv.lo <= 0 or iv.hi >= 1:
            raise _SeparationError
    ordered = sorted(orbit, key=lambda kv: kv[1].lo)
    for (_, a), (_, b) in zip(ordered, ordered[1:]):
        if a.hi >= b.lo:
            raise _SeparationError

    # partition points: 0, the p orbit points in increasing order, 1
    position = {k: i + 1 for i, (k, _) in enumerate(ordered)}
    point_count = period + 2

    def sigma(i: int) -> int:
        if i == 0 or i == point_count - 1:
            return 0  # both endpoints map to the fixed point 0
        k = ordered[i - 1][0]
        succ = k + 1 if k < period else 1
        return position[succ]

    c_idx = position[period]
    rows = [[0] * (period + 1) for _ in range(period + 1)]
    for j in range(period + 1):
        increasing = (j + 1) <= c_idx
        if increasing:
            lo_t, hi_t = sigma(j), sigma(j + 1) - 1
        else:
            lo_t, hi_t = sigma(j + 1), sigma(j) - 1
        if lo_t > hi_t:
            raise AssertionError("empty transition run; ordering is inconsistent")
        for t in range(lo_t, hi_t + 1):
            rows[j][t] = 1
    points = (RatInterval.point(_ZERO),) + tuple(iv for _, iv in ordered) + (
        RatInterval.point(_ONE),
    )
    orbit_rank = tuple(position[k] - 1 for k in range(1, period + 1))
    return points, SFT(tuple(tuple(r) for r in rows)), orbit_rank


def markov_partition(center: Center) -> tuple[tuple[RatInterval, ...], SFT]:
    """Partition-point enclosures and the induced transition structure."""
    points, sft, _ = _markov_data(center.r_enc, center.period)
    return points, sft


def center_entropy(center: Center, eps: RationalLike) -> EntropyBound:
    """Certified entropy of the center's induced subshift, width <= eps."""
    return sft_entropy(center.sft, parse_rational(eps))


# ---------------------------------------------------------------------------
# Center cache
# ---------------------------------------------------------------------------


class CenterCache:
    """Append-only JSON-lines store of computed centers.

    The first line is a schema header; subsequent lines are center records
    and per-period scan-complete markers. Reruns reuse complete periods and
    never duplicate or rewrite existing lines.
    """

    def __init__(self, path: Union[str, Path, None]):
        self.path = Path(path) if path else None
        self.centers: list[Center] = []
        self.scanned: dict[int, dict] = {}
        self.unresolved: list[RatInterval] = []
        self._keys: set[tuple] = set()
        if self.path is not None and self.path.exists():
            self._load()

    def _load(self) -> None:
        with open(self.path, "r", encoding="utf-8") as fh:
            first = fh.readline()
            if first.strip():
                header = json.loads(first)
                if header.get("schema") != CACHE_SCHEMA:
                    raise ValueError(f"unsupported cache schema in {self.path}")
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                data = json.loads(line)
                if data.get("type") == "center":
                    center = Center.from_json(data)
                    key = self._key(center)
                    if key not in self._keys:
                        self._keys.add(key)
                        self.centers.append(center)
                elif data.get("type") == "scan":
                    self.scanned[int(data["period"])] = data
                    for iv in data.get("unresolved", []):
                        self.unresolved.append(RatInterval.from_json(iv))

    @staticmethod
    def _key(center: Center) -> tuple:
        return (center.period, center.r_enc.lo, center.r_enc.hi)

    def _append(self, record: dict) -> None:
        if self.path is None:
            return
        new_file = not self.path.exists()
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "a", encoding="utf-8") as fh:
            if new_file:
                fh.write(json.dumps({"schema": CACHE_SCHEMA}, sort_keys=True) + "\n")
            fh.write(json.dumps(record, sort_keys=True) + "\n")

    def add_center(self, center: Center) -> None:
        key = self._key(center)
        if key in self._keys:
            return
        self._keys.add(key)
        self.centers.append(center)
        self._append(center.to_json())

    def mark_scanned(self, period: int, unresolved: Sequence[RatInterval]) -> None:
        if period in self.scanned:
            return
        record = {
            "type": "scan",
            "period": period,
            "unresolved": [iv.to_json() for iv in unresolved],
        }
        self.scanned[period] = record
        self.unresolved.extend(unresolved)
        self._append(record)


def resolve_cache_path(explicit: Union[str, Path, None]) -> Optional[Path]:
    """The ENTROLAB_CACHE environment variable overrides any explicit path."""
    env = os.environ.get(CACHE_ENV_VAR)
    if env:
        return Path(env)
    return Path(explicit) if explicit else None


# ---------------------------------------------------------------------------
# Center enumeration
# ---------------------------------------------------------------------------


def _proper_divisors(p: int) -> list[int]:
    return [q for q in range(1, p) if p % q == 0]


def _exact_minimal_period(r: Fraction, p: int) -> int:
    x = _HALF
    for k in range(1, p + 1):
        x = r * x * (1 - x)
        if x == _HALF:
            return k
    raise AssertionError("exact root does not close up")


def _is_primitive(
    root: RatInterval, p: int, expr: IterMapExpr, earlier: Sequence[Center]
) -> tuple[bool, RatInterval]:
    if root.is_point:
        return _exact_minimal_period(root.lo, p) == p, root
    divisors = set(_proper_divisors(p))
    for other in earlier:
        if other.period not in divisors:
            continue
        enc = other.r_enc
        cur = root
        while cur.intersects(enc):
            if cur.width <= _COINCIDENCE_WIDTH and enc.width <= _COINCIDENCE_WIDTH:
                return False, cur  # coincides with a shorter-period center
            if cur.width > _COINCIDENCE_WIDTH:
                cur = refine_root(expr, cur, cur.width / 4)
                if cur.is_point:
                    return _exact_minimal_period(cur.lo, p) == p, cur
            if enc.width > _COINCIDENCE_WIDTH and cur.intersects(enc):
                enc = refine_root(
                    critical_orbit_expr(other.period), enc, enc.width / 4
                )
        root = cur
    return True, root


def _build_center(
    expr: IterMapExpr, root: RatInterval, period: int, eps: Fraction
) -> Center:
    r_enc = root
    while True:
        try:
            _, sft, orbit_rank = _markov_data(r_enc, period)
            break
        except _SeparationError:
            if r_enc.is_point or r_enc.width <= _SEPARATION_FLOOR:
                raise RefinementBudgetError(
                    f"cannot certify orbit separation near {r_enc}"
                )
            r_enc = refine_root(expr, r_enc, r_enc.width / 4)
    entropy = sft_entropy(sft, eps)
    return Center(r_enc, period, orbit_rank, sft, entropy)


DEFAULT_PERIOD_CAP = 10


def enumerate_centers(
    p_max: int,
    *,
    eps: RationalLike = DEFAULT_EPS,
    root_width: RationalLike = DEFAULT_ROOT_WIDTH,
    cache: Union[CenterCache, str, Path, None] = None,
    cap: int = DEFAULT_PERIOD_CAP,
) -> EnumerationResult:
    """All superattracting centers of period <= p_max in (0, 4).

    Roots of the closing condition are isolated per period, filtered down
    to primitive periods by certified separation from shorter-period
    centers, and each survivor is refined until its critical orbit is
    certifiably simple, then assigned its induced subshift and a certified
    entropy enclosure of width <= eps. Periods beyond ``cap`` are refused;
    raise the cap knowingly, scan cost grows steeply with the period.
    """
    if p_max < 1:
        raise ValueError("p_max must be >= 1")
    if p_max > cap:
        raise ValueError(f"p_max {p_max} exceeds the configured cap {cap}")
    eps = parse_rational(eps)
    root_width = parse_rational(root_width)
    if not isinstance(cache, CenterCache):
        cache = CenterCache(resolve_cache_path(cache))
    for p in range(1, p_max + 1):
        if p in cache.scanned:
            continue
        expr = critical_orbit_expr(p)
        iso = root_isolate(expr, RatInterval(_ZERO, Fraction(4)), root_width)
        unresolved = list(iso.unresolved)
        earlier = [c for c in cache.centers if c.period < p]
        for root in iso.roots:
            if root.hi <= 0 or root.lo >= 4:
                continue
            primitive, refined = _is_primitive(root, p, expr, earlier)
            if not primitive:
                continue
            try:
                center = _build_center(expr, refined, p, eps)
            except RefinementBudgetError:
                unresolved.append(refined)
                continue
            cache.add_center(center)
        cache.mark_scanned(p, unresolved)
    centers = sorted(
        (c for c in cache.centers if c.period <= p_max),
        key=lambda c: (c.r_enc.lo, c.period),
    )
    # serve entropies at the requested precision even from older cache lines
    refreshed = []
    for c in centers:
        if c.entropy.width > eps:
            refreshed.append(
                Center(c.r_enc, c.period, c.orbit_order, c.sft, sft_entropy(c.sft, eps))
            )
        else:
            refreshed.append(c)
    return EnumerationResult(tuple(refreshed), tuple(cache.unresolved))


# ---------------------------------------------------------------------------
# Attracting cycles and hyperbolic-window certificates
# ---------------------------------------------------------------------------


def _cycle_multiplier(
    r: RatInterval, x: RatInterval, period: int
) -> RatInterval:
    orbit = logistic_orbit_enclosures(r, x, period - 1)
    mult = RatInterval.point(_ONE)
    for xk in orbit:
        mult = mult * (r * (RatInterval.point(_ONE) - xk * Fraction(2)))
    return mult


def attracting_cycle_at(d: RationalLike, p: int, bits: int = 48) -> Verdict:
    """Does the parameter ``d`` carry an attracting cycle of primitive
    period ``p``?

    YES and NO are certified; UNRESOLVED means some candidate orbit could
    not be classified at the precision cap.
    """
    d = parse_rational(d)
    if not (0 < d < 4):
        raise ValueError("parameter must lie in (0, 4)")
    expr = periodic_point_expr(d, p)
    iso = root_isolate(expr, RatInterval(_ZERO, _ONE), Fraction(1, 1 << 24))
    unresolved = bool(iso.unresolved)
    r_iv = RatInterval.point(d)
    floor = Fraction(1, 1 << (4 * bits))
    for root in iso.roots:
        x = root if root.is_point else refine_root(expr, root, Fraction(1, 1 << bits))
        while True:
            mult = _cycle_multiplier(r_iv, x, p)
            attracting = -1 < mult.lo and mult.hi < 1
            repelling = mult.lo >= 1 or mult.hi <= -1
            if attracting or repelling:
                break
            if x.is_point or x.width <= floor:
                break
            x = refine_root(expr, x, x.width / 16)
        if repelling:
            continue
        if not attracting:
            unresolved = True  # multiplier enclosure straddles the unit circle
            continue
        primitive = True
        for q in _proper_divisors(p):
            attempts = 0
            xq = logistic_orbit_enclosures(r_iv, x, q)[-1]
            while xq.intersects(x) and attempts < 6 and not x.is_point:
                x = refine_root(expr, x, x.width / 8)
                xq = logistic_orbit_enclosures(r_iv, x, q)[-1]
                attempts += 1
            if xq.intersects(x):
                primitive = False
                break
        if primitive:
            return Verdict.YES
    return Verdict.UNRESOLVED if unresolved else Verdict.NO


def attracting_cycle_over(window: RatInterval, p: int, bits: int = 48) -> bool:
    """Certify an attracting cycle of period p for EVERY parameter in the
    window: a contraction-mapping certificate on an inflated orbit box.

    Success means each parameter in the window owns an attracting cycle
    whose multiplier stays strictly inside (-1, 1), which pins the whole
    window inside a single hyperbolic component.
    """
    mid = window.mid
    expr = periodic_point_expr(mid, p)
    iso = root_isolate(expr, RatInterval(_ZERO, _ONE), Fraction(1, 1 << 20))
    w = max(window.width, Fraction(1, 1 << bits))
    for root in iso.roots:
        x = root if root.is_point else refine_root(expr, root, Fraction(1, 1 << bits))
        # the right inflation depends on the (unknown) contraction rate,
        # so walk a geometric ladder; oversized boxes fail the multiplier
        # test and undersized ones fail containment, both harmlessly
        for scale in (1, 4, 16, 64):
            pad = max(x.width * 8, w * scale)
            box = RatInterval(max(_ZERO, x.lo - pad), min(_ONE, x.hi + pad))
            mult = _cycle_multiplier(window, box, p)
            if not (-1 < mult.lo and mult.hi < 1):
                break  # larger boxes only make the multiplier range worse
            image = logistic_orbit_enclosures(window, box, p)[-1]
            if box.lo < image.lo and image.hi < box.hi:
                return True
    return False


def chain_certify(
    start: RatInterval,
    target: Fraction,
    period: int,
    *,
    max_links: int = 256,
    bits: int = 48,
) -> bool:
    """Certify that every parameter between ``start`` and ``target`` has an
    attracting period-``period`` cycle, by covering the gap with verified
    subwindows. Success pins the whole stretch inside one hyperbolic
    window, so the entropy at ``target`` equals the entropy at the center."""
    target = parse_rational(target)
    if start.contains(target):
        return True
    if target > start.hi:
        segment = RatInterval(start.hi, target)
    else:
        segment = RatInterval(target, start.lo)
    pending = [segment]
    links = 0
    while pending:
        piece = pending.pop()
        links += 1
        if links > max_links:
            return False
        if attracting_cycle_over(piece, period, bits):
            continue
        if piece.width <= Fraction(1, 1 << 40):
            return False
        mid = piece.mid
        pending.append(RatInterval(piece.lo, mid))
        pending.append(RatInterval(mid, piece.hi))
    return True


# ---------------------------------------------------------------------------
# Bracket collection and the sandwich
# ---------------------------------------------------------------------------

_EXACT_ZERO = EntropyBound(_ZERO, _ZERO, Provenance.EXACT, certified=True)
_EXACT_ONE = EntropyBound(_ONE, _ONE, Provenance.EXACT, certified=True)


def collect_brackets(
    query: RatInterval,
    centers: Sequence[Center],
    *,
    chains: bool = False,
    chain_bits: int = 48,
) -> list[BracketSample]:
    """Entropy samples on both sides of the query parameter.

    The nearest enumerated center on each side contributes a sample at its
    enclosure endpoint (sound by the monotonicity of the entropy in the
    parameter). With ``chains`` enabled, the sample is pushed from the
    center toward the query along a certified chain of attracting-cycle
    windows, which transports the center's entropy enclosure unchanged.
    Boundary records at 3 (entropy 0) and 4 (entropy 1) are always
    available.
    """
    if query.lo < 0 or query.hi > 4:
        raise ValueError("query must lie within [0, 4]")
    samples: list[BracketSample] = []
    below = [c for c in centers if c.r_enc.hi < query.lo]
    above = [c for c in centers if c.r_enc.lo > query.hi]
    for c in centers:
        if c.exact and query.is_point and query.lo == c.r_enc.lo:
            samples.append(BracketSample(query.lo, c.entropy, Side.AT, c.period))
    if below:
        c = max(below, key=lambda c: c.r_enc.hi)
        d = c.r_enc.hi
        if chains and chain_certify(c.r_enc, query.lo, c.period, bits=chain_bits):
            d = query.lo
        samples.append(BracketSample(d, c.entropy, Side.BELOW, c.period))
    if above:
        c = min(above, key=lambda c: c.r_enc.lo)
        d = c.r_enc.lo
        if chains and chain_certify(c.r_enc, query.hi, c.period, bits=chain_bits):
            d = query.hi
        samples.append(BracketSample(d, c.entropy, Side.ABOVE, c.period))
    if query.lo >= 3:
        samples.append(BracketSample(Fraction(3), _EXACT_ZERO, Side.BELOW, 1))
    if query.hi <= 4:
        samples.append(BracketSample(Fraction(4), _EXACT_ONE, Side.ABOVE, 1))
    samples.sort(key=lambda s: (s.d, s.side.value))
    return samples


@dataclass(frozen=True)
class SandwichBudget:
    max_period: int = 12
    seconds: Optional[float] = None


def logistic_entropy(
    query: Union[RatInterval, RationalLike],
    eps: RationalLike,
    budget: SandwichBudget = SandwichBudget(),
    *,
    cache: Union[CenterCache, str, Path, None] = None,
    center_eps: Optional[RationalLike] = None,
) -> EntropyBound:
    """Enclosure of the entropy of x -> r*x*(1-x) at the query parameter,
    of width <= eps.

    Below 3 the map has at most one attracting fixed point and the entropy
    is exactly 0; at 4 the map is conjugate to the full tent map and the
    entropy is exactly 1. In between, enumerated centers bracket the query
    from both sides until the enclosure is tight enough. On an exhausted
    budget a BudgetExceeded carrying the best sound enclosure is raised.
    """
    if not isinstance(query, RatInterval):
        query = RatInterval.point(parse_rational(query))
    if query.lo < 0 or query.hi > 4:
        raise ValueError("query must lie within [0, 4]")
    eps = parse_rational(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if query.hi <= 3:
        return _EXACT_ZERO
    if query.is_point and query.lo == 4:
        return _EXACT_ONE
    if center_eps is None:
        center_eps = min(DEFAULT_EPS, eps / 4)
    center_eps = parse_rational(center_eps)
    if not isinstance(cache, CenterCache):
        cache = CenterCache(resolve_cache_path(cache))
    deadline = None if budget.seconds is None else time.monotonic() + budget.seconds
    lo_bound = _ZERO
    hi_bound = _ONE
    target = eps * Fraction(9, 10)
    for p_max in range(1, budget.max_period + 1):
        result = enumerate_centers(
            p_max, eps=center_eps, cache=cache, cap=budget.max_period
        )
        brackets = collect_brackets(query, result.centers)
        for s in brackets:
            if s.side is Side.BELOW:
                lo_bound = max(lo_bound, s.entropy.lo)
            elif s.side is Side.ABOVE:
                hi_bound = min(hi_bound, s.entropy.hi)
            else:
                lo_bound = max(lo_bound, s.entropy.lo)
                hi_bound = min(hi_bound, s.entropy.hi)
        if lo_bound > hi_bound:
            raise AssertionError("bracket soundness violated")
        if hi_bound - lo_bound <= target:
            return EntropyBound(lo_bound, hi_bound, Provenance.SANDWICH, certified=True)
        if deadline is not None and time.monotonic() > deadline:
            raise BudgetExceeded(
                EntropyBound(lo_bound, hi_bound, Provenance.SANDWICH, certified=False)
            )
    raise BudgetExceeded(
        EntropyBound(lo_bound, hi_bound, Provenance.SANDWICH, certified=False)
    )
