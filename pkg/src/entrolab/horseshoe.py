"""Horseshoe certificates and the improving-lower-bound search.

A (p, n) certificate consists of p disjoint closed rational intervals
J_1 < ... < J_p such that the n-th iterate image of every J_i strictly
contains the convex hull of all of them; a verified certificate proves
topological entropy >= log2(p)/n. The search streams certificates with
strictly improving bounds; exhausting the budget leaves the best bound
found, which is sound regardless.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Sequence

from .numkit import (
    RatInterval,
    dyadic_ceil,
    dyadic_floor,
    log2_enclosure,
)
from .interval_maps import (
    DEFAULT_NODE_CAP,
    IntervalMap,
    NodeCapExceeded,
    PWLMap,
    QuadMap,
    compose,
    compose_iterate,
)

_ZERO = Fraction(0)
_ONE = Fraction(1)

# denominators beyond this many bits get rounded outward between iterates
_QUAD_ROUND_BITS = 512


@dataclass(frozen=True)
class HorseshoeCert:
    """p >= 2 ordered disjoint compact intervals plus the iterate count."""

    intervals: tuple[RatInterval, ...]
    n: int

    def __post_init__(self) -> None:
        ivs = tuple(
            iv if isinstance(iv, RatInterval) else RatInterval.from_json(iv)
            for iv in self.intervals
        )
        object.__setattr__(self, "intervals", ivs)
        if self.n < 1:
            raise ValueError("iterate count must be >= 1")
        if len(ivs) < 2:
            raise ValueError("a certificate needs at least two intervals")
        for iv in ivs:
            if iv.lo < 0 or iv.hi > 1:
                raise ValueError("certificate intervals must lie within [0, 1]")
        for a, b in zip(ivs, ivs[1:]):
            if a.hi >= b.lo:
                raise ValueError("certificate intervals must be disjoint and ordered")

    @property
    def p(self) -> int:
        return len(self.intervals)

    @property
    def hull(self) -> RatInterval:
        return RatInterval(self.intervals[0].lo, self.intervals[-1].hi)

    def to_json(self) -> dict:
        return {"n": self.n, "intervals": [iv.to_json() for iv in self.intervals]}

    @classmethod
    def from_json(cls, data: dict) -> "HorseshoeCert":
        return cls(
            tuple(RatInterval.from_json(iv) for iv in data["intervals"]),
            int(data["n"]),
        )


@dataclass(frozen=True)
class LowerBoundRecord:
    """A verified certificate together with an enclosure of log2(p)/n."""

    cert: HorseshoeCert
    bound: RatInterval

    def __post_init__(self) -> None:
        if self.bound.lo < 0:
            raise ValueError("lower bounds are nonnegative")

    @property
    def p(self) -> int:
        return self.cert.p

    @property
    def n(self) -> int:
        return self.cert.n


@dataclass(frozen=True)
class SearchBudget:
    max_n: int = 8
    max_p: int = 4096
    grid_depth: int = 3

    def __post_init__(self) -> None:
        if self.max_n < 1 or self.max_p < 2 or self.grid_depth < 0:
            raise ValueError("budget out of range")


def _round_interval_if_big(iv: RatInterval) -> RatInterval:
    size = max(
        iv.lo.denominator.bit_length(),
        iv.hi.denominator.bit_length(),
    )
    if size > 4 * _QUAD_ROUND_BITS:
        return iv.outward(_QUAD_ROUND_BITS)
    return iv


def _quad_iterate_image(f: QuadMap, box: RatInterval, n: int) -> RatInterval:
    x = box
    for _ in range(n):
        x = f.image_on(x)
        x = _round_interval_if_big(x)
    return x


def _iterate_images(
    f: IntervalMap, intervals: Sequence[RatInterval], n: int, node_cap: int
) -> list[RatInterval]:
    if isinstance(f, PWLMap):
        g = compose_iterate(f, n, node_cap)
        return [g.image_on(iv) for iv in intervals]
    return [_quad_iterate_image(f, iv, n) for iv in intervals]


def check_certificate(
    f: IntervalMap,
    cert: HorseshoeCert,
    *,
    node_cap: int = DEFAULT_NODE_CAP,
) -> bool:
    """Exact check that every n-th iterate image strictly contains the hull.

    For piecewise-linear maps and exact quadratic parameters the images are
    computed exactly, so both verdicts are definitive; for enclosure
    parameters a True verdict is sound while False may be precision-limited.
    """
    hull = cert.hull
    images = _iterate_images(f, cert.intervals, cert.n, node_cap)
    return all(img.lo < hull.lo and img.hi > hull.hi for img in images)


# ---------------------------------------------------------------------------
# Candidate generation: piecewise-linear maps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Branch:
    first: int  # node index where the monotone run starts
    last: int
    dom: RatInterval
    img: RatInterval
    increasing: bool


def _branches(g: PWLMap) -> list[_Branch]:
    nodes = g.nodes
    out: list[_Branch] = []
    i = 0
    while i < len(nodes) - 1:
        dy = nodes[i + 1][1] - nodes[i][1]
        if dy == 0:
            i += 1
            continue
        rising = dy > 0
        j = i + 1
        while j < len(nodes) - 1:
            step = nodes[j + 1][1] - nodes[j][1]
            if step == 0 or (step > 0) != rising:
                break
            j += 1
        ya, yb = nodes[i][1], nodes[j][1]
        out.append(
            _Branch(
                i,
                j,
                RatInterval(nodes[i][0], nodes[j][0]),
                RatInterval(min(ya, yb), max(ya, yb)),
                rising,
            )
        )
        i = j
    return out


def _branch_preimage(g: PWLMap, br: _Branch, target: RatInterval) -> RatInterval:
    """Preimage of ``target`` within a monotone branch; needs img >= target."""

    def solve(y: Fraction) -> Fraction:
        lo, hi = br.first, br.last
        # binary search the segment whose y-span contains y
        while lo + 1 < hi:
            mid = (lo + hi) // 2
            if (g.nodes[mid][1] <= y) == br.increasing:
                lo = mid
            else:
                hi = mid
        x1, y1 = g.nodes[lo]
        x2, y2 = g.nodes[lo + 1]
        return x1 + (y - y1) * (x2 - x1) / (y2 - y1)

    a = solve(target.lo)
    b = solve(target.hi)
    return RatInterval(min(a, b), max(a, b))


def _pwl_candidates(
    g: PWLMap, budget: SearchBudget
) -> Iterator[tuple[int, tuple[RatInterval, ...]]]:
    """Yield (p, intervals) candidates, largest p first, deterministically."""
    branches = _branches(g)
    if not branches:
        return
    # candidate targets: the distinct branch images (most frequent first),
    # then a coarse dyadic grid as a fallback
    freq: dict[tuple[Fraction, Fraction], int] = {}
    for br in branches:
        key = (br.img.lo, br.img.hi)
        freq[key] = freq.get(key, 0) + 1
    targets = [
        RatInterval(lo, hi)
        for (lo, hi), _ in sorted(freq.items(), key=lambda kv: (-kv[1], kv[0]))[:64]
    ]
    depth = budget.grid_depth
    if depth > 0:
        denom = 1 << depth
        for i in range(denom):
            for j in range(i + 1, denom + 1):
                targets.append(RatInterval(Fraction(i, denom), Fraction(j, denom)))

    results: list[tuple[int, tuple[RatInterval, ...]]] = []
    seen: set[tuple] = set()
    for target in targets:
        if target.width == 0:
            continue
        selected = [
            br
            for br in branches
            if br.img.contains_interval(target) and target.strictly_contains(br.dom)
        ]
        if len(selected) < 2:
            continue
        if len(selected) > budget.max_p:
            selected = selected[: budget.max_p]
        for shrink_bits in (8, 12, 16):
            eta = target.width / (1 << shrink_bits)
            inner = RatInterval(target.lo + eta, target.hi - eta)
            picked = [br for br in selected if inner.strictly_contains(br.dom)]
            if len(picked) < 2:
                continue
            js = tuple(_branch_preimage(g, br, inner) for br in picked)
            if all(a.hi < b.lo for a, b in zip(js, js[1:])):
                key = tuple((iv.lo, iv.hi) for iv in js)
                if key not in seen:
                    seen.add(key)
                    results.append((len(js), js))
                break
    results.sort(key=lambda item: (-item[0], [(iv.lo, iv.hi) for iv in item[1]]))
    yield from results


# ---------------------------------------------------------------------------
# Candidate generation: quadratic maps (float-guided, exactly verified)
# ---------------------------------------------------------------------------


def _quad_candidates(
    f: QuadMap, n: int, budget: SearchBudget
) -> Iterator[tuple[int, tuple[RatInterval, ...]]]:
    r = float(f.r.mid)
    if r <= 0:
        return
    # breakpoints of the n-th iterate: iterated preimages of the critical point
    pts = {0.0, 1.0}
    level = [0.5]
    pts.update(level)
    for _ in range(n - 1):
        nxt = []
        for y in level:
            disc = 0.25 - y / r
            if disc >= 0:
                d = math.sqrt(disc)
                for x in (0.5 - d, 0.5 + d):
                    if 0.0 <= x <= 1.0:
                        nxt.append(x)
        level = nxt
        pts.update(level)
    bps = sorted(pts)

    def iterate(x: float) -> float:
        for _ in range(n):
            x = r * x * (1.0 - x)
        return x

    vals = [iterate(x) for x in bps]
    branches = []
    for i in range(len(bps) - 1):
        if bps[i + 1] - bps[i] < 1e-15:
            continue
        lo, hi = sorted((vals[i], vals[i + 1]))
        branches.append((bps[i], bps[i + 1], lo, hi))
    if not branches:
        return

    results: list[tuple[int, tuple[RatInterval, ...]]] = []
    grid = [2.0 ** -(n + 2), 2.0 ** -(n + 4), 1.0 / 64.0]
    target_list = [(g, 1.0 - g) for g in grid]
    imgs = sorted({(round(lo, 9), round(hi, 9)) for _, _, lo, hi in branches})
    counts = {key: 0 for key in imgs}
    for _, _, lo, hi in branches:
        counts[(round(lo, 9), round(hi, 9))] += 1
    popular = sorted(counts, key=lambda key: (-counts[key], key))[:16]
    for glo, ghi in popular:
        # pull the certified window slightly inside a common branch image
        eta = (ghi - glo) / 64.0
        target_list.append((glo + eta, ghi - eta))
    bits = n + 24
    for tlo, thi in target_list:
        if thi - tlo < 1e-9:
            continue
        margin = (thi - tlo) * 2.0 ** -(n + 6)
        chosen = []
        for a, b, lo, hi in branches:
            if lo <= tlo - margin and hi >= thi + margin and tlo + margin < a and b < thi - margin:
                chosen.append((a, b, lo, hi))
        if len(chosen) < 2:
            continue
        if len(chosen) > budget.max_p:
            chosen = chosen[: budget.max_p]
        js = []
        ok = True
        for a, b, lo, hi in chosen:
            # pull the target back through the float branch, then shave
            width = b - a
            span = hi - lo
            if span <= 0:
                ok = False
                break
            frac_lo = (tlo - lo) / span
            frac_hi = (thi - lo) / span
            u = a + width * min(frac_lo, frac_hi)
            v = a + width * max(frac_lo, frac_hi)
            shave = (v - u) * 0.05 + 2.0**-bits
            u += shave
            v -= shave
            if not u < v:
                ok = False
                break
            js.append(
                RatInterval(
                    dyadic_ceil(Fraction(u).limit_denominator(1 << bits), bits),
                    dyadic_floor(Fraction(v).limit_denominator(1 << bits), bits),
                )
            )
        if not ok:
            continue
        js.sort(key=lambda iv: iv.lo)
        if all(a.hi < b.lo for a, b in zip(js, js[1:])) and all(iv.lo < iv.hi for iv in js):
            results.append((len(js), tuple(js)))
    results.sort(key=lambda item: (-item[0], [(iv.lo, iv.hi) for iv in item[1]]))
    yield from results


# ---------------------------------------------------------------------------
# The search
# ---------------------------------------------------------------------------


def search_lower_bounds(
    f: IntervalMap,
    budget: SearchBudget = SearchBudget(),
    *,
    node_cap: int = DEFAULT_NODE_CAP,
    bits: int = 32,
) -> Iterator[LowerBoundRecord]:
    """Stream verified certificates with strictly improving lower bounds.

    Candidates come from the monotone-branch structure of the iterates
    (plus a dyadic-grid fallback); every emitted certificate has passed the
    exact check. An empty stream means no horseshoe was found within the
    budget, which is the correct outcome for zero-entropy maps.
    """
    best: Fraction = _ZERO
    g: Optional[PWLMap] = f if isinstance(f, PWLMap) else None
    for n in range(1, budget.max_n + 1):
        if isinstance(f, PWLMap):
            if n > 1:
                try:
                    g = compose(f, g, node_cap)  # type: ignore[arg-type]
                except NodeCapExceeded:
                    return
            candidates = _pwl_candidates(g, budget)  # type: ignore[arg-type]
        else:
            candidates = _quad_candidates(f, n, budget)
        for p, intervals in candidates:
            bound = log2_enclosure(RatInterval.point(p), bits) / n
            if bound.lo <= best:
                break  # candidates are sorted by p descending
            cert = HorseshoeCert(intervals, n)
            if check_certificate(f, cert, node_cap=node_cap):
                yield LowerBoundRecord(cert, bound)
                best = bound.lo
                break
