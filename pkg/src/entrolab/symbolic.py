"""Subshifts of finite type: word counting, certified entropy, mixing,
prefix recoding onto the binary Cantor set, and the gluing combinator.

An SFT is given by a 0/1 transition matrix (entry (a, b) = 1 iff the
two-letter word ab is allowed). All entropy computations run on the
essential subgraph -- the states lying on bi-infinite allowed paths -- and
use exact integer arithmetic end to end; no floating-point eigensolvers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from math import gcd
from typing import Callable, Optional, Sequence, Union

from .numkit import (
    RatInterval,
    floor_log2,
    format_rational,
    log2_enclosure,
    parse_rational,
)

_ZERO = Fraction(0)


class Provenance(str, Enum):
    HORSESHOE = "HORSESHOE"
    VARIATION = "VARIATION"
    SFT = "SFT"
    SANDWICH = "SANDWICH"
    EXACT = "EXACT"


@dataclass(frozen=True)
class EntropyBound:
    """A certified or estimated enclosure [lo, hi] of a log2-entropy value."""

    lo: Fraction
    hi: Fraction
    provenance: Provenance
    certified: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "lo", parse_rational(self.lo))
        object.__setattr__(self, "hi", parse_rational(self.hi))
        if self.lo < 0:
            raise ValueError("entropy lower bound must be nonnegative")
        if self.lo > self.hi:
            raise ValueError("entropy bounds out of order")

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def interval(self) -> RatInterval:
        return RatInterval(self.lo, self.hi)

    def to_json(self) -> dict:
        return {
            "lo": format_rational(self.lo),
            "hi": format_rational(self.hi),
            "provenance": self.provenance.value,
            "certified": self.certified,
        }

    @classmethod
    def from_json(cls, data: dict) -> "EntropyBound":
        return cls(
            parse_rational(data["lo"]),
            parse_rational(data["hi"]),
            Provenance(data["provenance"]),
            bool(data.get("certified", False)),
        )


class MixingVerdict(Enum):
    MIXING = "MIXING"
    NOT_MIXING = "NOT_MIXING"


@dataclass(frozen=True)
class SFT:
    """A subshift of finite type over {0, ..., k-1} with length-2 forbidden
    words, i.e. a k-by-k 0/1 transition matrix."""

    allowed: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        rows = tuple(tuple(int(v) for v in row) for row in self.allowed)
        object.__setattr__(self, "allowed", rows)
        k = len(rows)
        if k < 1:
            raise ValueError("alphabet must be nonempty")
        for row in rows:
            if len(row) != k:
                raise ValueError("transition matrix must be square")
            if any(v not in (0, 1) for v in row):
                raise ValueError("transition matrix entries must be 0 or 1")

    @property
    def alphabet_size(self) -> int:
        return len(self.allowed)

    @classmethod
    def full_shift(cls, k: int) -> "SFT":
        return cls(tuple(tuple(1 for _ in range(k)) for _ in range(k)))

    @classmethod
    def golden_mean(cls) -> "SFT":
        """Binary shift forbidding the word 11."""
        return cls(((1, 1), (1, 0)))

    def to_json(self) -> dict:
        return {"alphabet": self.alphabet_size, "allowed": [list(r) for r in self.allowed]}

    @classmethod
    def from_json(cls, data: dict) -> "SFT":
        rows = data["allowed"]
        sft = cls(tuple(tuple(row) for row in rows))
        if "alphabet" in data and int(data["alphabet"]) != sft.alphabet_size:
            raise ValueError("alphabet field disagrees with matrix size")
        return sft


def word_to_str(word: Sequence[int], alphabet_size: int) -> str:
    if alphabet_size <= 10:
        return "".join(str(a) for a in word)
    return ".".join(str(a) for a in word)


def str_to_word(text: str, alphabet_size: int) -> tuple[int, ...]:
    if text == "":
        return ()
    if alphabet_size <= 10:
        letters = tuple(int(ch) for ch in text)
    else:
        letters = tuple(int(part) for part in text.split("."))
    if any(not 0 <= a < alphabet_size for a in letters):
        raise ValueError("letter outside alphabet")
    return letters


# ---------------------------------------------------------------------------
# Graph structure
# ---------------------------------------------------------------------------


def _sccs(adj: Sequence[Sequence[int]], states: Sequence[int]) -> list[list[int]]:
    """Strongly connected components (Kosaraju, iterative), over ``states``."""
    state_set = set(states)
    order: list[int] = []
    seen: set[int] = set()
    for s in states:
        if s in seen:
            continue
        stack = [(s, iter([t for t in states if adj[s][t]]))]
        seen.add(s)
        while stack:
            node, it = stack[-1]
            advanced = False
            for t in it:
                if t not in seen:
                    seen.add(t)
                    stack.append((t, iter([u for u in states if adj[t][u]])))
                    advanced = True
                    break
            if not advanced:
                order.append(node)
                stack.pop()
    comp: dict[int, int] = {}
    comps: list[list[int]] = []
    for s in reversed(order):
        if s in comp:
            continue
        group = [s]
        comp[s] = len(comps)
        frontier = [s]
        while frontier:
            node = frontier.pop()
            for t in states:
                if adj[t][node] and t in state_set and t not in comp:
                    comp[t] = len(comps)
                    group.append(t)
                    frontier.append(t)
        comps.append(sorted(group))
    return comps


def _cycle_states(z: SFT) -> set[int]:
    states = range(z.alphabet_size)
    out = set()
    for scc in _sccs(z.allowed, list(states)):
        if len(scc) > 1 or z.allowed[scc[0]][scc[0]]:
            out.update(scc)
    return out


def essential_states(z: SFT) -> tuple[int, ...]:
    """States that lie on some bi-infinite allowed path: reachable from a
    cycle and reaching a cycle."""
    k = z.alphabet_size
    cyc = _cycle_states(z)
    fwd = set(cyc)  # reachable from a cycle
    frontier = list(cyc)
    while frontier:
        a = frontier.pop()
        for b in range(k):
            if z.allowed[a][b] and b not in fwd:
                fwd.add(b)
                frontier.append(b)
    bwd = set(cyc)  # reaches a cycle
    frontier = list(cyc)
    while frontier:
        b = frontier.pop()
        for a in range(k):
            if z.allowed[a][b] and a not in bwd:
                bwd.add(a)
                frontier.append(a)
    return tuple(sorted(fwd & bwd))


def language_contains(z: SFT, word: Sequence[int]) -> bool:
    """Membership in the language of the subshift (essential convention)."""
    ess = set(essential_states(z))
    letters = tuple(word)
    if any(a not in ess for a in letters):
        return False
    return all(z.allowed[a][b] for a, b in zip(letters, letters[1:]))


def count_words(z: SFT, n: int) -> int:
    """Number of length-n words extendable to bi-infinite allowed sequences."""
    if n < 1:
        raise ValueError("word length must be >= 1")
    ess = essential_states(z)
    if not ess:
        return 0
    vec = {s: 1 for s in ess}
    for _ in range(n - 1):
        nxt = {s: 0 for s in ess}
        for a in ess:
            row = z.allowed[a]
            total = 0
            for b in ess:
                if row[b]:
                    total += vec[b]
            nxt[a] = total
        vec = nxt
    return sum(vec.values())


def check_mixing(z: SFT) -> MixingVerdict:
    """MIXING iff the essential transition matrix is primitive."""
    ess = essential_states(z)
    if not ess:
        return MixingVerdict.NOT_MIXING
    comps = _sccs(z.allowed, list(ess))
    if len(comps) != 1:
        return MixingVerdict.NOT_MIXING
    states = comps[0]
    # aperiodicity: gcd over edges of (depth(u) + 1 - depth(v)) from a BFS
    root = states[0]
    depth = {root: 0}
    frontier = [root]
    while frontier:
        nxt = []
        for a in frontier:
            for b in states:
                if z.allowed[a][b] and b not in depth:
                    depth[b] = depth[a] + 1
                    nxt.append(b)
        frontier = nxt
    g = 0
    for a in states:
        for b in states:
            if z.allowed[a][b]:
                g = gcd(g, depth[a] + 1 - depth[b])
    return MixingVerdict.MIXING if abs(g) == 1 else MixingVerdict.NOT_MIXING


# ---------------------------------------------------------------------------
# Certified entropy
# ---------------------------------------------------------------------------


def _perron_bracket(rows: list[list[int]], rel_gap: Fraction) -> tuple[Fraction, Fraction]:
    """Exact rational bracket of the Perron root of an irreducible 0/1 block.

    Power iteration on A + I (primitive whenever A is irreducible) with
    min/max Rayleigh-style ratios: for any positive integer vector x,
    min_i (Bx)_i / x_i <= lambda(B) <= max_i (Bx)_i / x_i, and the gap
    contracts geometrically. Everything stays in exact integers.
    """
    m = len(rows)
    x = [1] * m
    for _ in range(200_000):
        y = [x[i] + sum(x[j] for j in range(m) if rows[i][j]) for i in range(m)]
        ratios = [Fraction(y[i], x[i]) for i in range(m)]
        lo, hi = min(ratios), max(ratios)
        if hi - lo <= lo * rel_gap:
            return lo - 1, hi - 1
        shrink = 0
        for v in y:
            shrink = gcd(shrink, v)
        x = [v // shrink for v in y] if shrink > 1 else y
    raise ArithmeticError("Perron bracket did not converge")


def sft_entropy(z: SFT, eps: Union[Fraction, str, int], *, provenance: Provenance = Provenance.SFT) -> EntropyBound:
    """Certified enclosure of the entropy lim log2(N_n)/n, width <= eps.

    The value is log2 of the largest Perron root over the strongly
    connected components of the essential graph (0 when that graph is
    empty or carries only isolated cycles).
    """
    eps = parse_rational(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    ess = essential_states(z)
    if not ess:
        return EntropyBound(_ZERO, _ZERO, provenance, certified=True)
    lam_lo = Fraction(1)
    lam_hi = Fraction(1)
    rel_gap = eps * Fraction(3, 10)
    for scc in _sccs(z.allowed, list(ess)):
        if len(scc) == 1 and not z.allowed[scc[0]][scc[0]]:
            continue
        sub = [[z.allowed[a][b] for b in scc] for a in scc]
        lo, hi = _perron_bracket(sub, rel_gap)
        lam_lo = max(lam_lo, lo)
        lam_hi = max(lam_hi, hi)
    bits = max(8, -floor_log2(eps) + 3)
    enc = log2_enclosure(RatInterval(lam_lo, lam_hi), bits)
    lo = max(_ZERO, enc.lo)
    hi = max(_ZERO, enc.hi)
    bound = EntropyBound(lo, hi, provenance, certified=True)
    if bound.width > eps:
        raise ArithmeticError("entropy enclosure wider than requested")
    return bound


# ---------------------------------------------------------------------------
# Prefix recoding onto {0,1}
# ---------------------------------------------------------------------------


def _require_admissible(z: SFT) -> None:
    if z.alphabet_size != 2:
        raise ValueError("prefix recoding is defined for binary subshifts")
    if check_mixing(z) is not MixingVerdict.MIXING:
        raise ValueError("subshift must be mixing")
    ess = essential_states(z)
    branching = any(sum(z.allowed[a][b] for b in ess) >= 2 for a in ess)
    if not branching:
        raise ValueError("subshift must have positive entropy")


def prefix_encode(z: SFT, word: Union[str, Sequence[int]]) -> str:
    """Monotone prefix encoding of a language word into a binary word.

    Scans the word left to right; position k contributes its letter to the
    output exactly when flipping that letter still leaves a language word,
    i.e. when the prefix is a genuine branch point.
    """
    _require_admissible(z)
    letters = str_to_word(word, 2) if isinstance(word, str) else tuple(word)
    if not language_contains(z, letters):
        raise ValueError("word is not in the language")
    out = []
    for k in range(len(letters)):
        flipped = letters[:k] + (1 - letters[k],)
        if language_contains(z, flipped):
            out.append(str(letters[k]))
    return "".join(out)


def prefix_decode(z: SFT, bits: str) -> str:
    """Shortest language word encoding to ``bits``; inverts prefix_encode.

    Greedy reconstruction: at a branch point the encoder emitted a symbol,
    so consume the next target bit; at a forced extension nothing was
    emitted, so follow the single allowed letter.
    """
    _require_admissible(z)
    if any(ch not in "01" for ch in bits):
        raise ValueError("target must be a binary word")
    ess = set(essential_states(z))
    word: list[int] = []
    produced = 0
    forced_run = 0
    while produced < len(bits):
        last = word[-1] if word else None
        if last is None:
            options = [a for a in (0, 1) if a in ess]
        else:
            options = [a for a in (0, 1) if a in ess and z.allowed[last][a]]
        if len(options) == 2:
            word.append(int(bits[produced]))
            produced += 1
            forced_run = 0
        elif len(options) == 1:
            word.append(options[0])
            forced_run += 1
            if forced_run > z.alphabet_size + 2:
                raise ValueError("subshift is not admissible for decoding")
        else:
            raise ValueError("dead end in essential graph")
    return word_to_str(tuple(word), 2)


def mixing_gap(z: SFT) -> int:
    """Smallest g such that any two language words can occur in one
    configuration separated by exactly g symbols."""
    _require_admissible(z)
    ess = essential_states(z)
    idx = {s: i for i, s in enumerate(ess)}
    m = len(ess)
    mat = [[z.allowed[a][b] for b in ess] for a in ess]
    power = [row[:] for row in mat]
    g = 0
    limit = (m - 1) * (m - 1) + 2
    while g <= limit:
        if all(all(v for v in row) for row in power):
            return g
        power = [
            [1 if any(power[i][k] and mat[k][j] for k in range(m)) else 0 for j in range(m)]
            for i in range(m)
        ]
        g += 1
    raise ArithmeticError("graph is not primitive")


def prefix_modulus(z: SFT, k: int) -> int:
    """Input length guaranteeing >= k encoded output symbols."""
    psi = mixing_gap(z)
    t = 1
    for _ in range(k):
        t = t + psi + 1
    return t


@dataclass(frozen=True)
class PrefixMapOracle:
    """A computable map on binary sequences exposed through finite prefixes.

    ``fn`` maps an input prefix to a determined output prefix (monotone:
    extending the input only extends the output). ``modulus(m)`` returns an
    input length sufficient to determine m output symbols.
    """

    fn: Callable[[str], str]
    modulus: Callable[[int], int]

    def __call__(self, prefix: str) -> str:
        return self.fn(prefix)


def identity_prefix_oracle() -> PrefixMapOracle:
    return PrefixMapOracle(fn=lambda b: b, modulus=lambda m: m)


def shift_prefix_oracle(z: SFT) -> PrefixMapOracle:
    """The shift of ``z`` transported to the full binary Cantor set via the
    prefix recoding; surjective whenever ``z`` is mixing."""
    _require_admissible(z)
    psi = mixing_gap(z)
    states = z.alphabet_size

    def fn(prefix: str) -> str:
        if prefix == "":
            return ""
        word = prefix_decode(z, prefix)
        return prefix_encode(z, word[1:])

    def modulus(m: int) -> int:
        # conservative: enough input bits that the decoded word, shifted,
        # still crosses >= m branch points
        return (m * (psi + 1) + 1) * (states + 1)

    return PrefixMapOracle(fn=fn, modulus=modulus)


class NeedMoreInput(ValueError):
    """Raised when a glued-map query cannot be answered from the prefix."""

    def __init__(self, needed: int):
        super().__init__(f"need at least {needed} input symbols")
        self.needed = needed


def glue_prefix_maps(
    components: Sequence[PrefixMapOracle],
    word: str,
    *,
    min_out: Optional[int] = None,
) -> str:
    """Combine component maps into one map on binary sequences.

    Inputs starting 0^k 1 are routed to component k (the last component
    repeats for k beyond the list), keeping the 0^k 1 header; all-zero
    inputs map to all-zero outputs. Returns the determined output prefix.
    """
    if not components:
        raise ValueError("need at least one component")
    if any(ch not in "01" for ch in word):
        raise ValueError("input must be a binary word")
    k = word.find("1")
    if k < 0:
        out = "0" * len(word)
    else:
        comp = components[min(k, len(components) - 1)]
        out = "0" * k + "1" + comp(word[k + 1 :])
    if min_out is not None and len(out) < min_out:
        raise NeedMoreInput(glue_modulus(components, min_out))
    return out


def glue_modulus(components: Sequence[PrefixMapOracle], m: int) -> int:
    """Input length sufficient to determine m output symbols of the glue."""
    needed = m
    for k in range(m):
        comp = components[min(k, len(components) - 1)]
        needed = max(needed, k + 1 + comp.modulus(max(0, m - k - 1)))
    return needed
