"""Regularity values of partition intervals, exactly compared.

The regularity of an interval with mass mu and length ell is
alpha = log(mu)/log(ell).  For rational parameters both logs are integer
combinations of logs of primes, so alpha is represented exactly by the
pair of prime exponent vectors (mass product, length product).

Equality of two regularity values is decided by a ladder:

1. structural — proportional (mass, length) exponent-vector pairs are
   equal; a parallel pair means alpha is the rational exponent ratio, and
   a rational value can never equal a non-parallel (irrational) one;
2. interval arithmetic at 64, then 256, then 1024 bits;
3. if the intervals still overlap, ``AmbiguousRegularityError`` is
   raised — values are never silently merged.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath

from .ifs_core import (
    CollapsedProbabilities,
    PrimeExponentVector,
    WeightedIFS,
    check_rational_independence,
    collapse_probabilities,
    factorize,
)


class AmbiguousRegularityError(RuntimeError):
    """Two regularity values could not be separated at maximum precision."""


# ---------------------------------------------------------------------------
# Keys
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VectorKey:
    """Primitive exponent vector; ``collapsed`` marks distinct-probability slots."""

    vector: tuple[int, ...]
    collapsed: bool = False

    def __str__(self) -> str:
        return "(" + ",".join(str(v) for v in self.vector) + ")"


@dataclass(frozen=True)
class FractionKey:
    """Rational regularity k1/K in lowest terms (atomic families)."""

    value: Fraction

    def __str__(self) -> str:
        return f"{self.value.numerator}/{self.value.denominator}"


@dataclass(frozen=True)
class OnePlusLogKey:
    """Regularity 1 + log_{3^n} 2 attained by the leftmost stage-n interval."""

    level: int

    def __str__(self) -> str:
        return f"1+log_{{3^{self.level}}}2"


@dataclass(frozen=True)
class InfiniteKey:
    """Zero-mass intervals: regularity +infinity."""

    def __str__(self) -> str:
        return "inf"


RegularityKey = VectorKey | FractionKey | OnePlusLogKey | InfiniteKey


# ---------------------------------------------------------------------------
# Exact values
# ---------------------------------------------------------------------------

_PREC_LADDER = (64, 256, 1024)
_ladder_start = 64


def set_precision_ladder(start_bits: int) -> None:
    """Choose the first rung of the interval-precision ladder (64/256/1024).

    Comparisons still escalate through the remaining rungs before declaring
    two values inseparable; a higher start just skips the cheap rungs.
    """
    global _ladder_start
    if start_bits not in _PREC_LADDER:
        raise ValueError(f"precision must be one of {_PREC_LADDER}, got {start_bits}")
    _ladder_start = start_bits


def precision_ladder() -> tuple[int, ...]:
    """The active ladder: rungs at or above the configured starting precision."""
    return tuple(p for p in _PREC_LADDER if p >= _ladder_start)


@dataclass(frozen=True)
class RegularityValue:
    """alpha = log(mass)/log(length) as an exact pair of exponent vectors."""

    mass_pev: PrimeExponentVector
    length_pev: PrimeExponentVector

    def __post_init__(self):
        if self.length_pev.is_zero():
            raise ValueError("length exponent vector must be nonzero")

    def rational_value(self) -> Fraction | None:
        """The exact rational alpha when the two vectors are parallel, else None."""
        if self.mass_pev.is_zero():
            return Fraction(0)
        den = self.length_pev.exponents()
        num = self.mass_pev.exponents()
        p0, d0 = next(iter(sorted(den.items())))
        n0 = num.get(p0, 0)
        # candidate alpha = n0/d0; parallel iff num*d0 == den*n0
        if self.mass_pev.scaled(d0) == self.length_pev.scaled(n0):
            return Fraction(n0, d0)
        return None

    def canonical(self) -> tuple:
        """Hashable canonical form: equal values share it, proportional pairs merge."""
        q = self.rational_value()
        if q is not None:
            return ("rational", q)
        g = 0
        for _, e in self.mass_pev.items():
            g = math.gcd(g, e)
        for _, e in self.length_pev.items():
            g = math.gcd(g, e)
        mass = self.mass_pev if g <= 1 else _divide_pev(self.mass_pev, g)
        length = self.length_pev if g <= 1 else _divide_pev(self.length_pev, g)
        return ("pair", mass.key(), length.key())

    def to_float(self) -> float:
        q = self.rational_value()
        if q is not None:
            return float(q)
        return self.mass_pev.log() / self.length_pev.log()

    def interval(self, prec_bits: int):
        """Enclosing interval of alpha at the given binary precision."""
        iv = mpmath.iv
        old = iv.prec
        old_mp = mpmath.mp.prec
        iv.prec = prec_bits
        # endpoint conversion must not round away interval bits
        mpmath.mp.prec = prec_bits + 32
        try:
            num = iv.mpf(0)
            for p, e in self.mass_pev.items():
                num += e * iv.log(p)
            den = iv.mpf(0)
            for p, e in self.length_pev.items():
                den += e * iv.log(p)
            quot = num / den
            return (mpmath.mpf(quot.a), mpmath.mpf(quot.b))
        finally:
            iv.prec = old
            mpmath.mp.prec = old_mp


def _divide_pev(pev: PrimeExponentVector, g: int) -> PrimeExponentVector:
    return PrimeExponentVector({p: e // g for p, e in pev.items()})


def values_equal(a: RegularityValue, b: RegularityValue) -> bool:
    """Exact equality via the structural/interval ladder."""
    if a.canonical() == b.canonical():
        return True
    qa, qb = a.rational_value(), b.rational_value()
    if qa is not None and qb is not None:
        return qa == qb
    if (qa is None) != (qb is None):
        # a rational never equals a non-parallel (irrational) quotient
        return False
    for prec in precision_ladder():
        lo_a, hi_a = a.interval(prec)
        lo_b, hi_b = b.interval(prec)
        if hi_a < lo_b or hi_b < lo_a:
            return False
    raise AmbiguousRegularityError(
        f"cannot separate regularity values near {a.to_float()!r} at "
        f"{_PREC_LADDER[-1]} bits"
    )


def assert_separated(values: Sequence[RegularityValue]) -> None:
    """Certify pairwise distinctness of values with distinct canonical forms.

    Values are sorted; separating each adjacent pair separates all pairs.
    Raises ``AmbiguousRegularityError`` when a pair cannot be separated.
    """
    order = sorted(values, key=lambda v: v.to_float())
    for a, b in zip(order, order[1:]):
        if values_equal(a, b):
            raise AmbiguousRegularityError(
                "distinct canonical forms compare equal through the ladder"
            )


# ---------------------------------------------------------------------------
# Regularity classes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RegularityClass:
    """A primitive key with its exact and floating regularity value."""

    key: RegularityKey
    alpha_exact: RegularityValue
    alpha_float: float
    K: int


def _vector_gcd(k: Sequence[int]) -> int:
    g = 0
    for x in k:
        g = math.gcd(g, x)
    return g


def regularity_of(ifs: WeightedIFS, k: Sequence[int]) -> RegularityClass:
    """Exact regularity of the exponent vector k (convention 0*log0 = 0)."""
    k = tuple(int(x) for x in k)
    if len(k) != ifs.N:
        raise ValueError(f"exponent vector has length {len(k)}, expected {ifs.N}")
    if any(x < 0 for x in k):
        raise ValueError("exponent vector components must be non-negative")
    if not any(k):
        raise ValueError("exponent vector must be nonzero")
    mass = PrimeExponentVector()
    length = PrimeExponentVector()
    for ki, p, r in zip(k, ifs.probs, ifs.ratios):
        if ki:
            mass = mass + factorize(p).scaled(ki)
            length = length + factorize(r).scaled(ki)
    value = RegularityValue(mass, length)
    g = _vector_gcd(k)
    return RegularityClass(
        key=VectorKey(tuple(x // g for x in k)),
        alpha_exact=value,
        alpha_float=value.to_float(),
        K=sum(k),
    )


def collapsed_regularity(ifs: WeightedIFS, kprime: Sequence[int]) -> RegularityClass:
    """Regularity of a collapsed vector k' for a single-ratio system.

    alpha(k') = (1/K) log_r(p'_1^{k'_1} ... p'_w^{k'_w}); valid when the
    distinct probabilities are multiplicatively independent.
    """
    if not ifs.equal_ratios():
        raise ValueError("collapsed regularity requires all scaling ratios equal")
    collapsed = collapse_probabilities(ifs)
    kprime = tuple(int(x) for x in kprime)
    if len(kprime) != collapsed.w:
        raise ValueError(f"collapsed vector has length {len(kprime)}, expected {collapsed.w}")
    if any(x < 0 for x in kprime) or not any(kprime):
        raise ValueError("collapsed vector must be nonzero with non-negative parts")
    if collapsed.w > 1:
        independent, witness = check_rational_independence(collapsed.distinct)
        if not independent:
            raise ValueError(
                f"distinct probabilities are multiplicatively dependent (witness {witness})"
            )
    K = sum(kprime)
    mass = PrimeExponentVector()
    for kq, pq in zip(kprime, collapsed.distinct):
        if kq:
            mass = mass + factorize(pq).scaled(kq)
    length = factorize(ifs.ratios[0]).scaled(K)
    value = RegularityValue(mass, length)
    g = _vector_gcd(kprime)
    return RegularityClass(
        key=VectorKey(tuple(x // g for x in kprime), collapsed=True),
        alpha_exact=value,
        alpha_float=value.to_float(),
        K=K,
    )


def is_monofractal(ifs: WeightedIFS) -> RegularityValue | None:
    """The common unit-vector regularity when all maps share it, else None.

    Exactness matters: the common value may be irrational (e.g. the
    Devil's-staircase system), so the comparison uses the full ladder.
    """
    units = []
    for i in range(ifs.N):
        k = [0] * ifs.N
        k[i] = 1
        units.append(regularity_of(ifs, k).alpha_exact)
    first = units[0]
    for other in units[1:]:
        if not values_equal(first, other):
            return None
    return first


# ---------------------------------------------------------------------------
# Primitive vectors and hypothesis (H)
# ---------------------------------------------------------------------------


def primitive_vectors(N: int, K_max: int) -> list[tuple[int, ...]]:
    """All k with gcd 1 and 1 <= sum(k) <= K_max, in lexicographic order."""
    if N < 2:
        raise ValueError("N must be at least 2")
    if K_max < 1:
        raise ValueError("K_max must be at least 1")
    out: list[tuple[int, ...]] = []

    def rec(prefix: list[int], remaining: int):
        if len(prefix) == N - 1:
            for last in range(remaining + 1):
                k = (*prefix, last)
                if any(k) and _vector_gcd(k) == 1:
                    out.append(k)
            return
        for v in range(remaining + 1):
            prefix.append(v)
            rec(prefix, remaining - v)
            prefix.pop()

    rec([], K_max)
    return out


@dataclass
class HypothesisReport:
    """Result of checking that primitive vectors have pairwise distinct regularity."""

    holds: bool
    collisions: list[tuple[float, list[tuple[int, ...]]]] = field(default_factory=list)
    ambiguous: list[str] = field(default_factory=list)


def check_hypothesis_H(ifs: WeightedIFS, K_max: int) -> HypothesisReport:
    """Group primitive vectors by exact regularity and certify separations.

    Equal-ratio systems are tested over collapsed vectors (one slot per
    distinct probability): repeated probabilities make full vectors collide
    by construction, while the partition analysis runs on collapsed classes.
    """
    collapsed = None
    if ifs.equal_ratios():
        from .ifs_core import check_rational_independence, collapse_probabilities

        collapsed = collapse_probabilities(ifs)
        if collapsed.w > 1:
            independent, witness = check_rational_independence(collapsed.distinct)
            if not independent:
                return HypothesisReport(
                    holds=False,
                    collisions=[],
                    ambiguous=[
                        "distinct probabilities are multiplicatively dependent "
                        f"(witness {witness})"
                    ],
                )
        if collapsed.w == ifs.N:
            collapsed = None  # all probabilities distinct: same classes
    width = collapsed.w if collapsed is not None else ifs.N
    groups: dict[tuple, tuple[RegularityValue, list[tuple[int, ...]]]] = {}
    for k in primitive_vectors(width, K_max):
        if collapsed is not None:
            value = collapsed_regularity(ifs, k).alpha_exact
        else:
            value = regularity_of(ifs, k).alpha_exact
        key = value.canonical()
        if key in groups:
            groups[key][1].append(k)
        else:
            groups[key] = (value, [k])
    collisions = [
        (value.to_float(), vectors) for value, vectors in groups.values() if len(vectors) > 1
    ]
    collisions.sort(key=lambda item: item[0])
    ambiguous: list[str] = []
    try:
        assert_separated([value for value, _ in groups.values()])
    except AmbiguousRegularityError as exc:
        ambiguous.append(str(exc))
    return HypothesisReport(
        holds=not collisions and not ambiguous,
        collisions=collisions,
        ambiguous=ambiguous,
    )
