"""Exact brute-force enumeration of partition intervals.

Ground truth for every closed form in the package: stage-K intervals of a
weighted IFS are aggregated by exponent vector (multinomial counts, exact
rational masses and lengths); atomic-family partitions are measured
through an exact cumulative-mass function (never truncated atom lists),
so masses are exact rationals at every stage within budget.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .ifs_core import (
    AtomicMeasureSpec,
    BudgetExceededError,
    PrimeExponentVector,
    WeightedIFS,
    collapse_probabilities,
    factorize,
)
from .regularity import (
    AmbiguousRegularityError,
    FractionKey,
    InfiniteKey,
    OnePlusLogKey,
    RegularityKey,
    RegularityValue,
    VectorKey,
    assert_separated,
    values_equal,
)
from .sequences import AlphaLengthSequence, multinomial

DEFAULT_BUDGET = 10**7


@dataclass(frozen=True)
class IntervalRecord:
    """Aggregated partition intervals sharing one exponent vector / mass.

    ``k`` is the exponent vector for IFS stages, or a length-1 tuple with a
    representative position index for atomic stages.  ``count`` is the
    number of intervals aggregated into the record.
    """

    stage: int
    k: tuple[int, ...]
    mass: Fraction
    length: Fraction
    count: int
    kind: str  # "ifs" | "atomic" | "gap"
    regularity: RegularityValue | None
    key_hint: RegularityKey

    def alpha_float(self) -> float:
        if self.regularity is None:
            return math.inf
        return self.regularity.to_float()


@dataclass(frozen=True)
class StageEnumeration:
    """One stage of the natural partition sequence: intervals plus gaps."""

    stage: int
    intervals: tuple[IntervalRecord, ...]
    gaps: tuple[IntervalRecord, ...]

    def all_records(self) -> tuple[IntervalRecord, ...]:
        return self.intervals + self.gaps


def _compositions(total: int, parts: int):
    """All tuples of `parts` non-negative ints summing to `total`, lexicographic."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first, *rest)


def _vector_gcd(k: Sequence[int]) -> int:
    g = 0
    for x in k:
        g = math.gcd(g, x)
    return g


# ---------------------------------------------------------------------------
# IFS stages
# ---------------------------------------------------------------------------


def enumerate_stage(
    ifs: WeightedIFS, K: int, budget: int = DEFAULT_BUDGET
) -> StageEnumeration:
    """Aggregate the N^K stage-K intervals by exponent vector.

    Each record carries count = multinomial(K; k).  Gap intervals (mass 0)
    of all levels <= K are reported separately, aggregated by the exponent
    vector of their enclosing level-(j-1) cell.
    """
    if K < 1:
        raise ValueError("stage K must be >= 1")
    if ifs.N**K > budget:
        raise BudgetExceededError(f"N^K = {ifs.N**K} exceeds budget {budget}")
    p_pev = [factorize(p) for p in ifs.probs]
    r_pev = [factorize(r) for r in ifs.ratios]
    collapsed = collapse_probabilities(ifs) if ifs.equal_ratios() else None

    def key_hint_for(k: tuple[int, ...]) -> VectorKey:
        if collapsed is not None:
            folded = collapsed.collapse_vector(k)
            g = _vector_gcd(folded)
            return VectorKey(tuple(x // g for x in folded), collapsed=True)
        g = _vector_gcd(k)
        return VectorKey(tuple(x // g for x in k))

    intervals = []
    for k in _compositions(K, ifs.N):
        mass = Fraction(1)
        length = Fraction(1)
        mass_pev = PrimeExponentVector()
        length_pev = PrimeExponentVector()
        for ki, p, r, pp, rp in zip(k, ifs.probs, ifs.ratios, p_pev, r_pev):
            if ki:
                mass *= p**ki
                length *= r**ki
                mass_pev = mass_pev + pp.scaled(ki)
                length_pev = length_pev + rp.scaled(ki)
        intervals.append(
            IntervalRecord(
                stage=K,
                k=k,
                mass=mass,
                length=length,
                count=multinomial(K, k),
                kind="ifs",
                regularity=RegularityValue(mass_pev, length_pev),
                key_hint=key_hint_for(k),
            )
        )

    gaps = []
    if ifs.gap > 0:
        for level in range(1, K + 1):
            if level == 1:
                gaps.append(
                    IntervalRecord(
                        stage=K,
                        k=(0,) * ifs.N,
                        mass=Fraction(0),
                        length=ifs.gap,
                        count=ifs.N - 1,
                        kind="gap",
                        regularity=None,
                        key_hint=InfiniteKey(),
                    )
                )
                continue
            for cell in _compositions(level - 1, ifs.N):
                length = ifs.gap
                for ki, r in zip(cell, ifs.ratios):
                    length *= r**ki
                gaps.append(
                    IntervalRecord(
                        stage=K,
                        k=cell,
                        mass=Fraction(0),
                        length=length,
                        count=multinomial(level - 1, cell) * (ifs.N - 1),
                        kind="gap",
                        regularity=None,
                        key_hint=InfiniteKey(),
                    )
                )
    return StageEnumeration(stage=K, intervals=tuple(intervals), gaps=tuple(gaps))


# ---------------------------------------------------------------------------
# Atomic cumulative-mass functions (exact)
# ---------------------------------------------------------------------------


def atomic_cdf(spec: AtomicMeasureSpec, y: Fraction) -> Fraction:
    """F(y) = measure of [0, y), exact.

    sigma1 sums the geometric tail of atoms 3^-i < y in closed form.  The
    string families walk atom groups: group j holds (m-1)m^(j-1) atoms of
    weight lambda^j at positions (m*lambda)^j + t*lambda^j; groups fully
    below y telescope to (m*lambda)^(j-1).
    """
    y = Fraction(y)
    if y <= 0:
        return Fraction(0)
    if spec.family == "sigma1":
        # smallest index with 3^-i < y, then the full tail below it
        i0 = 1
        power = Fraction(1, 3)
        while power >= y:
            i0 += 1
            power /= 3
        return Fraction(3, 2) * Fraction(1, 3**i0)
    m = spec.m
    b = spec.base  # 2m - 1, lambda = 1/b
    total = Fraction(0)
    j = 1
    while True:
        group_start = Fraction(m ** (j - 1), b ** (j - 1))  # (m*lambda)^(j-1)
        if y > group_start:
            return total + group_start
        n_j = (m - 1) * m ** (j - 1)
        # atoms below y in group j: positions (m^j + t) * lambda^j, t < n_j
        q = y * b**j - m**j
        count = min(n_j, max(0, math.ceil(q)))
        if count > 0:
            total += Fraction(count, b**j)
        j += 1


def _atomic_cdf_grid(spec: AtomicMeasureSpec, n: int, t: int) -> Fraction:
    """F(t * base^-n) by integer arithmetic on the stage-n grid."""
    b = spec.base
    if t <= 0:
        return Fraction(0)
    if spec.family == "sigma1":
        # largest e with 3^e < t gives the first materialized atom index
        e = 0
        while 3 ** (e + 1) < t:
            e += 1
        if 3**e >= t:  # t == 1
            i0 = n + 1
        else:
            i0 = n - e
        if i0 < 1:
            return Fraction(1, 2)
        return Fraction(3, 2) * Fraction(1, 3**i0)
    m = spec.m
    total_num = 0  # accumulated numerator over denominator b**jmax
    terms: list[tuple[int, int]] = []  # (count or tail numerator, power j)
    j = 1
    while True:
        # full-tail test: t/b^n > m^(j-1)/b^(j-1)
        if t * b ** (j - 1) > m ** (j - 1) * b**n:
            terms.append((m ** (j - 1), j - 1))
            break
        n_j = (m - 1) * m ** (j - 1)
        # count = clamp(ceil(t*b^(j-n) - m^j)) computed exactly
        if j >= n:
            q = t * b ** (j - n) - m**j
        else:
            d = b ** (n - j)
            q = -((m**j * d - t) // d)
        count = min(n_j, max(0, q))
        if count > 0:
            terms.append((count, j))
        j += 1
    jmax = max(p for _, p in terms)
    for c, p in terms:
        total_num += c * b ** (jmax - p)
    return Fraction(total_num, b**jmax)


# ---------------------------------------------------------------------------
# Atomic stages
# ---------------------------------------------------------------------------


def _classify_atomic_mass(
    spec: AtomicMeasureSpec, n: int, mass: Fraction, length: Fraction
) -> tuple[RegularityValue | None, RegularityKey]:
    if mass == 0:
        return None, InfiniteKey()
    value = RegularityValue(factorize(mass), factorize(length))
    q = value.rational_value()
    if q is not None:
        return value, FractionKey(q)
    if 2 * mass == length:
        # mass = base^-n / 2: regularity 1 + log_{base^n} 2
        return value, OnePlusLogKey(n)
    raise AmbiguousRegularityError(
        f"unclassified atomic regularity for mass {mass}, length {length}"
    )


def atomic_stage(
    spec: AtomicMeasureSpec, n: int, budget: int = DEFAULT_BUDGET
) -> StageEnumeration:
    """Partition stage n into base^n left-closed intervals (last closed),
    with exact masses from the cumulative-mass function, aggregated by mass.
    """
    if n < 1:
        raise ValueError("stage n must be >= 1")
    b = spec.base
    cells = b**n
    if cells > budget:
        raise BudgetExceededError(f"base^n = {cells} exceeds budget {budget}")
    length = Fraction(1, cells)
    groups: dict[Fraction, tuple[int, int]] = {}  # mass -> (first index, count)

    if spec.family == "sigma1":
        # only n+2 distinct masses; build them directly
        groups[Fraction(1, 2 * cells)] = (0, 1)
        for i in range(1, n + 1):
            groups[Fraction(1, 3**i)] = (3 ** (n - i), 1)
        zero_count = cells - n - 1
        if zero_count > 0:
            groups[Fraction(0)] = (2, zero_count)
    else:
        m = spec.m
        # place whole atom groups into cells; group j has (m-1)m^(j-1)
        # atoms of weight b^-j at positions (m^j + t') * b^-j.  Once a
        # group's span [(m/b)^j, (m/b)^(j-1)] sits inside cell 0, the rest
        # telescopes to (m/b)^jmax.
        jmax = 1
        while m**jmax * b**n > b**jmax:
            jmax += 1
        num = [0] * cells  # cell mass numerators over b**jmax
        for j in range(1, jmax + 1):
            n_j = (m - 1) * m ** (j - 1)
            w_j = b ** (jmax - j)
            if j <= n:
                step = b ** (n - j)
                base = m**j * step
                for tp in range(n_j):
                    num[base + tp * step] += w_j
            else:
                span = b ** (j - n)  # atoms per interior cell
                t0 = m**j // span
                t1 = (m**j + n_j - 1) // span
                if t0 == t1:
                    num[t0] += n_j * w_j
                else:
                    num[t0] += ((t0 + 1) * span - m**j) * w_j
                    num[t1] += (m**j + n_j - t1 * span) * w_j
                    full = span * w_j
                    for t in range(t0 + 1, t1):
                        num[t] += full
        num[0] += m**jmax  # telescoped tail of groups beyond jmax
        by_num: dict[int, tuple[int, int]] = {}
        for t, v in enumerate(num):
            if v in by_num:
                first, cnt = by_num[v]
                by_num[v] = (first, cnt + 1)
            else:
                by_num[v] = (t, 1)
        den = b**jmax
        groups = {Fraction(v, den): fc for v, fc in by_num.items()}

    records = []
    for mass, (first, cnt) in sorted(groups.items(), key=lambda kv: kv[1][0]):
        value, key = _classify_atomic_mass(spec, n, mass, length)
        records.append(
            IntervalRecord(
                stage=n,
                k=(first,),
                mass=mass,
                length=length,
                count=cnt,
                kind="atomic",
                regularity=value,
                key_hint=key,
            )
        )
    return StageEnumeration(stage=n, intervals=tuple(records), gaps=())


# ---------------------------------------------------------------------------
# Grouping
# ---------------------------------------------------------------------------

_KEY_ORDER = {FractionKey: 0, VectorKey: 1, OnePlusLogKey: 2, InfiniteKey: 3}


def _key_sort_token(key: RegularityKey):
    if isinstance(key, FractionKey):
        payload = (key.value.numerator, key.value.denominator)
    elif isinstance(key, VectorKey):
        payload = (int(key.collapsed), key.vector)
    elif isinstance(key, OnePlusLogKey):
        payload = (key.level,)
    else:
        payload = ()
    return (_KEY_ORDER[type(key)], payload)


def group_by_regularity(
    records: Iterable[IntervalRecord],
) -> dict[RegularityKey, list[tuple[Fraction, int]]]:
    """Group records by exact regularity; never merges undecided values.

    Records share a group iff their regularity values are equal under the
    structural/interval ladder; each group is keyed by its smallest key
    hint and carries (length, multiplicity) pairs sorted by decreasing
    length with equal lengths merged.
    """
    by_canonical: dict[tuple, dict] = {}
    infinite: dict[Fraction, int] = {}
    for rec in records:
        if rec.regularity is None:
            infinite[rec.length] = infinite.get(rec.length, 0) + rec.count
            continue
        canon = rec.regularity.canonical()
        slot = by_canonical.setdefault(
            canon, {"value": rec.regularity, "keys": set(), "lengths": {}}
        )
        slot["keys"].add(rec.key_hint)
        slot["lengths"][rec.length] = slot["lengths"].get(rec.length, 0) + rec.count
    # certify that distinct canonical groups are genuinely distinct
    assert_separated([slot["value"] for slot in by_canonical.values()])
    out: dict[RegularityKey, list[tuple[Fraction, int]]] = {}
    for slot in by_canonical.values():
        key = min(slot["keys"], key=_key_sort_token)
        pairs = sorted(slot["lengths"].items(), key=lambda kv: kv[0], reverse=True)
        out[key] = pairs
    if infinite:
        out[InfiniteKey()] = sorted(infinite.items(), key=lambda kv: kv[0], reverse=True)
    return out


# ---------------------------------------------------------------------------
# Empirical alpha-lengths
# ---------------------------------------------------------------------------


def empirical_alpha_lengths(
    source: WeightedIFS | AtomicMeasureSpec,
    key: RegularityKey,
    depth: int,
    budget: int = DEFAULT_BUDGET,
) -> AlphaLengthSequence:
    """Collect the (length, multiplicity) ladder attaining `key` up to `depth`.

    An unattained key yields an empty sequence (a trivial regularity).
    """
    from .regularity import collapsed_regularity, regularity_of

    target: RegularityValue | None = None
    if isinstance(key, VectorKey):
        if not isinstance(source, WeightedIFS):
            raise ValueError("vector keys require an IFS source")
        cls = (
            collapsed_regularity(source, key.vector)
            if key.collapsed
            else regularity_of(source, key.vector)
        )
        target = cls.alpha_exact

    merged: dict[Fraction, int] = {}
    for stage in range(1, depth + 1):
        if isinstance(source, WeightedIFS):
            enum = enumerate_stage(source, stage, budget=budget)
        else:
            enum = atomic_stage(source, stage, budget=budget)
        for rec in enum.all_records():
            if target is not None:
                if rec.regularity is None or not values_equal(rec.regularity, target):
                    continue
            else:
                if rec.key_hint != key:
                    continue
            merged[rec.length] = merged.get(rec.length, 0) + rec.count
    entries = sorted(merged.items(), key=lambda kv: kv[0], reverse=True)
    return AlphaLengthSequence.from_entries(entries, label=str(key))


# ---------------------------------------------------------------------------
# CSV dump
# ---------------------------------------------------------------------------


def write_records_csv(records: Iterable[IntervalRecord], fh) -> None:
    """Dump records: stage, k-vector, mass, length, regularity(float), key."""
    writer = csv.writer(fh)
    writer.writerow(["stage", "k", "mass", "length", "count", "regularity", "key"])
    for rec in records:
        writer.writerow(
            [
                rec.stage,
                " ".join(str(x) for x in rec.k),
                str(rec.mass),
                str(rec.length),
                rec.count,
                repr(rec.alpha_float()),
                str(rec.key_hint),
            ]
        )
