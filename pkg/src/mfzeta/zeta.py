"""Partition zeta functions and classical geometric zeta functions.

Series forms carry a multiplicity law and certified geometric tail
bounds; lattice classes get exact rational functions of z = b^s over a
rational base b in (0,1).  Abscissas of convergence come in a closed
(entropy-formula) flavor and a numeric root-test flavor.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .ifs_core import (
    AtomicMeasureSpec,
    FractalStringSpec,
    PrimeExponentVector,
    WeightedIFS,
    check_rational_independence,
    collapse_probabilities,
    factorize,
)
from .regularity import (
    FractionKey,
    InfiniteKey,
    OnePlusLogKey,
    RegularityKey,
    VectorKey,
    collapsed_regularity,
    primitive_vectors,
    regularity_of,
    values_equal,
)
from .sequences import (
    CollapsedLaw,
    GeometricLaw,
    MultinomialLaw,
    MultiplicityLaw,
    multinomial,
)

# Growth-condition constants licensing the pointwise explicit formulas for
# every lattice zeta produced here: polynomial-free growth along the
# screen (order kappa = 0) with constant A = 1.
LANGUID_ORDER_KAPPA = 0.0
LANGUID_CONSTANT_A = 1.0


class DivergenceError(ValueError):
    """Series evaluation requested at or left of the certified region."""


class HypothesisViolationError(ValueError):
    """Distinct-regularity hypothesis fails for the requested class."""


# ---------------------------------------------------------------------------
# Exact polynomials over the rationals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Poly:
    """Polynomial with rational coefficients, ascending order."""

    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        cs = tuple(Fraction(c) for c in self.coeffs)
        while len(cs) > 1 and cs[-1] == 0:
            cs = cs[:-1]
        if not cs:
            cs = (Fraction(0),)
        object.__setattr__(self, "coeffs", cs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return self.coeffs == (Fraction(0),)

    def __call__(self, z):
        exact = isinstance(z, (int, Fraction))
        out = Fraction(0) if exact else 0j
        for c in reversed(self.coeffs):
            out = out * z + (c if exact else complex(c))
        return out

    def __add__(self, other: "Poly") -> "Poly":
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = other.coeffs + (Fraction(0),) * (n - len(other.coeffs))
        return Poly(tuple(x + y for x, y in zip(a, b)))

    def __sub__(self, other: "Poly") -> "Poly":
        return self + other.scale(Fraction(-1))

    def scale(self, c: Fraction) -> "Poly":
        return Poly(tuple(Fraction(c) * x for x in self.coeffs))

    def __mul__(self, other: "Poly") -> "Poly":
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Poly(tuple(out))

    def divmod(self, other: "Poly") -> tuple["Poly", "Poly"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        q = [Fraction(0)] * max(1, len(self.coeffs) - len(other.coeffs) + 1)
        r = list(self.coeffs)
        d = other.coeffs
        while len(r) >= len(d) and any(r):
            if r[-1] == 0:
                r.pop()
                continue
            shift = len(r) - len(d)
            factor = r[-1] / d[-1]
            q[shift] = factor
            for i, c in enumerate(d):
                r[i + shift] -= factor * c
            r.pop()
        return Poly(tuple(q)), Poly(tuple(r) if r else (Fraction(0),))

    def derivative(self) -> "Poly":
        if self.degree == 0:
            return Poly((Fraction(0),))
        return Poly(tuple(Fraction(i) * c for i, c in enumerate(self.coeffs) if i))


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Monic gcd over the rationals (Euclid)."""
    while not b.is_zero():
        _, r = a.divmod(b)
        a, b = b, r
    if a.is_zero():
        return Poly((Fraction(1),))
    return a.scale(1 / a.coeffs[-1])


def _canonical_pair(num: Poly, den: Poly) -> tuple[Poly, Poly]:
    """gcd-reduced, integer content-free, den constant term positive."""
    g = poly_gcd(num, den)
    if g.degree > 0:
        num, _ = num.divmod(g)
        den, _ = den.divmod(g)
    lcm = 1
    for c in num.coeffs + den.coeffs:
        lcm = lcm * c.denominator // math.gcd(lcm, c.denominator)
    ints = [int(c * lcm) for c in num.coeffs] + [int(c * lcm) for c in den.coeffs]
    content = 0
    for v in ints:
        content = math.gcd(content, abs(v))
    scale = Fraction(lcm, content or 1)
    num, den = num.scale(scale), den.scale(scale)
    if den(Fraction(0)) < 0:
        num, den = num.scale(Fraction(-1)), den.scale(Fraction(-1))
    return num, den


# ---------------------------------------------------------------------------
# Zeta function forms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RationalZeta:
    """zeta(s) = num(z)/den(z) with z = base^s, base a rational in (0,1)."""

    num: Poly
    den: Poly
    base: Fraction
    label: str = ""

    def __post_init__(self):
        if not (0 < self.base < 1):
            raise ValueError("base must lie in (0,1)")
        num, den = _canonical_pair(self.num, self.den)
        if den(Fraction(0)) == 0:
            raise ValueError("denominator must not vanish at z=0")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @property
    def entire(self) -> bool:
        return self.den.degree == 0

    def z_of(self, s: complex) -> complex:
        return cmath.exp(complex(s) * math.log(self.base))

    def evaluate(self, s: complex) -> complex:
        z = self.z_of(s)
        return self.num(z) / self.den(z)

    def value_at_zero(self) -> Fraction | None:
        """zeta(0) as an exact rational; None when s=0 is a pole (z=1 root)."""
        d = self.den(Fraction(1))
        if d == 0:
            return None
        return self.num(Fraction(1)) / d


@dataclass(frozen=True)
class SeriesZeta:
    """zeta(s) = sum_n m_n * (base_length^n)^s for a multiplicity law."""

    base_length: Fraction
    law: MultiplicityLaw
    K: int
    label: str = ""

    def __post_init__(self):
        if not (0 < self.base_length < 1):
            raise ValueError("base_length must lie in (0,1)")


@dataclass(frozen=True)
class SeriesValue:
    value: complex
    tail_bound: float
    terms: int


@dataclass(frozen=True)
class AbscissaResult:
    value: float
    exact_description: str
    method: str  # "closed_form" | "root_test"


# ---------------------------------------------------------------------------
# Series construction and evaluation
# ---------------------------------------------------------------------------


def _reduce_vector(k: Sequence[int]) -> tuple[int, ...]:
    k = tuple(int(x) for x in k)
    if any(x < 0 for x in k) or not any(k):
        raise ValueError("exponent vector must be nonzero with non-negative parts")
    g = 0
    for x in k:
        g = math.gcd(g, x)
    return tuple(x // g for x in k)


def _assert_distinct_class(ifs: WeightedIFS, k: tuple[int, ...], K_max: int) -> None:
    target = regularity_of(ifs, k).alpha_exact
    for v in primitive_vectors(ifs.N, K_max):
        if v == k:
            continue
        if values_equal(target, regularity_of(ifs, v).alpha_exact):
            raise HypothesisViolationError(
                f"regularity of {k} is also attained by {v}; "
                "the multinomial series undercounts this class"
            )


def multinomial_zeta(
    ifs: WeightedIFS, k: Sequence[int], hypothesis_K_max: int = 12
) -> SeriesZeta:
    """Stage-subsequence zeta of the class of exponent vector k.

    Accepts a full N-vector, or a collapsed w-vector for an equal-ratio
    system.  Equal-ratio systems fold onto distinct probabilities
    (validity: multiplicative independence); otherwise the class must be
    attained by no other primitive vector up to hypothesis_K_max.
    """
    k = tuple(int(x) for x in k)
    if ifs.equal_ratios():
        collapsed = collapse_probabilities(ifs)
        if len(k) == collapsed.w and collapsed.w != ifs.N:
            kprime = _reduce_vector(k)
        elif len(k) == ifs.N:
            kprime = _reduce_vector(collapsed.collapse_vector(_reduce_vector(k)))
        else:
            raise ValueError(f"vector length {len(k)} matches neither N nor w")
        if collapsed.w > 1:
            independent, witness = check_rational_independence(collapsed.distinct)
            if not independent:
                raise HypothesisViolationError(
                    f"distinct probabilities multiplicatively dependent (witness {witness})"
                )
        K = sum(kprime)
        base = ifs.ratios[0] ** K
        if collapsed.w == ifs.N:
            law: MultiplicityLaw = MultinomialLaw(k=kprime)
        else:
            law = CollapsedLaw(kprime=kprime, c=collapsed.multiplicities)
        return SeriesZeta(base_length=base, law=law, K=K, label=f"class {kprime}")
    k = _reduce_vector(k)
    if len(k) != ifs.N:
        raise ValueError(f"vector length {len(k)} != N = {ifs.N}")
    _assert_distinct_class(ifs, k, hypothesis_K_max)
    base = Fraction(1)
    for ki, r in zip(k, ifs.ratios):
        base *= r**ki
    return SeriesZeta(
        base_length=base, law=MultinomialLaw(k=k), K=sum(k), label=f"class {k}"
    )


def eval_series(
    zeta: SeriesZeta, s: complex, tail_tol: float = 1e-12, max_terms: int = 100000
) -> SeriesValue:
    """Partial sum with a rigorous geometric tail bound <= tail_tol.

    Terms are m_n * l^(n s), computed in the log domain.  Once the term
    ratio is certifiably below q = ratio_sup * l^Re(s) < 1, the tail after
    term N is bounded by |t_N| q/(1-q).
    """
    s = complex(s)
    ln_l = math.log(zeta.base_length)
    ratio_bound, valid_from = zeta.law.ratio_sup()
    q = ratio_bound * float(zeta.base_length) ** s.real
    if q >= 1:
        raise DivergenceError(
            f"Re(s) = {s.real:.6g} is at or left of the certified convergence "
            f"region (term-ratio bound {q:.6g} >= 1)"
        )
    total = 0j
    n = 1
    while n <= max_terms:
        log_m = zeta.law.log_multiplicity(n)
        if log_m == -math.inf:
            term_abs = 0.0
        else:
            term = cmath.exp(log_m + n * s * ln_l)
            total += term
            term_abs = abs(term)
        if n >= valid_from:
            tail = term_abs * q / (1 - q)
            if tail <= tail_tol:
                return SeriesValue(value=total, tail_bound=tail, terms=n)
        n += 1
    raise DivergenceError(
        f"tail bound {tail_tol} not reached within {max_terms} terms (q = {q:.6g})"
    )


# ---------------------------------------------------------------------------
# Abscissas of convergence
# ---------------------------------------------------------------------------


def entropy_dimension(ratios: Sequence[Fraction], weights: Sequence[Fraction]) -> float:
    """sum w_i log w_i / sum w_i log r_i for a probability vector w (0 log 0 = 0)."""
    num = math.fsum(float(w) * math.log(w) for w in weights if w)
    den = math.fsum(float(w) * math.log(r) for w, r in zip(weights, ratios) if w)
    if num == 0.0:
        return 0.0
    return num / den


def abscissa_closed(ifs: WeightedIFS, k: Sequence[int]) -> AbscissaResult:
    """Closed-form abscissa of the class zeta: the entropy formula.

    Full vectors: f = sum (k_i/K) log(k_i/K) / sum (k_i/K) log r_i.
    Collapsed vectors: f = log_{r^K}(prod k'^k' / (prod c^k' K^K)).
    """
    k = tuple(int(x) for x in k)
    if ifs.equal_ratios():
        collapsed = collapse_probabilities(ifs)
        if len(k) == collapsed.w and collapsed.w != ifs.N:
            kprime = _reduce_vector(k)
            K = sum(kprime)
            num = math.fsum(kq * math.log(kq) for kq in kprime if kq)
            num -= math.fsum(
                kq * math.log(cq) for kq, cq in zip(kprime, collapsed.multiplicities)
            )
            num -= K * math.log(K)
            den = K * math.log(ifs.ratios[0])
            value = max(0.0, num / den)
            desc = (
                f"log_(r^{K})({'*'.join(f'{kq}^{kq}' for kq in kprime if kq)}"
                f" / ({'*'.join(f'{cq}^{kq}' for cq, kq in zip(collapsed.multiplicities, kprime))}"
                f" * {K}^{K}))"
            )
            return AbscissaResult(value=value, exact_description=desc, method="closed_form")
    k = _reduce_vector(k)
    if len(k) != ifs.N:
        raise ValueError(f"vector length {len(k)} != N = {ifs.N}")
    K = sum(k)
    weights = [Fraction(ki, K) for ki in k]
    value = max(0.0, entropy_dimension(ifs.ratios, weights))
    desc = (
        f"sum (k_i/K) log(k_i/K) / sum (k_i/K) log r_i with k/K = "
        f"({', '.join(str(w) for w in weights)})"
    )
    return AbscissaResult(value=value, exact_description=desc, method="closed_form")


def defining_residual(ifs: WeightedIFS, k: Sequence[int], sigma: float) -> float:
    """(r1^k1...rN^kN)^sigma * K^K / prod k_i^k_i, whose unique root is the abscissa."""
    k = _reduce_vector(k)
    K = sum(k)
    log_res = sigma * math.fsum(
        ki * math.log(r) for ki, r in zip(k, ifs.ratios) if ki
    )
    log_res += K * math.log(K) - math.fsum(ki * math.log(ki) for ki in k if ki)
    return math.exp(log_res)


def abscissa_root_test(zeta: SeriesZeta, n: int) -> AbscissaResult:
    """Root-test estimate log m_n / (n log(1/l)); error O(log n / n)."""
    if n < 10:
        raise ValueError("root test needs n >= 10")
    log_m = zeta.law.log_multiplicity(n)
    if log_m == -math.inf:
        raise ValueError(f"multiplicity law has no term at n = {n}")
    value = log_m / (n * -math.log(zeta.base_length))
    return AbscissaResult(
        value=value,
        exact_description=f"log(m_{n}) / ({n} log(1/{zeta.base_length}))",
        method="root_test",
    )


# ---------------------------------------------------------------------------
# Lattice closed forms
# ---------------------------------------------------------------------------


def _common_base(pevs: Sequence[PrimeExponentVector]) -> tuple[Fraction, list[int]]:
    """Write each value as base^e_i for one rational base in (0,1), integer e_i >= 1."""
    first = pevs[0]
    exps = list(first.exponents().values())
    g = 0
    for e in exps:
        g = math.gcd(g, abs(e))
    direction = PrimeExponentVector({p: e // g for p, e in first.items()})
    if direction.as_fraction() >= 1:
        direction = direction.scaled(-1)
    p0, d0 = next(iter(direction.items()))
    out = []
    for pev in pevs:
        e = pev.exponents().get(p0, 0) // d0
        if e < 1 or pev != direction.scaled(e):
            raise ValueError("contraction ratios admit no common rational base")
        out.append(e)
    return direction.as_fraction(), out


def _monoid_zeta(ifs: WeightedIFS, key: VectorKey) -> RationalZeta:
    """Lattice zeta of a class equal to the sub-monoid of maps attaining it.

    The class of `key` must be spanned by the maps i whose single-map
    regularity equals the class value, with every other map shifting
    regularity strictly to the same side; then words over those maps
    enumerate the class and zeta = E(z)/(1 - E(z)) with E = sum z^{e_i}.
    """
    if key.collapsed:
        target = collapsed_regularity(ifs, key.vector).alpha_exact
    else:
        target = regularity_of(ifs, key.vector).alpha_exact
    units = [
        regularity_of(ifs, tuple(1 if j == i else 0 for j in range(ifs.N))).alpha_exact
        for i in range(ifs.N)
    ]
    support = [i for i, u in enumerate(units) if values_equal(u, target)]
    if not support:
        raise ValueError(
            f"class {key} is not generated by single maps; no lattice closed form"
        )
    alpha = target.to_float()
    off = [
        math.log(ifs.probs[i]) - alpha * math.log(ifs.ratios[i])
        for i in range(ifs.N)
        if i not in support
    ]
    if any(abs(c) < 1e-9 for c in off) or (min(off, default=0.0) < 0 < max(off, default=0.0)):
        raise ValueError(
            f"class {key} may extend beyond the single-map monoid; refusing closed form"
        )
    base, exps = _common_base([factorize(ifs.ratios[i]) for i in support])
    e_coeffs = [Fraction(0)] * (max(exps) + 1)
    for e in exps:
        e_coeffs[e] += 1
    E = Poly(tuple(e_coeffs))
    one = Poly((Fraction(1),))
    return RationalZeta(num=E, den=one - E, base=base, label=f"class {key}")


def closed_form_zeta(
    system: WeightedIFS | AtomicMeasureSpec | FractalStringSpec,
    key: RegularityKey | None = None,
) -> RationalZeta:
    """Exact rational-lattice zeta for the families that admit one.

    Strings: the whole geometric zeta.  Atomic families: the class keyed
    by k1/K (or a one-plus-log level for the half-weight leftmost cells,
    an entire monomial).  IFS systems: sub-monoid classes only.
    """
    if isinstance(system, FractalStringSpec):
        z = Poly((Fraction(0), Fraction(1)))
        one = Poly((Fraction(1),))
        if system.family == "cantor":
            return RationalZeta(
                num=z, den=one - z.scale(Fraction(2)), base=Fraction(1, 3), label="cantor"
            )
        return RationalZeta(
            num=one, den=one - z - z * z, base=Fraction(1, 2), label="fibonacci"
        )
    if isinstance(system, AtomicMeasureSpec):
        return _atomic_closed_form(system, key)
    if isinstance(system, WeightedIFS):
        if not isinstance(key, VectorKey):
            raise ValueError("IFS closed forms are keyed by exponent vectors")
        return _monoid_zeta(system, key)
    raise TypeError(f"unsupported system {system!r}")


def _atomic_closed_form(spec: AtomicMeasureSpec, key: RegularityKey | None) -> RationalZeta:
    z = Poly((Fraction(0), Fraction(1)))
    one = Poly((Fraction(1),))
    if isinstance(key, OnePlusLogKey):
        if spec.family != "sigma1":
            raise ValueError(f"one-plus-log classes only occur for sigma1, not {spec.family}")
        return RationalZeta(
            num=z,
            den=one,
            base=Fraction(1, 3) ** key.level,
            label=f"entire {key}",
        )
    if not isinstance(key, FractionKey):
        raise ValueError(f"atomic closed forms need a k1/K or one-plus-log key, got {key}")
    q = key.value
    if not (0 < q <= 1):
        raise ValueError(f"key {q} is not attained (regularities lie in (0,1])")
    k1, K = q.numerator, q.denominator
    if spec.family == "sigma1":
        return RationalZeta(
            num=z, den=one - z, base=Fraction(1, 3) ** K, label=f"sigma1 {q}"
        )
    m = spec.m
    lam = spec.lam
    if q == 1:
        # multiplicity (2m-1) m^(n-1) on lengths lam^n
        return RationalZeta(
            num=z.scale(Fraction(2 * m - 1)),
            den=one - z.scale(Fraction(m)),
            base=lam,
            label=f"{spec.family} alpha=1",
        )
    # multiplicity (m-1) m^(k1 n - 1) on lengths lam^(K n)
    return RationalZeta(
        num=z.scale(Fraction((m - 1) * m ** (k1 - 1))),
        den=one - z.scale(Fraction(m**k1)),
        base=lam**K,
        label=f"{spec.family} {q}",
    )
