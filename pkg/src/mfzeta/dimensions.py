"""Complex-dimension lattices, residues, tapestry assembly, and counting.

Rational lattice zetas in z = base^s have poles along vertical arithmetic
progressions: one lattice per denominator root.  The counting function of
the associated alpha-lengths is recovered two ways: exact direct counting
and a symmetric truncated sum over lattice poles (plus the constant or
double-pole term at s = 0).
"""
from __future__ import annotations

import cmath
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .ifs_core import AtomicMeasureSpec, FractalStringSpec
from .regularity import FractionKey, OnePlusLogKey, RegularityKey
from .sequences import AlphaLengthSequence, FloorSumLaw, GeometricLaw
from .zeta import RationalZeta, closed_form_zeta


@dataclass(frozen=True)
class DimensionLattice:
    """Vertical lattice of poles real_part + i * period * (j + phase_shift)."""

    real_part: float
    period: float
    phase_shift: float
    root_z: complex
    residue: complex | None  # constant along the lattice; None when non-simple
    simple: bool
    multiplicity: int
    real_desc: str

    def poles(self, band: float) -> tuple[complex, ...]:
        """All lattice poles with |Im s| <= band, ordered by imaginary part."""
        j_lo = math.ceil(-band / self.period - self.phase_shift)
        j_hi = math.floor(band / self.period - self.phase_shift)
        return tuple(
            complex(self.real_part, self.period * (j + self.phase_shift))
            for j in range(j_lo, j_hi + 1)
        )


@dataclass(frozen=True)
class Tapestry:
    pairs: tuple[tuple[Fraction, DimensionLattice], ...]
    band: float


@dataclass(frozen=True)
class CountingResult:
    x: float
    direct: int
    explicit_value: float
    truncation_Z: int


# ---------------------------------------------------------------------------
# Pole lattices and residues
# ---------------------------------------------------------------------------


def _analytic_residue(rz: RationalZeta, root: complex) -> complex:
    """Residue in s at a simple denominator root: num(z)/(den'(z) * dz/ds)."""
    dp = rz.den.derivative()(root)
    dz_ds = root * math.log(float(rz.base))
    return rz.num(root) / (dp * dz_ds)


def pole_lattices(rz: RationalZeta, band: float = 50.0) -> list[DimensionLattice]:
    """One lattice per denominator root of the rational zeta.

    Roots come from companion-matrix eigenvalues with one Newton polish
    step; repeated roots are merged and flagged non-simple (residue omitted).
    """
    if band <= 0:
        raise ValueError("band must be positive")
    if rz.den.degree < 1:
        raise ValueError("denominator is constant: the zeta is entire")
    coeffs = [float(c) for c in rz.den.coeffs]
    roots = list(np.roots(coeffs[::-1]))
    dprime = rz.den.derivative()
    polished = []
    for r in roots:
        r = complex(r)
        dp = dprime(r)
        if abs(dp) > 1e-12:
            r = r - rz.den(r) / dp
        polished.append(r)
    # merge numerically repeated roots
    groups: list[list[complex]] = []
    for r in sorted(polished, key=lambda c: (c.real, c.imag)):
        for g in groups:
            if abs(r - g[0]) < 1e-8 * max(1.0, abs(r)):
                g.append(r)
                break
        else:
            groups.append([r])
    b = float(rz.base)
    log_b = math.log(b)  # negative
    period = 2 * math.pi / -log_b
    lattices = []
    for g in groups:
        root = sum(g) / len(g)
        mult = len(g)
        real = math.log(abs(root)) / log_b + 0.0  # normalize -0.0
        shift = (-cmath.phase(root) / (2 * math.pi)) % 1.0
        simple = mult == 1
        residue = _analytic_residue(rz, root) if simple else None
        lattices.append(
            DimensionLattice(
                real_part=real,
                period=period,
                phase_shift=shift,
                root_z=root,
                residue=residue,
                simple=simple,
                multiplicity=mult,
                real_desc=f"ln(1/|{root:.12g}|)/ln(1/{rz.base})",
            )
        )
    lattices.sort(key=lambda l: (-l.real_part, l.phase_shift))
    return lattices


def residue_of(rz: RationalZeta, lattice: DimensionLattice) -> complex:
    """Residue in s, constant along a simple lattice."""
    if not lattice.simple:
        raise ValueError("lattice has a multiple root; residue undefined here")
    return _analytic_residue(rz, lattice.root_z)


def residue_numeric(
    rz: RationalZeta, omega: complex, h: float | None = None
) -> complex:
    """(s - omega) * zeta(s) limit with one Richardson extrapolation step.

    Two extrapolation levels kill the h and h^2 terms, so the step can stay
    large enough that pole-phase roundoff does not dominate, uniformly in
    the base.
    """
    if h is None:
        h = 1e-3 / -math.log(float(rz.base))
    a = h * rz.evaluate(omega + h)
    b = (h / 2) * rz.evaluate(omega + h / 2)
    c = (h / 4) * rz.evaluate(omega + h / 4)
    return (8 * c - 6 * b + a) / 3


# ---------------------------------------------------------------------------
# Tapestry
# ---------------------------------------------------------------------------


def build_tapestry(
    spec: AtomicMeasureSpec, K_max: int, band: float = 50.0
) -> Tapestry:
    """(alpha, lattice) pairs over reduced fractions k1/K with K <= K_max.

    The entire-monomial keys carry no poles and are omitted.
    """
    if K_max < 1:
        raise ValueError("K_max must be >= 1")
    pairs = []
    for K in range(1, K_max + 1):
        for k1 in range(1, K + 1):
            if math.gcd(k1, K) != 1:
                continue
            alpha = Fraction(k1, K)
            rz = closed_form_zeta(spec, FractionKey(alpha))
            lattices = pole_lattices(rz, band)
            if len(lattices) != 1:
                raise ValueError(f"expected one lattice for alpha={alpha}")
            pairs.append((alpha, lattices[0]))
    pairs.sort(key=lambda p: p[0])
    return Tapestry(pairs=tuple(pairs), band=band)


# ---------------------------------------------------------------------------
# Counting: direct and explicit
# ---------------------------------------------------------------------------


def closed_form_sequence(
    system: AtomicMeasureSpec | FractalStringSpec, key: RegularityKey | None = None
) -> AlphaLengthSequence:
    """Alpha-length ladder matching closed_form_zeta (lengths < 1 only)."""
    if isinstance(system, FractalStringSpec):
        if system.family == "cantor":
            return AlphaLengthSequence.from_law(Fraction(1, 3), GeometricLaw(1, 2))
        return AlphaLengthSequence.from_law(Fraction(1, 2), FloorSumLaw())
    if not isinstance(system, AtomicMeasureSpec):
        raise TypeError(f"no closed-form ladder for {system!r}")
    if isinstance(key, OnePlusLogKey):
        if system.family != "sigma1":
            raise ValueError("1+log keys exist only for the sigma1 family")
        return AlphaLengthSequence.from_entries(
            [(Fraction(1, 3**key.level), 1)]
        )
    if not isinstance(key, FractionKey):
        raise TypeError(f"unsupported key {key!r}")
    q = key.value
    K = q.denominator
    if not (0 < q <= 1):
        raise ValueError(f"key {q} outside (0, 1]")
    if system.family == "sigma1":
        return AlphaLengthSequence.from_law(
            Fraction(1, 3**K), GeometricLaw(1, 1)
        )
    m = system.m
    if q == 1:
        return AlphaLengthSequence.from_law(system.lam, GeometricLaw(2 * m - 1, m))
    k1 = q.numerator
    return AlphaLengthSequence.from_law(
        system.lam**K, GeometricLaw((m - 1) * m ** (k1 - 1), m**k1)
    )


def counting_direct(seq: AlphaLengthSequence, x) -> int:
    """Exact #{i : 1/length_i <= x}, multiplicities included (jumps inclusive)."""
    if x <= 0:
        raise ValueError("x must be positive")
    return seq.counting(x)


def _zero_pole_expansion(rz: RationalZeta) -> tuple[float, float]:
    """Laurent data of zeta at s = 0 when z = 1 is a simple denominator root:
    zeta(s) = res0/s + c0 + O(s)."""
    one = Fraction(1)
    p1 = rz.num(one)
    pp = rz.num.derivative()(one)
    qp = rz.den.derivative()(one)
    qpp = rz.den.derivative().derivative()(one)
    head = p1 / qp
    c0 = head * (Fraction(-1, 2) + pp / p1 - qpp / (2 * qp))
    res0 = float(head) / math.log(float(rz.base))
    return res0, float(c0)


def jump_distance(rz: RationalZeta, x: float) -> float:
    """Distance from x to the nearest counting jump, in log-base units."""
    y = math.log(x) / -math.log(float(rz.base))
    return min(y - math.floor(y), math.ceil(y) - y)


def counting_explicit(
    system: AtomicMeasureSpec | FractalStringSpec,
    key: RegularityKey | None,
    x: float,
    Z: int = 20000,
    jump_guard: float = 0.02,
) -> CountingResult:
    """Symmetric truncated pole sum sum res * x^omega / omega (+ s=0 term).

    The truncation error is O(1/(Z * delta)) at distance delta from the
    nearest jump; at a jump the series converges to the midpoint instead,
    so such x are rejected by the guard.
    """
    if x <= 1:
        raise ValueError("x must exceed 1")
    if Z < 100:
        raise ValueError("Z must be >= 100")
    rz = closed_form_zeta(system, key)
    if rz.entire:
        raise ValueError("entire zeta: no pole expansion (counting is 0 or 1)")
    delta = jump_distance(rz, x)
    if delta < jump_guard:
        raise ValueError(
            f"x = {x} is within {jump_guard} log-units of a jump "
            "(the truncated series converges to the midpoint there)"
        )
    seq = closed_form_sequence(system, key)
    direct = counting_direct(seq, Fraction(x))
    if isinstance(system, FractalStringSpec) and system.family == "fibonacci":
        direct += 1  # the generating function counts the unit first length too
    v0 = rz.value_at_zero()
    if v0 is not None:
        const = float(v0)
        zero_is_pole = False
    else:
        res0, c0 = _zero_pole_expansion(rz)
        const = res0 * math.log(x) + c0
        zero_is_pole = True
    lnx = math.log(x)
    terms: list[tuple[float, complex]] = []
    for lat in pole_lattices(rz, band=1.0):
        if not lat.simple:
            raise ValueError("non-simple pole lattice; explicit sum unsupported")
        res = lat.residue
        on_zero_lattice = zero_is_pole and abs(lat.real_part) < 1e-12
        for j in range(-Z, Z + 1):
            im = lat.period * (j + lat.phase_shift)
            if on_zero_lattice and im == 0.0:
                continue  # folded into the double-pole term at s = 0
            w = complex(lat.real_part, im)
            terms.append((abs(im), res * cmath.exp(w * lnx) / w))
    # conditional convergence: sum symmetrically, small |Im| first
    terms.sort(key=lambda t: t[0])
    value = math.fsum(t[1].real for t in terms) + const
    return CountingResult(
        x=float(x), direct=direct, explicit_value=value, truncation_Z=Z
    )


def sample_off_jump_xs(
    rz: RationalZeta,
    count: int = 25,
    lo: float = 2.0,
    hi: float = 1e6,
    guard: float = 0.02,
    seed: int = 7,
) -> list[float]:
    """Deterministic log-uniform samples at least guard away from jumps."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        x = math.exp(rng.uniform(math.log(lo), math.log(hi)))
        if jump_distance(rz, x) >= guard:
            out.append(x)
    return out
