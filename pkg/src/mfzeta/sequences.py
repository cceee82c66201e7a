"""Alpha-length sequences: geometric length ladders with multiplicity laws.

A sequence assigns to term n >= 1 the length base_length**n with an
integer multiplicity m_n.  The laws cover every family handled in closed
form; enumerated data uses explicit (length, multiplicity) entries.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence


def multinomial(K: int, ks: Sequence[int]) -> int:
    """Exact multinomial coefficient K! / prod(k_i!) with sum(ks) == K."""
    if sum(ks) != K:
        raise ValueError(f"multinomial parts {ks} do not sum to {K}")
    out = 1
    rem = K
    for k in ks:
        out *= math.comb(rem, k)
        rem -= k
    return out


def fibonacci(n: int) -> int:
    """F_n with F_1 = F_2 = 1."""
    if n < 1:
        raise ValueError("n must be >= 1")
    a, b = 1, 1
    for _ in range(n - 1):
        a, b = b, a + b
    return a


# ---------------------------------------------------------------------------
# Multiplicity laws
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MultinomialLaw:
    """m_n = multinomial(nK; n*k_1, ..., n*k_N)."""

    k: tuple[int, ...]

    @property
    def K(self) -> int:
        return sum(self.k)

    def multiplicity(self, n: int) -> int:
        return multinomial(n * self.K, [n * ki for ki in self.k])

    def ratio_sup(self) -> tuple[float, int]:
        """(upper bound on m_{n+1}/m_n, first n it holds from).

        The ratio increases to K^K / prod k_i^k_i, so the limit bounds
        every ratio.
        """
        log_r = self.K * math.log(self.K) - sum(
            ki * math.log(ki) for ki in self.k if ki
        )
        return math.exp(log_r) * (1 + 1e-12), 1

    def log_multiplicity(self, n: int) -> float:
        nK = n * self.K
        return math.lgamma(nK + 1) - sum(math.lgamma(n * ki + 1) for ki in self.k)

    def describe(self) -> str:
        return f"multinomial(n*{self.K}; {','.join(f'n*{ki}' for ki in self.k)})"


@dataclass(frozen=True)
class CollapsedLaw:
    """m_n = multinomial(nK; nk') * prod c_q^{n k'_q} (distinct-probability fold)."""

    kprime: tuple[int, ...]
    c: tuple[int, ...]

    @property
    def K(self) -> int:
        return sum(self.kprime)

    def multiplicity(self, n: int) -> int:
        out = multinomial(n * self.K, [n * kq for kq in self.kprime])
        for cq, kq in zip(self.c, self.kprime):
            out *= cq ** (n * kq)
        return out

    def ratio_sup(self) -> tuple[float, int]:
        log_r = self.K * math.log(self.K) - sum(
            kq * math.log(kq) for kq in self.kprime if kq
        )
        log_r += sum(kq * math.log(cq) for kq, cq in zip(self.kprime, self.c))
        return math.exp(log_r) * (1 + 1e-12), 1

    def log_multiplicity(self, n: int) -> float:
        nK = n * self.K
        out = math.lgamma(nK + 1) - sum(math.lgamma(n * kq + 1) for kq in self.kprime)
        out += sum(n * kq * math.log(cq) for kq, cq in zip(self.kprime, self.c))
        return out

    def describe(self) -> str:
        parts = ",".join(f"n*{kq}" for kq in self.kprime)
        weights = "*".join(f"{cq}^(n*{kq})" for cq, kq in zip(self.c, self.kprime))
        return f"multinomial(n*{self.K}; {parts}) * {weights}"


@dataclass(frozen=True)
class GeometricLaw:
    """m_n = a * g^(n-1)."""

    a: int
    g: int

    def multiplicity(self, n: int) -> int:
        return self.a * self.g ** (n - 1)

    def ratio_sup(self) -> tuple[float, int]:
        return float(self.g), 1

    def log_multiplicity(self, n: int) -> float:
        return math.log(self.a) + (n - 1) * math.log(self.g)

    def describe(self) -> str:
        return f"{self.a}*{self.g}^(n-1)"


@dataclass(frozen=True)
class FloorSumLaw:
    """m_n = sum_{j<=n/2} C(n-j, j) = F_{n+1} (two-generator chain count)."""

    def multiplicity(self, n: int) -> int:
        return sum(math.comb(n - j, j) for j in range(n // 2 + 1))

    def ratio_sup(self) -> tuple[float, int]:
        # F_{n+2}/F_{n+1} <= 5/3 for n >= 2 (oscillates toward the golden ratio)
        return 5 / 3, 2

    def log_multiplicity(self, n: int) -> float:
        return math.log(self.multiplicity(n))

    def describe(self) -> str:
        return "sum_{j<=n/2} C(n-j, j)"


@dataclass(frozen=True)
class ExplicitLaw:
    """m_n read from a finite list; zero beyond it (entire-tail sequences)."""

    multiplicities: tuple[int, ...]

    def multiplicity(self, n: int) -> int:
        if 1 <= n <= len(self.multiplicities):
            return self.multiplicities[n - 1]
        return 0

    def ratio_sup(self) -> tuple[float, int]:
        return 0.0, len(self.multiplicities) + 1

    def log_multiplicity(self, n: int) -> float:
        m = self.multiplicity(n)
        return math.log(m) if m else -math.inf

    def describe(self) -> str:
        return f"explicit{list(self.multiplicities)}"


MultiplicityLaw = MultinomialLaw | CollapsedLaw | GeometricLaw | FloorSumLaw | ExplicitLaw


# ---------------------------------------------------------------------------
# Sequences
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AlphaLengthSequence:
    """Lengths with multiplicities attaining one regularity value.

    Either law-based (term n has length base_length**n, multiplicity
    law.multiplicity(n)) or explicit entries sorted by decreasing length.
    """

    base_length: Fraction | None = None
    law: MultiplicityLaw | None = None
    entries: tuple[tuple[Fraction, int], ...] | None = None
    label: str = ""

    def __post_init__(self):
        law_based = self.base_length is not None and self.law is not None
        if law_based == (self.entries is not None):
            raise ValueError("provide either (base_length, law) or entries")
        if law_based and not (0 < self.base_length < 1):
            raise ValueError("base_length must lie in (0,1)")
        if self.entries is not None:
            lengths = [length for length, _ in self.entries]
            if lengths != sorted(lengths, reverse=True):
                raise ValueError("entries must be sorted by decreasing length")

    @classmethod
    def from_law(cls, base_length: Fraction, law: MultiplicityLaw, label: str = ""):
        return cls(base_length=Fraction(base_length), law=law, label=label)

    @classmethod
    def from_entries(cls, entries, label: str = ""):
        return cls(entries=tuple((Fraction(l), int(m)) for l, m in entries), label=label)

    def is_empty(self) -> bool:
        return self.entries is not None and not self.entries

    def max_index(self, x) -> int:
        """Largest n with base_length**-n <= x (0 when none); exact."""
        if self.law is None:
            raise ValueError("max_index applies to law-based sequences")
        x = Fraction(x)
        inv = 1 / self.base_length
        n = 0
        power = inv
        while power <= x:
            n += 1
            power *= inv
        return n

    def counting(self, x) -> int:
        """Exact number of reciprocal lengths <= x, with multiplicity."""
        x = Fraction(x)
        if self.entries is not None:
            return sum(m for length, m in self.entries if 1 / length <= x)
        return sum(self.law.multiplicity(n) for n in range(1, self.max_index(x) + 1))
