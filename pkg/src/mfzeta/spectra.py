"""Multifractal spectra, concave envelopes, and the Legendre pipeline.

The spectrum sweep walks primitive exponent classes and reports the
abscissa of convergence per class; envelopes are exact upper concave
hulls of the sweep; the Legendre side solves sum p_i^q r_i^b = 1 and
transforms.  Moran and Besicovitch-Eggleston dimensions round out the
comparison toolkit.
"""
from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .ifs_core import (
    AtomicMeasureSpec,
    WeightedIFS,
    check_rational_independence,
    collapse_probabilities,
)
from .regularity import (
    FractionKey,
    OnePlusLogKey,
    RegularityKey,
    VectorKey,
    check_hypothesis_H,
    collapsed_regularity,
    is_monofractal,
    primitive_vectors,
    regularity_of,
)
from .zeta import abscissa_closed, entropy_dimension


@dataclass(frozen=True)
class SpectrumPoint:
    alpha: float
    f: float
    key: RegularityKey
    alpha_desc: str = ""
    f_desc: str = ""


@dataclass(frozen=True)
class EnvelopeFunction:
    """Upper concave hull, piecewise linear between breakpoints."""

    breakpoints: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if len(self.breakpoints) < 1:
            raise ValueError("envelope needs at least one breakpoint")

    @property
    def domain(self) -> tuple[float, float]:
        return self.breakpoints[0][0], self.breakpoints[-1][0]

    def __call__(self, t: float) -> float:
        xs = [x for x, _ in self.breakpoints]
        lo, hi = xs[0], xs[-1]
        if not (lo <= t <= hi):
            raise ValueError(f"t = {t} outside envelope domain [{lo}, {hi}]")
        i = bisect_right(xs, t)
        if i >= len(xs):
            return self.breakpoints[-1][1]
        if i == 0:
            return self.breakpoints[0][1]
        (x0, y0), (x1, y1) = self.breakpoints[i - 1], self.breakpoints[i]
        if x1 == x0:
            return max(y0, y1)
        w = (t - x0) / (x1 - x0)
        return y0 + w * (y1 - y0)

    def segment_slopes(self) -> list[float]:
        out = []
        for (x0, y0), (x1, y1) in zip(self.breakpoints, self.breakpoints[1:]):
            out.append((y1 - y0) / (x1 - x0))
        return out

    def endpoint_slopes(self) -> tuple[float, float]:
        """Slopes of the first and last hull segments."""
        slopes = self.segment_slopes()
        if not slopes:
            return math.nan, math.nan
        return slopes[0], slopes[-1]


@dataclass(frozen=True)
class LegendrePipeline:
    q_grid: tuple[float, ...]
    b_values: tuple[float, ...]
    b_prime_values: tuple[float, ...]
    t_values: tuple[float, ...]
    b_star_values: tuple[float, ...]
    degenerate: bool  # monofractal: t collapses to the single dimension


# ---------------------------------------------------------------------------
# Spectrum sweeps
# ---------------------------------------------------------------------------


def _ifs_sweep(ifs: WeightedIFS, K_max: int) -> list[SpectrumPoint]:
    mono = is_monofractal(ifs)
    if mono is not None:
        # f(D) = D exactly: emit one value for both coordinates
        d = mono.to_float()
        if ifs.equal_ratios():
            key: RegularityKey = VectorKey((1,), collapsed=True)
        else:
            key = VectorKey((1,) * ifs.N)
        return [
            SpectrumPoint(
                alpha=d,
                f=d,
                key=key,
                alpha_desc="common single-map regularity",
                f_desc="Moran dimension of the support (equals alpha)",
            )
        ]
    if ifs.equal_ratios():
        collapsed = collapse_probabilities(ifs)
        if collapsed.w > 1:
            independent, witness = check_rational_independence(collapsed.distinct)
            if not independent:
                raise ValueError(
                    f"distinct probabilities multiplicatively dependent (witness {witness})"
                )
        points = []
        for k in primitive_vectors(collapsed.w, K_max):
            cls = collapsed_regularity(ifs, k)
            res = abscissa_closed(ifs, k)
            points.append(
                SpectrumPoint(
                    alpha=cls.alpha_float,
                    f=res.value,
                    key=cls.key,
                    alpha_desc=f"collapsed class {k}",
                    f_desc=res.exact_description,
                )
            )
        points.sort(key=lambda p: (p.alpha, str(p.key)))
        return points
    report = check_hypothesis_H(ifs, K_max)
    if report.holds:
        points = []
        for k in primitive_vectors(ifs.N, K_max):
            cls = regularity_of(ifs, k)
            res = abscissa_closed(ifs, k)
            points.append(
                SpectrumPoint(
                    alpha=cls.alpha_float,
                    f=res.value,
                    key=cls.key,
                    alpha_desc=f"class {k}",
                    f_desc=res.exact_description,
                )
            )
        points.sort(key=lambda p: (p.alpha, str(p.key)))
        return points
    return _oracle_fallback_sweep(ifs, K_max)


def _oracle_fallback_sweep(ifs: WeightedIFS, K_max: int) -> list[SpectrumPoint]:
    """Distinct-regularity hypothesis failed: regroup stages exactly and
    estimate each class abscissa by a root test on its deepest ladder entry."""
    from .ifs_core import BudgetExceededError
    from .oracle import DEFAULT_BUDGET, enumerate_stage, group_by_regularity
    from .regularity import InfiniteKey

    records = []
    depth = 0
    for K in range(1, K_max + 1):
        try:
            stage = enumerate_stage(ifs, K)
        except BudgetExceededError:
            break
        records.extend(stage.all_records())
        depth = K
    groups = group_by_regularity(records)
    points = []
    for key, entries in groups.items():
        if isinstance(key, InfiniteKey):
            continue
        # merged rungs deeper than the stage cap are incomplete undercounts,
        # so take the best rung rather than the deepest one
        sigma, length = 0.0, entries[0][0]
        for ell, mult in entries:
            if mult > 1:
                est = math.log(mult) / -math.log(ell)
                if est > sigma:
                    sigma, length = est, ell
        alpha = None
        for rec in records:
            if rec.key_hint == key and rec.regularity is not None:
                alpha = rec.regularity.to_float()
                break
        if alpha is None:
            continue
        points.append(
            SpectrumPoint(
                alpha=alpha,
                f=max(0.0, sigma),
                key=key,
                alpha_desc=f"oracle class to stage {depth}",
                f_desc=f"root test at length {length}",
            )
        )
    points.sort(key=lambda p: (p.alpha, str(p.key)))
    return points


def _atomic_sweep(spec: AtomicMeasureSpec, K_max: int) -> list[SpectrumPoint]:
    points = []
    logm_over_logb = math.log(spec.m) / math.log(spec.base)
    for K in range(1, K_max + 1):
        for k1 in range(1, K + 1):
            if math.gcd(k1, K) != 1:
                continue
            q = Fraction(k1, K)
            if spec.family == "sigma1":
                f = 0.0
                desc = "pole of z/(1-z) at s=0"
            else:
                f = float(q) * logm_over_logb
                desc = f"(k1/K) log_{spec.base} {spec.m}"
            points.append(
                SpectrumPoint(
                    alpha=float(q),
                    f=f,
                    key=FractionKey(q),
                    alpha_desc=f"k1/K = {q}",
                    f_desc=desc,
                )
            )
    if spec.family == "sigma1":
        for level in range(1, K_max + 1):
            points.append(
                SpectrumPoint(
                    alpha=1 + math.log(2) / (level * math.log(3)),
                    f=0.0,
                    key=OnePlusLogKey(level),
                    alpha_desc=f"1 + log_(3^{level}) 2",
                    f_desc="entire zeta",
                )
            )
    points.sort(key=lambda p: (p.alpha, str(p.key)))
    return points


def spectrum_sweep(
    system: WeightedIFS | AtomicMeasureSpec, K_max: int = 64
) -> list[SpectrumPoint]:
    """One point per primitive class with stage sum <= K_max, sorted by alpha."""
    if isinstance(system, AtomicMeasureSpec):
        return _atomic_sweep(system, K_max)
    if isinstance(system, WeightedIFS):
        return _ifs_sweep(system, K_max)
    raise TypeError(f"unsupported system {system!r}")


# ---------------------------------------------------------------------------
# Concave envelope
# ---------------------------------------------------------------------------


def concave_envelope(points: Sequence[SpectrumPoint | tuple]) -> EnvelopeFunction:
    """Upper concave hull via monotone chain; alpha ties keep the max f."""
    raw = []
    for p in points:
        if isinstance(p, SpectrumPoint):
            raw.append((p.alpha, p.f))
        else:
            raw.append((float(p[0]), float(p[1])))
    if len(raw) < 2:
        raise ValueError("concave envelope needs at least 2 points")
    best: dict[float, float] = {}
    for x, y in raw:
        if x not in best or y > best[x]:
            best[x] = y
    pts = sorted(best.items())
    if len(pts) == 1:
        return EnvelopeFunction(breakpoints=(pts[0],))
    hull: list[tuple[float, float]] = []
    for x, y in pts:
        while len(hull) >= 2:
            (x0, y0), (x1, y1) = hull[-2], hull[-1]
            # drop the middle point when it lies on or under the chord;
            # the slack absorbs float noise on exactly collinear sweeps
            if (x1 - x0) * (y - y0) - (y1 - y0) * (x - x0) >= -1e-14:
                hull.pop()
            else:
                break
        hull.append((x, y))
    return EnvelopeFunction(breakpoints=tuple(hull))


def information_dimension(envelope: EnvelopeFunction) -> float:
    """Fixed point t1 = f(t1) on the hull.

    The line y = t supports the hull from above, so hull(t) - t is
    maximized (at ~0) exactly at the fixed point; the hull vertex
    achieving the max is refined by a three-point parabolic step.
    """
    bps = envelope.breakpoints
    diffs = [y - x for x, y in bps]
    i = max(range(len(diffs)), key=lambda j: diffs[j])
    if i == 0 or i == len(bps) - 1:
        return bps[i][0]
    xm, x0, xp = bps[i - 1][0], bps[i][0], bps[i + 1][0]
    ym, y0, yp = diffs[i - 1], diffs[i], diffs[i + 1]
    denom = ym - 2 * y0 + yp
    if denom >= -1e-18:
        return x0
    # parabola through three points around the max (uneven spacing):
    # vertex from the two chord slopes
    sm = (y0 - ym) / (x0 - xm)
    sp = (yp - y0) / (xp - x0)
    if sm == sp:
        return x0
    t = 0.5 * (xm + x0) - sm * (xm - xp) / (2 * (sm - sp))
    return min(max(t, xm), xp)


# ---------------------------------------------------------------------------
# Legendre pipeline
# ---------------------------------------------------------------------------


def solve_b(ifs: WeightedIFS, q: float, residual_tol: float = 1e-13) -> float:
    """Unique b with sum p_i^q r_i^b = 1, by bisection (decreasing in b)."""
    logs_p = [math.log(p) for p in ifs.probs]
    logs_r = [math.log(r) for r in ifs.ratios]

    def g(b: float) -> float:
        return math.fsum(math.exp(q * lp + b * lr) for lp, lr in zip(logs_p, logs_r)) - 1

    lo, hi = -1.0, 1.0
    while g(lo) <= 0:
        lo *= 2
    while g(hi) >= 0:
        hi *= 2
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val = g(mid)
        if abs(val) <= residual_tol:
            return mid
        if val > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-16 * max(1.0, abs(lo)):
            break
    return 0.5 * (lo + hi)


def legendre_transform(
    ifs: WeightedIFS, q_grid: Sequence[float] | None = None
) -> LegendrePipeline:
    """b, b' (central differences, h = 1e-4), t = -b', b*(t) = t q + b(q)."""
    if q_grid is None:
        n = round(2 * 8 / 0.05)
        q_grid = [-8 + 0.05 * i for i in range(n + 1)]
    q_grid = tuple(float(q) for q in q_grid)
    h = 1e-4
    b_vals = tuple(solve_b(ifs, q) for q in q_grid)
    b_prime = tuple(
        (solve_b(ifs, q + h) - solve_b(ifs, q - h)) / (2 * h) for q in q_grid
    )
    t_vals = tuple(-bp for bp in b_prime)
    b_star = tuple(t * q + b for t, q, b in zip(t_vals, q_grid, b_vals))
    degenerate = is_monofractal(ifs) is not None
    return LegendrePipeline(
        q_grid=q_grid,
        b_values=b_vals,
        b_prime_values=b_prime,
        t_values=t_vals,
        b_star_values=b_star,
        degenerate=degenerate,
    )


# ---------------------------------------------------------------------------
# Dimensions
# ---------------------------------------------------------------------------


def moran_dimension(ratios: Sequence[Fraction]) -> float:
    """Root of sum r_i^s = 1 in [0,1], to 1e-12."""
    logs = [math.log(r) for r in ratios]

    def g(s: float) -> float:
        return math.fsum(math.exp(s * lr) for lr in logs) - 1

    lo, hi = 0.0, 1.0
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def besicovitch_dimension(
    ratios: Sequence[Fraction], weights: Sequence[Fraction]
) -> float:
    """sum q_i log q_i / sum q_i log r_i for a probability vector (0 log 0 = 0)."""
    total = sum(Fraction(w) for w in weights)
    if total != 1:
        raise ValueError(f"weights sum to {total}, expected 1")
    return entropy_dimension(ratios, weights)
