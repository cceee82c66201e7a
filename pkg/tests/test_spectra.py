"""Spectrum sweeps, concave envelopes, Legendre pipeline, dimensions."""
import math
from fractions import Fraction

import pytest

from mfzeta.ifs_core import AtomicMeasureSpec, WeightedIFS
from mfzeta.regularity import FractionKey, OnePlusLogKey, VectorKey
from mfzeta.spectra import (
    EnvelopeFunction,
    besicovitch_dimension,
    concave_envelope,
    information_dimension,
    legendre_transform,
    moran_dimension,
    solve_b,
    spectrum_sweep,
)

F = Fraction

BETA = WeightedIFS(ratios=(F(1, 3), F(1, 3)), probs=(F(1, 3), F(2, 3)))
BETA0 = WeightedIFS(ratios=(F(1, 2), F(1, 2)), probs=(F(1, 3), F(2, 3)))
RHO = WeightedIFS(ratios=(F(1, 3), F(1, 3)), probs=(F(1, 2), F(1, 2)))
TRIDENT = WeightedIFS(
    ratios=(F(1, 5), F(1, 5), F(1, 5)), probs=(F(1, 5), F(3, 5), F(1, 5))
)
ROBY = WeightedIFS(
    ratios=(F(1, 2), F(1, 4), F(1, 10)), probs=(F(1, 2), F(1, 4), F(1, 4))
)

LOG3_2 = math.log(2) / math.log(3)
LOG5_2 = math.log(2) / math.log(5)
LOG5_3 = math.log(3) / math.log(5)
T_MAX_BETA0 = math.log(3) / math.log(2)
T_MIN_BETA0 = T_MAX_BETA0 - 1


# ---------------------------------------------------------------------------
# dimensions
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "ratios, expected",
    [
        ((F(1, 3), F(1, 3)), LOG3_2),
        ((F(1, 5), F(1, 5), F(1, 5)), LOG5_3),
        ((F(1, 2), F(1, 2)), 1.0),
    ],
)
def test_moran_dimension_closed_values(ratios, expected):
    assert moran_dimension(ratios) == pytest.approx(expected, abs=1e-12)


def test_moran_dimension_residual_roby():
    s = moran_dimension(ROBY.ratios)
    res = sum(float(r) ** s for r in ROBY.ratios)
    assert abs(res - 1) < 1e-10
    assert 0 < s < 1


def test_besicovitch_matches_moran_for_uniform_weights():
    assert besicovitch_dimension(
        (F(1, 3), F(1, 3)), (F(1, 2), F(1, 2))
    ) == pytest.approx(LOG3_2, abs=1e-13)


def test_besicovitch_binary_quarter():
    # binary entropy of 1/4 in bits
    expected = -(0.25 * math.log2(0.25) + 0.75 * math.log2(0.75))
    got = besicovitch_dimension((F(1, 2), F(1, 2)), (F(1, 4), F(3, 4)))
    assert got == pytest.approx(expected, abs=1e-13)
    assert got == pytest.approx(0.8112781244591328, abs=1e-12)


def test_besicovitch_uniform_quarters_is_one():
    assert besicovitch_dimension(
        (F(1, 4),) * 4, (F(1, 4),) * 4
    ) == pytest.approx(1.0, abs=1e-13)


def test_besicovitch_rejects_bad_weights():
    with pytest.raises(ValueError):
        besicovitch_dimension((F(1, 2), F(1, 2)), (F(1, 4), F(1, 4)))


# ---------------------------------------------------------------------------
# solve_b / Legendre
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("q", [-5.0, -1.0, 0.0, 0.3, 1.0, 4.5])
def test_solve_b_uniform_is_one_minus_q(q):
    uniform = WeightedIFS(ratios=(F(1, 2), F(1, 2)), probs=(F(1, 2), F(1, 2)))
    assert solve_b(uniform, q) == pytest.approx(1 - q, abs=1e-12)


@pytest.mark.parametrize("q", [-3.0, -1.0, 0.0, 0.5, 1.0, 2.0, 7.0])
def test_solve_b_beta0_closed_form(q):
    expected = math.log2((1 / 3) ** q + (2 / 3) ** q)
    assert solve_b(BETA0, q) == pytest.approx(expected, abs=1e-10)


def test_solve_b_residual_invariant_on_grid():
    for system in (BETA, BETA0, TRIDENT, ROBY):
        for q in [-8.0, -2.5, 0.0, 1.0, 3.3, 8.0]:
            b = solve_b(system, q)
            res = math.fsum(
                float(p) ** q * float(r) ** b
                for p, r in zip(system.probs, system.ratios)
            )
            assert abs(res - 1) < 1e-12


def test_legendre_beta0_pipeline():
    pipe = legendre_transform(BETA0)
    assert len(pipe.q_grid) == 321
    assert pipe.q_grid[0] == pytest.approx(-8.0) and pipe.q_grid[-1] == pytest.approx(8.0)
    for q, b in zip(pipe.q_grid, pipe.b_values):
        assert b == pytest.approx(math.log2((1 / 3) ** q + (2 / 3) ** q), abs=1e-9)
    # b strictly decreasing, t within the regularity range
    assert all(b1 < b0 for b0, b1 in zip(pipe.b_values, pipe.b_values[1:]))
    for t in pipe.t_values:
        assert T_MIN_BETA0 - 1e-6 <= t <= T_MAX_BETA0 + 1e-6
    # b(0) = 1, so b*(t(0)) = 1
    i0 = min(range(len(pipe.q_grid)), key=lambda i: abs(pipe.q_grid[i]))
    assert pipe.b_star_values[i0] == pytest.approx(1.0, abs=1e-9)
    assert not pipe.degenerate


def test_legendre_trident_peak_is_moran():
    pipe = legendre_transform(TRIDENT)
    peak = max(pipe.b_star_values)
    assert peak == pytest.approx(LOG5_3, abs=1e-8)


def test_legendre_monofractal_degenerates():
    pipe = legendre_transform(RHO, q_grid=[-2.0, -1.0, 0.0, 1.0, 2.0])
    assert pipe.degenerate
    for t in pipe.t_values:
        assert t == pytest.approx(LOG3_2, abs=1e-7)
    for bs in pipe.b_star_values:
        assert bs == pytest.approx(LOG3_2, abs=1e-7)


# ---------------------------------------------------------------------------
# spectrum_sweep
# ---------------------------------------------------------------------------


def test_sweep_beta_matches_besicovitch_everywhere():
    points = spectrum_sweep(BETA, K_max=8)
    assert len(points) >= 10
    alphas = [p.alpha for p in points]
    assert alphas == sorted(alphas)
    for p in points:
        assert isinstance(p.key, VectorKey)
        k = p.key.vector
        K = sum(k)
        weights = tuple(F(ki, K) for ki in k)
        assert p.f == pytest.approx(
            besicovitch_dimension(BETA.ratios, weights), abs=1e-12
        )
        assert p.alpha == pytest.approx(1 - (k[1] / K) * LOG3_2, abs=1e-12)
        assert 0 <= p.f <= 1 + 1e-12


def test_sweep_trident_collapsed_values():
    points = spectrum_sweep(TRIDENT, K_max=9)
    by_key = {p.key: p for p in points}
    assert by_key[VectorKey((1, 0), collapsed=True)].f == pytest.approx(
        LOG5_2, abs=1e-12
    )
    assert by_key[VectorKey((0, 1), collapsed=True)].f == pytest.approx(0.0, abs=1e-12)
    assert by_key[VectorKey((2, 1), collapsed=True)].f == pytest.approx(
        LOG5_3, abs=1e-12
    )
    assert max(p.f for p in points) == pytest.approx(LOG5_3, abs=1e-12)


def test_sweep_monofractal_single_point():
    points = spectrum_sweep(RHO, K_max=16)
    assert len(points) == 1
    assert points[0].alpha == pytest.approx(LOG3_2, abs=1e-12)
    assert points[0].f == pytest.approx(LOG3_2, abs=1e-12)
    assert points[0].key == VectorKey((1,), collapsed=True)


def test_sweep_sigma2_is_a_line():
    spec = AtomicMeasureSpec(family="sigma2")
    points = spectrum_sweep(spec, K_max=12)
    # reduced fractions k1/K with K <= 12: sum of Euler phi = 46
    assert len(points) == 46
    for p in points:
        assert isinstance(p.key, FractionKey)
        assert p.f == pytest.approx(p.alpha * LOG3_2, abs=1e-12)
    assert points[-1].alpha == pytest.approx(1.0)
    env = concave_envelope(points)
    assert len(env.breakpoints) == 2
    lo, hi = env.endpoint_slopes()
    assert lo == pytest.approx(LOG3_2, abs=1e-9)
    assert hi == pytest.approx(LOG3_2, abs=1e-9)


def test_sweep_sigma1_all_flat():
    spec = AtomicMeasureSpec(family="sigma1")
    points = spectrum_sweep(spec, K_max=12)
    assert len(points) == 46 + 12  # fractions plus the 1+log keys
    assert all(p.f == 0.0 for p in points)
    one_plus = [p for p in points if isinstance(p.key, OnePlusLogKey)]
    assert len(one_plus) == 12
    assert max(p.alpha for p in points) == pytest.approx(1 + LOG3_2, abs=1e-12)


def test_sweep_generalized_m3_slope():
    spec = AtomicMeasureSpec(family="generalized", m=3)
    points = spectrum_sweep(spec, K_max=6)
    for p in points:
        assert p.f == pytest.approx(p.alpha * math.log(3) / math.log(5), abs=1e-12)


def test_sweep_fallback_when_classes_collide():
    points = spectrum_sweep(ROBY, K_max=64)
    assert len(points) >= 5
    at_one = [p for p in points if abs(p.alpha - 1.0) < 1e-12]
    assert len(at_one) == 1
    golden = math.log((1 + math.sqrt(5)) / 2) / math.log(2)
    # root test on a finite ladder converges like O(1/depth)
    assert at_one[0].f == pytest.approx(golden, abs=0.05)
    assert "root test" in at_one[0].f_desc


def test_sweep_rejects_dependent_collapsed_probs():
    bad = WeightedIFS(
        ratios=(F(1, 4), F(1, 4), F(1, 4)), probs=(F(1, 2), F(1, 4), F(1, 4))
    )
    with pytest.raises(ValueError, match="dependent"):
        spectrum_sweep(bad, K_max=4)


# ---------------------------------------------------------------------------
# concave envelope
# ---------------------------------------------------------------------------


def test_envelope_dominates_and_is_concave():
    points = spectrum_sweep(BETA, K_max=16)
    env = concave_envelope(points)
    for p in points:
        assert env(p.alpha) >= p.f - 1e-12
    slopes = env.segment_slopes()
    assert all(s1 <= s0 + 1e-12 for s0, s1 in zip(slopes, slopes[1:]))


def test_envelope_alpha_ties_keep_max_f():
    env = concave_envelope([(0.0, 0.0), (0.0, 0.5), (1.0, 1.0)])
    assert env(0.0) == 0.5


def test_envelope_outside_domain_raises():
    env = concave_envelope([(0.0, 0.0), (1.0, 1.0)])
    with pytest.raises(ValueError):
        env(1.5)
    with pytest.raises(ValueError):
        env(-0.1)


def test_envelope_interpolates_vertices():
    env = concave_envelope([(0.0, 0.0), (0.5, 0.4), (1.0, 0.5)])
    assert env(0.0) == 0.0
    assert env(0.5) == pytest.approx(0.4)
    assert env(0.25) == pytest.approx(0.2)
    assert env.endpoint_slopes() == (pytest.approx(0.8), pytest.approx(0.2))


def test_envelope_needs_two_points():
    with pytest.raises(ValueError):
        concave_envelope([(0.3, 0.3)])


def test_max_f_attains_moran_dimension():
    # two-probability systems peak exactly at the support dimension
    for system, dim in ((BETA0, 1.0), (TRIDENT, LOG5_3), (BETA, LOG3_2)):
        points = spectrum_sweep(system, K_max=12)
        peak = max(p.f for p in points)
        assert peak <= dim + 1e-9
        assert peak == pytest.approx(dim, abs=1e-12)


def test_beta0_envelope_matches_entropy_curve():
    points = spectrum_sweep(BETA0, K_max=64)
    env = concave_envelope(points)

    def g(t):
        x = T_MAX_BETA0 - t
        if x <= 0 or x >= 1:
            return 0.0
        return -(x * math.log2(x) + (1 - x) * math.log2(1 - x))

    lo, hi = T_MIN_BETA0 + 0.05, T_MAX_BETA0 - 0.05
    worst = max(
        abs(env(lo + i * (hi - lo) / 200) - g(lo + i * (hi - lo) / 200))
        for i in range(201)
    )
    assert worst <= 5e-3


def test_beta0_envelope_matches_legendre_transform():
    points = spectrum_sweep(BETA0, K_max=64)
    env = concave_envelope(points)
    pipe = legendre_transform(BETA0)
    lo, hi = T_MIN_BETA0 + 0.05, T_MAX_BETA0 - 0.05
    checked = 0
    for t, bs in zip(pipe.t_values, pipe.b_star_values):
        if lo <= t <= hi:
            assert abs(env(t) - bs) <= 5e-3
            checked += 1
    assert checked > 100


# ---------------------------------------------------------------------------
# information dimension
# ---------------------------------------------------------------------------


def test_information_dimension_beta0():
    points = spectrum_sweep(BETA0, K_max=64)
    env = concave_envelope(points)
    t1 = information_dimension(env)
    expected = -(
        (1 / 3) * math.log(1 / 3) + (2 / 3) * math.log(2 / 3)
    ) / math.log(2)
    assert t1 == pytest.approx(expected, abs=2e-3)
    # the hull touches the diagonal there
    assert env(t1) == pytest.approx(t1, abs=2e-3)


def test_information_dimension_beta():
    points = spectrum_sweep(BETA, K_max=64)
    env = concave_envelope(points)
    t1 = information_dimension(env)
    expected = -(
        (1 / 3) * math.log(1 / 3) + (2 / 3) * math.log(2 / 3)
    ) / math.log(3)
    assert t1 == pytest.approx(expected, abs=2e-3)


def test_envelope_direct_construction_validates():
    with pytest.raises(ValueError):
        EnvelopeFunction(breakpoints=())
