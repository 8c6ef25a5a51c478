import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from wgflow.counterexamples import example2_density, example2_recursion, example2_tv_inner_bound
from wgflow.measures import GaussianDensity1D, GridDensity1D, ParticleEnsemble
from wgflow.metrics import (
    Coupling,
    coupling_rms,
    kl_grid,
    tv_grid,
    tv_piecewise_inner,
    w1_1d,
    w2_1d,
    w2_bruteforce,
    w2_matching,
)

TV_INNER = 0.0975091510008557


def test_dirac_translation():
    assert w2_1d([0.0], [1.0]) == 1.0
    assert w1_1d([0.0], [1.0]) == 1.0
    x = np.random.default_rng(0).standard_normal(30)
    assert w2_1d(x, x) == 0.0


def test_w2_1d_rejects_higher_dim():
    with pytest.raises(ValueError):
        w2_1d(ParticleEnsemble(np.zeros((3, 2))), [0.0, 1.0, 2.0])


def test_w2_1d_unequal_sizes_exact():
    # two atoms vs three atoms: quantile cells [0,1/3),[1/3,1/2),[1/2,2/3),[2/3,1)
    a, b = [0.0, 1.0], [0.0, 0.5, 2.0]
    expect = (1 / 3) * 0 + (1 / 6) * 0.25 + (1 / 6) * 0.25 + (1 / 3) * 1.0
    assert w2_1d(a, b) == pytest.approx(math.sqrt(expect), abs=1e-15)


@pytest.mark.parametrize("seed", range(10))
def test_w1_against_cdf_formula(seed):
    rng = np.random.default_rng(seed)
    a, b = rng.standard_normal(rng.integers(1, 40)), 2 * rng.random(rng.integers(1, 40))
    assert w1_1d(a, b) == pytest.approx(stats.wasserstein_distance(a, b), abs=1e-12)


def test_gaussian_quantile_w2():
    g1, g2 = GaussianDensity1D(0.0, 1.0), GaussianDensity1D(0.5, 2.0)
    assert w2_1d(g1, g2) == pytest.approx(math.hypot(0.5, 1.0), rel=1e-3)
    grid = GridDensity1D.from_function(g2.pdf, -20, 20, 8001)
    assert w2_1d(grid, g2) < 1e-3


@pytest.mark.parametrize("n", range(1, 9))
def test_matching_vs_bruteforce(n):
    rng = np.random.default_rng(n)
    for _ in range(4):
        d = int(rng.integers(1, 4))
        a, b = rng.standard_normal((n, d)), rng.standard_normal((n, d)) + 0.3
        v, c = w2_matching(a, b)
        vb, cb = w2_bruteforce(a, b)
        assert v == pytest.approx(vb, abs=1e-10)
        assert c.cost == pytest.approx(cb.cost, abs=1e-12)
        assert v <= coupling_rms(a, b) + 1e-15
        if d == 1:
            assert v == pytest.approx(w2_1d(a[:, 0], b[:, 0]), abs=1e-10)


def test_matching_identical_gives_identity():
    a = np.random.default_rng(3).standard_normal((12, 2))
    v, c = w2_matching(a, a)
    assert v == 0.0
    assert np.array_equal(c.perm, np.arange(12))


def test_matching_errors():
    with pytest.raises(ValueError):
        w2_matching(np.zeros((3, 1)), np.zeros((4, 1)))
    with pytest.raises(ValueError):
        w2_bruteforce(np.zeros((11, 1)), np.zeros((11, 1)))
    with pytest.raises(ValueError):
        Coupling(np.array([0, 0, 1]), 0.0)


@given(st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_matching_triangle(seed):
    rng = np.random.default_rng(seed)
    n, d = int(rng.integers(1, 15)), int(rng.integers(1, 4))
    a, b, c = (rng.standard_normal((n, d)) * rng.uniform(0.1, 3) for _ in range(3))
    ab, bc, ac = w2_matching(a, b)[0], w2_matching(b, c)[0], w2_matching(a, c)[0]
    assert ac <= ab + bc + 1e-12


def test_w1_le_w2_random():
    rng = np.random.default_rng(7)
    for _ in range(500):
        a = rng.standard_normal(rng.integers(1, 30)) * rng.uniform(0.1, 3)
        b = rng.standard_normal(rng.integers(1, 30)) + rng.uniform(-2, 2)
        assert w1_1d(a, b) <= w2_1d(a, b) + 1e-12


def test_kantorovich_rubinstein_spot_check():
    rng = np.random.default_rng(11)
    mu, nu = rng.standard_normal(60), 0.5 + 1.5 * rng.standard_normal(45)
    w1 = w1_1d(mu, nu)
    for _ in range(20):
        knots = np.sort(rng.uniform(-6, 6, 8))
        slopes = rng.uniform(-1, 1, 9)
        vals = np.concatenate(([0.0], np.cumsum(slopes[1:-1] * np.diff(knots))))

        def f(x):
            # piecewise linear with all slopes in [-1, 1], extended linearly beyond the knots
            y = np.interp(x, knots, vals)
            y = np.where(x < knots[0], vals[0] + slopes[0] * (x - knots[0]), y)
            return np.where(x > knots[-1], vals[-1] + slopes[-1] * (x - knots[-1]), y)

        assert f(mu).mean() - f(nu).mean() <= w1 + 1e-10


def _random_grid(rng, m=401):
    x = np.linspace(-5, 5, m)
    k = rng.integers(1, 4)
    v = sum(rng.uniform(0.2, 1) * np.exp(-0.5 * ((x - rng.uniform(-3, 3)) / rng.uniform(0.3, 2)) ** 2) for _ in range(k))
    return GridDensity1D(-5, 5, v + 1e-6).normalized()


def test_pinsker_on_random_grid_pairs():
    rng = np.random.default_rng(5)
    for _ in range(500):
        a, b = _random_grid(rng), _random_grid(rng)
        kl, tv = kl_grid(a, b), tv_grid(a, b)
        assert kl >= 2 * tv * tv - 1e-15
        assert 0 <= tv <= 1


def test_grid_metric_errors():
    a = GridDensity1D(-1, 1, np.ones(11)).normalized()
    with pytest.raises(ValueError):
        tv_grid(a, GridDensity1D(-1, 1, np.ones(11)))
    with pytest.raises(ValueError):
        kl_grid(a, GridDensity1D(-1, 1, np.ones(12)).normalized())
    zero_tail = GridDensity1D(-1, 1, np.r_[np.ones(6), np.zeros(5)]).normalized()
    assert kl_grid(a, zero_tail) == math.inf
    assert kl_grid(zero_tail, a) < math.inf  # 0 ln 0 = 0


@pytest.mark.parametrize("n", [0, 3, 12])
def test_example2_tv_lower_bound(n):
    assert example2_tv_inner_bound() == pytest.approx(TV_INNER, abs=1e-15)
    co = example2_recursion(0.3, 12)
    d = example2_density(co, n)
    phi = stats.norm.pdf
    c = co.c[n]
    inner = tv_piecewise_inner(d, phi)
    # the rest of the line, split where the density changes form
    outer = 0.0
    for lo, hi in [(1.0, c), (c, c + 40)]:
        if hi > lo:
            outer += integrate.quad(lambda x: abs(float(d.pdf(np.array(x))) - phi(x)), lo, hi, limit=200)[0]
    tv = 0.5 * (inner + 2 * outer)
    assert tv >= TV_INNER
    assert inner == pytest.approx(TV_INNER, rel=1e-9)
