"""Exact 1-D forward-Euler propagation for the two breakdown examples.

Example 1: Gaussian start, quartic target. The FE map x - h x^3 is not injective,
so the pushforward sums over three monotone branches and jumps at the critical
value r = T(1/sqrt(3h)).

Example 2: Gaussian target, start with Gaussian core on (-1, 1) and Laplace-type
tails. Every FE iterate keeps the core untouched and moves the tails outward,
which leaves a gap with no mass and a KL value bounded away from zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, special

from .measures import (
    LOG_SQRT_2PI,
    ConvexDomain,
    GaussianDensity1D,
    Piece,
    PiecewiseDensity1D,
    TargetPotential,
    polynomial_target,
)


class SingularPointError(ValueError):
    """The pushforward Jacobian diverges at this point; there is no finite density value."""


# ---------------------------------------------------------------------------
# Piecewise monotone maps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Branch:
    """One strictly monotone piece of a map, defined on the open interval (lo, hi).

    ``range_lo``/``range_hi`` bound the image (open), ``inverse`` maps the image back.
    """

    lo: float
    hi: float
    forward: Callable
    inverse: Callable
    deriv: Callable
    range_lo: float
    range_hi: float

    def covers(self, y) -> np.ndarray:
        y = np.asarray(y, float)
        return (y > self.range_lo) & (y < self.range_hi)


@dataclass(frozen=True)
class PiecewiseMap1D:
    branches: tuple
    # image points where some branch derivative vanishes (pushforward density is infinite there)
    singular_values: tuple = ()

    def __post_init__(self):
        branches = tuple(sorted(self.branches, key=lambda b: b.lo))
        object.__setattr__(self, "branches", branches)

    def __call__(self, x):
        x = np.asarray(x, float)
        out = np.full(x.shape, np.nan)
        for b in self.branches:
            m = (x > b.lo) & (x < b.hi)
            out[m] = b.forward(x[m])
        # branch endpoints: every branch formula extends continuously to its closure
        rest = np.isnan(out)
        if np.any(rest):
            for b in self.branches:
                m = rest & ((x == b.lo) | (x == b.hi))
                out[m] = b.forward(x[m])
                rest &= ~m
        return out

    def is_partition(self) -> bool:
        bs = self.branches
        if bs[0].lo != -math.inf or bs[-1].hi != math.inf:
            return False
        return all(a.hi == b.lo for a, b in zip(bs, bs[1:]))

    def check_monotone(self, samples: int = 200) -> bool:
        """Derivative sign constant on each branch (sampled)."""
        for b in self.branches:
            lo = b.lo if math.isfinite(b.lo) else min(b.hi, 0.0) - 50.0
            hi = b.hi if math.isfinite(b.hi) else max(b.lo, 0.0) + 50.0
            x = np.linspace(lo, hi, samples + 2)[1:-1]
            d = b.deriv(x)
            if not (np.all(d > 0) or np.all(d < 0)):
                return False
        return True

    def branch_count(self, y) -> np.ndarray:
        y = np.asarray(y, float)
        return sum(b.covers(y).astype(int) for b in self.branches)

    def is_singular(self, y, tol: float = 0.0) -> np.ndarray:
        y = np.asarray(y, float)
        if not self.singular_values:
            return np.zeros(y.shape, dtype=bool)
        sv = np.asarray(self.singular_values, float)
        return np.any(np.abs(y[..., None] - sv) <= tol, axis=-1)


def pushforward_density(density0: Callable, tmap: PiecewiseMap1D, y) -> np.ndarray:
    """Vectorized change of variables: sum over branches of rho0(T_i^-1(y)) |dT_i^-1/dy|.

    Singular points come back as NaN; use :func:`pushforward_multibranch` for the
    raising scalar version.
    """
    y = np.asarray(y, dtype=float)
    out = np.zeros(y.shape)
    for b in tmap.branches:
        m = b.covers(y)
        if not np.any(m):
            continue
        x = b.inverse(y[m])
        out[m] += density0(x) / np.abs(b.deriv(x))
    out[tmap.is_singular(y)] = np.nan
    return out


def pushforward_multibranch(density0: Callable, tmap: PiecewiseMap1D, y: float) -> float:
    """Pushforward density at a single point; raises :class:`SingularPointError` at critical values."""
    if bool(tmap.is_singular(np.asarray(float(y)))):
        raise SingularPointError(f"singular point: the Jacobian diverges at y={y}")
    return float(pushforward_density(density0, tmap, np.array([float(y)]))[0])


def pushforward_mass(density0: Callable, tmap: PiecewiseMap1D, lo: float, hi: float) -> float:
    """Adaptive quadrature of the pushforward on [lo, hi], split at range endpoints and singular values."""
    cuts = {lo, hi}
    for b in tmap.branches:
        cuts.update(v for v in (b.range_lo, b.range_hi) if lo < v < hi)
    cuts.update(v for v in tmap.singular_values if lo < v < hi)
    cuts = sorted(cuts)

    def f(t):
        return float(pushforward_density(density0, tmap, np.array([t]))[0])

    total = 0.0
    for a, b in zip(cuts, cuts[1:]):
        # interior nodes of QUADPACK never hit the endpoints, so the singular set is avoided
        val, _ = integrate.quad(f, a, b, limit=400, epsabs=1e-12, epsrel=1e-11)
        total += val
    return total


# ---------------------------------------------------------------------------
# Example 1
# ---------------------------------------------------------------------------


def _solve_monotone(f, df, y, lo, hi, tol=1e-14, maxiter=200):
    """Newton iteration kept inside a sign-changing bracket, bisecting when Newton leaves it."""
    y = np.asarray(y, float)
    lo = np.broadcast_to(np.asarray(lo, float), y.shape).copy()
    hi = np.broadcast_to(np.asarray(hi, float), y.shape).copy()
    flo = f(lo) - y
    x = 0.5 * (lo + hi)
    for _ in range(maxiter):
        fx = f(x) - y
        same = np.sign(fx) == np.sign(flo)
        lo = np.where(same, x, lo)
        flo = np.where(same, fx, flo)
        hi = np.where(same, hi, x)
        d = df(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            xn = x - fx / d
        bad = ~np.isfinite(xn) | (xn <= np.minimum(lo, hi)) | (xn >= np.maximum(lo, hi))
        xn = np.where(bad, 0.5 * (lo + hi), xn)
        done = np.abs(xn - x) <= tol * np.maximum(1.0, np.abs(x))
        x = xn
        if np.all(done):
            break
    return x


@dataclass(frozen=True)
class Example1Geometry:
    h: float

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("h must be positive")

    @property
    def turning_point(self) -> float:
        """Where the derivative 1 - 3 h x^2 vanishes (positive root)."""
        return 1.0 / math.sqrt(3.0 * self.h)

    @property
    def r(self) -> float:
        """Critical value T(turning_point)."""
        return 2.0 / 3.0 * self.turning_point

    @property
    def split_points(self) -> tuple[float, float]:
        return (-1.5 * self.r, 1.5 * self.r)


def fe_map_example1(h: float) -> PiecewiseMap1D:
    """x -> x - h x^3 split into its three monotone branches."""
    g = Example1Geometry(h)
    xs, r = g.turning_point, g.r

    def T(x):
        return x - h * x**3

    def dT(x):
        return 1.0 - 3.0 * h * x**2

    def inv_mid(y):
        y = np.asarray(y, float)
        return _solve_monotone(T, dT, y, -xs, xs)

    def inv_left(y):
        # T(-s) = s (h s^2 - 1) >= |y| once s >= max(2 xs, (4|y|/h)^(1/3))
        y = np.asarray(y, float)
        s = np.maximum(2.0 * xs, np.cbrt(4.0 * np.abs(y) / h))
        return _solve_monotone(T, dT, y, -s, -xs)

    def inv_right(y):
        return -inv_left(-np.asarray(y, float))

    branches = (
        Branch(-math.inf, -xs, T, inv_left, dT, -r, math.inf),
        Branch(-xs, xs, T, inv_mid, dT, -r, r),
        Branch(xs, math.inf, T, inv_right, dT, -math.inf, r),
    )
    return PiecewiseMap1D(branches, singular_values=(-r, r))


def example1_normalizer() -> float:
    """ln of the integral of exp(-x^2/2 - x^4/4) over the line."""
    val, _ = integrate.quad(lambda x: math.exp(-0.5 * x * x - 0.25 * x**4), -np.inf, np.inf, epsabs=0, epsrel=1e-13)
    return math.log(val)


def example1_target() -> TargetPotential:
    """U = x^2/2 + x^4/4 + C0, normalized."""
    c0 = example1_normalizer()
    return polynomial_target((c0, 0.0, 0.5, 0.0, 0.25), ConvexDomain.interval(-5.0, 5.0), name="quartic")


def example1_initial() -> GaussianDensity1D:
    return GaussianDensity1D(0.0, 1.0)


def example1_density(h: float, y) -> np.ndarray:
    """rho1 = T_# N(0,1) evaluated at y (NaN at the critical values +-r)."""
    return pushforward_density(example1_initial().pdf, fe_map_example1(h), y)


def example1_mass(h: float) -> float:
    """Total mass of rho1 by quadrature; the outermost cut sits far enough out that the remainder is < 1e-30."""
    tmap = fe_map_example1(h)
    g = Example1Geometry(h)
    x_far = max(2.0 * g.turning_point, 12.0)
    Y = float(tmap(np.array([-x_far]))[0])
    return pushforward_mass(example1_initial().pdf, tmap, -Y, Y)


@dataclass(frozen=True)
class JumpProbe:
    r: float
    deltas: np.ndarray
    left: np.ndarray
    right: np.ndarray
    right_limit: float

    def left_increasing(self) -> bool:
        return bool(np.all(np.diff(self.left) > 0))

    def left_ratio(self) -> float:
        return float(self.left[-1] / self.left[0])

    def right_converges(self, tol: float = 1e-3) -> bool:
        return bool(np.all(np.abs(np.diff(self.right)) < tol)) and bool(np.isfinite(self.right).all())


def example1_jump_probe(h: float, deltas: Sequence[float]) -> JumpProbe:
    """rho1(r - delta) and rho1(r + delta) for a decreasing list of offsets."""
    g = Example1Geometry(h)
    d = np.asarray(deltas, float)
    if np.any(d <= 0) or np.any(d >= g.r):
        raise ValueError("offsets must lie in (0, r)")
    if np.any(np.diff(d) >= 0):
        raise ValueError("offsets must be strictly decreasing")
    tmap = fe_map_example1(h)
    rho0 = example1_initial().pdf
    left = pushforward_density(rho0, tmap, g.r - d)
    right = pushforward_density(rho0, tmap, g.r + d)
    # only the outer branch reaches above r; its preimage of r is -2 * turning_point, where |T'| = 3
    right_limit = float(rho0(np.array(-2.0 * g.turning_point))) / 3.0
    return JumpProbe(g.r, d, left, right, right_limit)


# ---------------------------------------------------------------------------
# Example 2
# ---------------------------------------------------------------------------


def example2_D0() -> float:
    """Normalizer of the initial density: sqrt(2 pi) erf(1/sqrt 2) + 2 e^(-1/2)."""
    return math.sqrt(2.0 * math.pi) * math.erf(1.0 / math.sqrt(2.0)) + 2.0 * math.exp(-0.5)


def example2_D0_quadrature() -> float:
    core, _ = integrate.quad(lambda x: math.exp(-0.5 * x * x), -1.0, 1.0, epsabs=0, epsrel=1e-13)
    tail, _ = integrate.quad(lambda x: math.exp(-(x - 0.5)), 1.0, np.inf, epsabs=0, epsrel=1e-13)
    return core + 2.0 * tail


def example2_target() -> TargetPotential:
    """Standard Gaussian target, U = x^2/2 + ln sqrt(2 pi)."""
    return polynomial_target((LOG_SQRT_2PI, 0.0, 0.5), ConvexDomain.interval(-8.0, 8.0), name="gaussian")


@dataclass(frozen=True)
class Example2Coefficients:
    """Trajectory of tail parameters; the tail on [c_n, inf) is exp(-a_n x + b_n).

    ``beta`` = b_n - a_n c_n is the log-density at the tail's inner edge, kept
    separately because b_n and a_n c_n grow together and cancel.
    """

    h: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    beta: np.ndarray
    D0: float

    @property
    def n_steps(self) -> int:
        return self.h.size

    def tail_mass(self, n: int) -> float:
        return math.exp(self.beta[n]) / self.a[n]


def example2_recursion(h_sequence, n: int | None = None) -> Example2Coefficients:
    """Coefficient triples for steps 0..n.

    ``h_sequence`` is either one step size (repeated n times) or the full list.
    """
    h = np.atleast_1d(np.asarray(h_sequence, dtype=float))
    if n is not None:
        if h.size == 1:
            h = np.full(n, h[0])
        elif h.size != n:
            raise ValueError("step list length does not match n")
    if np.any(~((h > 0) & (h < 1))):
        raise ValueError("step size out of admissible range (0, 1)")
    D0 = example2_D0()
    a = np.empty(h.size + 1)
    b = np.empty(h.size + 1)
    c = np.empty(h.size + 1)
    beta = np.empty(h.size + 1)
    a[0], b[0], c[0] = 1.0, 0.5 - math.log(D0), 1.0
    beta[0] = b[0] - a[0] * c[0]
    for k, hk in enumerate(h):
        lg = math.log1p(-hk)
        a[k + 1] = a[k] / (1.0 - hk)
        b[k + 1] = b[k] + a[k] ** 2 * hk / (1.0 - hk) - lg
        c[k + 1] = (1.0 - hk) * c[k] + a[k] * hk
        beta[k + 1] = beta[k] - lg
    return Example2Coefficients(_ro(h), _ro(a), _ro(b), _ro(c), _ro(beta), D0)


def _ro(a):
    a.setflags(write=False)
    return a


def example2_density(coeffs: Example2Coefficients, n: int) -> PiecewiseDensity1D:
    """Even density: Gaussian core on [0, 1), nothing on [1, c_n), exponential tail on [c_n, inf)."""
    if not 0 <= n <= coeffs.n_steps:
        raise IndexError(f"step {n} outside the computed trajectory 0..{coeffs.n_steps}")
    core = Piece(0.0, 1.0, (math.log(coeffs.D0), 0.0, 0.5), 0.0)
    tail = Piece(float(coeffs.c[n]), math.inf, (-float(coeffs.beta[n]), float(coeffs.a[n])), float(coeffs.c[n]))
    return PiecewiseDensity1D((core, tail), "even")


def example2_initial() -> PiecewiseDensity1D:
    return example2_density(example2_recursion([0.5]), 0)


def fe_map_example2(coeffs: Example2Coefficients, n: int) -> PiecewiseMap1D:
    """The step-n map: identity on (-1, 1), (1 - h) x + a h on [1, inf), odd extension.

    On the empty gap [1, c_n) the affine formula is used as well; no mass lives there.
    """
    hn, an = float(coeffs.h[n]), float(coeffs.a[n])
    sh = an * hn
    lam = 1.0 - hn
    y1 = lam + sh  # image of x = 1

    def ident(x):
        return np.asarray(x, float)

    def one(x):
        return np.ones(np.shape(x))

    def lam_const(x):
        return np.full(np.shape(x), lam)

    branches = (
        Branch(-math.inf, -1.0, lambda x: lam * x - sh, lambda y: (y + sh) / lam, lam_const, -math.inf, -y1),
        Branch(-1.0, 1.0, ident, ident, one, -1.0, 1.0),
        Branch(1.0, math.inf, lambda x: lam * x + sh, lambda y: (y - sh) / lam, lam_const, y1, math.inf),
    )
    return PiecewiseMap1D(branches)


def pinsker_floor_closed_form() -> float:
    """4 pi erf(1/sqrt 2)^2 (1/sqrt(2 pi) - 1/D0)^2."""
    e = math.erf(1.0 / math.sqrt(2.0))
    return 4.0 * math.pi * e * e * (1.0 / math.sqrt(2.0 * math.pi) - 1.0 / example2_D0()) ** 2


def example2_kl_floor(density: PiecewiseDensity1D) -> float:
    """2 (integral over (-1, 1) of rho - rho*)^2 with rho* the standard normal; a Pinsker lower bound on KL."""
    gauss = GaussianDensity1D()
    diff, _ = integrate.quad(
        lambda x: float(density.pdf(np.array(x)) - gauss.pdf(x)), -1.0, 1.0, epsabs=0, epsrel=1e-13
    )
    return 2.0 * diff * diff


def example2_tv_inner_bound() -> float:
    """(1/sqrt(2 pi) - 1/D0) times the integral of exp(-x^2/2) over (-1, 1)."""
    core = math.sqrt(2.0 * math.pi) * special.erf(1.0 / math.sqrt(2.0))
    return (1.0 / math.sqrt(2.0 * math.pi) - 1.0 / example2_D0()) * core


def example2_kl_closed_form(coeffs: Example2Coefficients, n: int) -> float:
    """Exact KL(rho_n || N(0,1)).

    The core contributes its mass times ln(sqrt(2 pi)/D0); each tail is an
    exponential law shifted to c_n, whose moments are elementary.
    """
    a, c = float(coeffs.a[n]), float(coeffs.c[n])
    m = coeffs.tail_mass(n)
    core = (1.0 - 2.0 * m) * math.log(math.sqrt(2.0 * math.pi) / coeffs.D0)
    tail = math.log(m * a) - 1.0 + 0.5 * c * c + c / a + 1.0 / (a * a) + LOG_SQRT_2PI
    return core + 2.0 * m * tail
