"""Shared domain types: convex domains, particle ensembles, 1-D densities, target potentials.

All containers are immutable after construction. Arrays handed in are copied and
marked read-only so an ensemble can be shared between solver iterations safely.

Shape conventions: points in R^d are arrays of shape ``(..., d)``; the 1-D density
classes take plain arrays of abscissae of any shape.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import polynomial as P
from scipy import integrate, special

# exp(-TAIL_EXPONENT) < 1e-16: unbounded pieces are cut where the density drops below this
TAIL_EXPONENT = 16.0 * math.log(10.0) + 0.5
LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


# ---------------------------------------------------------------------------
# Convex domains
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConvexDomain:
    """A closed ball, an axis-aligned box, or a 1-D interval.

    ``size`` holds the radius for a ball and the half-widths for a box/interval.
    Use the :meth:`ball`, :meth:`box` and :meth:`interval` constructors.
    """

    kind: str
    center: np.ndarray
    size: np.ndarray

    def __post_init__(self):
        if self.kind not in ("ball", "box", "interval"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        center = _frozen(np.atleast_1d(self.center))
        size = _frozen(np.atleast_1d(self.size))
        if center.ndim != 1:
            raise ValueError("center must be a vector")
        if self.kind == "ball":
            if size.shape != (1,):
                raise ValueError("a ball takes a single radius")
        elif size.shape != center.shape:
            raise ValueError("box half-widths must match the center dimension")
        if self.kind == "interval" and center.shape != (1,):
            raise ValueError("an interval is one-dimensional")
        if np.any(size <= 0) or not np.all(np.isfinite(size)):
            raise ValueError("domain must have nonempty interior and finite extent")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "size", size)

    @classmethod
    def ball(cls, center, radius: float) -> "ConvexDomain":
        return cls("ball", np.atleast_1d(np.asarray(center, float)), np.array([radius], float))

    @classmethod
    def box(cls, lo, hi) -> "ConvexDomain":
        lo, hi = np.atleast_1d(np.asarray(lo, float)), np.atleast_1d(np.asarray(hi, float))
        if np.any(hi <= lo):
            raise ValueError("box needs lo < hi in every coordinate")
        return cls("box", (lo + hi) / 2, (hi - lo) / 2)

    @classmethod
    def interval(cls, lo: float, hi: float) -> "ConvexDomain":
        if not hi > lo:
            raise ValueError("interval needs lo < hi")
        return cls("interval", np.array([(lo + hi) / 2]), np.array([(hi - lo) / 2]))

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    @property
    def R0(self) -> float:
        """Radius of the smallest origin-centred ball containing the domain."""
        if self.kind == "ball":
            return float(np.linalg.norm(self.center) + self.size[0])
        return float(np.linalg.norm(np.abs(self.center) + self.size))

    @property
    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        if self.kind == "ball":
            r = self.size[0]
            return self.center - r, self.center + r
        return self.center - self.size, self.center + self.size

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim == 0 or x.shape[-1] != self.dim:
            raise ValueError(f"expected points with trailing dimension {self.dim}, got shape {x.shape}")
        return x

    def project(self, x) -> np.ndarray:
        """Euclidean nearest point of the domain (radial shrink for balls, clamp for boxes)."""
        x = self._check(x)
        if self.kind == "ball":
            off = x - self.center
            norm = np.linalg.norm(off, axis=-1, keepdims=True)
            r = self.size[0]
            scale = np.where(norm > r, r / np.where(norm > 0, norm, 1.0), 1.0)
            return self.center + off * scale
        lo, hi = self.bounds
        return np.clip(x, lo, hi)

    def contains(self, x, tol: float = 1e-12) -> np.ndarray:
        x = self._check(x)
        if self.kind == "ball":
            return np.linalg.norm(x - self.center, axis=-1) <= self.size[0] * (1 + tol) + tol
        lo, hi = self.bounds
        return np.all((x >= lo - tol) & (x <= hi + tol), axis=-1)

    def sample_uniform(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.kind == "ball":
            g = rng.standard_normal((n, self.dim))
            g /= np.linalg.norm(g, axis=1, keepdims=True)
            rad = self.size[0] * rng.random(n) ** (1.0 / self.dim)
            return self.center + g * rad[:, None]
        lo, hi = self.bounds
        return lo + (hi - lo) * rng.random((n, self.dim))

    def sample_boundary(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.kind == "ball":
            g = rng.standard_normal((n, self.dim))
            g /= np.linalg.norm(g, axis=1, keepdims=True)
            return self.center + self.size[0] * g
        lo, hi = self.bounds
        pts = lo + (hi - lo) * rng.random((n, self.dim))
        face = rng.integers(0, self.dim, n)
        side = rng.integers(0, 2, n).astype(bool)
        idx = np.arange(n)
        pts[idx, face] = np.where(side, hi[face], lo[face])
        return pts


def project(domain: ConvexDomain, x) -> np.ndarray:
    """Projection operator onto ``domain``; idempotent and nonexpansive."""
    return domain.project(x)


# ---------------------------------------------------------------------------
# Particle ensembles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ParticleEnsemble:
    """N equally weighted points in R^d (weights are implicitly 1/N)."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ValueError("ensemble needs an (N, d) array with N >= 1")
        if not np.all(np.isfinite(pts)):
            raise ValueError("ensemble points must be finite")
        object.__setattr__(self, "points", _frozen(pts))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def with_points(self, points) -> "ParticleEnsemble":
        points = np.asarray(points, dtype=float)
        if points.shape != self.points.shape:
            raise ValueError("particle count and dimension are fixed")
        return ParticleEnsemble(points)

    @classmethod
    def uniform(cls, domain: ConvexDomain, n: int, seed: int | None = None) -> "ParticleEnsemble":
        return cls(domain.sample_uniform(np.random.default_rng(seed), n))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"x{k + 1}" for k in range(self.dim)])
            for row in self.points:
                w.writerow([f"{v:.17g}" for v in row])

    @classmethod
    def from_csv(cls, path) -> "ParticleEnsemble":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        return cls(np.array([[float(v) for v in r] for r in rows[1:]]))


# ---------------------------------------------------------------------------
# 1-D densities
# ---------------------------------------------------------------------------


class OutsideSupportError(ValueError):
    """The density vanishes at the requested point, so its logarithm is undefined."""


@dataclass(frozen=True)
class GaussianDensity1D:
    mean: float = 0.0
    std: float = 1.0

    def pdf(self, x):
        return np.exp(self.log_pdf(x))

    def log_pdf(self, x):
        z = (np.asarray(x, float) - self.mean) / self.std
        return -0.5 * z * z - math.log(self.std) - LOG_SQRT_2PI

    def grad_log_pdf(self, x):
        return -(np.asarray(x, float) - self.mean) / self.std**2

    def singular_mask(self, x):
        return np.zeros(np.shape(x), dtype=bool)

    def cdf(self, x):
        return special.ndtr((np.asarray(x, float) - self.mean) / self.std)

    def quantile(self, q):
        return self.mean + self.std * special.ndtri(np.asarray(q, float))


@dataclass(frozen=True)
class GridDensity1D:
    """Nodal density values on a uniform grid of ``values.size`` points over [lo, hi]."""

    lo: float
    hi: float
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 2:
            raise ValueError("need at least two nodes")
        if not self.hi > self.lo:
            raise ValueError("grid needs lo < hi")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ValueError("density values must be finite and nonnegative")
        object.__setattr__(self, "values", _frozen(v))

    @classmethod
    def from_function(cls, f: Callable, lo: float, hi: float, m: int, normalize: bool = True):
        nodes = np.linspace(lo, hi, m)
        g = cls(lo, hi, np.asarray(f(nodes), float))
        return g.normalized() if normalize else g

    @property
    def m(self) -> int:
        return self.values.size

    @cached_property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.m)

    @property
    def dx(self) -> float:
        return (self.hi - self.lo) / (self.m - 1)

    def mass(self) -> float:
        return float(np.trapezoid(self.values, dx=self.dx))

    def normalized(self) -> "GridDensity1D":
        mass = self.mass()
        if mass <= 0:
            raise ValueError("cannot normalize a zero density")
        return GridDensity1D(self.lo, self.hi, self.values / mass)

    def pdf(self, x):
        return np.interp(x, self.nodes, self.values, left=0.0, right=0.0)

    def log_pdf(self, x):
        with np.errstate(divide="ignore"):
            return np.log(self.pdf(x))

    @cached_property
    def _grad_log_nodes(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            logv = np.log(self.values)
        pos = self.values > 0
        g = np.full(self.m, np.nan)
        # central differences inside each run of positive values, one-sided at run edges
        runs = np.flatnonzero(np.diff(np.concatenate(([0], pos.astype(int), [0]))))
        for a, b in zip(runs[::2], runs[1::2]):
            if b - a >= 2:
                g[a:b] = np.gradient(logv[a:b], self.dx)
            else:
                g[a:b] = 0.0
        return g

    def grad_log_pdf(self, x):
        return np.interp(x, self.nodes, self._grad_log_nodes)

    def singular_mask(self, x):
        # next to a zero node the log-density has no usable derivative
        x = np.asarray(x, float)
        idx = np.clip(np.floor((x - self.lo) / self.dx).astype(int), 0, self.m - 2)
        v = self.values
        return (v[idx] == 0) | (v[idx + 1] == 0) | (x < self.lo) | (x > self.hi)

    @cached_property
    def _cdf_nodes(self) -> np.ndarray:
        c = integrate.cumulative_trapezoid(self.values, dx=self.dx, initial=0.0)
        return c / c[-1]

    def cdf(self, x):
        return np.interp(x, self.nodes, self._cdf_nodes, left=0.0, right=1.0)

    def quantile(self, q):
        c = self._cdf_nodes
        keep = np.concatenate(([True], np.diff(c) > 0))
        return np.interp(q, c[keep], self.nodes[keep])


@dataclass(frozen=True)
class Piece:
    """density(x) = exp(-p(x - anchor)) on [lo, hi); ``coeffs`` are ascending powers.

    The anchor defaults to ``lo`` (or ``hi`` when ``lo`` is unbounded). Expanding the
    exponent about an endpoint keeps huge-offset tails like exp(-a x + b) with
    a*c ~ b exactly representable.
    """

    lo: float
    hi: float
    coeffs: tuple
    anchor: float | None = None

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if not hi > lo:
            raise ValueError(f"empty piece [{lo}, {hi})")
        coeffs = tuple(float(c) for c in np.atleast_1d(self.coeffs))
        if not coeffs or not all(math.isfinite(c) for c in coeffs):
            raise ValueError("piece needs finite polynomial coefficients")
        anchor = self.anchor
        if anchor is None:
            anchor = lo if math.isfinite(lo) else (hi if math.isfinite(hi) else 0.0)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "anchor", float(anchor))
        lead = next((c for c in reversed(coeffs) if c != 0.0), 0.0)
        deg = max(i for i, c in enumerate(coeffs) if c != 0.0) if any(coeffs) else 0
        if math.isinf(hi) and not (deg > 0 and lead > 0):
            raise ValueError("unbounded piece must have an exponent growing to +inf")
        if math.isinf(lo) and not (deg > 0 and lead * (-1) ** deg > 0):
            raise ValueError("unbounded piece must have an exponent growing to +inf")

    def exponent(self, x):
        return P.polyval(np.asarray(x, float) - self.anchor, self.coeffs)

    def exponent_local(self, s):
        return P.polyval(s, self.coeffs)

    def d_exponent(self, x):
        return P.polyval(np.asarray(x, float) - self.anchor, P.polyder(self.coeffs))

    @cached_property
    def local_bounds(self) -> tuple[float, float]:
        """Support in the local variable s = x - anchor, with unbounded ends truncated."""
        slo, shi = self.lo - self.anchor, self.hi - self.anchor
        finite_end = slo if math.isfinite(slo) else (shi if math.isfinite(shi) else 0.0)
        target = max(TAIL_EXPONENT, self.exponent_local(finite_end) + TAIL_EXPONENT)
        for sign, end in ((1.0, shi), (-1.0, slo)):
            if math.isfinite(end):
                continue
            step = 1.0
            slope = abs(P.polyval(finite_end, P.polyder(self.coeffs)))
            if slope > 0:
                step = min(1.0, 1.0 / slope)
            t = step
            while self.exponent_local(finite_end + sign * t) < target:
                t *= 2.0
            # tighten the doubling overshoot by bisection on [t/2, t]
            lo_t, hi_t = 0.5 * t, t
            for _ in range(60):
                mid = 0.5 * (lo_t + hi_t)
                if self.exponent_local(finite_end + sign * mid) < target:
                    lo_t = mid
                else:
                    hi_t = mid
            t = hi_t
            if sign > 0:
                shi = finite_end + t
            else:
                slo = finite_end - t
        return slo, shi

    def local_grid(self, n: int, max_step: float | None = None) -> np.ndarray:
        """At least ``n`` uniform nodes; more if needed so the exponent changes by at most ``max_step`` per cell."""
        slo, shi = self.local_bounds
        if max_step is not None:
            d = P.polyder(self.coeffs)
            probe = np.linspace(slo, shi, 257)
            slope = float(np.max(np.abs(P.polyval(probe, d)))) if len(d) else 0.0
            n = max(n, int(math.ceil((shi - slo) * slope / max_step)) + 1)
            n += 1 - n % 2
        return np.linspace(slo, shi, n)

    def mass(self) -> float:
        slo, shi = self.local_bounds
        val, _ = integrate.quad(
            lambda s: math.exp(-self.exponent_local(s)), slo, shi, epsabs=0.0, epsrel=1e-13, limit=200
        )
        return val

    def value_at_lo(self) -> float:
        if not math.isfinite(self.lo):
            return 0.0
        return math.exp(-self.exponent_local(self.lo - self.anchor))

    def value_at_hi(self) -> float:
        if not math.isfinite(self.hi):
            return 0.0
        return math.exp(-self.exponent_local(self.hi - self.anchor))

    def mirrored(self) -> "Piece":
        """The reflection x -> -x (half-open ends swap sides; measure-zero difference)."""
        coeffs = tuple(c * (-1) ** k for k, c in enumerate(self.coeffs))
        return Piece(-self.hi, -self.lo, coeffs, -self.anchor)


@dataclass(frozen=True)
class PiecewiseDensity1D:
    """exp(-polynomial) on disjoint intervals, zero elsewhere.

    With ``symmetry="even"`` the pieces describe x >= 0 only and the density is
    evaluated at |x|, so symmetry holds exactly.
    """

    pieces: tuple
    symmetry: str = "none"

    def __post_init__(self):
        pieces = tuple(sorted(self.pieces, key=lambda p: p.lo))
        if self.symmetry not in ("even", "none"):
            raise ValueError("symmetry must be 'even' or 'none'")
        if not pieces:
            raise ValueError("density needs at least one piece")
        for a, b in zip(pieces, pieces[1:]):
            if b.lo < a.hi:
                raise ValueError("pieces overlap")
        if self.symmetry == "even" and pieces[0].lo < 0:
            raise ValueError("an even density lists its pieces on [0, inf) only")
        object.__setattr__(self, "pieces", pieces)

    @cached_property
    def full_pieces(self) -> tuple:
        """All pieces on the whole line (mirror included for even densities)."""
        if self.symmetry == "none":
            return self.pieces
        left = [p.mirrored() for p in reversed(self.pieces) if p.hi > 0 or p.lo > 0]
        return tuple(left) + self.pieces

    def _arg(self, x):
        x = np.asarray(x, dtype=float)
        return np.abs(x) if self.symmetry == "even" else x

    def log_pdf(self, x):
        u = self._arg(x)
        out = np.full(u.shape, -np.inf)
        for p in self.pieces:
            m = (u >= p.lo) & (u < p.hi)
            if np.any(m):
                out[m] = -p.exponent(u[m])
        return out

    def pdf(self, x):
        return np.exp(self.log_pdf(x))

    def grad_log_pdf(self, x):
        x = np.asarray(x, dtype=float)
        u = self._arg(x)
        out = np.full(u.shape, np.nan)
        for p in self.pieces:
            m = (u >= p.lo) & (u < p.hi)
            if np.any(m):
                out[m] = -p.d_exponent(u[m])
        if self.symmetry == "even":
            out = out * np.sign(x)
        return out

    @cached_property
    def discontinuities(self) -> np.ndarray:
        """Points (whole line) where the density jumps."""
        ends = sorted({e for p in self.full_pieces for e in (p.lo, p.hi) if math.isfinite(e)})
        jumps = []
        for e in ends:
            left = next((p.value_at_hi() for p in self.full_pieces if p.hi == e), 0.0)
            right = next((p.value_at_lo() for p in self.full_pieces if p.lo == e), 0.0)
            if abs(left - right) > 1e-12 * max(left, right, 1e-300):
                jumps.append(e)
        return np.array(jumps)

    def singular_mask(self, x, tol: float = 0.0):
        x = np.asarray(x, dtype=float)
        if self.discontinuities.size == 0:
            return np.zeros(x.shape, dtype=bool)
        return np.any(np.abs(x[..., None] - self.discontinuities) <= tol, axis=-1)

    def mass(self) -> float:
        total = math.fsum(p.mass() for p in self.pieces)
        return 2.0 * total if self.symmetry == "even" else total

    @cached_property
    def _cdf_table(self) -> tuple[np.ndarray, np.ndarray]:
        xs, cs, acc = [], [], 0.0
        for p in self.full_pieces:
            s = p.local_grid(4097)
            f = np.exp(-p.exponent_local(s))
            c = integrate.cumulative_trapezoid(f, s, initial=0.0)
            xs.append(p.anchor + s)
            cs.append(acc + c)
            acc += c[-1]
        x, c = np.concatenate(xs), np.concatenate(cs) / acc
        return x, c

    def cdf(self, x):
        xt, ct = self._cdf_table
        return np.interp(x, xt, ct, left=0.0, right=1.0)

    def quantile(self, q):
        xt, ct = self._cdf_table
        keep = np.concatenate(([True], np.diff(ct) > 0))
        return np.interp(q, ct[keep], xt[keep])

    def to_json(self) -> str:
        def enc(v):
            return None if math.isinf(v) else v

        return json.dumps(
            {
                "pieces": [
                    {"lo": enc(p.lo), "hi": enc(p.hi), "coeffs": list(p.coeffs), "anchor": p.anchor}
                    for p in self.pieces
                ],
                "symmetry": self.symmetry,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "PiecewiseDensity1D":
        """Inverse of :meth:`to_json`; null ends are unbounded, a missing anchor means 0."""
        data = json.loads(text)
        pieces = []
        for d in data["pieces"]:
            lo = -math.inf if d["lo"] is None else d["lo"]
            hi = math.inf if d["hi"] is None else d["hi"]
            pieces.append(Piece(lo, hi, tuple(d["coeffs"]), d.get("anchor", 0.0)))
        return cls(tuple(pieces), data.get("symmetry", "none"))


def density_mass(d) -> float:
    """Integral of a piecewise (per-piece adaptive quadrature) or grid (trapezoid) density."""
    return d.mass()


# ---------------------------------------------------------------------------
# Target potentials
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TargetPotential:
    """Target rho* = exp(-U) with constants of the Lipschitz-gradient assumption.

    ``value`` and ``grad`` act on arrays of shape (..., d). ``lower_bound`` is a
    known lower bound of U on the domain (used by solver certificates); ``poly``
    optionally records U as ascending 1-D polynomial coefficients.
    """

    value: Callable
    grad: Callable
    dim: int
    C0: float
    C1: float
    C2: float
    x0: np.ndarray
    lower_bound: float | None = None
    poly: tuple | None = None
    name: str = field(default="U", compare=False)

    def U(self, x):
        return self.value(np.asarray(x, float))

    def grad_U(self, x):
        return self.grad(np.asarray(x, float))

    def U1(self, x):
        """U on plain 1-D abscissae."""
        return self.value(np.asarray(x, float)[..., None])

    def grad_U1(self, x):
        return self.grad(np.asarray(x, float)[..., None])[..., 0]

    def check(self, domain: ConvexDomain, n: int = 1000, seed: int = 0) -> bool:
        """Sampled check of the gradient-Lipschitz and reference-point bounds."""
        rng = np.random.default_rng(seed)
        x, y = domain.sample_uniform(rng, n), domain.sample_uniform(rng, n)
        lhs = np.linalg.norm(self.grad_U(x) - self.grad_U(y), axis=1)
        rhs = self.C1 * np.linalg.norm(x - y, axis=1)
        ok = np.all(lhs <= rhs * (1 + 1e-12) + 1e-14)
        x0 = np.asarray(self.x0, float)[None, :]
        ok &= abs(float(self.U(x0)[0])) <= self.C0 * (1 + 1e-12) + 1e-14
        ok &= float(np.linalg.norm(self.grad_U(x0)[0])) <= self.C2 * (1 + 1e-12) + 1e-14
        return bool(ok)


def polynomial_target(coeffs: Sequence[float], domain: ConvexDomain | None = None, name="U") -> TargetPotential:
    """1-D target U(x) = sum_k coeffs[k] x^k; constants computed on ``domain`` (default [-1, 1])."""
    coeffs = tuple(float(c) for c in coeffs)
    dc = P.polyder(coeffs)
    d2 = P.polyder(coeffs, 2)
    domain = domain or ConvexDomain.interval(-1.0, 1.0)
    lo, hi = domain.bounds[0][0], domain.bounds[1][0]
    xs = np.linspace(lo, hi, 4001)
    C1 = float(np.max(np.abs(P.polyval(xs, d2)))) if len(d2) else 0.0
    x0 = float(np.clip(0.0, lo, hi))
    crit = [r.real for r in np.roots(dc[::-1]) if abs(r.imag) < 1e-12 and lo <= r.real <= hi] if len(dc) > 1 else []
    cand = [lo, hi, *crit]
    lower = float(min(P.polyval(c, coeffs) for c in cand))
    return TargetPotential(
        value=lambda x: P.polyval(x[..., 0], coeffs),
        grad=lambda x: P.polyval(x, dc),
        dim=1,
        C0=abs(float(P.polyval(x0, coeffs))),
        C1=C1,
        C2=abs(float(P.polyval(x0, dc))),
        x0=np.array([x0]),
        lower_bound=lower,
        poly=coeffs,
        name=name,
    )


def standard_gaussian_target(domain: ConvexDomain | None = None) -> TargetPotential:
    """U(x) = x^2/2 + ln sqrt(2 pi), so exp(-U) is the standard normal density."""
    return polynomial_target((LOG_SQRT_2PI, 0.0, 0.5), domain, name="gaussian")


def quadratic_target(dim: int, domain: ConvexDomain | None = None, curvature: float = 1.0, const: float = 0.0):
    """U(x) = curvature |x|^2 / 2 + const in R^dim."""
    x0 = np.zeros(dim)
    if domain is not None:
        x0 = domain.project(x0)
    lower = const
    if domain is not None:
        lower = const + 0.5 * curvature * float(np.sum(x0**2))
    return TargetPotential(
        value=lambda x: 0.5 * curvature * np.sum(x * x, axis=-1) + const,
        grad=lambda x: curvature * x,
        dim=dim,
        C0=abs(0.5 * curvature * float(x0 @ x0) + const),
        C1=curvature,
        C2=curvature * float(np.linalg.norm(x0)),
        x0=x0,
        lower_bound=lower,
        name="quadratic",
    )
