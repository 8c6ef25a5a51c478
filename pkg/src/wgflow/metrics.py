"""Transport and information metrics for 1-D measures and small particle ensembles.

A "1-D measure" here is any of: a ParticleEnsemble with d = 1, a plain 1-D array of
atoms (equal weights), a GridDensity1D, a PiecewiseDensity1D or a GaussianDensity1D.
Between two empirical measures the quantile integrals are exact; anything with a
continuous part falls back to a midpoint rule in the quantile variable.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial
from scipy import integrate, optimize

from .measures import GridDensity1D, ParticleEnsemble, PiecewiseDensity1D, TargetPotential

QUANTILE_NODES = 1 << 16
NORMALIZATION_TOL = 1e-8


def _atoms(m):
    """Sorted atoms for an empirical measure, else None."""
    if isinstance(m, ParticleEnsemble):
        if m.dim != 1:
            raise ValueError("1-D metric needs a one-dimensional ensemble")
        return np.sort(m.points[:, 0])
    if isinstance(m, (np.ndarray, list, tuple)):
        a = np.asarray(m, dtype=float)
        if a.ndim == 2 and a.shape[1] == 1:
            a = a[:, 0]
        if a.ndim != 1:
            raise ValueError("1-D metric needs one-dimensional points")
        return np.sort(a)
    if hasattr(m, "quantile"):
        return None
    raise TypeError(f"not a 1-D measure: {type(m).__name__}")


def _quantile_table(a, b, n_nodes: int):
    """Paired quantile values on a partition of (0, 1) plus the cell weights."""
    xa, xb = _atoms(a), _atoms(b)
    if xa is not None and xb is not None:
        qa = np.arange(1, xa.size + 1) / xa.size
        qb = np.arange(1, xb.size + 1) / xb.size
        edges = np.union1d(np.concatenate(([0.0], qa)), qb)
        mid = 0.5 * (edges[:-1] + edges[1:])
        ia = np.minimum((mid * xa.size).astype(int), xa.size - 1)
        ib = np.minimum((mid * xb.size).astype(int), xb.size - 1)
        return xa[ia], xb[ib], np.diff(edges)
    q = (np.arange(n_nodes) + 0.5) / n_nodes
    w = np.full(n_nodes, 1.0 / n_nodes)

    def Q(m, atoms):
        if atoms is None:
            return np.asarray(m.quantile(q), float)
        return atoms[np.minimum((q * atoms.size).astype(int), atoms.size - 1)]

    return Q(a, xa), Q(b, xb), w


def w2_1d(a, b, n_nodes: int = QUANTILE_NODES) -> float:
    """sqrt of the integral over (0, 1) of |Qa - Qb|^2."""
    qa, qb, w = _quantile_table(a, b, n_nodes)
    return math.sqrt(float(np.sum(w * (qa - qb) ** 2)))


def w1_1d(a, b, n_nodes: int = QUANTILE_NODES) -> float:
    """Integral of |Qa - Qb| over (0, 1), which equals the integral of |Fa - Fb| over the line."""
    qa, qb, w = _quantile_table(a, b, n_nodes)
    return float(np.sum(w * np.abs(qa - qb)))


# ---------------------------------------------------------------------------
# Equal-N matching
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Coupling:
    """Point i of the first ensemble is sent to point perm[i] of the second."""

    perm: np.ndarray
    cost: float

    def __post_init__(self):
        p = np.asarray(self.perm, dtype=int)
        if not np.array_equal(np.sort(p), np.arange(p.size)):
            raise ValueError("coupling must be a bijection")
        p.setflags(write=False)
        object.__setattr__(self, "perm", p)


def _paired_points(a, b):
    pa = a.points if isinstance(a, ParticleEnsemble) else np.asarray(a, float)
    pb = b.points if isinstance(b, ParticleEnsemble) else np.asarray(b, float)
    if pa.ndim == 1:
        pa = pa[:, None]
    if pb.ndim == 1:
        pb = pb[:, None]
    if pa.shape[0] != pb.shape[0]:
        raise ValueError("matching needs ensembles of equal size")
    if pa.shape[1] != pb.shape[1]:
        raise ValueError("matching needs ensembles of equal dimension")
    return pa, pb


def _cost_matrix(pa, pb):
    diff = pa[:, None, :] - pb[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def w2_matching(a, b) -> tuple[float, Coupling]:
    """Exact empirical W2 between equal-size ensembles via optimal assignment."""
    pa, pb = _paired_points(a, b)
    C = _cost_matrix(pa, pb)
    rows, cols = optimize.linear_sum_assignment(C)
    perm = np.empty(pa.shape[0], dtype=int)
    perm[rows] = cols
    cost = float(np.mean(C[rows, cols]))
    return math.sqrt(cost), Coupling(perm, cost)


def w2_bruteforce(a, b, max_n: int = 10) -> tuple[float, Coupling]:
    """Reference W2 by enumerating every permutation. Only for tiny ensembles."""
    pa, pb = _paired_points(a, b)
    n = pa.shape[0]
    if n > max_n:
        raise ValueError(f"brute force limited to N <= {max_n}")
    C = _cost_matrix(pa, pb)
    idx = np.arange(n)
    best, best_perm = math.inf, None
    for perm in itertools.permutations(range(n)):
        c = C[idx, perm].sum()
        if c < best:
            best, best_perm = c, perm
    cost = best / n
    return math.sqrt(cost), Coupling(np.array(best_perm), cost)


def coupling_rms(a, b, perm=None) -> float:
    """RMS displacement of a given pairing (identity by default); an upper bound on W2."""
    pa, pb = _paired_points(a, b)
    if perm is not None:
        pb = pb[np.asarray(perm)]
    return math.sqrt(float(np.mean(np.sum((pa - pb) ** 2, axis=1))))


# ---------------------------------------------------------------------------
# Grid divergences
# ---------------------------------------------------------------------------


def _check_pair(a: GridDensity1D, b: GridDensity1D):
    if not (isinstance(a, GridDensity1D) and isinstance(b, GridDensity1D)):
        raise TypeError("grid metrics take GridDensity1D inputs")
    if a.m != b.m or a.lo != b.lo or a.hi != b.hi:
        raise ValueError("grid metrics need matching discretizations")
    for g in (a, b):
        if abs(g.mass() - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"density not normalized (mass {g.mass():.12g})")


def _trapz_weights(m: int, dx: float) -> np.ndarray:
    w = np.full(m, dx)
    w[0] = w[-1] = 0.5 * dx
    return w


def tv_grid(a: GridDensity1D, b: GridDensity1D) -> float:
    _check_pair(a, b)
    return 0.5 * float(np.trapezoid(np.abs(a.values - b.values), dx=a.dx))


def kl_grid(a: GridDensity1D, b: GridDensity1D, floor: float = 1e-300) -> float:
    """Trapezoid KL(a || b) with 0 ln 0 = 0; +inf when a has mass where b vanishes."""
    _check_pair(a, b)
    return kl_weighted(a.values, b.values, _trapz_weights(a.m, a.dx), floor)


def kl_weighted(p, q, w, floor: float = 1e-300) -> float:
    p, q, w = (np.asarray(v, float) for v in (p, q, w))
    pos = p > 0
    if np.any(pos & (q < floor)):
        return math.inf
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(pos, p * (np.log(np.where(pos, p, 1.0)) - np.log(np.where(pos, q, 1.0))), 0.0)
    return float(np.sum(w * terms))


def kl_piecewise(density: PiecewiseDensity1D, target: TargetPotential, nodes: int = 4001) -> float:
    """KL(density || exp(-U)) by composite Simpson on a local grid per piece.

    Each integrand is written in the piece's local variable, and a polynomial U is
    re-expanded about the anchor, so that far-out tails with large cancelling
    offsets are integrated without loss of precision.
    """
    total = 0.0
    for p in density.full_pieces:
        s = p.local_grid(nodes, max_step=0.01)
        e = p.exponent_local(s)
        if target.poly is not None:
            u_loc = Polynomial(target.poly)(Polynomial([p.anchor, 1.0]))
            diff = u_loc(s) - e
        else:
            diff = target.U1(p.anchor + s) - e
        total += float(integrate.simpson(np.exp(-e) * diff, x=s))
    return total


def tv_piecewise_inner(density: PiecewiseDensity1D, target_pdf, lo: float = -1.0, hi: float = 1.0) -> float:
    """Integral of |rho - rho*| over [lo, hi]; a lower bound on 2 TV."""
    val, _ = integrate.quad(lambda x: abs(float(density.pdf(np.array(x)) - target_pdf(x))), lo, hi, epsrel=1e-12)
    return val
