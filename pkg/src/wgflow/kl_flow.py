"""Unregularized KL: value, first variation, formal Wasserstein gradient, forward-Euler stepper.

Densities are 1-D evaluators exposing ``log_pdf``, ``grad_log_pdf`` and
``singular_mask`` (GaussianDensity1D, GridDensity1D, PiecewiseDensity1D or
:class:`AnalyticDensity`). Wherever ``grad_log_pdf`` is not a true derivative,
the gradient is still returned but the point is flagged as not W-differentiable.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .measures import (
    LOG_SQRT_2PI,
    GridDensity1D,
    OutsideSupportError,
    ParticleEnsemble,
    Piece,
    PiecewiseDensity1D,
    TargetPotential,
)
from .metrics import NORMALIZATION_TOL, kl_weighted, _trapz_weights


@dataclass(frozen=True)
class AnalyticDensity:
    """Wraps closures into the evaluator interface used here."""

    log_pdf_fn: Callable
    grad_log_pdf_fn: Callable
    singular_fn: Callable | None = None

    def log_pdf(self, x):
        return self.log_pdf_fn(np.asarray(x, float))

    def pdf(self, x):
        return np.exp(self.log_pdf(x))

    def grad_log_pdf(self, x):
        return self.grad_log_pdf_fn(np.asarray(x, float))

    def singular_mask(self, x):
        if self.singular_fn is None:
            return np.zeros(np.shape(x), dtype=bool)
        return self.singular_fn(np.asarray(x, float))


def kl_value(rho: GridDensity1D, target: TargetPotential, tol: float = 1e-300) -> float:
    """Trapezoid quadrature of rho ln(rho / rho*) on the grid of ``rho``."""
    if abs(rho.mass() - 1.0) > NORMALIZATION_TOL:
        raise ValueError(f"density not normalized (mass {rho.mass():.12g})")
    x = rho.nodes
    U = target.U1(x)
    with np.errstate(over="ignore", under="ignore"):
        star = np.exp(-U)
    return kl_weighted(rho.values, star, _trapz_weights(rho.m, rho.dx), tol)


def kl_first_variation(rho, target: TargetPotential, x):
    """1 + U(x) + ln rho(x). Raises OutsideSupportError where rho vanishes."""
    x = np.asarray(x, float)
    lp = np.asarray(rho.log_pdf(x), float)
    if np.any(~np.isfinite(lp)):
        raise OutsideSupportError("outside support: rho(x) = 0, first variation undefined")
    return 1.0 + target.U1(x) + lp


def kl_w_gradient(rho, target: TargetPotential, x, tol: float = 0.0):
    """Formal gradient grad U + grad ln rho, plus the not-W-differentiable mask.

    Flagged points are density discontinuities (within ``tol``) and points outside
    the support; at the latter the gradient is reported as 0.
    """
    x = np.asarray(x, float)
    g = np.asarray(rho.grad_log_pdf(x), float)
    try:
        bad = np.asarray(rho.singular_mask(x, tol=tol))
    except TypeError:
        bad = np.asarray(rho.singular_mask(x))
    outside = ~np.isfinite(g)
    grad = target.grad_U1(x) + np.where(outside, 0.0, g)
    grad = np.where(outside, 0.0, grad)
    return grad, bad | outside


@dataclass(frozen=True)
class KlState:
    """Current iterate: a density evaluator, optionally with particles sampled from it."""

    target: TargetPotential
    density: object
    n: int = 0
    ensemble: ParticleEnsemble | None = None
    log: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if self.ensemble is not None and self.ensemble.dim != 1:
            raise ValueError("the analytic KL flow is one-dimensional")

    def ratio(self, x):
        """sigma = rho / rho*."""
        return np.exp(self.density.log_pdf(x) + self.target.U1(x))

    def particle_kl(self) -> float:
        """Monte Carlo estimate mean(ln rho + U) over the particles."""
        x = self.ensemble.points[:, 0]
        v = self.density.log_pdf(x) + self.target.U1(x)
        return float(np.mean(v))


@dataclass(frozen=True)
class StepRecord:
    n: int
    kl_value: float
    num_nondiff_warnings: int
    max_particle_speed: float


def fe_step_particles(state: KlState, h: float, density_next=None, tol: float = 0.0) -> KlState:
    """x <- x - h (grad U + grad ln rho_n) for every particle.

    Points flagged as not W-differentiable are counted in the log and moved
    anyway. ``density_next`` is the evaluator for rho_{n+1} when it is known in
    closed form; otherwise the current one is carried over.
    """
    if not h > 0:
        raise ValueError("step size must be positive")
    if state.ensemble is None:
        raise ValueError("state has no particles")
    x = state.ensemble.points[:, 0]
    grad, bad = kl_w_gradient(state.density, state.target, x, tol)
    rec = StepRecord(state.n, state.particle_kl(), int(np.count_nonzero(bad)), float(np.max(np.abs(grad))))
    moved = state.ensemble.with_points((x - h * grad)[:, None])
    return replace(
        state,
        density=state.density if density_next is None else density_next,
        n=state.n + 1,
        ensemble=moved,
        log=state.log + (rec,),
    )


def run_fe_particles(state: KlState, h, n_steps: int, density_at: Callable | None = None, tol: float = 0.0):
    """Repeat :func:`fe_step_particles`; ``density_at(n)`` supplies rho_n if known."""
    hs = np.broadcast_to(np.asarray(h, float), (n_steps,))
    for k in range(n_steps):
        nxt = density_at(state.n + 1) if density_at is not None else None
        state = fe_step_particles(state, float(hs[k]), nxt, tol)
    return state


def write_run_log(state: KlState, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "kl_value", "num_nondiff_warnings", "max_particle_speed"])
        for r in state.log:
            w.writerow([r.n, f"{r.kl_value:.17g}", r.num_nondiff_warnings, f"{r.max_particle_speed:.17g}"])


def toy_fixed_point_density(a: float = 1.2) -> PiecewiseDensity1D:
    """a exp(-U) on (-1, 1), b exp(-U) outside, U the standard Gaussian potential.

    b is fixed by normalization. ln rho + U is piecewise constant, so the formal
    FE velocity vanishes everywhere except at the jumps x = +-1.
    """
    core = math.erf(1.0 / math.sqrt(2.0))
    b = (1.0 - a * core) / (1.0 - core)
    if not b > 0:
        raise ValueError("core weight too large to normalize")
    pieces = (
        Piece(0.0, 1.0, (LOG_SQRT_2PI - math.log(a), 0.0, 0.5), 0.0),
        Piece(1.0, math.inf, (LOG_SQRT_2PI - math.log(b), 0.0, 0.5), 0.0),
    )
    return PiecewiseDensity1D(pieces, "even")
