"""Projected gradient descent on particle ensembles for the regularized KL.

Each step moves x_i -> proj_C(x_i - h grad(x_i)) and records the energy and the
RMS step length. The RMS step of the index coupling is an upper bound on the W2
distance between consecutive iterates, so it can be used directly in the
certificate inequalities below.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .measures import ConvexDomain, ParticleEnsemble, quadratic_target
from .metrics import w2_1d, w2_matching
from .regularized_kl import (
    RegKlConfig,
    empirical_lipschitz,
    lipschitz_bound,
    reg_kl_gradient,
    reg_kl_value,
)

DECAY_SLACK = 1e-12
STRONG_TOL = 1.1
POLICIES = ("theoretical", "empirical", "fixed")


@dataclass(frozen=True)
class SolverConfig:
    policy: str = "theoretical"
    h: float | None = None
    max_iters: int = 500
    tol: float = 0.0
    seed: int = 0
    n_particles: int = 200
    m: float | None = None
    convex_check: bool = False
    empirical_trials: int = 200

    def __post_init__(self):
        if self.policy not in POLICIES:
            raise ValueError(f"unknown step policy {self.policy!r}")
        if self.policy == "fixed" and not (self.h is not None and self.h > 0):
            raise ValueError("fixed policy needs h > 0")
        if self.max_iters < 1 or self.n_particles < 1:
            raise ValueError("need at least one iteration and one particle")
        if self.m is not None and self.m < 0:
            raise ValueError("strong-convexity constant must be nonnegative")


def step_size(cfg: RegKlConfig, policy: str = "theoretical", h: float | None = None, trials: int = 200, seed=0) -> float:
    """Step from the given policy; a user-supplied h is honored but warned about when it exceeds 1/L."""
    if policy == "theoretical":
        return 1.0 / lipschitz_bound(cfg)
    if policy == "empirical":
        warnings.warn(
            "empirical step size: sampled Lipschitz constant, descent is not guaranteed", RuntimeWarning, stacklevel=2
        )
        return 1.0 / empirical_lipschitz(cfg, trials, seed)
    if policy == "fixed":
        if h is None or not h > 0:
            raise ValueError("fixed policy needs h > 0")
        if h > 1.0 / lipschitz_bound(cfg):
            warnings.warn(f"h={h} exceeds 1/L={1.0 / lipschitz_bound(cfg):.6g}", RuntimeWarning, stacklevel=2)
        return float(h)
    raise ValueError(f"unknown step policy {policy!r}")


def pgd_step(cfg: RegKlConfig, ensemble: ParticleEnsemble, h: float) -> ParticleEnsemble:
    if not h > 0:
        raise ValueError("step size must be positive")
    x = ensemble.points
    return ensemble.with_points(cfg.domain.project(x - h * reg_kl_gradient(cfg, x)))


@dataclass(frozen=True)
class RateCertificate:
    """Energies F_0..F_n, steps 0..n-1 and the per-prefix inequality checks."""

    h: float
    policy: str
    F: np.ndarray
    step_rms: np.ndarray
    F_lb: float
    decay_ok: np.ndarray
    rate_bound: np.ndarray
    rate_ok: np.ndarray
    rate_bound_tight: np.ndarray
    rate_tight_ok: np.ndarray
    w2_to_final: np.ndarray | None = None
    strong: dict | None = None
    convex: dict | None = None
    stopped_early: bool = False
    notes: tuple = field(default=(), compare=False)

    @property
    def n_steps(self) -> int:
        return self.step_rms.size

    def all_decay_ok(self) -> bool:
        return bool(np.all(self.decay_ok))

    def all_rate_ok(self) -> bool:
        return bool(np.all(self.rate_ok))

    def all_strong_ok(self) -> bool | None:
        return None if self.strong is None else bool(np.all(self.strong["ok"]))


def _w2(a: np.ndarray, b: np.ndarray) -> float:
    if a.shape[1] == 1:
        return w2_1d(a[:, 0], b[:, 0])
    return w2_matching(a, b)[0]


def run_pgd(cfg: RegKlConfig, solver: SolverConfig, init: ParticleEnsemble | None = None):
    """Run PGD and return (RateCertificate, final ensemble, iterate array)."""
    if init is None:
        init = ParticleEnsemble.uniform(cfg.domain, solver.n_particles, solver.seed)
    if not np.all(cfg.domain.contains(init.points)):
        raise ValueError("initial ensemble leaves the domain")
    h = step_size(cfg, solver.policy, solver.h, solver.empirical_trials, solver.seed)
    notes = []
    if solver.policy == "empirical":
        notes.append("empirical step size: certificates are diagnostic only")
    F_lb = cfg.energy_lower_bound()

    x = init.points.copy()
    iterates = [x]
    F = [reg_kl_value(cfg, x)]
    steps = []
    stopped = False
    for _ in range(solver.max_iters):
        xn = cfg.domain.project(x - h * reg_kl_gradient(cfg, x))
        f = reg_kl_value(cfg, xn)
        if not math.isfinite(f):
            raise FloatingPointError(f"non-finite energy at iteration {len(F)}")
        steps.append(math.sqrt(float(np.mean(np.sum((xn - x) ** 2, axis=1)))))
        F.append(f)
        iterates.append(xn)
        x = xn
        if steps[-1] < solver.tol:
            stopped = True
            break

    F = np.array(F)
    steps = np.array(steps)
    n = np.arange(1, steps.size + 1)
    gap0 = max(F[0] - F_lb, 0.0)
    prefix_min = np.minimum.accumulate(steps)
    rate_bound = np.sqrt(2.0 * gap0 / (h * n))
    rate_tight = np.sqrt(2.0 * h * gap0 / n)
    decay_ok = F[1:] <= F[:-1] + DECAY_SLACK

    traj = np.stack(iterates)
    final = traj[-1]
    w2f = None
    if cfg.domain.dim == 1:
        w2f = np.array([w2_1d(p[:, 0], final[:, 0]) for p in traj])

    strong = None
    if solver.m is not None:
        d = w2f if w2f is not None else np.array([_w2(p, final) for p in traj])
        k = np.arange(traj.shape[0])
        rhs = (1.0 - solver.m * h) ** k * d[0] ** 2
        lhs = d**2
        strong = {"lhs": lhs, "rhs": rhs, "ok": lhs <= STRONG_TOL * rhs + 1e-300}
        notes.append("strong-convexity check uses the final iterate as the optimum")

    convex = None
    if solver.convex_check:
        d0 = w2f[0] if w2f is not None else _w2(traj[0], final)
        lhs = F[1:] - F[-1]
        rhs = d0**2 / (2.0 * n * h)
        convex = {"lhs": lhs, "rhs": rhs, "ok": lhs <= rhs + DECAY_SLACK}
        notes.append("convex-rate check is a diagnostic: geodesic convexity is not established")

    cert = RateCertificate(
        h=h,
        policy=solver.policy,
        F=F,
        step_rms=steps,
        F_lb=F_lb,
        decay_ok=decay_ok,
        rate_bound=rate_bound,
        rate_ok=prefix_min <= rate_bound * (1 + 1e-12),
        rate_bound_tight=rate_tight,
        rate_tight_ok=prefix_min <= rate_tight * (1 + 1e-9) + 1e-15,
        w2_to_final=w2f,
        strong=strong,
        convex=convex,
        stopped_early=stopped,
        notes=tuple(notes),
    )
    return cert, ParticleEnsemble(final), traj


def default_problem(d: int = 1, R0: float = 1.0, epsilon: float | None = None, kind: str | None = None) -> RegKlConfig:
    """U = |x|^2/2 on an origin-centred interval (d = 1) or ball, with eps = R0^2/2 unless given."""
    if kind is None:
        kind = "interval" if d == 1 else "ball"
    if kind == "interval":
        if d != 1:
            raise ValueError("interval domains are one-dimensional")
        dom = ConvexDomain.interval(-R0, R0)
    elif kind == "ball":
        dom = ConvexDomain.ball(np.zeros(d), R0)
    elif kind == "box":
        half = R0 / math.sqrt(d)
        dom = ConvexDomain.box(-half * np.ones(d), half * np.ones(d))
    else:
        raise ValueError(f"unknown domain kind {kind!r}")
    eps = R0**2 / 2.0 if epsilon is None else epsilon
    return RegKlConfig(eps, dom, quadratic_target(d, dom))
