"""Reference solver for d rho/dt = d/dx (rho U' + d rho/dx) on a truncated interval.

Vertex-centred finite volumes on a uniform grid (control volumes dx inside, dx/2 at
the walls, so cell mass is exactly the trapezoid rule), zero flux at both walls,
and the exponentially fitted flux

    J_{i+1/2} = (B(dU) rho_i - B(-dU) rho_{i+1}) / dx,   B(z) = z / (e^z - 1),

which vanishes identically on exp(-U). Time stepping is implicit Euler; the step
matrix is column-stochastic in the mass variables, so mass, positivity and the
decay of the discrete KL are all exact up to round-off.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded
from scipy.special import exprel

from .counterexamples import example2_density, example2_initial, example2_recursion, example2_target
from .kl_flow import kl_value
from .measures import GaussianDensity1D, GridDensity1D, TargetPotential
from .metrics import kl_piecewise, w2_1d

NEG_TOL = -1e-12
MASS_TOL = 1e-10


@dataclass(frozen=True)
class FpConfig:
    target: TargetPotential
    lo: float = -8.0
    hi: float = 8.0
    M: int = 2001
    tau: float = 1e-4
    T_end: float = 2.0

    def __post_init__(self):
        if self.M < 200:
            raise ValueError("need at least 200 grid nodes")
        if not self.hi > self.lo:
            raise ValueError("need lo < hi")
        if not (self.tau > 0 and self.T_end >= 0):
            raise ValueError("need tau > 0 and T_end >= 0")

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.M)

    @property
    def dx(self) -> float:
        return (self.hi - self.lo) / (self.M - 1)

    @property
    def n_steps(self) -> int:
        return int(math.ceil(self.T_end / self.tau - 1e-9))


def _bernoulli(z):
    return 1.0 / exprel(z)


def _step_matrix(cfg: FpConfig, tau: float):
    """Banded form of diag(w) - tau A, and the weights w."""
    x, dx, M = cfg.nodes, cfg.dx, cfg.M
    U = cfg.target.U1(x)
    dU = np.diff(U)
    bp, bm = _bernoulli(dU) / dx, _bernoulli(-dU) / dx
    w = np.full(M, dx)
    w[0] = w[-1] = 0.5 * dx
    diag = w.copy()
    diag[:-1] += tau * bp  # outflow of node i through its right face
    diag[1:] += tau * bm  # outflow of node i+1 through its left face
    ab = np.zeros((3, M))
    ab[0, 1:] = -tau * bm  # coefficient of rho_{i+1} in row i
    ab[1] = diag
    ab[2, :-1] = -tau * bp  # coefficient of rho_i in row i+1
    return ab, w


@dataclass(frozen=True)
class FpTrajectory:
    times: np.ndarray
    snapshots: tuple
    max_mass_drift: float

    @property
    def final(self) -> GridDensity1D:
        return self.snapshots[-1]


def fp_solve(cfg: FpConfig, rho0: GridDensity1D, save_every: int | None = None) -> FpTrajectory:
    """Implicit Euler to T_end; snapshots every ``save_every`` steps (default about 100 in total)."""
    if rho0.m != cfg.M or rho0.lo != cfg.lo or rho0.hi != cfg.hi:
        raise ValueError("initial density must live on the solver grid")
    if abs(rho0.mass() - 1.0) > 1e-8:
        raise ValueError("initial density must be normalized")
    n = cfg.n_steps
    save_every = save_every or max(1, n // 100)
    # the last step is shortened so the run ends exactly at T_end
    tau_last = cfg.T_end - (n - 1) * cfg.tau if n else 0.0
    ab, w = _step_matrix(cfg, cfg.tau)
    rho = np.array(rho0.values, float)
    mass = float(w @ rho)
    times, snaps, drift = [0.0], [rho0], 0.0
    t = 0.0
    for k in range(n):
        tau = cfg.tau
        if k == n - 1 and abs(tau_last - cfg.tau) > 1e-15:
            tau = tau_last
            ab, _ = _step_matrix(cfg, tau)
        rho = solve_banded((1, 1), ab, w * rho)
        t += tau
        if rho.min() < NEG_TOL:
            raise FloatingPointError(f"negative density {rho.min():.3e} at t={t:.6g}")
        rho = np.maximum(rho, 0.0)
        new_mass = float(w @ rho)
        drift = max(drift, abs(new_mass - mass))
        if drift > MASS_TOL:
            raise FloatingPointError(f"mass drift {drift:.3e} exceeds tolerance")
        mass = new_mass
        if (k + 1) % save_every == 0 or k == n - 1:
            times.append(t)
            snaps.append(GridDensity1D(cfg.lo, cfg.hi, rho.copy()))
    return FpTrajectory(np.array(times), tuple(snaps), drift)


def fp_step(cfg: FpConfig, rho: np.ndarray) -> np.ndarray:
    """One implicit Euler step on raw nodal values."""
    ab, w = _step_matrix(cfg, cfg.tau)
    return solve_banded((1, 1), ab, w * np.asarray(rho, float))


def grid_restriction(cfg: FpConfig, density, normalize: bool = True) -> GridDensity1D:
    return GridDensity1D.from_function(density.pdf, cfg.lo, cfg.hi, cfg.M, normalize=normalize)


def write_snapshots(traj: FpTrajectory, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "node", "value"])
        for t, g in zip(traj.times, traj.snapshots):
            for x, v in zip(g.nodes, g.values):
                w.writerow([f"{t:.17g}", f"{x:.17g}", f"{v:.17g}"])


# ---------------------------------------------------------------------------
# FE against the PDE
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GapRow:
    h: float
    n_steps: int
    w2_gap: float
    kl_fe: float
    kl_fp: float
    fe_mass: float


def _fp_reference(cfg: FpConfig, density):
    traj = fp_solve(cfg, grid_restriction(cfg, density))
    return traj.final


def fe_vs_fp_gap(h_list, T_end: float = 2.0, cfg: FpConfig | None = None) -> tuple[list, GridDensity1D]:
    """Example 2: W2 between the n = ceil(T_end / h) step FE density and the PDE solution at T_end."""
    target = example2_target()
    cfg = cfg or FpConfig(target, T_end=T_end)
    if cfg.T_end != T_end:
        cfg = FpConfig(cfg.target, cfg.lo, cfg.hi, cfg.M, cfg.tau, T_end)
    fp_final = _fp_reference(cfg, example2_initial())
    kl_fp = kl_value(fp_final, target)
    rows = []
    for h in h_list:
        n = int(math.ceil(T_end / h - 1e-9))
        co = example2_recursion(h, n)
        fe = example2_density(co, n)
        rows.append(GapRow(float(h), n, w2_1d(fe, fp_final), kl_piecewise(fe, target), kl_fp, fe.mass()))
    return rows, fp_final


def gaussian_fe_std(s0: float, h: float, n: int) -> float:
    """FE against the standard normal keeps Gaussians Gaussian: s <- s - h (s - 1/s)."""
    s = s0
    for _ in range(n):
        s = abs(s - h * (s - 1.0 / s))
    return s


def gaussian_fp_std(s0: float, t: float) -> float:
    return math.sqrt(1.0 + (s0 * s0 - 1.0) * math.exp(-2.0 * t))


def gaussian_control_gap(h_list, T_end: float = 2.0, s0: float = 2.0, cfg: FpConfig | None = None) -> list:
    """Same comparison from a smooth N(0, s0^2) start, where FE is consistent."""
    target = example2_target()
    cfg = cfg or FpConfig(target, T_end=T_end)
    if cfg.T_end != T_end:
        cfg = FpConfig(cfg.target, cfg.lo, cfg.hi, cfg.M, cfg.tau, T_end)
    fp_final = _fp_reference(cfg, GaussianDensity1D(0.0, s0))
    kl_fp = kl_value(fp_final, target)
    rows = []
    for h in h_list:
        n = int(math.ceil(T_end / h - 1e-9))
        s = gaussian_fe_std(s0, h, n)
        fe = GaussianDensity1D(0.0, s)
        kl_fe = 0.5 * (s * s - 1.0) - math.log(s)
        rows.append(GapRow(float(h), n, w2_1d(fe, fp_final), kl_fe, kl_fp, 1.0))
    return rows
