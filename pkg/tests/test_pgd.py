import warnings

import numpy as np
import pytest

from wgflow.measures import ConvexDomain, ParticleEnsemble, quadratic_target
from wgflow.pgd import SolverConfig, default_problem, pgd_step, run_pgd, step_size
from wgflow.regularized_kl import RegKlConfig, lipschitz_bound

H_UNIT = 1.11808373457243e-4  # 1/L for C1 = eps = R0 = 1
H_DEFAULT = 1.8756e-8  # 1/L for the default problem, R0 = 1, eps = 1/2


def test_step_size_policies():
    dom = ConvexDomain.interval(-1, 1)
    cfg = RegKlConfig(1.0, dom, quadratic_target(1, dom, 1.0))
    assert step_size(cfg) == pytest.approx(H_UNIT, rel=1e-13)
    assert step_size(default_problem()) == pytest.approx(H_DEFAULT, rel=1e-4)
    with pytest.warns(RuntimeWarning, match="exceeds"):
        assert step_size(cfg, "fixed", 0.01) == 0.01
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        step_size(cfg, "fixed", 1e-5)
    with pytest.warns(RuntimeWarning, match="empirical"):
        h_emp = step_size(cfg, "empirical")
    assert h_emp >= step_size(cfg)
    with pytest.raises(ValueError):
        step_size(cfg, "fixed")
    with pytest.raises(ValueError):
        step_size(cfg, "nonsense")


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(policy="adaptive")
    with pytest.raises(ValueError):
        SolverConfig(policy="fixed")
    with pytest.raises(ValueError):
        SolverConfig(max_iters=0)
    with pytest.raises(ValueError):
        SolverConfig(m=-1.0)


def test_single_particle_dynamics():
    cfg = default_problem(d=2, R0=1.0, epsilon=100.0)
    h = 0.05
    at_origin = ParticleEnsemble(np.zeros((1, 2)))
    assert np.array_equal(pgd_step(cfg, at_origin, h).points, at_origin.points)
    x = ParticleEnsemble(np.array([[0.4, -0.3]]))
    y = x
    for k in range(1, 6):
        y = pgd_step(cfg, y, h)
        assert np.allclose(y.points, x.points * (1 - h) ** k, atol=1e-15)
    with pytest.raises(ValueError):
        pgd_step(cfg, x, 0.0)


def test_projection_reentry():
    # a huge step overshoots past the opposite wall and is projected back onto it
    dom = ConvexDomain.interval(-1, 1)
    cfg = RegKlConfig(1.0, dom, quadratic_target(1, dom, 1.0))
    e = ParticleEnsemble(np.array([[-0.95]]))
    out = pgd_step(cfg, e, 1e3)
    assert out.points[0, 0] == 1.0


@pytest.fixture(scope="module")
def default_run():
    cfg = default_problem(d=1, R0=1.0)
    solver = SolverConfig(max_iters=200, n_particles=60, seed=3, convex_check=True)
    return cfg, solver, run_pgd(cfg, solver)


def test_certificates_hold_under_theoretical_step(default_run):
    cfg, solver, (cert, final, traj) = default_run
    assert cert.h == pytest.approx(H_DEFAULT, rel=1e-4)
    assert cert.F.shape == (201,) and cert.step_rms.shape == (200,)
    assert cert.all_decay_ok()
    assert cert.all_rate_ok()
    assert np.all(cert.rate_tight_ok)
    assert np.all(cert.F >= cert.F_lb)
    assert np.all(cfg.domain.contains(traj.reshape(-1, 1)))
    assert cert.strong is None and cert.all_strong_ok() is None
    assert cert.convex is not None and np.all(cert.convex["ok"])


def test_deterministic_replay(default_run):
    cfg, solver, (cert, final, traj) = default_run
    cert2, final2, traj2 = run_pgd(cfg, solver)
    assert np.array_equal(traj, traj2)
    assert np.array_equal(cert.F, cert2.F)


def test_strong_block_and_larger_step_2d():
    # a 2-D ball with a moderately regularized problem so the theoretical step is not tiny
    cfg = default_problem(d=2, R0=1.0, epsilon=2.0)
    L = lipschitz_bound(cfg)
    solver = SolverConfig(max_iters=150, n_particles=30, seed=1, m=0.5)
    cert, final, traj = run_pgd(cfg, solver)
    assert cert.h == pytest.approx(1 / L)
    assert cert.all_decay_ok() and cert.all_rate_ok()
    assert cert.strong is not None
    assert cert.strong["lhs"].shape == (151,)
    assert any("final iterate" in n for n in cert.notes)


def test_descent_with_fixed_step_and_tolerance():
    cfg = default_problem(d=1, R0=1.0, epsilon=4.0)
    h = 0.9 / lipschitz_bound(cfg)
    cert, final, traj = run_pgd(cfg, SolverConfig(policy="fixed", h=h, max_iters=3000, tol=1e-9, n_particles=20))
    assert cert.all_decay_ok() and cert.all_rate_ok()
    assert cert.F[-1] < cert.F[0]
    assert cert.stopped_early


def test_initial_ensemble_must_be_inside():
    cfg = default_problem()
    with pytest.raises(ValueError):
        run_pgd(cfg, SolverConfig(max_iters=1), ParticleEnsemble(np.array([[2.0]])))


@pytest.mark.parametrize("kind", ["interval", "ball", "box"])
def test_default_problem_kinds(kind):
    d = 1 if kind == "interval" else 2
    cfg = default_problem(d=d, R0=1.5, kind=kind)
    assert cfg.R0 == pytest.approx(1.5)
    assert cfg.epsilon == pytest.approx(1.125)
    with pytest.raises(ValueError):
        default_problem(d=2, kind="interval")
