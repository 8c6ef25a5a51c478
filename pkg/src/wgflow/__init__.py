"""Forward-Euler breakdown examples and regularized-KL particle flows in numpy."""

__version__ = "0.1.0"

from .measures import (
    ConvexDomain,
    GaussianDensity1D,
    GridDensity1D,
    OutsideSupportError,
    ParticleEnsemble,
    Piece,
    PiecewiseDensity1D,
    TargetPotential,
    density_mass,
    polynomial_target,
    project,
    quadratic_target,
    standard_gaussian_target,
)
from .counterexamples import (
    Example1Geometry,
    Example2Coefficients,
    PiecewiseMap1D,
    SingularPointError,
    example1_jump_probe,
    example2_density,
    example2_kl_floor,
    example2_recursion,
    fe_map_example1,
    fe_map_example2,
    pushforward_multibranch,
)
from .kl_flow import KlState, fe_step_particles, kl_first_variation, kl_value, kl_w_gradient
from .regularized_kl import (
    RegKlConfig,
    empirical_lipschitz,
    kernel,
    kernel_grad,
    lifted_directional_derivative,
    lipschitz_bound,
    reg_kl_first_variation,
    reg_kl_gradient,
    reg_kl_value,
)
from .pgd import RateCertificate, SolverConfig, pgd_step, run_pgd, step_size
from .fokker_planck import FpConfig, fe_vs_fp_gap, fp_solve
from .metrics import Coupling, kl_grid, tv_grid, w1_1d, w2_1d, w2_matching
