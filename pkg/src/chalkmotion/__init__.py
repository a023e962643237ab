"""Symplectic ball transport, quadratic Hamiltonian calculus and Gaussian states."""

from .capacity import (
    Ellipsoid,
    capacity,
    capacity_continuity_probe,
    hausdorff_distance,
    mvee,
    symplectic_eigenvalues,
    williamson,
)
from .chalkboard import (
    SymplecticBall,
    ball_transport,
    chalkboard_motion,
    nearby_orbit,
    nonlinear_transport,
    recalibrate,
    shadow_ball,
    shadow_x,
    subsystem_project,
)
from .config import DEFAULTS, TOL
from .factorization import (
    LocalElement,
    PreIwasawa,
    dilation_pre_iwasawa,
    free_factorization,
    pre_iwasawa,
    sp0_compose,
    sp0_quotient,
)
from .flows import (
    FlowEvaluator,
    QuadraticHamiltonian,
    SymplecticIsotopy,
    affine_generator,
    compose_hamiltonians,
    conjugate_generator,
    flow_from_quadratic,
    generator_from_isotopy,
    generator_from_nonlinear_isotopy,
    inverse_hamiltonian,
    iwasawa_sum,
)
from .gaussian import (
    GaussianState,
    QuantumBlob,
    blob_from_gaussian,
    covariance,
    gaussian_from_blob,
    gaussian_transport,
    heisenberg_weyl_apply,
    metaplectic_apply,
    strt_equivalence_check,
    wigner_gaussian,
    wigner_numeric_1d,
)
from .scenario import Scenario, run_scenario
from .symplectic import (
    AffineSymplectic,
    SymplecticMatrix,
    random_symplectic,
    rescale,
    shear,
    standard_J,
    symplectic_form,
)

__version__ = "0.1.0"
