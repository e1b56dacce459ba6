"""Pseudo-spectral periodic-box solver for strain self-amplification dynamics."""

from .diagnostics import (
    DiagnosticsRecord,
    energy,
    enstrophy,
    f_of,
    g_of,
    gamma_membership,
    hs_norm_sq,
    perturbative_ratio,
    r0_of,
)
from .dynamics import (
    BlowupReport,
    SimParams,
    StrainState,
    cfl_dt,
    full_rhs,
    make_state,
    model_rhs,
    read_checkpoint,
    run,
    step,
    velocity_rhs,
    write_checkpoint,
)
from .fields import ScalarField, SymTensorField, VectorField
from .grid import GridSpec
from .initdata import (
    InitSpec,
    colliding_jets,
    hessian_probe,
    initial_strain,
    perturbed_family,
    random_solenoidal,
)
from .operators import (
    EigenTriple,
    eig_symtensor,
    lambda_fields,
    leray_project,
    omega_outer,
    s_squared,
    strain_of,
    strain_project,
    velocity_of,
    vorticity_of,
)
from .spectral import (
    dealias,
    derivative,
    forward_transform,
    heat_semigroup,
    inverse_laplacian,
    inverse_transform,
)

__version__ = "0.1.0"
