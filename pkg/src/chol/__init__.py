"""Conservative Camassa-Holm solver on the line.

Lagrangian semigroup for the semilinear characteristic system, transforms
between Eulerian pairs (velocity plus energy measure) and normalized
Lagrangian states, and certified brackets for the Lipschitz metric that
keeps the solution semigroup stable.
"""

from .lagrangian import (
    Grid,
    HyperelasticCoeffs,
    LagrangianState,
    MembershipReport,
    Tangent,
    ch_coefficients,
    check_membership,
    e_norm,
    e_norm_diff,
    eval_P,
    eval_Q,
    eval_pq,
    kappa_ch_coefficients,
    rhs,
    rhs_hyperelastic,
    rod_coefficients,
)
from .flow import (
    Relabeling,
    SolverConfig,
    Trajectory,
    SolverAbort,
    StepCollapseError,
    compose,
    evolve,
    identity_relabeling,
    invert,
    kappa_of,
    project_Pi,
    relabel,
    sbar_t,
    step,
)
from .coords import (
    Atom,
    EnergyMeasure,
    EulerianPair,
    check_pair,
    energy,
    resample_pair,
    t_t,
    to_eulerian,
    to_lagrangian,
)
from .metric import (
    GridMismatchError,
    MetricBracket,
    OptimizerConfig,
    classical_norms,
    d_bracket,
    d_eulerian,
    j_upper,
    jtilde_upper,
    linf_dist,
)
from .oracles import (
    BumpTestFunction,
    CollisionSignature,
    PeakonConfig,
    WeakResiduals,
    collision_scenario,
    multipeakon_pair,
    multipeakon_velocity,
    weak_residual,
)

__version__ = "0.1.0"
