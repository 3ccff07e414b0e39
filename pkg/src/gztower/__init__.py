"""Numerical Gelfand-Zeitlin toolkit on corner-compatible matrix towers.

Builds the classical commuting observables tr(X_i^j) on finite towers of
complex matrices, their gradients, Hamiltonian fields and exact flows,
the abelian group action they integrate to, strong-regularity tests, and
the orbit symplectic pairing with its Lagrangian verification.
"""

from .matcore import (
    DEFAULT_TOL,
    Tolerance,
    as_cmatrix,
    commutator,
    corner,
    embed,
    mat_exp,
    mat_pow,
    null_space,
    rank_eps,
    spectra_disjoint,
    trace_pair,
)
from .tower import (
    GenerationError,
    Tower,
    TowerTangent,
    extend,
    new_tower,
    random_theta_tower,
    tower_from_json,
    tower_to_json,
)
from .gz import (
    GZIndex,
    SmoothFn,
    fd_gradient,
    gz_eval,
    gz_fn,
    gz_grad,
    gz_hamiltonian,
    gz_indices,
    poisson_bracket,
)
from .regularity import (
    SregReport,
    centralizer_basis,
    centralizer_intersection_trivial,
    is_regular,
    is_sreg_centralizers,
    is_sreg_differentials,
    is_sreg_tangents,
    sreg_report,
)
from .action import (
    AParams,
    GroupElement,
    a_act,
    a_act_stepwise,
    flow,
    gl_adjoint,
    orbit_tangents_A,
    orbit_tangents_G,
    random_params,
    zero_params,
    zn_element,
)
from .symplectic import (
    LagrangianReport,
    OrbitTangent,
    anchor,
    hamiltonian_orbit_tangent,
    isotropy_check,
    kk_form,
    lagrangian_check,
    match_residual,
    omega_inf,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "Tolerance",
    "DEFAULT_TOL",
    "as_cmatrix",
    "corner",
    "embed",
    "commutator",
    "trace_pair",
    "mat_pow",
    "mat_exp",
    "rank_eps",
    "null_space",
    "spectra_disjoint",
    "Tower",
    "TowerTangent",
    "GenerationError",
    "new_tower",
    "extend",
    "random_theta_tower",
    "tower_to_json",
    "tower_from_json",
    "GZIndex",
    "SmoothFn",
    "gz_indices",
    "gz_fn",
    "gz_eval",
    "gz_grad",
    "gz_hamiltonian",
    "fd_gradient",
    "poisson_bracket",
    "SregReport",
    "is_regular",
    "centralizer_basis",
    "centralizer_intersection_trivial",
    "is_sreg_differentials",
    "is_sreg_centralizers",
    "is_sreg_tangents",
    "sreg_report",
    "AParams",
    "GroupElement",
    "zero_params",
    "random_params",
    "a_act",
    "a_act_stepwise",
    "gl_adjoint",
    "flow",
    "orbit_tangents_A",
    "orbit_tangents_G",
    "zn_element",
    "OrbitTangent",
    "kk_form",
    "omega_inf",
    "match_residual",
    "anchor",
    "hamiltonian_orbit_tangent",
    "isotropy_check",
    "lagrangian_check",
    "LagrangianReport",
]
