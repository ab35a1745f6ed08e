"""Passivity analysis and port-Hamiltonian realization of LTI systems."""

from .errors import *  # noqa: F401,F403
from .kalman_staircase import pbh_controllable, pbh_observable, staircase_decompose
from .linalg_kernels import (
    biorthogonal_kernel_bases, ranked_svd, solve_sylvester, split_stable_imaginary,
    symmetric_sqrt_factor,
)
from .lyapunov import is_lyapunov_solution, lyapunov_equation, solve_lyapunov_inequality
from .ph_transform import (
    brake_squeal_instance, build_t0, check_skew_case_conditions, feedthrough_reduce,
    passivity_certificate, random_ph_realization, realize_general, realize_skew_case,
    scramble,
)
from .riccati_even import (
    build_even_pencil, build_hamiltonian, even_deflating_check, even_staircase_reduce,
    lagrangian_subspace, pencil_spectrum, solve_are, solve_lmi_storage,
)
from .system_model import (
    EquivalenceTransform, LtiSystem, PhRealization, StorageCertificate,
    assemble_ph_from_storage, dissipation_check, lmi_matrix, lmi_residual, lmi_scale,
    ph_to_lti, transfer_function, transform_system, validate_lti,
)
from .tolerances import DEFAULT, Tolerances

__version__ = "0.1.0"
