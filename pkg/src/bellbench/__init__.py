"""Two-qubit CHSH / factorization-criterion workbench with hidden-variables Monte Carlo."""

__version__ = "0.1.0"

from .criteria import (  # noqa: E402
    ChshConfig,
    CriterionVerdict,
    chsh_value,
    classify,
    four_corner_bound,
    g_tensor,
    g_value,
    g_value_projector,
    named_config,
    separability_test,
)
from .errors import InvariantError  # noqa: E402
from .quantum import (  # noqa: E402
    IDENTITY,
    TwoQubitState,
    alpha2_state,
    concurrence,
    correlation_tensor,
    make_alpha_beta_state,
    marginal_expectation,
    pauli_expectation,
    projector_expectation,
)

__all__ = [
    "IDENTITY",
    "ChshConfig",
    "CriterionVerdict",
    "InvariantError",
    "TwoQubitState",
    "alpha2_state",
    "chsh_value",
    "classify",
    "concurrence",
    "correlation_tensor",
    "four_corner_bound",
    "g_tensor",
    "g_value",
    "g_value_projector",
    "make_alpha_beta_state",
    "marginal_expectation",
    "named_config",
    "pauli_expectation",
    "projector_expectation",
    "separability_test",
]
