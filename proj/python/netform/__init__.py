"""Python bindings for the netform library."""

from ._core import (
    NetformError,
    Panel,
    __version__,
    dyadic_regression,
    estimate_tau,
    gamma_to_pi,
    load_panel,
    matrix_power,
    panel_loglik,
    recover_gamma,
    run_cli,
    stationary,
    transition_matrix,
)

__all__ = [
    "NetformError",
    "Panel",
    "__version__",
    "dyadic_regression",
    "estimate_tau",
    "gamma_to_pi",
    "load_panel",
    "matrix_power",
    "panel_loglik",
    "recover_gamma",
    "run_cli",
    "stationary",
    "transition_matrix",
]
