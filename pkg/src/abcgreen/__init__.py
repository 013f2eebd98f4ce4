"""Relativistic Aharonov-Bohm-Coulomb Green's function by three analytic routes.

Natural units (hbar = c = m = 1) throughout.
"""

__version__ = "0.1.0"

from .angular import SpacePoint, angular_weight, gauge_shift_check  # noqa: E402
from .errors import DomainError, NotConvergedError, PoleError, QuadratureError  # noqa: E402
from .greens import (  # noqa: E402
    BoundState,
    TruncationSpec,
    bound_energies,
    greens_function,
    pole_scan,
)
from .quad import EvalResult, QuadSpec, integrate_finite, integrate_moment, integrate_semiinf  # noqa: E402
from .radial import (  # noqa: E402
    ChannelIndex,
    PhysicalParams,
    g0_proper_time,
    g0_z_rep,
    g_n_closed,
    h_kernel,
    radial_closed,
    radial_integral,
    radial_series,
)

__all__ = [
    "BoundState",
    "ChannelIndex",
    "DomainError",
    "EvalResult",
    "NotConvergedError",
    "PhysicalParams",
    "PoleError",
    "QuadSpec",
    "QuadratureError",
    "SpacePoint",
    "TruncationSpec",
    "angular_weight",
    "bound_energies",
    "g0_proper_time",
    "g0_z_rep",
    "g_n_closed",
    "gauge_shift_check",
    "greens_function",
    "h_kernel",
    "integrate_finite",
    "integrate_moment",
    "integrate_semiinf",
    "pole_scan",
    "radial_closed",
    "radial_integral",
    "radial_series",
]
