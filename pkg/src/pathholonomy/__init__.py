"""Holonomies of connections on path spaces: transport, surface transport,
curvature, first variations and observables on a single chart."""

__version__ = "0.1.0"

from .liealg import GroupSpec, make_group, exp_map, log_map  # noqa: E402
from .fields import AdjointForm, ChartDomain, GaugeMap, curvature_F  # noqa: E402
from .transport import frame_factor, holonomy_A, transport_A, ordered_exp  # noqa: E402
from .pathspace import SpecialConnection, surface_transport, H_map, hol_AB  # noqa: E402

__all__ = ["GroupSpec", "make_group", "exp_map", "log_map", "AdjointForm", "ChartDomain",
           "GaugeMap", "curvature_F", "frame_factor", "holonomy_A", "transport_A",
           "ordered_exp", "SpecialConnection", "surface_transport", "H_map", "hol_AB"]
