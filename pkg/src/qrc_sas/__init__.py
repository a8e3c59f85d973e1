"""State-affine analysis of input-driven quantum channels."""

from .basis import gellmann_basis, to_coords, from_coords
from .channels import KrausSet, ParamChannel, SuperOp, compose, is_cptp

__version__ = "0.1.0"
