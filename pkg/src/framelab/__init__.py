"""Approximate duality for frame systems on l^p model spaces."""

from .duality import (
    DualVerdict,
    canonical_dual,
    certify_approx_dual,
    is_exact_dual,
    neumann_iterate,
    parametrize_dual,
)
from .frames import FrameSystem, validate_p_abs, validate_p_asf
from .operator_algebra import Verdict, operator_pnorm
from .sequence_core import Functional, ModelSpace, Vec

__all__ = [
    "DualVerdict", "FrameSystem", "Functional", "ModelSpace", "Vec", "Verdict",
    "canonical_dual", "certify_approx_dual", "is_exact_dual", "neumann_iterate",
    "operator_pnorm", "parametrize_dual", "validate_p_abs", "validate_p_asf",
]
