"""Cremona symmetry for stationary Gromov-Witten invariants of blowups of P^n."""

from .cremona import cremona_transform_class, curve_pushforward, verify_consistency
from .degeneration import certify_nonexceptional
from .gw_engine import GWQuery, gw_pn, kontsevich_p2, stationary, symmetry_check, trade_points
from .intersection import CurveClass, GeometricDivisorClass, mori_membership, pairing
from .lattice_core import Fan, validate_fan
from .tower import build_stage, final_stage

__version__ = "0.1.0"

__all__ = [
    "CurveClass",
    "Fan",
    "GWQuery",
    "GeometricDivisorClass",
    "build_stage",
    "certify_nonexceptional",
    "cremona_transform_class",
    "curve_pushforward",
    "final_stage",
    "gw_pn",
    "kontsevich_p2",
    "mori_membership",
    "pairing",
    "stationary",
    "symmetry_check",
    "trade_points",
    "validate_fan",
    "verify_consistency",
]
