"""Douglas-Rachford displacement maps, their ranges and minimal displacement vectors."""
from .numerics import (AffineSubspace, Ball, Box, Halfspace, Orthant, Ray, ShiftedSet, Singleton, SumBallSubspace,
                       WholeSpace, affine, polar_cone, project_intersection, recession_cone, span)
from .operators import (MonotoneOp, Rectangular, affine_normal, dual_negate, invert, normal_cone, prox_of,
                        psd_linear, skew_rotator)
from .product import ProductInstance, delta_perp_check, lift
from .ranges import RangePair, build_range_pair, check_decomposition, classify_conditions, compute_vD_vR, diagnose
from .splitting import (DrInstance, ProbeConfig, Verdict, displacement, dr_apply, estimate_v, estimate_vD_vR,
                        iterate, probe_range_membership)

__version__ = "0.1.0"
