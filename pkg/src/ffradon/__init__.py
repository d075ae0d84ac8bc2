"""
ffradon

Finite-field X-ray, Radon and k-plane transforms over F_q^d, with a
verification harness for their L^p → L^r estimates: exponent-region
witnesses, operator-norm searches, incidence counts and character-sum bounds.
"""

__version__ = "0.1.0"
__author__ = "ffradon Contributors"

from ffradon.field_core import FieldCtx, field_for_order, make_field
from ffradon.geometry import AffineSpace, Flat, PlaneFamily, enumerate_kplanes, hyperplane_split
from ffradon.measures import Exponent, lp_norm, lr_norm_planes, norm_ratio
from ffradon.reports import LemmaReport, RatioReport
from ffradon.transforms import (
    GridFunction,
    PlaneFunction,
    adjoint_kplane,
    kplane_transform,
    radon_char_parts,
    radon_geometric_split,
)

__all__ = [
    "FieldCtx",
    "make_field",
    "field_for_order",
    "AffineSpace",
    "Flat",
    "PlaneFamily",
    "enumerate_kplanes",
    "hyperplane_split",
    "Exponent",
    "lp_norm",
    "lr_norm_planes",
    "norm_ratio",
    "GridFunction",
    "PlaneFunction",
    "kplane_transform",
    "adjoint_kplane",
    "radon_geometric_split",
    "radon_char_parts",
    "RatioReport",
    "LemmaReport",
]
