"""Numerical and exact tools for Lipschitz normal embedding of real algebraic germs."""

from __future__ import annotations

from .arcs import MonomialArc, probe_direction, tangent_cone_sample, tord_inner, tord_outer, witness_arcs_brieskorn
from .classify import (
    BrieskornParams,
    brieskorn_germ,
    classify_brieskorn,
    classify_horn,
    cone_lne_check,
    cross_check_theorem,
    horn_germ,
)
from .geodesy import CloudGerm, ConnectionRule, build_graph, components, inner_distance, lne_constant
from .linkscan import llne_verdict, norm_invariance_check, sweep
from .norms import NormSpec
from .variety import ImplicitGerm, SampleCloud, SparsePolynomial, sample_ball, sample_sphere_slice

__version__ = "0.1.0"

__all__ = [
    "BrieskornParams",
    "CloudGerm",
    "ConnectionRule",
    "ImplicitGerm",
    "MonomialArc",
    "NormSpec",
    "SampleCloud",
    "SparsePolynomial",
    "brieskorn_germ",
    "build_graph",
    "classify_brieskorn",
    "classify_horn",
    "components",
    "cone_lne_check",
    "cross_check_theorem",
    "horn_germ",
    "inner_distance",
    "llne_verdict",
    "lne_constant",
    "norm_invariance_check",
    "probe_direction",
    "sample_ball",
    "sample_sphere_slice",
    "sweep",
    "tangent_cone_sample",
    "tord_inner",
    "tord_outer",
    "witness_arcs_brieskorn",
]
