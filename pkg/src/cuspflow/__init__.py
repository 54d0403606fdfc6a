"""Cusp excursions of geodesics on modular surfaces and their products.

Exact cusp arithmetic for PSL(2, Z), excursion spectra of boundary
directions, joint heights of diagonal geodesics on k-fold products, cusp
counting, Cantor-tree lower-bound machinery and self-similar coverings.
"""
from .lattice import CUSP_INFINITY, BudgetError, Cusp, Interval, ModularModel, get_model, realize
from .excursion import Direction, Spectrum, cf_expand, spectrum
from .product import DirectionTuple, classify, joint_envelope, minima_trace
from .counting import build_net, count_annulus, dirichlet_witness, growth_exponent, weighted_height_sum
from .cantor import build_ddelta, build_slice, evaluate_bound, sing2_pipeline
from .covering import CoverNode, chain_extract, covering_sum, make_node, successors

__version__ = "0.1.0"

__all__ = [
    "CUSP_INFINITY", "BudgetError", "Cusp", "Interval", "ModularModel", "get_model", "realize",
    "Direction", "Spectrum", "cf_expand", "spectrum",
    "DirectionTuple", "classify", "joint_envelope", "minima_trace",
    "build_net", "count_annulus", "dirichlet_witness", "growth_exponent", "weighted_height_sum",
    "build_ddelta", "build_slice", "evaluate_bound", "sing2_pipeline",
    "CoverNode", "chain_extract", "covering_sum", "make_node", "successors",
]
