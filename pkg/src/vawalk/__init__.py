"""Random walks on virtually abelian groups Z^m x F.

Exact drift and covariance from harmonic one-forms on the quotient diagram,
the local-CLT Gaussian, and total-variation experiments for noise
sensitivity and decoupling computed by exact convolution.
"""

__version__ = "0.1.0"

from .group import Element, GroupSpec, make_spec, product_spec
from .measure import FiniteMeasure, detect_period, generation_diagnostics, make_pi_rho, product_measure
from .fixtures import builtin_group, load_group, load_measure
from .diagram import build_diagram
from .harmonic import harmonic_decompose
from .spectral import covariance, gaussian_measure, leading_exponent, structure_prediction
from .engine import LatticeDistribution, averaged_distribution, convolve_step, evolve, tv_distance, tv_to_gaussian
from .experiments import CurvePoint, decouple_curve, gaussian_limit_tv, lclt_curve, noise_curve

__all__ = [
    "Element", "GroupSpec", "make_spec", "product_spec",
    "FiniteMeasure", "detect_period", "generation_diagnostics", "make_pi_rho", "product_measure",
    "builtin_group", "load_group", "load_measure",
    "build_diagram", "harmonic_decompose",
    "covariance", "gaussian_measure", "leading_exponent", "structure_prediction",
    "LatticeDistribution", "averaged_distribution", "convolve_step", "evolve", "tv_distance",
    "tv_to_gaussian",
    "CurvePoint", "decouple_curve", "gaussian_limit_tv", "lclt_curve", "noise_curve",
]
