"""Discretized phase-space operator calculus with a verification harness."""
from . import harness, phasespace, products, quantize, spectral, transforms
from .harness import SuiteConfig, run_identity_suite, run_inequality_suite
from .phasespace import ConfigFn, GridSpec, PhaseFn, make_grid
from .products import twisted_convolve, weyl_product
from .quantize import A_op, op_t
from .spectral import schatten_norm
from .transforms import stft, wigner_t

__version__ = "0.1.0"

__all__ = [
    "harness", "phasespace", "products", "quantize", "spectral", "transforms",
    "SuiteConfig", "run_identity_suite", "run_inequality_suite", "ConfigFn", "GridSpec",
    "PhaseFn", "make_grid", "twisted_convolve", "weyl_product", "A_op", "op_t",
    "schatten_norm", "stft", "wigner_t",
]
