"""Spectral and decay-rate toolkit for waves with viscoelastic boundary damping."""

from __future__ import annotations

from .kernels import (
    ExponentialKernel,
    Kernel,
    MeasureKernel,
    PrimeKernel,
    StandardKernel,
    kernel_from_spec,
)

__version__ = "0.1.0"

__all__ = [
    "Kernel",
    "StandardKernel",
    "PrimeKernel",
    "ExponentialKernel",
    "MeasureKernel",
    "kernel_from_spec",
    "__version__",
]
