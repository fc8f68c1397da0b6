"""Numerical potential theory of one-dimensional unimodal Levy generators.

The toolkit tabulates the kernel hierarchy of a symmetric pure-jump process,
evaluates Green and Poisson kernels of finite interval unions, certifies
Kato-class drifts, solves the gradient-perturbation integral equation for
the perturbed Green function, and cross-checks everything by Monte Carlo.
"""

__version__ = "0.1.0"

from . import (  # noqa: F401
    geometry,
    green,
    kato,
    kernels,
    mesh,
    models,
    montecarlo,
    perturbation,
    stable,
    svgplot,
)
