"""Hamiltonian ABC: stochastic-gradient samplers driven by simulator-based gradients."""
from habc.core import DomainError, ShapeError, derive_stream, draw_seed_vector
from habc.gradients import GradientConfig, GradientEstimate, Method
from habc.likelihoods import Likelihood

__version__ = "0.1.0"

__all__ = ["DomainError", "ShapeError", "derive_stream", "draw_seed_vector",
           "GradientConfig", "GradientEstimate", "Method", "Likelihood"]
