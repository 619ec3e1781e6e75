"""Compositional problem oracles: quadratic, logistic, MAML, sigmoid synthetic."""

from .base import NormalityData, ProblemOracle
from .logistic import LogisticProblem, make_logistic_cso
from .maml import SinusoidMamlProblem, make_sinusoid_maml
from .montecarlo import monte_carlo_grad_h
from .quadratic import QuadraticProblem, make_quadratic
from .sigmoid import SigmoidQuadraticProblem, make_sigmoid_quadratic

__all__ = [
    "ProblemOracle",
    "NormalityData",
    "QuadraticProblem",
    "make_quadratic",
    "LogisticProblem",
    "make_logistic_cso",
    "SinusoidMamlProblem",
    "make_sinusoid_maml",
    "SigmoidQuadraticProblem",
    "make_sigmoid_quadratic",
    "monte_carlo_grad_h",
]
