"""Bohmian trajectories for multi-time Dirac wave functions on curved,
possibly degenerate, time foliations of 1+1 Minkowski space-time."""

from . import dirac, dynamics, equivariance, foliation, quadrature
from .errors import (ArityMismatch, BadQuadrature, BohmDiracError, DegenerateMode,
                     EnvelopeError, NoMatch, NodeError, NullLeafPoint,
                     QuadratureWarning, RankError, ScenarioError)

__version__ = "0.1.0"
