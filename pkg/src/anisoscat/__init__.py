"""Elastic scattering from anisotropic inclusions with an exact DtN boundary."""

from .dtn2d import BoundaryTrace, DtnParams
from .dtn3d import Dtn3dParams
from .estimators import ObstacleReconstructor
from .farfield import FarField, farfield_from_trace
from .fem import assemble, solve_scattering, solve_transmission
from .incident import IncidentField, PlaneWave, PointSource
from .inverse import MeasurementSet, Scenario, ShapeParams, descend, forward_map, frechet_derivative, objective_and_gradient
from .material import IsotropicBackground, StiffnessTensor2D, christoffel, isotropic_stiffness
from .mesh import Mesh2D, StarCurve, generate

__all__ = [
    "BoundaryTrace",
    "Dtn3dParams",
    "DtnParams",
    "FarField",
    "IncidentField",
    "IsotropicBackground",
    "MeasurementSet",
    "Mesh2D",
    "ObstacleReconstructor",
    "PlaneWave",
    "PointSource",
    "Scenario",
    "ShapeParams",
    "StarCurve",
    "StiffnessTensor2D",
    "assemble",
    "christoffel",
    "descend",
    "farfield_from_trace",
    "forward_map",
    "frechet_derivative",
    "generate",
    "isotropic_stiffness",
    "objective_and_gradient",
    "solve_scattering",
    "solve_transmission",
]
