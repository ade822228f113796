"""Invasion-front speeds, profiles, and the pushed-to-pulled transition for
the logistic Keller-Segel model with chemorepulsion.

Modules
-------
model         dispersion relation, linear spreading speed, essential spectra
pme           porous-medium (delta = 0) closed forms and quadrature oracles
slowmanifold  slow-manifold expansions and the reduced planar flow
continuation  far-field/core boundary-value Newton solver and sweeps
spectra       weighted linearizations and point-spectrum scans
cli           the ``frontlab`` command-line interface
"""

from .continuation import FrontSolution, Grid, TransitionPoint
from .model import DispersionRoot, ModelParams, SpectrumCurve

__all__ = [
    "ModelParams",
    "DispersionRoot",
    "SpectrumCurve",
    "FrontSolution",
    "Grid",
    "TransitionPoint",
]

__version__ = "0.1.0"
