"""Algebraic stability analysis for celestial mechanics.

Exact Sturm/Hermite real-root machinery, characteristic polynomials and
Jordan reduction, constant- and periodic-coefficient linear ODE stability,
and a planar circular restricted three-body pipeline with libration
points, periodic-orbit correction, and surface-of-section return maps.
"""

__version__ = "0.1.0"
