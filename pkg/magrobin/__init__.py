"""
magrobin

Spectral toolkit for the magnetic Robin Laplacian in three dimensions:
model operators, boundary geometry, the effective boundary operator and the
unit-ball verification of the eigenvalue asymptotics.
"""

__version__ = "1.0.0"
__author__ = "magrobin developers"
