"""Lagrangian tori in toric varieties and Mironov cycles.

Modules: ``lattice`` (exact integer normal forms), ``polytope`` (Delzant
polytopes), ``divisors`` (Picard group and pencils), ``toric_space``
(symplectic reduction), ``chekanov`` (pencil tori), ``mironov`` (real part
swept by a subtorus), ``cli``.
"""

from .errors import LagrangeForgeError

__version__ = "0.1.0"
