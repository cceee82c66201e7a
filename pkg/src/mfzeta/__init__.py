"""Multifractal zeta functions of weighted self-similar measures.

Exact stage-partition enumeration, regularity classification, partition
zeta functions with certified series tails, spectrum and Legendre
pipelines, and complex-dimension / tube-counting machinery, with a CLI
(`mfzeta`) on top.
"""

__version__ = "0.1.0"
