"""Random linear combinations of weighted orthonormal polynomials.

Modules
-------
geometry     weighted sets, multi-index orders, quadrature measures
orthopoly    orthonormal bases, Bergman functions, leading coefficients
extremal     extremal-function estimates, references, threshold counts
ensemble     coefficient laws, seeded streams, random polynomials
zeros        root finding, zero measures, potentials, Cartan fractions
chebyshev    homogenization, bundle measure, Chebyshev constants
experiments  config-driven experiment runner (see ``randorth.cli``)
"""
__version__ = "0.1.0"
