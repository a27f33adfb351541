"""Numerical toolkit for boundary-voltage perturbations caused by
low-volume, possibly extreme-contrast conductivity inclusions.

Solves perturbed and unperturbed conductivity problems with P1 finite
elements, computes polarization tensor densities M = D - W along explicit
inclusion sequences, and measures the convergence rates and bounds that
govern the first-order expansion of the boundary voltage.
"""

__version__ = "0.1.0"
