"""Holistic discretisation of PDEs on coupled elements.

Exact symbolic construction of macroscale closures, equivalent-PDE and
self-adjointness checks, and fine-grid numerical validation.
"""

__version__ = "0.1.0"
