"""Helmholtz scattering workbench: PML finite elements, Schwarz, circle BEM."""

__version__ = "0.1.0"
