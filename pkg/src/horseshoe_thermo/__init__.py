"""horseshoe-thermo: thermodynamic formalism numerics for a partially hyperbolic horseshoe."""

__version__ = "0.1.0"
