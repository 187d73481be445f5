"""magnopurcell - analytic model of Purcell-regime photon-magnon coupling."""

__version__ = "0.1.0"
