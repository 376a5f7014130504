"""Cell-switching simulator and optimisation toolkit for a two-layer
network of terrestrial small cells under a HAPS super-macro overlay.

Per time slot, users draw demands and associate by SINR; a central
controller decides which small cells sleep next slot from load
estimates that may carry a one-sided error.  Deciders: exhaustive
search, an always-on baseline, and two tabular Q-learning designs.
"""

from .kernels import backend

__version__ = "0.1.0"
__all__ = ["backend", "__version__"]
