"""Simulation toolkit for self-intersecting SLE(kappa,rho) curves on
Liouville quantum gravity, the stable boundary-length processes they induce,
and the mating-of-trees quotient that reassembles them."""

from . import bessel, gff, levy, loewner, lqg, mating
from .randomness import stream, substreams

__version__ = "0.1.0"
