"""Magneto-rotational dynamics of paramagnetic O2 superrotors.

The package computes Hund's case (b) Zeeman spectra at fixed rotational
quantum number N and follows centrifuge wave packets through them. Optical
and Raman observables are derived from the resulting angular distributions.
"""

__version__ = "0.1.0"

from .molecule import MolecularConstants, default_constants, load_constants, manifold_spectrum  # noqa: E402
from .dynamics import angular_distribution, centrifuge_packet, evolve  # noqa: E402
from .observables import alignment_moments, birefringence_signal, raman_weights  # noqa: E402

__all__ = [
    "MolecularConstants",
    "default_constants",
    "load_constants",
    "manifold_spectrum",
    "centrifuge_packet",
    "evolve",
    "angular_distribution",
    "alignment_moments",
    "birefringence_signal",
    "raman_weights",
]
