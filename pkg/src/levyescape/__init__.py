"""Lévy-driven SDE models of stochastic optimizers.

Subpackages cover symmetric alpha-stable noise (``stable``), synthetic loss
landscapes (``landscapes``), SDE integrators for SGD / Adam / SGD-M
(``dynamics``), first-exit-time Monte Carlo (``escape``), escaping-set
geometry and tail measures (``geometry``), and a small-MLP gradient-noise
probe (``probe``).
"""

__version__ = "0.1.0"

from . import dynamics, escape, geometry, landscapes, probe, stable

__all__ = ["stable", "landscapes", "dynamics", "escape", "geometry", "probe", "__version__"]
