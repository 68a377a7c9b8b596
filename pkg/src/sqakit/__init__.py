"""Simulated quantum annealing on Hamming-symmetric cost functions.

Library layout:

* :mod:`sqakit.costs` -- symmetric cost tables (spike family, ramps)
* :mod:`sqakit.worldlines` -- Trotterized state space and stationary weights
* :mod:`sqakit.kernels` -- Metropolis and heat-bath worldline Markov kernels
* :mod:`sqakit.oracle` -- exact sector-decomposed quantum references
* :mod:`sqakit.anneal` -- adiabatic SQA driver with warm starts and aborts
* :mod:`sqakit.sa` -- classical simulated-annealing baseline
* :mod:`sqakit.chains` -- explicit chains, congestion, comparison theorems
* :mod:`sqakit.diagnostics` -- estimators, mixing and separation harnesses
* :mod:`sqakit.cli` -- ``sqakit`` command-line entry point
"""

__version__ = "0.1.0"

from . import costs, worldlines, kernels, oracle  # noqa: F401
