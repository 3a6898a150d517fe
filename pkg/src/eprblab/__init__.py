"""Simulation and analysis of EPRB coincidence experiments.

Local and reference models generate event logs (:mod:`eprblab.runner`),
:mod:`eprblab.analysis` turns logs into Bell-type statistics and
:mod:`eprblab.oracles` settles the combinatorial bounds exactly.
"""

__version__ = "0.1.0"
