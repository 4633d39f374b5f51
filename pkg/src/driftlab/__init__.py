"""driftlab: numerical laboratory for driven stochastic dynamics.

Submodules:
    markov     entropy production and cycle analysis on finite rate networks
    fields     Langevin ensembles and stationary field reconstruction
    selfref    self-referential coupling and information thresholds
    breakdown  adversarial corruption of shift detection
    synergy    perturbation-well yield experiments
    scaling    joint scaling laws across system families
    kernels    compiled/numpy integrator backends
    cli        command line entry point
"""
__version__ = "0.1.0"
