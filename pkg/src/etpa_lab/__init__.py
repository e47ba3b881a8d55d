"""Simulation and cross-section estimation for entangled two-photon absorption
experiments based on coincidence counting."""
__version__ = "0.1.0"
