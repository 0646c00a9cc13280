"""Driving sequences for quasi-Monte Carlo MCMC: lattice constructions,
exact discrepancy, finite-state and probit samplers, and a replication bench."""

__version__ = "0.1.0"
