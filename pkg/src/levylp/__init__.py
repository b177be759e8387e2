"""Spectral solvers, kernel estimates, Monte Carlo checks and maximal-function
machinery for evolution equations driven by time-inhomogeneous Levy-type generators."""

__version__ = "0.1.0"
