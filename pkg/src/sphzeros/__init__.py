"""Energies and correlations of zeros of Gaussian SU(2) random polynomials.

Modules
-------
ensemble    sampling of the SU(2) polynomial ensemble
rootfind    Aberth-Ehrlich root finder and a companion-matrix oracle
sphere      stereographic map, distances and the Green's function of the sphere
energy      Green, Riesz and logarithmic pair energies
theory      universal kernel H(t), mean-field constants and asymptotic predictors
paircorr    pair-correlation histograms at the 1/sqrt(N) scale
minimizer   projected gradient descent for near-minimal configurations
experiment  seeded Monte Carlo driver, CSV/JSON persistence, regression sweeps
cli         command-line entry point
"""

__version__ = "0.1.0"
