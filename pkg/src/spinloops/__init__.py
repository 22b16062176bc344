"""Quantum spins and random loops on the complete graph, at desk scale.

Subpackages:
    spectra     exact finite-n quantum Gibbs expectations and oracles
    asymptotics free-energy maximisers, critical exponents, saddle points
    pd          Poisson-Dirichlet / Ewens sampling and closed forms
    loops       random loop soup simulation (Poisson links + Metropolis)
    symfunc     partitions, Schur/power sums, characters, interchange sums
    cli         command-line front end
"""

__version__ = "0.1.0"

__all__ = ["spectra", "asymptotics", "pd", "loops", "symfunc", "cli"]
