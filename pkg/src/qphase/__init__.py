"""qphase: exact and phase-space quantum dynamics for lattice Bose gases.

Modules
-------
lattice          momentum-space lattice models and Hilbert-space counting
fock             exact few-mode Fock-basis states and propagation
spins            Schwinger spin moments, squeezing, entanglement criteria
doublewell       the two-well two-spin squeezing/entanglement pipeline
stochastic       counter-based noise, SDE stepping, moment accumulation
wigner           truncated Wigner sampling, losses, ordering conversion
plusp            positive-P doubled-phase-space evolution and time reversal
gaussian_entropy Gaussian-operator Renyi-2 entropy, bosons and fermions
variational      coherent-state superposition ("multiverse") dynamics
scenarios, cli   declarative scenario configs and the qphase command
"""

__version__ = "0.1.0"
