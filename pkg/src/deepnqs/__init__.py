"""Entanglement of random deep feed-forward neural quantum states.

Modules:

- :mod:`deepnqs.meanfield` -- mean-field order/chaos phase diagram of wide random networks
- :mod:`deepnqs.network` -- random complex networks and their log-amplitudes
- :mod:`deepnqs.hilbert` -- exact wavefunctions, Schmidt spectra, entropies, Page values
- :mod:`deepnqs.observables` -- matrix-free J1-J2 Heisenberg chain
- :mod:`deepnqs.harness` -- seeded ensemble sweeps, CSV output, CLI
"""

__version__ = "0.1.0"
