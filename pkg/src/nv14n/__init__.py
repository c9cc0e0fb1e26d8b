"""Hz-precision spectroscopy modeling for the NV- / 14N spin system.

Subpackages cover the full chain: exact Hamiltonian diagonalization
(`spin_core`, `hamiltonian`), closed-form transition frequencies with a
validation sweep (`perturbation`), Ramsey simulation and fitting (`ramsey`),
weighted least-squares parameter recovery with error propagation
(`inversion`), cross-center statistics (`identity`) and ensemble clock
sizing (`clock`).
"""

from . import (
    clock,
    constants,
    dataio,
    hamiltonian,
    identity,
    inversion,
    perturbation,
    ramsey,
    spin_core,
    synthetic,
)

__all__ = [
    "clock",
    "constants",
    "dataio",
    "hamiltonian",
    "identity",
    "inversion",
    "perturbation",
    "ramsey",
    "spin_core",
    "synthetic",
]

__version__ = "0.1.0"
