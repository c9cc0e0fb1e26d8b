"""Reference constants for the NV- / 14N ground-state spin system.

All couplings are expressed in Hz. Zeeman coefficients are the factors that
multiply the field magnitude in the longitudinal Zeeman terms: with the field
pointing along the NV symmetry axis (+z), the electron coefficient is positive
(the mS = -1 electron branch descends towards the ground-state anticrossing
near 102.4 mT) while the nuclear coefficient carries the usual negative NMR
sign. Their ratio is therefore negative.
"""

CONSTANTS_VERSION = 1

# Zeeman coefficients, Hz per tesla (28.033 MHz/mT and 3.0766 kHz/mT in
# magnitude).
GAMMA_E_HZ_PER_T = 28.033e9
GAMMA_N_HZ_PER_T = -3.0766e6

# Handbook ratio implied by the two coefficients above.
GAMMA_RATIO_NOMINAL = GAMMA_E_HZ_PER_T / GAMMA_N_HZ_PER_T

# Best combined spectroscopic values for the intrinsic couplings.
D_ZFS_HZ = 2.87e9
P_QUADRUPOLE_HZ = -4945754.9
A_PAR_HZ = -2164689.8
A_PERP_HZ = -2632700.0
GAMMA_RATIO_MEASURED = -9113.85

# Number density of carbon sites in diamond (3.52 g/cm^3 / 12 g/mol * N_A).
CARBON_ATOMS_PER_CM3 = 1.76e23

# Published fractional frequency instabilities at 1 s of integration for
# commercial references (chip-scale Cs beam, rack-mount Rb and Cs units).
CLOCK_BENCHMARKS = {
    "cs_chip_clock": 2.5e-10,
    "commercial_rb_clock": 2.0e-11,
    "commercial_cs_clock": 1.2e-11,
}
