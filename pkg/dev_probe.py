"""Scratch numerical probes; not part of the deliverable."""
import time

import numpy as np

from nv14n import constants, hamiltonian as ham, perturbation as pert, spin_core

# --- 1. eigensolver accuracy on the nominal Hamiltonian -------------------
p510 = ham.NVParams.from_field(0.051)
H = ham.build_full(p510)
t0 = time.perf_counter()
es = spin_core.eigh(H)
t1 = time.perf_counter()
print(f"eigh time: {(t1-t0)*1e3:.2f} ms")
print("values:", np.sort(es.values))

# reconstruction / unitarity in extended precision
V = es.vectors.astype(np.clongdouble)
lam = es.values.astype(np.longdouble)
R = V @ np.diag(lam.astype(np.clongdouble)) @ V.conj().T - H.astype(np.clongdouble)
print("reconstruction max |err|:", float(np.max(np.abs(R))))
U = V.conj().T @ V - np.eye(9, dtype=np.clongdouble)
print("unitarity max |err|:", float(np.max(np.abs(U))))
print("trace diff:", abs(float(np.sum(es.values)) - float(np.trace(H).real)))

# vs numpy LAPACK
w, _ = np.linalg.eigh(H)
print("vs LAPACK max |dvalue|:", float(np.max(np.abs(np.sort(es.values) - w))))

# vs mpmath high precision
import mpmath as mp

mp.mp.dps = 40
Hm = mp.matrix(9, 9)
for i in range(9):
    for j in range(9):
        Hm[i, j] = mp.mpc(H[i, j].real, H[i, j].imag)
E = mp.eighe(Hm, eigvals_only=True) if hasattr(mp, "eighe") else mp.eigh(Hm, eigvals_only=True)
mp_vals = sorted(float(E[i]) for i in range(9))
print("vs mpmath max |dvalue|:", max(abs(a - b) for a, b in zip(np.sort(es.values), mp_vals)))

# --- 2. sign convention: the measured example at ~509 G -------------------
for b_mt in (50.9, 51.0, 51.2):
    p = ham.NVParams.from_field(b_mt * 1e-3)
    fs = ham.exact_nuclear_frequencies(p)
    f = fs.frequency(ham.TransitionLabel.nuclear(-1, -1))
    print(f"B={b_mt} mT: f(mS=-1, 0<->-1) = {f:.1f} Hz, vs -6958568.8 -> diff {f + 6958568.8:.1f} Hz")

# all six at 50.9 mT
p = ham.NVParams.from_field(0.0509)
fs = ham.exact_nuclear_frequencies(p)
for lab in ham.NUCLEAR_TRANSITIONS:
    print(" ", lab.short(), f"{fs.frequency(lab):.3f}")

# electron pair
fp, fm = ham.exact_electron_frequencies(p, 1)
print(f"MW pair at mI=+1: {fp:.1f}, {fm:.1f} (GHz: {fp/1e9:.4f}, {fm/1e9:.4f})")

# --- 3. regression vs the printed mS=0 effective levels -------------------
pm = ham.NVParams.from_field(0.0509, 0.05)
se = pert.subspace_effective(pm, 0)
D, we, Q, wn, Apar, Aperp = pm.D, pm.omega_e, pm.P, pm.omega_n, pm.A_par, pm.A_perp
wex, wnx = pm.omega_ex, pm.omega_nx
w_p1 = Q + wn - Aperp**2/(D+we-Q-wn) - (wex**2/2)/(D-we-Apar) - (wex**2/2)/(D+we+Apar)
w_0 = -Aperp**2/(D-we+Q+wn-Apar) - Aperp**2/(D+we+Q-wn-Apar) - (wex**2/2)/(D-we) - (wex**2/2)/(D+we)
w_m1 = Q - wn - Aperp**2/(D-we-Q+wn) - (wex**2/2)/(D-we+Apar) - (wex**2/2)/(D+we-Apar)
Om = wnx - wex*Aperp/(D-we) - wex*Aperp/(D+we)
print("omega_p1: composer", se.omega_p1, "printed", w_p1, "diff", se.omega_p1 - w_p1)
print("omega_0 : composer", se.omega_0, "printed", w_0, "diff", se.omega_0 - w_0)
print("omega_m1: composer", se.omega_m1, "printed", w_m1, "diff", se.omega_m1 - w_m1)
print("Omega   : composer", se.Omega, "printed", Om, "rel diff", (se.Omega - Om)/Om)

# --- 4. analytic vs exact over the acceptance grid -------------------------
t0 = time.perf_counter()
rep = pert.validation_sweep()
t1 = time.perf_counter()
print(f"sweep time: {t1-t0:.2f} s, rows={len(rep.rows)}")
print("flag-on max dev:", rep.max_deviation(), "mean:", rep.mean_deviation())
worst = max(rep.rows, key=lambda r: abs(r.deviation_hz))
print("worst row:", worst.b_gauss, worst.angle_deg, worst.strain_hz, worst.transition.short(), worst.deviation_hz)

rep_off = pert.validation_sweep(keep_small_denominators=False)
print("flag-off max dev:", rep_off.max_deviation(), "min over points...")
devs_off = {}
for r in rep_off.rows:
    key = (r.b_gauss, r.angle_deg, r.strain_hz)
    devs_off[key] = max(devs_off.get(key, 0.0), abs(r.deviation_hz))
print("flag-off per-point max dev range:", min(devs_off.values()), max(devs_off.values()))

# deviation at 1 degree angle
rep1 = pert.validation_sweep(b_gauss=(510.0,), angles_deg=(1.0,), strains_hz=(0.0,))
print("1 deg max dev:", rep1.max_deviation(in_domain_only=False))

# --- 5. strain shifts (exact oracle) ---------------------------------------
base = ham.NVParams.from_field(0.051)
f0 = base and ham.exact_nuclear_frequencies(base).nuclear_array()
corner = base.replace(strain=ham.Strain(0, 1e6, 1e6, 1e6, 1e6))
f1 = ham.exact_nuclear_frequencies(corner).nuclear_array()
print("strain corner shifts:", f1 - f0)
print("strain corner max |shift|:", np.max(np.abs(f1 - f0)))

# single-field strains
for name, st in [
    ("ex'", ham.Strain(0, 1e6, 0, 0, 0)),
    ("ey'", ham.Strain(0, 0, 1e6, 0, 0)),
    ("ex", ham.Strain(0, 0, 0, 1e6, 0)),
    ("ey", ham.Strain(0, 0, 0, 0, 1e6)),
]:
    f = ham.exact_nuclear_frequencies(base.replace(strain=st)).nuclear_array()
    print(f"strain {name}: max |shift| = {np.max(np.abs(f - f0)):.3f}")

# grid {0, .25, .5, 1} MHz ^ 4 on the four transverse fields
from itertools import product as iproduct
vals = (0.0, 0.25e6, 0.5e6, 1.0e6)
mx = 0.0
t0 = time.perf_counter()
for exp_, eyp, ex, ey in iproduct(vals, vals, vals, vals):
    f = ham.exact_nuclear_frequencies(base.replace(strain=ham.Strain(0, exp_, eyp, ex, ey))).nuclear_array()
    m = float(np.max(np.abs(f - f0)))
    if m > mx:
        mx = m
        argmx = (exp_, eyp, ex, ey)
t1 = time.perf_counter()
print(f"strain 4^4 grid: max shift {mx:.4f} Hz at {argmx}, time {t1-t0:.1f} s")

# --- 6. S1-matrix triple: reduced 2x2 vs exact 3x3 -------------------------
pm = ham.NVParams.from_field(0.0509, 0.05)
D, we, Q, wn, Apar, Aperp = pm.D, pm.omega_e, pm.P, pm.omega_n, pm.A_par, pm.A_perp
wex, wnx = pm.omega_ex, pm.omega_nx
m3 = np.array(
    [
        [D - we + Q + wn - Apar, Aperp, wex / np.sqrt(2)],
        [Aperp, 0.0, wnx / np.sqrt(2)],
        [wex / np.sqrt(2), wnx / np.sqrt(2), Q + wn],
    ]
)
tls = pert.ThreeLevelSystem(Delta=m3[0, 0], delta1=0.0, delta2=m3[2, 2], a=m3[0, 1], b=m3[0, 2], c=m3[1, 2])
red = pert.reduce_three_level(tls)
two = np.array([[red.delta1, red.coupling.real], [red.coupling.real, red.delta2]])
w2 = np.linalg.eigvalsh(two)
es3 = spin_core.eigh(m3)
w3 = np.sort(es3.values)[:2]
print("2x2 eigenvalues:", np.sort(w2))
print("3x3 near eigenvalues:", w3)
print("deltas:", np.sort(w2) - w3)

# --- 7. quartic convergence of the deviation ------------------------------
for scale in (0.25, 0.5, 1.0):
    ps = ham.NVParams.from_field(0.051).replace(A_perp=constants.A_PERP_HZ * scale)
    d = np.max(np.abs(
        pert.analytic_nuclear_frequencies(ps).nuclear_array()
        - ham.exact_nuclear_frequencies(ps).nuclear_array()
    ))
    print(f"A_perp scale {scale}: max dev {d:.3e}")

# --- 8. symmetry check ------------------------------------------------------
pA = ham.NVParams.from_field(0.051, 0.05)
pB = pA.replace(omega_e=-pA.omega_e, omega_ex=-pA.omega_ex, omega_n=-pA.omega_n, omega_nx=-pA.omega_nx)
fa = pert.analytic_nuclear_frequencies(pA)
fb = pert.analytic_nuclear_frequencies(pB)
for ms in (1, 0, -1):
    for br in (1, -1):
        x = fa.frequency(ham.TransitionLabel.nuclear(ms, br))
        y = fb.frequency(ham.TransitionLabel.nuclear(-ms, -br))
        print(f"  map (ms={ms:+d},b={br:+d}) -> {x - y:.2e}")

# timing of analytic evaluation
t0 = time.perf_counter()
for _ in range(200):
    pert.analytic_nuclear_frequencies(p510)
t1 = time.perf_counter()
print(f"analytic eval: {(t1-t0)/200*1e6:.0f} us")
