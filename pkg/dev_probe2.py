"""Strain-allocation probes; not part of the deliverable."""
import numpy as np

from nv14n import hamiltonian as ham, perturbation as pert

base = ham.NVParams.from_field(0.051)
f0 = ham.exact_nuclear_frequencies(base).nuclear_array()

def shift(st):
    f = ham.exact_nuclear_frequencies(base.replace(strain=st)).nuclear_array()
    return np.max(np.abs(f - f0))

r2 = 1e6 / np.sqrt(2.0)
cases = {
    "all four = 1e6 (vector mags 1.41e6)": ham.Strain(0, 1e6, 1e6, 1e6, 1e6),
    "quadrature mags = 1e6 (45 deg)": ham.Strain(0, r2, r2, r2, r2),
    "sq mag 1e6 only (ex'=1e6)": ham.Strain(0, 1e6, 0, 0, 0),
    "sq mag 1e6 only (45 deg)": ham.Strain(0, r2, r2, 0, 0),
    "dq mag 1e6 only (ex=1e6)": ham.Strain(0, 0, 0, 1e6, 0),
    "dq mag 1e6 only (45 deg)": ham.Strain(0, 0, 0, r2, r2),
    "dq both = 1e6 (mag 1.41e6)": ham.Strain(0, 0, 0, 1e6, 1e6),
    "sq+dq mags 1e6 (axis-aligned)": ham.Strain(0, 1e6, 0, 1e6, 0),
    "0.5 MHz all four": ham.Strain(0, 5e5, 5e5, 5e5, 5e5),
}
for name, st in cases.items():
    print(f"{name:42s} max |shift| = {shift(st):.4f} Hz")

# per-transition for the quadrature-magnitude case
st = ham.Strain(0, r2, r2, r2, r2)
f = ham.exact_nuclear_frequencies(base.replace(strain=st)).nuclear_array()
for lab, d in zip(ham.NUCLEAR_TRANSITIONS, f - f0):
    print("  ", lab.short(), f"{d:+.4f}")

# deviation sweep with the quadrature-magnitude allocation
import itertools
def sweep_max_dev(strain_builder, strains, keep=True):
    mx = 0.0
    arg = None
    for b, ang, s in itertools.product(range(400, 601, 25), (0.0, 0.05, 0.1), strains):
        p = ham.NVParams.from_field(b * 1e-4, ang, strain=strain_builder(s))
        fa = pert.analytic_nuclear_frequencies(p, keep).nuclear_array()
        fe = ham.exact_nuclear_frequencies(p).nuclear_array()
        d = float(np.max(np.abs(fa - fe)))
        if d > mx:
            mx, arg = d, (b, ang, s)
    return mx, arg

quad = lambda s: ham.Strain(0, s / np.sqrt(2), s / np.sqrt(2), s / np.sqrt(2), s / np.sqrt(2))
full = lambda s: ham.Strain(0, s, s, s, s)

mx, arg = sweep_max_dev(quad, (0.0, 1e6))
print(f"flag-on quadrature-mag grid: max dev {mx:.4f} at {arg}")
mx, arg = sweep_max_dev(full, (0.0, 1e6))
print(f"flag-on all-four grid:       max dev {mx:.4f} at {arg}")
mx, arg = sweep_max_dev(quad, (0.0,))
print(f"flag-on no-strain grid:      max dev {mx:.4f} at {arg}")

mx, arg = sweep_max_dev(quad, (0.0, 1e6), keep=False)
print(f"flag-off quadrature grid:    max dev {mx:.4f} at {arg}")

# strain grid {0,.25,.5,1} MHz quadrature magnitudes
vals = (0.0, 0.25e6, 0.5e6, 1.0e6)
mx = 0.0
for m1, m2 in itertools.product(vals, vals):
    st = ham.Strain(0, m1 / np.sqrt(2), m1 / np.sqrt(2), m2 / np.sqrt(2), m2 / np.sqrt(2))
    s = shift(st)
    if s > mx:
        mx, arg = s, (m1, m2)
print(f"strain quadrature-mag grid: max shift {mx:.4f} Hz at mags {arg}")

# axis-aligned per-field grid (the aggressive reading)
mx = 0.0
for c in itertools.product(vals, repeat=4):
    s = shift(ham.Strain(0, *c))
    if s > mx:
        mx, arg = s, c
print(f"strain per-field grid:      max shift {mx:.4f} Hz at {arg}")
