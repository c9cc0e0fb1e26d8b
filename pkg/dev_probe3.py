"""Frame-choice probe for the effective-coupling denominator."""
import itertools

import numpy as np

from nv14n import hamiltonian as ham
from nv14n.spin_core import BASIS_MI, BASIS_MS, basis_index

NEAR_MIN = 1e3


def analytic_variant(p, frame="mi0", keep=True):
    """Re-implementation of the composer with a selectable c-term frame."""
    h = ham.build_full(p)
    diag = np.real(np.diag(h)).astype(float)
    out = {}
    for ms in BASIS_MS:
        idx = [basis_index(ms, mi) for mi in BASIS_MI]
        ref = diag[idx[1]]
        levels = [diag[i] - ref for i in idx]
        shifts = [0.0, 0.0, 0.0]
        coup = {
            (0, 1): complex(h[idx[0], idx[1]]),
            (1, 2): complex(h[idx[1], idx[2]]),
            (0, 2): complex(h[idx[0], idx[2]]),
        }
        for d in range(9):
            if d in idx:
                continue
            v = [complex(h[i, d]) for i in idx]
            coupled = [j for j in range(3) if v[j] != 0.0]
            if not coupled:
                continue
            for j in coupled:
                den = (diag[d] - ref) - levels[j] if keep else (diag[d] - ref)
                shifts[j] += -abs(v[j]) ** 2 / den
            if len(coupled) == 2:
                j1, j2 = coupled
                if frame == "mi0":
                    dd = diag[d] - ref
                elif frame == "mid":
                    dd = diag[d] - ref - 0.5 * (levels[j1] + levels[j2])
                elif frame == "sym":
                    dd = None  # symmetrized two-denominator form
                elif frame == "electron":
                    el = lambda m: p.D * m * m + p.omega_e * m
                    dd = el(0 if d // 3 == 1 else (1 if d // 3 == 0 else -1)) - el(ms)
                if frame == "sym":
                    add = -v[j1] * np.conj(v[j2]) * 0.5 * (
                        1.0 / ((diag[d] - ref) - levels[j1])
                        + 1.0 / ((diag[d] - ref) - levels[j2])
                    )
                else:
                    add = -v[j1] * np.conj(v[j2]) / dd
                coup[(min(j1, j2), max(j1, j2))] += add if j1 < j2 else np.conj(add)
        lp, l0, lm = (levels[k] + shifts[k] for k in range(3))
        gp, gm, gpm = lp - l0, lm - l0, lp - lm
        ap, am, apm = (abs(coup[(0, 1)]) ** 2, abs(coup[(1, 2)]) ** 2, abs(coup[(0, 2)]) ** 2)
        fp = gp + 2 * ap / gp + am / gm + (apm / gpm if apm else 0.0)
        fm = gm + 2 * am / gm + ap / gp - (apm / gpm if apm else 0.0)
        out[(ms, 1)] = fp
        out[(ms, -1)] = fm
    return out


def grid_max(frame, strains=(0.0, 1e6), quadrature=True):
    mx, arg = 0.0, None
    r2 = np.sqrt(2.0)
    for b, ang, s in itertools.product(range(400, 601, 25), (0.0, 0.05, 0.1), strains):
        sv = s / r2 if quadrature else s
        p = ham.NVParams.from_field(b * 1e-4, ang, strain=ham.Strain(0, sv, sv, sv, sv))
        fa = analytic_variant(p, frame)
        fe = ham.exact_nuclear_frequencies(p)
        for ms in BASIS_MS:
            for br in (1, -1):
                d = abs(fa[(ms, br)] - fe.frequency(ham.TransitionLabel.nuclear(ms, br)))
                if d > mx:
                    mx, arg = d, (b, ang, s, ms, br)
    return mx, arg


for frame in ("mi0", "mid", "sym", "electron"):
    mx0, a0 = grid_max(frame, strains=(0.0,))
    mx1, a1 = grid_max(frame, strains=(0.0, 1e6), quadrature=True)
    mx2, a2 = grid_max(frame, strains=(0.0, 1e6), quadrature=False)
    print(f"{frame:9s} nostrain {mx0:.4f} {a0} | quad {mx1:.4f} | allfour {mx2:.4f}")
