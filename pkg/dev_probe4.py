"""Ramsey calibration and inversion round-trip probes."""
import time

import numpy as np

from nv14n import constants, hamiltonian as ham, inversion as inv, ramsey, synthetic

# --- Ramsey noise calibration ------------------------------------------------
cfg = ramsey.paper_scale_config()
nl = ramsey.noiseless_trace(cfg)
res = ramsey.fit(nl)
print(f"noiseless fit: detuning {res.detuning:.6f} sigma {res.detuning_sigma:.3f} Hz")
print(f"  amplitude {res.amplitude:.6f} t2 {res.t2_star:.6f} p {res.stretch_p:.6f} chi2r {res.chi2_reduced:.2e}")

# predicted sigma vs shots scaling
for shots in (15000, 60000, 240000):
    c = cfg.replace(shots_per_point=shots)
    r = ramsey.fit(ramsey.noiseless_trace(c))
    print(f"shots {shots}: predicted sigma {r.detuning_sigma:.3f} Hz, sigma*sqrt(shots) = {r.detuning_sigma*np.sqrt(shots):.1f}")

# single noisy fit timing + value
t0 = time.perf_counter()
tr = ramsey.simulate(cfg)
r = ramsey.fit(tr)
t1 = time.perf_counter()
print(f"noisy fit: {r.detuning:.2f} +- {r.detuning_sigma:.2f} Hz in {(t1-t0)*1e3:.1f} ms")

# coverage study (criterion 4 rehearsal, 200 quick reps)
t0 = time.perf_counter()
hits = 0
sig_sum = 0.0
n_rep = 200
for i in range(n_rep):
    c = cfg.replace(rng_seed=1000 + i)
    r = ramsey.fit(ramsey.simulate(c))
    sig_sum += r.detuning_sigma
    if abs(r.detuning - c.true_detuning) <= 2.0 * r.detuning_sigma:
        hits += 1
t1 = time.perf_counter()
print(f"coverage {hits}/{n_rep} = {hits/n_rep:.3f}, mean sigma {sig_sum/n_rep:.3f} Hz, {(t1-t0)/n_rep*1e3:.1f} ms/rep")

# --- inversion ----------------------------------------------------------------
params = synthetic.make_params()
m = synthetic.measured_set(params, noisy=False)
t0 = time.perf_counter()
est = inv.fit_parameters(m, model="four_param")
t1 = time.perf_counter()
print(f"\n4-param noise-free fit in {t1-t0:.2f} s, residual {est.weighted_residual:.2e} Hz")
for k in est.values:
    truth = {"P": params.P, "omega_n": params.omega_n, "A_par": params.A_par, "A_perp": params.A_perp}.get(k)
    print(f"  {k}: {est.values[k]:.6f} (truth {truth:.6f}, err {est.values[k]-truth:+.2e}) sigma {est.sigmas[k]:.3f}")
print(f"  D: {est.D:.3f} (truth {params.D:.3f}), omega_e: {est.omega_e:.3f} (truth {params.omega_e:.3f})")
print(f"  gamma ratio {est.gamma_ratio:.4f} +- {est.gamma_ratio_sigma:.4f} (truth {constants.GAMMA_RATIO_MEASURED})")

est5 = inv.fit_parameters(m, model="five_param")
print(f"5-param noise-free: residual {est5.weighted_residual:.2e}")
for k in est5.values:
    print(f"  {k}: {est5.values[k]:.6f} sigma {est5.sigmas[k]:.4g}")

# noisy
m2 = synthetic.measured_set(params, rng=42)
t0 = time.perf_counter()
est2 = inv.fit_parameters(m2, model="four_param")
t1 = time.perf_counter()
print(f"\nnoisy fit in {t1-t0:.2f} s, residual {est2.weighted_residual:.3f} Hz")
for k in est2.values:
    truth = {"P": params.P, "omega_n": params.omega_n, "A_par": params.A_par, "A_perp": params.A_perp}.get(k)
    print(f"  {k}: err {est2.values[k]-truth:+8.3f}  sigma {est2.sigmas[k]:8.3f}  pull {(est2.values[k]-truth)/est2.sigmas[k]:+.2f}")

# misaligned 5-param recovery
pmis = synthetic.make_params(angle_deg=0.05)
m3 = synthetic.measured_set(pmis, noisy=False)
est5m = inv.fit_parameters(m3, model="five_param", compute_errors=False)
print(f"\n5-param misaligned: omega_ex {est5m.values['omega_ex']:.1f} (truth {abs(pmis.omega_ex):.1f}), residual {est5m.weighted_residual:.3e}")
est4m = inv.fit_parameters(m3, model="four_param", compute_errors=False)
print(f"4-param misaligned residual: {est4m.weighted_residual:.3f} Hz (Hz-level expected)")
