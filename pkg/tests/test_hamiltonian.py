import numpy as np
import pytest

from nv14n import constants
from nv14n.hamiltonian import (
    NUCLEAR_TRANSITIONS,
    FrequencySet,
    NVParams,
    Strain,
    TransitionLabel,
    build_full,
    electron_transitions,
    exact_electron_frequencies,
    exact_nuclear_frequencies,
    field_sensitivity,
)
from nv14n.spin_core import BASIS_MI, BASIS_MS, basis_index, eigh, label_states


def closed_form_diag(p):
    diag = np.empty(9)
    for ms in BASIS_MS:
        for mi in BASIS_MI:
            diag[basis_index(ms, mi)] = (
                p.D * ms * ms
                + p.omega_e * ms
                + p.P * mi * mi
                + p.omega_n * mi
                + p.A_par * ms * mi
            )
    return diag


def parallel_only_params(**overrides):
    values = dict(
        D=2.87e9,
        omega_e=1.4268797e9,
        P=constants.P_QUADRUPOLE_HZ,
        omega_n=-156599.094,
        A_par=constants.A_PAR_HZ,
        A_perp=0.0,
    )
    values.update(overrides)
    return NVParams(**values)


def test_all_zero_params_build_zero_matrix():
    p = NVParams(D=0.0, omega_e=0.0, P=0.0, omega_n=0.0, A_par=0.0, A_perp=0.0)
    assert np.allclose(build_full(p), 0.0)


def test_parallel_only_matrix_is_closed_form_diagonal():
    p = parallel_only_params()
    h = build_full(p)
    assert np.allclose(h - np.diag(np.diag(h)), 0.0)
    assert np.allclose(np.diag(h).real, closed_form_diag(p), atol=1e-9)


def test_full_matrix_is_hermitian_with_strain():
    p = NVParams.from_field(
        0.051, 0.05, strain=Strain(ez=1e5, ex_prime=3e5, ey_prime=4e5, ex=2e5, ey=1e5)
    )
    h = build_full(p)
    assert np.max(np.abs(h - h.conj().T)) < 1e-9 * np.max(np.abs(h))
    # the ey_prime term is what makes the matrix genuinely complex
    assert np.max(np.abs(h.imag)) > 1e4


def test_build_is_linear_over_disjoint_fields():
    base = dict(D=0.0, omega_e=0.0, P=0.0, omega_n=0.0, A_par=0.0, A_perp=0.0)
    pa = NVParams(**{**base, "P": -4.9e6, "A_par": -2.16e6})
    pb = NVParams(**{**base, "omega_n": -1.5e5, "A_perp": -2.6e6})
    combined = NVParams(
        **{**base, "P": -4.9e6, "A_par": -2.16e6, "omega_n": -1.5e5, "A_perp": -2.6e6}
    )
    assert np.allclose(build_full(pa) + build_full(pb), build_full(combined), atol=1e-9)


def test_frequencies_invariant_under_global_shift():
    p = NVParams.from_field(0.051, 0.05)
    h = build_full(p)
    shift = 7.3e8
    a = label_states(eigh(h))
    b = label_states(eigh(h + shift * np.eye(9)))
    for label in NUCLEAR_TRANSITIONS:
        fa = a.value_of(label.subspace, label.branch) - a.value_of(label.subspace, 0)
        fb = b.value_of(label.subspace, label.branch) - b.value_of(label.subspace, 0)
        assert fa == pytest.approx(fb, abs=5e-6)


def test_parallel_only_nuclear_frequencies_closed_form():
    p = parallel_only_params()
    freqs = exact_nuclear_frequencies(p)
    diag = closed_form_diag(p)
    for label in NUCLEAR_TRANSITIONS:
        expected = diag[basis_index(label.subspace, label.branch)] - diag[
            basis_index(label.subspace, 0)
        ]
        assert freqs.frequency(label) == pytest.approx(expected, abs=1e-9)
    # the quadrupole-dominated values are negative in this convention
    assert all(freq < 0 for _, freq, _ in freqs.entries)


def test_nominal_transition_matches_published_value():
    # B is only known to ~gauss precision, so the absolute match is loose;
    # at 50.9 mT the oracle lands 64 Hz from the published -6958568.8 Hz
    p = NVParams.from_field(0.0509)
    f = exact_nuclear_frequencies(p).frequency(TransitionLabel.nuclear(-1, -1))
    assert abs(f - (-6958568.8)) < 5e3
    assert f == pytest.approx(-6958632.7, abs=0.5)


def test_strain_shifts_by_channel():
    # oracle-derived strain sensitivities at 51 mT for 1 MHz field strengths:
    # the single-quantum channel crosses with the transverse hyperfine term
    # and moves frequencies by ~1.9 Hz; the double-quantum channel alone
    # stays below 1 Hz
    base = NVParams.from_field(0.051)
    f0 = exact_nuclear_frequencies(base).nuclear_array()

    def max_shift(strain):
        f = exact_nuclear_frequencies(base.replace(strain=strain)).nuclear_array()
        return float(np.max(np.abs(f - f0)))

    dq = max_shift(Strain(ex=1e6))
    assert dq == pytest.approx(0.531, abs=0.02)
    assert dq < 1.0
    sq = max_shift(Strain(ex_prime=1e6))
    assert sq == pytest.approx(1.899, abs=0.05)
    corner = max_shift(Strain(ex_prime=1e6, ey_prime=1e6, ex=1e6, ey=1e6))
    assert corner == pytest.approx(4.86, abs=0.1)


def test_electron_frequencies_parallel_only():
    p = parallel_only_params()
    f_plus, f_minus = exact_electron_frequencies(p, 0)
    assert f_plus == pytest.approx(p.D + p.omega_e, abs=1e-6)
    assert f_minus == pytest.approx(p.D - p.omega_e, abs=1e-6)


def test_electron_frequencies_nominal_with_hyperfine():
    p = NVParams.from_field(0.0509)
    f_plus, f_minus = exact_electron_frequencies(p, 1)
    # first-order positions D +- omega_e + A_par * (+-1) * 1, shifted by
    # kHz-scale level repulsion
    assert f_plus == pytest.approx(p.D + p.omega_e + p.A_par, abs=1e4)
    assert f_minus == pytest.approx(p.D - p.omega_e - p.A_par, abs=1e4)


def test_electron_frequencies_near_zero_field_split():
    p = NVParams.from_field(0.051).replace(omega_e=1e5, omega_n=-1e5 / 9113.85)
    f_plus, f_minus = exact_electron_frequencies(p, 1)
    assert abs(f_plus - f_minus - 2e5) < 1e4
    assert f_plus == pytest.approx(p.D, rel=3e-3)


def test_field_sensitivity_electron_scale():
    p = parallel_only_params()
    sens = field_sensitivity(p, TransitionLabel.electron(1, 0))
    assert sens == pytest.approx(constants.GAMMA_E_HZ_PER_T * 1e-6, rel=1e-6)
    sens_minus = field_sensitivity(p, TransitionLabel.electron(-1, 0))
    assert sens_minus == pytest.approx(-constants.GAMMA_E_HZ_PER_T * 1e-6, rel=1e-6)


def test_field_sensitivity_nuclear_scale():
    p = parallel_only_params()
    for branch in (1, -1):
        sens = field_sensitivity(p, TransitionLabel.nuclear(0, branch))
        assert abs(sens) == pytest.approx(3.0766, rel=1e-3)


def test_dip_fluctuation_implies_sub_tenth_microtesla():
    p = NVParams.from_field(0.0512)
    sens = field_sensitivity(p, TransitionLabel.electron(1, 1))
    assert 2.3e3 / abs(sens) < 0.1


def test_params_reject_level_inversion():
    with pytest.raises(ValueError):
        NVParams(D=2.87e9, omega_e=3.0e9, P=0.0, omega_n=0.0, A_par=0.0, A_perp=0.0)


def test_params_reject_inconsistent_tilt():
    with pytest.raises(ValueError):
        NVParams(
            D=2.87e9,
            omega_e=1.4e9,
            P=-4.9e6,
            omega_n=-1.5e5,
            A_par=-2.2e6,
            A_perp=-2.6e6,
            omega_ex=1e6,
            omega_nx=1e3,
        )


def test_from_field_ties_tilt_ratio_exactly():
    p = NVParams.from_field(0.051, 0.07)
    assert p.omega_ex / p.omega_e == pytest.approx(p.omega_nx / p.omega_n, rel=1e-13)


def test_params_json_round_trip():
    p = NVParams.from_field(0.0509, 0.05, strain=Strain(ez=1e3, ex=2e4))
    assert NVParams.from_json(p.to_json()) == p


def test_transition_label_validation():
    with pytest.raises(ValueError):
        TransitionLabel(kind="nuclear", subspace=2, branch=1)
    with pytest.raises(ValueError):
        TransitionLabel.nuclear(0, 0)
    with pytest.raises(ValueError):
        TransitionLabel(kind="electron", branch=1, mi=None)
    assert len(NUCLEAR_TRANSITIONS) == 6
    assert len(set(NUCLEAR_TRANSITIONS)) == 6
    assert len(electron_transitions(1)) == 2


def test_frequency_set_rejects_duplicates():
    lab = TransitionLabel.nuclear(0, 1)
    with pytest.raises(ValueError):
        FrequencySet(entries=((lab, 1.0, 0.1), (lab, 2.0, 0.1)))
