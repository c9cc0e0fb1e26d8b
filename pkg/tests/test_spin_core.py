import numpy as np
import pytest

from nv14n import spin_core
from nv14n.hamiltonian import NVParams, build_full
from nv14n.spin_core import (
    BASIS_STATES,
    ConvergenceError,
    LabelingError,
    NonHermitianError,
    basis_index,
    eigh,
    kron,
    label_states,
    spin1_operators,
)

SX, SY, SZ = spin1_operators()
I3 = np.eye(3, dtype=complex)


def nominal_params():
    return NVParams.from_field(0.051)


def test_sz_is_diagonal_on_basis():
    assert np.allclose(np.diag(SZ), [1.0, 0.0, -1.0])
    e_plus = np.array([1.0, 0.0, 0.0])
    assert np.allclose(SZ @ e_plus, e_plus)


def test_commutator_identity():
    comm = SX @ SY - SY @ SX
    assert np.allclose(comm, 1j * SZ, atol=1e-15)


def test_casimir_is_two():
    total = SX @ SX + SY @ SY + SZ @ SZ
    assert np.allclose(total, 2.0 * I3, atol=1e-15)


def test_kron_identity():
    assert np.allclose(kron(I3, I3), np.eye(9))


def test_kron_diagonals():
    assert np.allclose(np.diag(kron(SZ, I3)).real, [1, 1, 1, 0, 0, 0, -1, -1, -1])
    assert np.allclose(np.diag(kron(SZ, SZ)).real, [1, 0, -1, 0, 0, 0, -1, 0, 1])


def test_kron_rejects_wrong_shapes():
    with pytest.raises(ValueError):
        kron(np.eye(2), I3)


def test_basis_index_order():
    assert [basis_index(ms, mi) for ms, mi in BASIS_STATES] == list(range(9))


def test_eigh_diagonal_input():
    es = eigh(np.diag([3.0, 1.0, 2.0]).astype(complex))
    assert sorted(es.values) == pytest.approx([1.0, 2.0, 3.0])
    for k in range(3):
        col = es.vectors[:, k]
        assert abs(np.linalg.norm(col) - 1.0) < 1e-14
        assert np.max(np.abs(col)) == pytest.approx(1.0, abs=1e-12)


def test_eigh_two_level_block():
    a = 7.5e6
    h = np.zeros((3, 3), dtype=complex)
    h[0, 1] = h[1, 0] = a
    es = eigh(h)
    assert sorted(es.values) == pytest.approx([-a, 0.0, a], abs=1e-8)


def test_eigh_rejects_non_hermitian():
    h = np.array([[0.0, 1.0], [0.5, 0.0]], dtype=complex)
    with pytest.raises(NonHermitianError):
        eigh(h)


def test_eigh_is_deterministic():
    h = build_full(nominal_params())
    a = eigh(h)
    b = eigh(h)
    assert a.values.tobytes() == b.values.tobytes()
    assert a.vectors.tobytes() == b.vectors.tobytes()


def test_eigh_trace_identity():
    h = build_full(nominal_params())
    es = eigh(h)
    assert abs(np.sum(es.values) - np.trace(h).real) < 1e-6


def test_eigh_reconstruction_and_unitarity():
    # checked in extended precision so the test arithmetic does not mask the
    # solver's own error; entries reach ~4.3e9 Hz
    h = build_full(nominal_params())
    es = eigh(h)
    v = es.vectors.astype(np.clongdouble)
    lam = np.diag(es.values.astype(np.longdouble)).astype(np.clongdouble)
    recon_err = np.max(np.abs(v @ lam @ v.conj().T - h.astype(np.clongdouble)))
    assert float(recon_err) < 1e-6
    unit_err = np.max(np.abs(v.conj().T @ v - np.eye(9, dtype=np.clongdouble)))
    assert float(unit_err) < 1e-12


def test_eigh_matches_lapack_and_high_precision():
    # independent cross-checks of the oracle: LAPACK's tridiagonal QR and a
    # 40-digit solve
    mpmath = pytest.importorskip("mpmath")
    h = build_full(nominal_params())
    es = eigh(h)
    mine = np.sort(es.values)

    lapack = np.linalg.eigvalsh(h)
    assert np.max(np.abs(mine - lapack)) < 1e-6

    mpmath.mp.dps = 40
    hm = mpmath.matrix(9, 9)
    for i in range(9):
        for j in range(9):
            hm[i, j] = mpmath.mpc(h[i, j].real, h[i, j].imag)
    ref = sorted(float(x) for x in mpmath.eighe(hm, eigvals_only=True))
    assert max(abs(a - b) for a, b in zip(mine, ref)) < 1e-6


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_eigh_random_hermitian(seed):
    rng = np.random.default_rng(seed)
    scale = 10.0 ** rng.uniform(0, 9)
    raw = rng.normal(size=(9, 9)) + 1j * rng.normal(size=(9, 9))
    h = (raw + raw.conj().T) / 2.0 * scale
    es = eigh(h)
    recon = es.vectors @ np.diag(es.values) @ es.vectors.conj().T
    assert np.max(np.abs(recon - h)) < 1e-6 * max(1.0, scale)
    assert np.max(np.abs(np.sort(es.values) - np.linalg.eigvalsh(h))) < 1e-6 * max(1.0, scale)


def test_label_states_diagonal_is_basis_order():
    p = NVParams(
        D=2.87e9,
        omega_e=1.43e9,
        P=-4.9457549e6,
        omega_n=-1.57e5,
        A_par=-2.1646898e6,
        A_perp=0.0,
    )
    es = label_states(eigh(build_full(p)))
    assert es.labels == BASIS_STATES
    diag = np.diag(build_full(p)).real
    assert np.allclose(es.values, diag, atol=1e-6)


def test_label_states_nominal_overlaps_large():
    es0 = eigh(build_full(nominal_params()))
    labeled = label_states(es0)
    overlaps = np.abs(labeled.vectors) ** 2
    assigned = np.array([overlaps[i, i] for i in range(9)])
    assert np.min(assigned) > 0.99


def test_label_states_raises_at_anticrossing():
    # omega_e just below D puts the mS=-1 manifold on top of mS=0, where the
    # transverse hyperfine coupling mixes states beyond recognition
    p = NVParams(
        D=2.87e9,
        omega_e=2.87e9 - 1e4,
        P=-4.9457549e6,
        omega_n=-1.57e5,
        A_par=-2.1646898e6,
        A_perp=-2.6327e6,
    )
    with pytest.raises(LabelingError):
        label_states(eigh(build_full(p)))


def test_eigh_convergence_cap_is_enforced():
    # rank-deficient trick matrices cannot defeat the cap in practice, so
    # exercise the error path directly via a tiny sweep budget
    h = build_full(nominal_params())
    original = spin_core.MAX_SWEEPS
    spin_core.MAX_SWEEPS = 0
    try:
        with pytest.raises(ConvergenceError):
            eigh(h)
    finally:
        spin_core.MAX_SWEEPS = original
