"""Dense complex-Hermitian linear algebra for the 3- and 9-state spin spaces.

The toolkit works in the product basis |mS, mI> with the electron projection
mS as the slow index and both projections running over (+1, 0, -1). All
Hamiltonian entries are in Hz, so eigenvalues come out in Hz as well.

The eigensolver is a cyclic Jacobi iteration specialised to the tiny Hermitian
matrices used here. Rotations are accumulated in extended precision so that
eigenvalues of GHz-scale matrices remain trustworthy at the micro-hertz level,
which the downstream formula-validation work relies on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

__all__ = [
    "BASIS_MS",
    "BASIS_MI",
    "BASIS_STATES",
    "EigenSystem",
    "ConvergenceError",
    "LabelingError",
    "NonHermitianError",
    "basis_index",
    "eigh",
    "kron",
    "label_states",
    "spin1_operators",
]

HERMITICITY_RTOL = 1e-9

# Cyclic sweeps are capped; the off-diagonal target is floored by what
# extended-precision arithmetic can reach for the given matrix scale.
MAX_SWEEPS = 100
OFF_DIAGONAL_TARGET_HZ = 1e-10

# Labeling below this squared-overlap threshold means the perturbative state
# assignment is meaningless (e.g. at a level anticrossing).
MIN_LABEL_OVERLAP = 0.5

BASIS_MS = (1, 0, -1)
BASIS_MI = (1, 0, -1)
BASIS_STATES = tuple((ms, mi) for ms in BASIS_MS for mi in BASIS_MI)

_LONG_EPS = float(np.finfo(np.longdouble).eps)


class NonHermitianError(ValueError):
    """Raised when an input matrix is not Hermitian within tolerance."""


class ConvergenceError(RuntimeError):
    """Raised when the Jacobi iteration does not reach its target."""


class LabelingError(RuntimeError):
    """Raised when eigenvectors cannot be matched to product basis states."""


def basis_index(ms: int, mi: int) -> int:
    """Index of |mS, mI> in the 9-dimensional product basis."""
    return 3 * BASIS_MS.index(ms) + BASIS_MI.index(mi)


def spin1_operators() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return the spin-1 operators (Sx, Sy, Sz) in the (+1, 0, -1) basis.

    Sz is diagonal with entries (+1, 0, -1); the transverse operators carry
    the standard 1/sqrt(2) matrix elements so that [Sx, Sy] = i Sz and
    Sx^2 + Sy^2 + Sz^2 = 2 * identity.
    """
    r = 1.0 / np.sqrt(2.0)
    sx = np.array([[0, r, 0], [r, 0, r], [0, r, 0]], dtype=complex)
    sy = np.array(
        [[0, -1j * r, 0], [1j * r, 0, -1j * r], [0, 1j * r, 0]], dtype=complex
    )
    sz = np.diag([1.0, 0.0, -1.0]).astype(complex)
    return sx, sy, sz


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product of a 3x3 electron operator with a 3x3 nuclear operator.

    The electron factor is the slow index, matching the basis ordering of
    ``BASIS_STATES``.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != (3, 3) or b.shape != (3, 3):
        raise ValueError(f"kron expects two 3x3 matrices, got {a.shape} and {b.shape}")
    return np.kron(a, b)


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues (Hz), orthonormal eigenvector columns and state labels.

    Eigenpairs are kept in solver order, which for the nearly diagonal
    Hamiltonians of this toolkit tracks the basis ordering; ``label_states``
    reorders pairs into exact basis order and fills ``labels``.
    """

    values: np.ndarray
    vectors: np.ndarray
    labels: tuple[tuple[int, int], ...] | None = None

    def value_of(self, ms: int, mi: int) -> float:
        if self.labels is None:
            raise LabelingError("eigenpairs are unlabeled; run label_states first")
        return float(self.values[self.labels.index((ms, mi))])


def _require_hermitian(h: np.ndarray) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise NonHermitianError(f"expected a square matrix, got shape {h.shape}")
    scale = max(1.0, float(np.max(np.abs(h))))
    if float(np.max(np.abs(h - h.conj().T))) > HERMITICITY_RTOL * scale:
        raise NonHermitianError("matrix is not Hermitian within tolerance")
    return h


def _off_diagonal_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(np.abs(off) ** 2).real))


def eigh(h: np.ndarray) -> EigenSystem:
    """Diagonalize a Hermitian matrix by cyclic Jacobi rotations.

    Deterministic: identical input bytes produce identical output bytes.
    Raises ``NonHermitianError`` for non-Hermitian input and
    ``ConvergenceError`` if the off-diagonal norm does not reach its target
    within the sweep cap.
    """
    h = _require_hermitian(h)
    n = h.shape[0]
    a = h.astype(np.clongdouble)
    v = np.eye(n, dtype=np.clongdouble)

    fro = float(np.sqrt(np.sum(np.abs(a) ** 2).real))
    tol = max(OFF_DIAGONAL_TARGET_HZ, 64.0 * _LONG_EPS * fro)
    skip = tol / (2.0 * n)

    converged = _off_diagonal_norm(a) <= tol
    for _ in range(MAX_SWEEPS):
        if converged:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                pivot = complex(a[p, q])
                t = abs(pivot)
                if t <= skip:
                    continue
                phase = a[p, q] / np.clongdouble(t)
                alpha = a[p, p].real
                gamma = a[q, q].real
                tau = (gamma - alpha) / (2.0 * np.longdouble(t))
                sign = np.longdouble(1.0) if tau >= 0 else np.longdouble(-1.0)
                tr = sign / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + tr * tr)
                s = tr * c
                conj_phase = np.conj(phase)

                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * conj_phase * aq
                a[:, q] = s * ap + c * conj_phase * aq
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * phase * rq
                a[q, :] = s * rp + c * phase * rq
                a[p, q] = 0.0
                a[q, p] = 0.0

                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * conj_phase * vq
                v[:, q] = s * vp + c * conj_phase * vq
        converged = _off_diagonal_norm(a) <= tol
    if not converged:
        raise ConvergenceError(
            f"Jacobi iteration did not converge within {MAX_SWEEPS} sweeps"
        )

    values = np.array([float(a[i, i].real) for i in range(n)], dtype=float)
    vectors = v.astype(complex)
    return EigenSystem(values=values, vectors=vectors)


def label_states(es: EigenSystem) -> EigenSystem:
    """Assign each eigenvector the product basis state of largest overlap.

    The assignment must be a bijection: a greedy per-vector argmax is used
    first and an optimal assignment on the squared overlaps resolves any
    collisions. If any assigned squared overlap falls below 0.5 the states are
    too strongly mixed for labels to mean anything and ``LabelingError`` is
    raised. The returned system has its eigenpairs permuted into basis order.
    """
    n = es.vectors.shape[1]
    if n != len(BASIS_STATES):
        raise LabelingError(f"labeling requires the 9-state product space, got n={n}")
    overlaps = np.abs(es.vectors) ** 2  # [basis index, eigenvector index]

    claimed = np.argmax(overlaps, axis=0)
    if len(set(int(i) for i in claimed)) == n:
        basis_for_vec = claimed
    else:
        # Collision: pick the bijection maximizing the total squared overlap.
        rows, cols = linear_sum_assignment(-overlaps)
        basis_for_vec = np.empty(n, dtype=int)
        basis_for_vec[cols] = rows

    chosen = overlaps[basis_for_vec, np.arange(n)]
    if float(np.min(chosen)) < MIN_LABEL_OVERLAP:
        raise LabelingError(
            "state mixing too strong for perturbative labels "
            f"(min squared overlap {float(np.min(chosen)):.3f})"
        )

    order = np.argsort(basis_for_vec)
    return EigenSystem(
        values=es.values[order].copy(),
        vectors=es.vectors[:, order].copy(),
        labels=BASIS_STATES,
    )
