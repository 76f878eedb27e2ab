"""Dense complex linear algebra on the 2- and 4-dimensional Hilbert spaces.

Basis convention used throughout the package: qubit A is the major index,
so a two-qubit basis vector has index ``2*a + b`` with ``a, b`` the
single-qubit indices, and the sigma-z eigenstate ``|+>`` (eigenvalue +1)
sits at single-qubit index 0.  Kets are one-dimensional complex ndarrays,
operators are square complex ndarrays.

The Hermitian eigensolver is a cyclic complex Jacobi iteration written
out in full rather than a LAPACK call, so the package's spectra, entropies
and propagators do not depend on an external eigensolver.  Tests compare
it against ``numpy.linalg.eigh`` as an independent oracle.
"""

from __future__ import annotations

import math

import numpy as np

HERMITIAN_TOL = 1e-10
_OFFDIAG_TOL = 1e-14
_MAX_SWEEPS = 100


class NonHermitianInput(ValueError):
    """An operation that requires a Hermitian matrix received one that is not."""


def _pauli_matrices() -> dict[str, np.ndarray]:
    mats = {
        "x": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
        "y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
        "z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
        "i": np.eye(2, dtype=complex),
    }
    for m in mats.values():
        m.setflags(write=False)
    return mats


_PAULI = _pauli_matrices()


def pauli(axis: str) -> np.ndarray:
    """Return the Pauli matrix for ``axis`` in {'x', 'y', 'z', 'i'} (read-only view)."""
    try:
        return _PAULI[axis]
    except KeyError:
        raise ValueError(f"unknown Pauli axis {axis!r}") from None


def identity(dim: int = 2) -> np.ndarray:
    return np.eye(dim, dtype=complex)


def dagger(m: np.ndarray) -> np.ndarray:
    return np.asarray(m).conj().T


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with the A-major index convention."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def hermiticity_defect(m: np.ndarray) -> float:
    m = np.asarray(m)
    return float(np.max(np.abs(m - m.conj().T)))


def require_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return the symmetrized copy (m + m^dag)/2, or raise ``NonHermitianInput``."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NonHermitianInput(f"expected a square matrix, got shape {m.shape}")
    defect = hermiticity_defect(m)
    if defect > tol:
        raise NonHermitianInput(
            f"matrix deviates from Hermiticity by {defect:.3e} (tolerance {tol:.0e})"
        )
    return 0.5 * (m + m.conj().T)


def _offdiag_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.linalg.norm(off))


def hermitian_eig(m: np.ndarray, tol: float = HERMITIAN_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.

    Returns ``(vals, vecs)`` with eigenvalues ascending and ``vecs[:, j]``
    the eigenvector for ``vals[j]``.  Each rotation targets one off-diagonal
    entry ``a_pq = r * phi`` (``r = |a_pq|``): the 2x2 unitary

        R[p, p] = c    R[p, q] = s * phi
        R[q, p] = -s * conj(phi)    R[q, q] = c

    annihilates it when ``t = s/c`` solves ``t^2 + 2*tau*t - 1 = 0`` with
    ``tau = (a_qq - a_pp) / (2 r)``; the root smaller in magnitude keeps the
    rotation angle below pi/4, which makes the sweep monotone.  ``math.hypot``
    avoids overflow when ``tau`` is huge (nearly diagonal matrices).
    """
    a = require_hermitian(m, tol)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    for _sweep in range(_MAX_SWEEPS):
        if _offdiag_norm(a) <= _OFFDIAG_TOL:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                r = abs(a[p, q])
                if r == 0.0:
                    continue
                phi = a[p, q] / r
                tau = (a[q, q].real - a[p, p].real) / (2.0 * r)
                t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(tau, 1.0))
                c = 1.0 / math.hypot(t, 1.0)
                s = t * c
                # A <- R^dag A R and V <- V R, touching only rows/columns p, q.
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * np.conj(phi) * col_q
                a[:, q] = s * phi * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * phi * row_q
                a[q, :] = s * np.conj(phi) * row_p + c * row_q
                vcol_p = v[:, p].copy()
                vcol_q = v[:, q].copy()
                v[:, p] = c * vcol_p - s * np.conj(phi) * vcol_q
                v[:, q] = s * phi * vcol_p + c * vcol_q
    vals = np.diag(a).real.copy()
    order = np.argsort(vals, kind="stable")
    return vals[order], v[:, order].copy()


def matrix_exp_i(m: np.ndarray, t: float) -> np.ndarray:
    """Unitary propagator exp(-i t m) for Hermitian ``m`` via eigendecomposition."""
    vals, vecs = hermitian_eig(m)
    phases = np.exp(-1j * t * vals)
    return (vecs * phases) @ vecs.conj().T


def projector(psi: np.ndarray) -> np.ndarray:
    """Rank-one density matrix |psi><psi| (the input need not be normalized)."""
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def partial_trace(rho: np.ndarray, keep: str) -> np.ndarray:
    """Trace out one qubit of a 4x4 two-qubit density matrix.

    ``keep`` names the subsystem that survives: ``"A"`` or ``"B"``.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError(f"expected a 4x4 density matrix, got shape {rho.shape}")
    blocks = rho.reshape(2, 2, 2, 2)  # indices: a, b, a', b'
    if keep == "A":
        return np.einsum("abcb->ac", blocks)
    if keep == "B":
        return np.einsum("abad->bd", blocks)
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def expectation(state: np.ndarray, op: np.ndarray, tol: float = HERMITIAN_TOL) -> float:
    """Real expectation value of a Hermitian ``op`` in ``state``.

    ``state`` may be a ket (1-d) or a density matrix (2-d).  The operator is
    checked for Hermiticity; the imaginary residue of the raw value must be
    below 1e-12 and is then discarded.
    """
    op = require_hermitian(op, tol)
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        raw = complex(state.conj() @ op @ state)
    elif state.ndim == 2:
        raw = complex(np.trace(state @ op))
    else:
        raise ValueError(f"state must be a ket or a density matrix, got ndim {state.ndim}")
    if abs(raw.imag) > 1e-12:
        raise NonHermitianInput(
            f"expectation value has imaginary residue {raw.imag:.3e}"
        )
    return raw.real


def norm(psi: np.ndarray) -> float:
    return float(np.linalg.norm(np.asarray(psi)))
