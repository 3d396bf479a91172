"""Numerical check of the Lang-Firsov operator identities on a truncated
phonon Fock space.

Generator ``S = -g_p sigma_z (nu - nu^dag)``; the identities verified are

(i)   e^S sigma+ e^-S             = sigma+ exp(-2 g_p (nu - nu^dag))
(ii)  e^S (W nu^dag nu + g_p W sigma_z (nu + nu^dag)) e^-S = W nu^dag nu - g_p^2 W
(iii) e^S sigma_z e^-S            = sigma_z

Truncation corrupts the top Fock levels, so deviations are measured on the
lowest half of the ladder only.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy.linalg import expm

SIGMA_Z = np.diag([1.0, -1.0])
SIGMA_PLUS = np.array([[0.0, 1.0], [0.0, 0.0]])


class TruncationWarning(UserWarning):
    """Identity deviation is dominated by the Fock cutoff."""


def annihilation(n_ph_max: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n_ph_max + 1, dtype=float)), 1)


def identity_deviations(g_p: float, n_ph_max: int, omega_ph: float = 1.0) -> dict[str, float]:
    """Spectral-norm deviation of each identity on the lower Fock block."""
    nu = annihilation(n_ph_max)
    x = nu - nu.T
    P = n_ph_max + 1
    eye_ph = np.eye(P)
    gen = -g_p * np.kron(SIGMA_Z, x)
    U = expm(gen)
    Uinv = expm(-gen)

    def conj(op):
        return U @ op @ Uinv

    num = nu.T @ nu
    lhs_i = conj(np.kron(SIGMA_PLUS, eye_ph))
    rhs_i = np.kron(SIGMA_PLUS, expm(-2.0 * g_p * x))
    h_ph = omega_ph * np.kron(np.eye(2), num) + g_p * omega_ph * np.kron(SIGMA_Z, nu + nu.T)
    lhs_ii = conj(h_ph)
    rhs_ii = omega_ph * np.kron(np.eye(2), num) - g_p**2 * omega_ph * np.eye(2 * P)
    lhs_iii = conj(np.kron(SIGMA_Z, eye_ph))
    rhs_iii = np.kron(SIGMA_Z, eye_ph)

    keep = P // 2
    idx = np.concatenate((np.arange(keep), P + np.arange(keep)))

    def dev(a, b):
        return float(np.linalg.norm((a - b)[np.ix_(idx, idx)], 2))

    return {
        "sigma_plus": dev(lhs_i, rhs_i),
        "phonon_hamiltonian": dev(lhs_ii, rhs_ii),
        "sigma_z": dev(lhs_iii, rhs_iii),
    }


def verify_polaron_transform(g_p: float, n_ph_max: int, omega_ph: float = 1.0) -> float:
    """Largest identity deviation on the lower Fock block.

    Warns with TruncationWarning when enlarging the cutoff does not reduce a
    deviation that is still above round-off, i.e. the cutoff dominates.
    """
    if n_ph_max < 2:
        raise ValueError("n_ph_max must be >= 2")
    worst = max(identity_deviations(g_p, n_ph_max, omega_ph).values())
    if worst > 1e-10:
        larger = max(identity_deviations(g_p, n_ph_max + 10, omega_ph).values())
        if larger >= worst:
            warnings.warn(
                f"polaron identity deviation {worst:.2e} does not shrink with the Fock cutoff",
                TruncationWarning,
                stacklevel=2,
            )
    return worst
