"""Brute-force Schrodinger evolution of the full qubit + cavity + phonon
Hamiltonian, without any polaron transformation.

Excitation number ``sigma+ sigma- + sum_k b_k^dag b_k`` is conserved and the
Holstein term is diagonal in ``sigma_z``, so the dynamics splits into

* the one-excitation sector ``{|e, vac>, |g, 1_k>} x phonon Fock``, and
* the zero-excitation sector ``|g, vac> x phonon Fock``.

Both are integrated in the frame rotating at the qubit frequency, which
removes ``omega0`` exactly (it commutes with the Hamiltonian) and leaves the
mode energies as ``-delta_k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..dynamics import InitialAmplitudes
from ..errors import ConvergenceError, ParameterError
from ..model import ModelParams
from .bath import BathDiscretization, OracleConfig, discretize_bath, required_fock_cutoff

LEAKAGE_TOL = 1e-8


def phonon_hamiltonian(omega_ph: float, g_p: float, n_ph_max: int, sz: int) -> np.ndarray:
    """``W n + sz * g_p W (nu + nu^dag)`` on Fock levels ``0..n_ph_max``."""
    n = np.arange(n_ph_max + 1)
    off = g_p * omega_ph * np.sqrt(n[1:])
    return np.diag(omega_ph * n.astype(float)) + sz * (np.diag(off, 1) + np.diag(off, -1))


@dataclass
class ExactEvolution:
    times: np.ndarray
    rho: np.ndarray  # (n_times, 2, 2)
    norm_drift: float
    top_fock_population: float
    dt: float
    steps: int

    def __iter__(self):
        return iter(zip(self.times.tolist(), list(self.rho)))

    def __len__(self):
        return len(self.times)

    @property
    def coherence(self) -> np.ndarray:
        return 2.0 * np.abs(self.rho[:, 0, 1])


class _Propagator:
    def __init__(self, p: ModelParams, bath: BathDiscretization, n_ph_max: int):
        self.g = bath.couplings
        self.neg_delta = -bath.mode_detunings[:, None]
        self.h_up = phonon_hamiltonian(p.omega_ph, p.g_p, n_ph_max, +1)
        self.h_dn = phonon_hamiltonian(p.omega_ph, p.g_p, n_ph_max, -1)

    def norm_bound(self) -> float:
        ph = max(np.max(np.abs(np.linalg.eigvalsh(h))) for h in (self.h_up, self.h_dn))
        return float(np.max(np.abs(self.neg_delta)) + ph + math.sqrt(np.sum(self.g**2)))

    def derivative(self, Y: np.ndarray, chi: np.ndarray):
        out = np.empty_like(Y)
        out[0] = Y[0] @ self.h_up + self.g @ Y[1:]
        out[1:] = self.neg_delta * Y[1:] + Y[1:] @ self.h_dn + self.g[:, None] * Y[0][None, :]
        return -1j * out, -1j * (chi @ self.h_dn)

    def rk4(self, Y, chi, dt):
        k1 = self.derivative(Y, chi)
        k2 = self.derivative(Y + 0.5 * dt * k1[0], chi + 0.5 * dt * k1[1])
        k3 = self.derivative(Y + 0.5 * dt * k2[0], chi + 0.5 * dt * k2[1])
        k4 = self.derivative(Y + dt * k3[0], chi + dt * k3[1])
        Y = Y + (dt / 6.0) * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        chi = chi + (dt / 6.0) * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        return Y, chi


def exact_evolution(
    p: ModelParams,
    cfg: OracleConfig,
    init: InitialAmplitudes,
    t_grid,
    strict: bool = True,
) -> ExactEvolution:
    """Reduced qubit state on ``t_grid`` from fixed-step RK4 integration.

    The initial state is ``(a|e> + b|g>) x |vac>_cavity x |0>_phonon``; index 0
    of the returned matrices is the excited level.  With ``strict`` a norm
    drift or top-Fock population above the configured tolerances raises
    ConvergenceError; otherwise they are only recorded.
    """
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0 or t[0] < 0 or np.any(np.diff(t) < 0):
        raise ValueError("t_grid must be a non-empty ascending sequence of t >= 0")
    need = required_fock_cutoff(p.g_p)
    if cfg.n_ph_max < need:
        raise ParameterError("n_ph_max", f"n_ph_max={cfg.n_ph_max} below required {need} for g_p={p.g_p}")
    bath = discretize_bath(p, cfg)
    prop = _Propagator(p, bath, cfg.n_ph_max)
    dt_max = cfg.dt if cfg.dt is not None else cfg.dt_norm_product / prop.norm_bound()

    P = cfg.n_ph_max + 1
    Y = np.zeros((cfg.M + 1, P), dtype=complex)
    Y[0, 0] = 1.0
    chi = np.zeros(P, dtype=complex)
    chi[0] = 1.0

    a2 = abs(init.a) ** 2
    ab = init.a * np.conj(init.b)
    rho = np.empty((t.size, 2, 2), dtype=complex)
    drift = 0.0
    leak = 0.0
    now = 0.0
    steps = 0
    for i, target in enumerate(t):
        span = target - now
        n = math.ceil(span / dt_max - 1e-12) if span > 0 else 0
        for _ in range(n):
            Y, chi = prop.rk4(Y, chi, span / n)
        steps += n
        now = target
        pe = float(np.vdot(Y[0], Y[0]).real)
        pg = float(np.vdot(Y[1:], Y[1:]).real)
        nchi = float(np.vdot(chi, chi).real)
        drift = max(drift, abs(pe + pg - 1.0), abs(nchi - 1.0))
        leak = max(leak, float(np.sum(np.abs(Y[:, -1]) ** 2)), float(abs(chi[-1]) ** 2))
        coh = ab * np.vdot(chi, Y[0])
        rho[i] = [[a2 * pe, coh], [np.conj(coh), a2 * pg + (1.0 - a2) * nchi]]
    if strict:
        if drift > cfg.integrator_tol:
            raise ConvergenceError(f"state norm drifted by {drift:.3e} (> {cfg.integrator_tol})")
        if leak > LEAKAGE_TOL:
            raise ConvergenceError(f"phonon Fock cutoff leakage {leak:.3e} (> {LEAKAGE_TOL})")
    return ExactEvolution(t, rho, drift, leak, dt_max, steps)
