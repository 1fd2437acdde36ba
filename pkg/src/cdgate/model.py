"""Hamiltonians for the driven CNOT gate and its N-qubit generalization.

Builds the two-qubit gate Hamiltonian with its closed-form spectrum, the
effective two-level (Landau-Zener) reduction, the counterdiabatic control
field in both closed form and generic spectral form, the inverse-engineered
exact gate Hamiltonian, and linear drive schedules. Basis order is the
computational basis |00>, |01>, |10>, |11> with the control qubit leftmost;
only the {|10>, |11>} sector couples.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import (
    DimensionTooLargeError,
    GapCollisionError,
    NonPositiveTauError,
)
from .numerics import TOL, as_operator, hermitian_eig, kron

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
IDENTITY_2 = np.eye(2, dtype=np.complex128)


def cnot_unitary() -> np.ndarray:
    """The target CNOT matrix: swaps |10> and |11>, fixes the rest."""
    u = np.eye(4, dtype=np.complex128)
    u[2:, 2:] = SIGMA_X
    return u


@dataclass(frozen=True)
class CnotParams:
    """Physical constants: J1 sets the energy scale, g the sector coupling,
    j2_amp the drive amplitude in J2(t) = j2_amp * t / tau."""

    j1: float = 1.0
    g: float = 0.5
    j2_amp: float = 10.0

    def __post_init__(self):
        if self.g <= 0:
            raise ValueError(f"g must be positive, got {self.g}")
        if self.j1 <= 0:
            raise ValueError(f"j1 must be positive, got {self.j1}")
        if self.j2_amp == 0:
            raise ValueError("j2_amp must be nonzero")
        if abs(self.j2_amp) < 4.0 * max(self.j1, self.g):
            warnings.warn(
                f"|j2_amp|={abs(self.j2_amp)} is not much larger than "
                f"j1={self.j1}, g={self.g}; the gate endpoints will not be "
                "close to computational basis states",
                stacklevel=2,
            )


@dataclass(frozen=True)
class DriveSchedule:
    """A drive waveform with its exact derivative on [t_start, t_end]."""

    value: Callable[[float], float]
    derivative: Callable[[float], float]
    t_start: float
    t_end: float
    kind: str = "custom"


def linear_ramp(params: CnotParams, tau: float,
                full_range_ramp: bool = False) -> DriveSchedule:
    """J2(t) = j2_amp * t / tau on [-tau/2, tau/2].

    With ``full_range_ramp`` the slope is doubled so the endpoints reach
    +-j2_amp instead of +-j2_amp/2.
    """
    if tau <= 0:
        raise NonPositiveTauError(f"tau must be positive, got {tau}")
    slope = params.j2_amp * (2.0 if full_range_ramp else 1.0) / tau
    return DriveSchedule(
        value=lambda t: slope * t,
        derivative=lambda t: slope,
        t_start=-tau / 2.0,
        t_end=tau / 2.0,
        kind="linear",
    )


def linear_phase_ramp(tau: float, n_offset: int = 0) -> DriveSchedule:
    """phi(t) = 2 pi n + pi t / tau on [0, tau], so phi(0) = 2 pi n and
    phi(tau) = (2n + 1) pi."""
    if tau <= 0:
        raise NonPositiveTauError(f"tau must be positive, got {tau}")
    rate = np.pi / tau
    offset = 2.0 * np.pi * n_offset
    return DriveSchedule(
        value=lambda t: offset + rate * t,
        derivative=lambda t: rate,
        t_start=0.0,
        t_end=tau,
        kind="linear-phase",
    )


def build_h_cnot(params: CnotParams, j2: float) -> np.ndarray:
    """Gate Hamiltonian at drive value j2: diag(K+, K-) on the idle sector
    and [[-K-, -g], [-g, -K+]] on the {|10>, |11>} sector."""
    kp = params.j1 + j2
    km = params.j1 - j2
    h = np.zeros((4, 4), dtype=np.complex128)
    h[0, 0] = kp
    h[1, 1] = km
    h[2, 2] = -km
    h[3, 3] = -kp
    h[2, 3] = -params.g
    h[3, 2] = -params.g
    return h


@dataclass(frozen=True)
class SpectrumSnapshot:
    """Closed-form eigensystem of the gate Hamiltonian at one drive value.

    Energies follow the sector labeling (E1 <= E2 span the coupled sector,
    E3 and E4 belong to |01> and |00>), not a global sort.
    """

    energies: tuple[float, float, float, float]
    states: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]
    alphas: tuple[float, float]
    ks: tuple[float, float]
    gap: float


def analytic_spectrum(params: CnotParams, j2: float) -> SpectrumSnapshot:
    """Closed-form instantaneous eigenenergies and eigenstates.

    E1 = -alpha_+ - K_-, E2 = alpha_+ - K_+, E3 = K_-, E4 = K_+ with
    alpha_pm = j2 +- sqrt(g^2 + j2^2); the sector eigenvectors have
    components (-alpha_mp, g) / sqrt(g^2 + alpha_mp^2) on (|10>, |11>).
    """
    g = params.g
    root = np.sqrt(g * g + j2 * j2)
    a_plus = j2 + root
    a_minus = j2 - root
    kp = params.j1 + j2
    km = params.j1 - j2

    e1 = -a_plus - km
    e2 = a_plus - kp
    e3 = km
    e4 = kp

    n_minus = np.sqrt(g * g + a_minus * a_minus)
    v1 = np.array([0.0, 0.0, -a_minus / n_minus, g / n_minus],
                  dtype=np.complex128)
    n_plus = np.sqrt(g * g + a_plus * a_plus)
    v2 = np.array([0.0, 0.0, -a_plus / n_plus, g / n_plus],
                  dtype=np.complex128)
    v3 = np.array([0.0, 1.0, 0.0, 0.0], dtype=np.complex128)
    v4 = np.array([1.0, 0.0, 0.0, 0.0], dtype=np.complex128)

    return SpectrumSnapshot(
        energies=(float(e1), float(e2), float(e3), float(e4)),
        states=(v1, v2, v3, v4),
        alphas=(float(a_plus), float(a_minus)),
        ks=(float(kp), float(km)),
        gap=float(e2 - e1),
    )


def effective_lz(params: CnotParams, j2: float) -> np.ndarray:
    """Two-level reduction on the {|10>, |11>} sector:
    j2 * sigma_z - g * sigma_x - j1 * identity."""
    return (j2 * SIGMA_Z - params.g * SIGMA_X
            - params.j1 * IDENTITY_2).astype(np.complex128)


def build_h_cd_analytic(params: CnotParams, j2: float,
                        j2dot: float) -> np.ndarray:
    """Closed-form counterdiabatic field:
    -(g * j2dot / (4 (g^2 + j2^2))) (sigma_z1 - 1)(sigma_y2)."""
    pref = -params.g * j2dot / (4.0 * (params.g ** 2 + j2 * j2))
    return pref * kron(SIGMA_Z - IDENTITY_2, SIGMA_Y)


def build_h_cd_spectral(h, hdot, gap_tol: float | None = None,
                        elem_tol: float | None = None) -> np.ndarray:
    """Generic counterdiabatic field from the spectral formula,

        i * sum_{m != n} |E_m> <E_m|Hdot|E_n> / (E_n - E_m) <E_n|.

    Near-degenerate pairs (|E_n - E_m| below ``gap_tol`` scaled by the
    spectral range) contribute nothing when the coupling element is below
    ``elem_tol``; a large element at a tiny gap is a genuinely singular
    construction and raises GapCollisionError.
    """
    h = as_operator(h)
    hdot = as_operator(hdot)
    dec = hermitian_eig(h)
    w = dec.eigenvalues
    v = dec.eigenvectors
    scale = max(1.0, float(np.abs(w).max()))
    gap_cut = (TOL.gap_collision if gap_tol is None else gap_tol) * scale
    elem_cut = TOL.cd_element if elem_tol is None else elem_tol

    coupling = v.conj().T @ hdot @ v
    dim = w.shape[0]
    core = np.zeros((dim, dim), dtype=np.complex128)
    for m in range(dim):
        for n in range(dim):
            if m == n:
                continue
            gap = w[n] - w[m]
            elem = coupling[m, n]
            if abs(gap) < gap_cut:
                if abs(elem) >= elem_cut:
                    raise GapCollisionError(
                        f"eigenvalue gap {abs(gap):.3e} below tolerance with "
                        f"coupling {abs(elem):.3e}; counterdiabatic field is "
                        "singular at this point"
                    )
                continue
            core[m, n] = 1j * elem / gap
    out = v @ core @ v.conj().T
    return (out + out.conj().T) * 0.5


def build_inverse_engineered(phidot: float) -> np.ndarray:
    """Inverse-engineered gate Hamiltonian
    -(phidot / 4)(sigma_z1 - 1)(sigma_x2 - 1); generates an exact CNOT when
    the phase advances by an odd multiple of pi."""
    return (-phidot / 4.0) * kron(SIGMA_Z - IDENTITY_2,
                                  SIGMA_X - IDENTITY_2)


def _check_qubit_count(n: int) -> None:
    if not 2 <= n <= 6:
        raise DimensionTooLargeError(
            f"supported qubit counts are 2..6, got {n}"
        )


def _op_on(op: np.ndarray, site: int, n: int) -> np.ndarray:
    ops = [IDENTITY_2] * n
    ops[site] = op
    out = ops[0]
    for o in ops[1:]:
        out = np.kron(out, o)
    return out


def control_projector(n: int) -> np.ndarray:
    """Projector onto |1...1> of the first n-1 qubits, identity on the last:
    prod_{i<n} (1 - sigma_z_i)/2."""
    _check_qubit_count(n)
    out = np.eye(1, dtype=np.complex128)
    for _ in range(n - 1):
        out = np.kron(out, (IDENTITY_2 - SIGMA_Z) / 2.0)
    return np.kron(out, IDENTITY_2)


def build_h_n(n: int, j: float, j_n: float, g: float) -> np.ndarray:
    """N-qubit gate Hamiltonian
    J sum_{i<n} sigma_z_i + J_N sigma_z_N - g P sigma_x_N, where P projects
    the first n-1 qubits onto |1...1>. For n=2 this equals the two-qubit
    gate Hamiltonian entrywise."""
    _check_qubit_count(n)
    dim = 2 ** n
    h = np.zeros((dim, dim), dtype=np.complex128)
    for i in range(n - 1):
        h += j * _op_on(SIGMA_Z, i, n)
    h += j_n * _op_on(SIGMA_Z, n - 1, n)
    h -= g * (control_projector(n) @ _op_on(SIGMA_X, n - 1, n))
    return h


def build_h_cd_n(n: int, g: float, j_n: float, j_n_dot: float) -> np.ndarray:
    """N-qubit counterdiabatic field
    (g Jdot_N / (2 (g^2 + J_N^2))) P sigma_y_N."""
    _check_qubit_count(n)
    pref = g * j_n_dot / (2.0 * (g * g + j_n * j_n))
    return pref * (control_projector(n) @ _op_on(SIGMA_Y, n - 1, n))


def sector_ground_state(params: CnotParams, j2: float) -> np.ndarray:
    """|E1(j2)>, the instantaneous ground state (coupled sector)."""
    return analytic_spectrum(params, j2).states[0]


def sector_excited_state(params: CnotParams, j2: float) -> np.ndarray:
    """|E2(j2)>, the upper sector eigenstate."""
    return analytic_spectrum(params, j2).states[1]


def nqubit_sector_states(n: int, g: float, j_n: float) -> tuple[np.ndarray, np.ndarray]:
    """Ground and excited eigenstates of the coupled {|1..10>, |1..11>}
    sector of the N-qubit Hamiltonian (same two-level closed form)."""
    _check_qubit_count(n)
    dim = 2 ** n
    root = np.sqrt(g * g + j_n * j_n)
    ground = np.zeros(dim, dtype=np.complex128)
    excited = np.zeros(dim, dtype=np.complex128)
    for vec, a in ((ground, j_n - root), (excited, j_n + root)):
        norm = np.sqrt(g * g + a * a)
        vec[dim - 2] = -a / norm
        vec[dim - 1] = g / norm
    return ground, excited


@dataclass(frozen=True)
class RampedGateHamiltonian:
    """H(t) = h0 + J(t) hz + c(t) hcd with J(t) = slope * t linear in time.

    This is the structured form the compiled evolution kernels understand;
    calling it returns the assembled matrix at time t. ``hcd`` uses the
    projector normalization, c(t) = g * slope / (2 (g^2 + J^2)).
    """

    h0: np.ndarray
    hz: np.ndarray
    hcd: np.ndarray
    slope: float
    g: float
    use_cd: bool
    t_start: float
    t_end: float
    label: str = ""

    @property
    def dim(self) -> int:
        return self.h0.shape[0]

    def drive_value(self, t: float) -> float:
        return self.slope * t

    def cd_coefficient(self, t: float) -> float:
        j2 = self.slope * t
        return self.g * self.slope / (2.0 * (self.g * self.g + j2 * j2))

    def __call__(self, t: float) -> np.ndarray:
        h = self.h0 + self.drive_value(t) * self.hz
        if self.use_cd:
            h = h + self.cd_coefficient(t) * self.hcd
        return h


def cnot_system(params: CnotParams, tau: float, use_cd: bool = False,
                full_range_ramp: bool = False) -> RampedGateHamiltonian:
    """The linearly driven two-qubit gate as a kernel-ready system."""
    schedule = linear_ramp(params, tau, full_range_ramp)
    proj2 = kron((IDENTITY_2 - SIGMA_Z) / 2.0, SIGMA_Y)
    return RampedGateHamiltonian(
        h0=build_h_cnot(params, 0.0),
        hz=kron(IDENTITY_2, SIGMA_Z),
        hcd=proj2,
        slope=schedule.derivative(0.0),
        g=params.g,
        use_cd=use_cd,
        t_start=schedule.t_start,
        t_end=schedule.t_end,
        label="cnot",
    )


def lz_system(params: CnotParams, tau: float, use_cd: bool = False,
              full_range_ramp: bool = False) -> RampedGateHamiltonian:
    """The two-level sector reduction as a kernel-ready system."""
    schedule = linear_ramp(params, tau, full_range_ramp)
    return RampedGateHamiltonian(
        h0=(-params.g * SIGMA_X - params.j1 * IDENTITY_2),
        hz=SIGMA_Z.copy(),
        hcd=SIGMA_Y.copy(),
        slope=schedule.derivative(0.0),
        g=params.g,
        use_cd=use_cd,
        t_start=schedule.t_start,
        t_end=schedule.t_end,
        label="lz-sector",
    )


def nqubit_system(n: int, params: CnotParams, tau: float,
                  use_cd: bool = False,
                  full_range_ramp: bool = False) -> RampedGateHamiltonian:
    """The N-qubit generalization as a kernel-ready system; the first n-1
    qubits carry j1, the driven last qubit ramps with amplitude j2_amp."""
    _check_qubit_count(n)
    schedule = linear_ramp(params, tau, full_range_ramp)
    return RampedGateHamiltonian(
        h0=build_h_n(n, params.j1, 0.0, params.g),
        hz=_op_on(SIGMA_Z, n - 1, n),
        hcd=control_projector(n) @ _op_on(SIGMA_Y, n - 1, n),
        slope=schedule.derivative(0.0),
        g=params.g,
        use_cd=use_cd,
        t_start=schedule.t_start,
        t_end=schedule.t_end,
        label=f"nqubit-{n}",
    )
