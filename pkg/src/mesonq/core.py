"""Shared numerics: system parameters, quasispins, eigensolver, basis changes.

All times are measured in units of the mass splitting (Delta m := 1) and the
decay widths are rescaled by the same factor.  The strangeness basis
{K0, K0bar} is the orthonormal reference frame; the lifetime (mass) basis
{K_S, K_L} is non-orthogonal once the CP asymmetry delta is nonzero, with
<K_S|K_L> = delta.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "PAULI_X", "PAULI_Y", "PAULI_Z", "ID2", "PAULI",
    "MesonParams", "kaon_defaults", "bmeson_defaults", "stable_defaults",
    "Quasispin", "KS_DIRECTION", "KL_DIRECTION", "K0_DIRECTION", "K0BAR_DIRECTION",
    "StateVector", "SpectralDecomp", "hermitian_eigen",
    "CpBasisData", "cp_basis_data",
    "k0_state", "k0bar_state", "k1_state", "k2_state", "ks_state", "kl_state",
    "mass_to_strangeness_matrix", "CP_TO_STRANGENESS", "basis_convert",
]

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
ID2 = np.eye(2, dtype=complex)
PAULI = (PAULI_X, PAULI_Y, PAULI_Z)

HERMITICITY_TOL = 1e-10
_TIE_TOL = 1e-12

# Kaon constants.  The short width follows from tau_S = 5.4/11.4 in
# mass-splitting units; the width ratio from the measured lifetimes
# tau_S = 0.89e-10 s and tau_L = 5.17e-8 s; delta is the world-average
# leptonic charge asymmetry.
KAON_GAMMA_S = 11.4 / 5.4
KAON_LIFETIME_RATIO = 0.89e-10 / 5.17e-8
KAON_DELTA = 3.322e-3


@dataclass(frozen=True)
class MesonParams:
    """Decay widths and CP asymmetry of a two-state meson, Delta-m rescaled.

    Convention: the S state is the shorter lived one, gamma_s >= gamma_l.
    """

    gamma_s: float
    gamma_l: float
    delta: float = 0.0
    label: str = "custom"

    def __post_init__(self):
        if not (math.isfinite(self.gamma_s) and math.isfinite(self.gamma_l)):
            raise ValueError("decay widths must be finite")
        if self.gamma_s < 0.0 or self.gamma_l < 0.0:
            raise ValueError("decay widths must be nonnegative")
        if self.gamma_s < self.gamma_l:
            raise ValueError("convention requires gamma_s >= gamma_l")
        if not abs(self.delta) < 1.0:
            raise ValueError("unphysical delta")

    @property
    def gamma_mean(self) -> float:
        """Damping rate of the mass-basis coherence, (gamma_s + gamma_l)/2."""
        return 0.5 * (self.gamma_s + self.gamma_l)

    @property
    def delta_gamma(self) -> float:
        """Half width difference (gamma_l - gamma_s)/2; nonpositive."""
        return 0.5 * (self.gamma_l - self.gamma_s)

    @property
    def tau_s(self) -> float:
        """Short lifetime in Delta-m units; inf for a stable system."""
        return math.inf if self.gamma_s == 0.0 else 1.0 / self.gamma_s


def kaon_defaults() -> MesonParams:
    """Neutral-kaon preset in mass-splitting units."""
    gs = KAON_GAMMA_S
    return MesonParams(gamma_s=gs, gamma_l=gs * KAON_LIFETIME_RATIO,
                       delta=KAON_DELTA, label="kaon")


def bmeson_defaults() -> MesonParams:
    """B-meson preset: equal widths 1/0.776, no CP asymmetry."""
    g = 1.0 / 0.776
    return MesonParams(gamma_s=g, gamma_l=g, delta=0.0, label="bmeson")


def stable_defaults() -> MesonParams:
    """Oscillating but non-decaying system (both widths zero)."""
    return MesonParams(gamma_s=0.0, gamma_l=0.0, delta=0.0, label="stable")


@dataclass(frozen=True)
class Quasispin:
    """Direction (alpha, phi) on the mass-eigenstate Bloch sphere.

    The associated state is cos(alpha/2)|K_S> + sin(alpha/2) e^{i phi}|K_L>.
    """

    alpha: float
    phi: float = 0.0

    def __post_init__(self):
        if not -1e-12 <= self.alpha <= math.pi + 1e-12:
            raise ValueError("alpha must lie in [0, pi]")
        object.__setattr__(self, "alpha", min(max(self.alpha, 0.0), math.pi))
        phi = math.fmod(self.phi, 2.0 * math.pi)
        if phi < 0.0:
            phi += 2.0 * math.pi
        if self.alpha == 0.0:
            phi = 0.0  # phase of the absent K_L component is irrelevant
        object.__setattr__(self, "phi", phi)

    def state_mass(self) -> np.ndarray:
        """Unit vector of mass-basis amplitudes."""
        return np.array([math.cos(0.5 * self.alpha),
                         math.sin(0.5 * self.alpha) * cmath.exp(1j * self.phi)])

    @classmethod
    def from_mass_state(cls, v: np.ndarray) -> "Quasispin":
        """Angles of a two-component state, global phase stripped."""
        v = np.asarray(v, dtype=complex)
        if v.shape != (2,):
            raise ValueError("expected a two-component state")
        norm = np.linalg.norm(v)
        if norm < 1e-14:
            raise ValueError("zero vector has no direction")
        a0, a1 = v / norm
        alpha = 2.0 * math.atan2(abs(a1), abs(a0))
        phi = 0.0 if abs(a1) < 1e-14 or abs(a0) < 1e-14 else cmath.phase(a1 / a0)
        return cls(alpha=alpha, phi=phi)


KS_DIRECTION = Quasispin(0.0, 0.0)
KL_DIRECTION = Quasispin(math.pi, 0.0)
K0_DIRECTION = Quasispin(0.5 * math.pi, 0.0)
K0BAR_DIRECTION = Quasispin(0.5 * math.pi, math.pi)


@dataclass(frozen=True)
class StateVector:
    """State amplitudes with a basis tag ('mass', 'strangeness' or 'cp')."""

    components: np.ndarray
    basis: str

    def __post_init__(self):
        comps = np.asarray(self.components, dtype=complex)
        if comps.shape not in ((2,), (4,), (16,)):
            raise ValueError("state dimension must be 2, 4 or 16")
        object.__setattr__(self, "components", comps)
        if self.basis not in ("mass", "strangeness", "cp"):
            raise ValueError(f"unknown basis tag: {self.basis!r}")

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.components))


def _canonical_phase(v: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the first non-tiny component is real positive."""
    for x in v:
        if abs(x) > 1e-12:
            return v * (x.conjugate() / abs(x))
    return v


def _lex_key(v: np.ndarray):
    return tuple(np.round(v.real, 12))


@dataclass(frozen=True)
class SpectralDecomp:
    """Eigenvalues (descending) and orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.eigenvectors * self.eigenvalues) @ self.eigenvectors.conj().T


def hermitian_eigen(m: np.ndarray, tol: float = HERMITICITY_TOL) -> SpectralDecomp:
    """Eigendecomposition of a small Hermitian matrix, deterministically ordered.

    Eigenvalues are sorted descending; inside a degenerate group the
    eigenvectors are ordered lexicographically by the real parts of their
    (phase-canonicalized) components.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in (2, 4, 16):
        raise ValueError("expected a square matrix of dimension 2, 4 or 16")
    scale = max(1.0, float(np.abs(m).max()))
    if np.abs(m - m.conj().T).max() > tol * scale:
        raise ValueError("not hermitian")
    vals, vecs = np.linalg.eigh(0.5 * (m + m.conj().T))
    order = np.argsort(-vals, kind="stable")
    vals = vals[order]
    vecs = vecs[:, order]
    vecs = np.column_stack([_canonical_phase(vecs[:, i]) for i in range(len(vals))])

    # stable ordering inside numerically degenerate groups
    i = 0
    while i < len(vals):
        j = i + 1
        while j < len(vals) and abs(vals[j] - vals[i]) <= _TIE_TOL * scale:
            j += 1
        if j - i > 1:
            cols = sorted(range(i, j), key=lambda k: _lex_key(vecs[:, k]))
            vecs[:, i:j] = vecs[:, cols]
        i = j
    return SpectralDecomp(eigenvalues=vals, eigenvectors=vecs)


@dataclass(frozen=True)
class CpBasisData:
    """Mixing weights p = 1+eps, q = 1-eps of the mass eigenstates.

    eps is taken real, the exact inverse of delta = 2 eps/(1+eps^2), so that
    <K_S|K_L> = delta holds to machine precision.
    """

    p: complex
    q: complex
    norm_n: float
    epsilon: complex
    delta: float


def cp_basis_data(delta: float) -> CpBasisData:
    if not abs(delta) < 1.0:
        raise ValueError("unphysical delta")
    # stable form of (1 - sqrt(1 - delta^2))/delta
    eps = delta / (1.0 + math.sqrt(1.0 - delta * delta))
    p = 1.0 + eps
    q = 1.0 - eps
    return CpBasisData(p=complex(p), q=complex(q),
                       norm_n=math.sqrt(abs(p) ** 2 + abs(q) ** 2),
                       epsilon=complex(eps), delta=delta)


def k0_state() -> np.ndarray:
    return np.array([1.0, 0.0], dtype=complex)


def k0bar_state() -> np.ndarray:
    return np.array([0.0, 1.0], dtype=complex)


def k1_state() -> np.ndarray:
    """CP-plus eigenstate (K0 - K0bar)/sqrt(2); equals K_S at delta = 0."""
    return np.array([1.0, -1.0], dtype=complex) / math.sqrt(2.0)


def k2_state() -> np.ndarray:
    return np.array([1.0, 1.0], dtype=complex) / math.sqrt(2.0)


def ks_state(cp: CpBasisData) -> np.ndarray:
    """Short-lived eigenstate (p K0 - q K0bar)/N in strangeness coordinates."""
    return np.array([cp.p, -cp.q], dtype=complex) / cp.norm_n


def kl_state(cp: CpBasisData) -> np.ndarray:
    return np.array([cp.p, cp.q], dtype=complex) / cp.norm_n


def mass_to_strangeness_matrix(cp: CpBasisData) -> np.ndarray:
    """Columns are K_S and K_L in strangeness coordinates (non-unitary for delta != 0)."""
    return np.column_stack([ks_state(cp), kl_state(cp)])


CP_TO_STRANGENESS = np.column_stack([k1_state(), k2_state()])


def _transform_2dim(source: str, target: str, cp: CpBasisData) -> np.ndarray:
    to_str = {
        "strangeness": ID2,
        "mass": mass_to_strangeness_matrix(cp),
        "cp": CP_TO_STRANGENESS,
    }
    return np.linalg.inv(to_str[target]) @ to_str[source]


def basis_convert(v: StateVector, target: str,
                  cp: CpBasisData | None = None) -> StateVector:
    """Re-express a state in another basis tag.

    For delta != 0 the mass basis is skewed; its components are expansion
    coefficients and the conversion routes through the orthonormal
    strangeness frame.  Four- and sixteen-dimensional states transform on
    their surviving slots only (decay slots are basis independent).
    """
    if target not in ("mass", "strangeness", "cp"):
        raise ValueError(f"unknown basis tag: {target!r}")
    if cp is None:
        cp = cp_basis_data(0.0)
    if target == v.basis:
        return StateVector(v.components.copy(), v.basis)
    t2 = _transform_2dim(v.basis, target, cp)
    dim = v.components.shape[0]
    if dim == 2:
        full = t2
    else:
        t4 = np.eye(4, dtype=complex)
        t4[:2, :2] = t2
        full = t4 if dim == 4 else np.kron(t4, t4)
    return StateVector(full @ v.components, target)
