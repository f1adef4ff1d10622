"""Open-system time evolution of single and paired mesons.

States live on surviving + final sectors: basis order (K_S, K_L, f_L, f_S),
where f_L and f_S collect the decayed long- and short-lived populations.  The
closed-form map damps the surviving block, accumulates decays on the final
diagonal and drops the never-measurable final coherences; a fixed-step
Lindblad integrator provides an independent route to the same dynamics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import MesonParams, Quasispin

__all__ = [
    "DensityMatrix", "JointOutcome",
    "pure_density", "embed_surviving", "quasispin_projector4",
    "evolve_single_closed", "lindblad_integrate", "evolve_bipartite",
    "singlet_state", "singlet_vector", "joint_probabilities",
]

_HERM_TOL = 1e-12
_STEP_ERROR_LIMIT = 1e-6

# entries the dynamics can populate: full surviving block + final diagonal
_MASK4 = np.zeros((4, 4))
_MASK4[:2, :2] = 1.0
_MASK4[2, 2] = _MASK4[3, 3] = 1.0
_MASK16 = np.kron(_MASK4, _MASK4)


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian PSD state on 2, 4 or 16 dimensions with a basis tag."""

    entries: np.ndarray
    basis: str = "mass"

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        if m.shape not in ((2, 2), (4, 4), (16, 16)):
            raise ValueError("density matrix must be 2x2, 4x4 or 16x16")
        if np.abs(m - m.conj().T).max() > _HERM_TOL * max(1.0, np.abs(m).max()):
            raise ValueError("density matrix must be hermitian")
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.entries).min())

    def surviving_trace(self) -> float:
        """Probability that nothing has decayed yet."""
        m = self.entries
        if self.dim == 2:
            return self.trace
        if self.dim == 4:
            return float(np.trace(m[:2, :2]).real)
        r = m.reshape(4, 4, 4, 4)
        return float(sum(r[a, b, a, b].real
                         for a in range(2) for b in range(2)))


def pure_density(v: np.ndarray, basis: str = "mass") -> DensityMatrix:
    v = np.asarray(v, dtype=complex)
    return DensityMatrix(np.outer(v, v.conj()), basis=basis)


def embed_surviving(rho2: np.ndarray) -> np.ndarray:
    """Place a 2x2 surviving-only state into the 4-dim decay-aware space."""
    out = np.zeros((4, 4), dtype=complex)
    out[:2, :2] = np.asarray(rho2, dtype=complex)
    return out


def quasispin_projector4(q: Quasispin) -> np.ndarray:
    """|k><k| on the surviving slots, zero on the decayed slots."""
    k = q.state_mass()
    return embed_surviving(np.outer(k, k.conj()))


def _entries(rho) -> np.ndarray:
    return np.asarray(getattr(rho, "entries", rho), dtype=complex)


def _closed_map4(rho4: np.ndarray, t: float, params: MesonParams) -> np.ndarray:
    """One-particle propagation by t >= 0 on the 4-dim space.

    Surviving block: populations damp with e^{-Gamma_i t}, the coherence
    rotates with the mass splitting and damps with e^{-Gamma t}.  Decayed
    populations accumulate on the final diagonal; final coherences and
    surviving-final cross terms are unmeasurable and set to zero.
    """
    es = math.exp(-params.gamma_s * t)
    el = math.exp(-params.gamma_l * t)
    osc = np.exp((1j - params.gamma_mean) * t)
    out = np.zeros((4, 4), dtype=complex)
    out[0, 0] = es * rho4[0, 0]
    out[1, 1] = el * rho4[1, 1]
    out[0, 1] = osc * rho4[0, 1]
    out[1, 0] = np.conj(osc) * rho4[1, 0]
    out[2, 2] = rho4[2, 2] + (1.0 - el) * rho4[1, 1]
    out[3, 3] = rho4[3, 3] + (1.0 - es) * rho4[0, 0]
    return out


def evolve_single_closed(rho, t: float, params: MesonParams) -> DensityMatrix:
    """Closed-form single-particle evolution; accepts a 2- or 4-dim state."""
    if t < 0.0:
        raise ValueError("closed form is valid forward in time only")
    m = _entries(rho)
    if m.shape == (2, 2):
        m = embed_surviving(m)
    elif m.shape != (4, 4):
        raise ValueError("expected a 2x2 or 4x4 state")
    return DensityMatrix(_closed_map4(m, t, params))


def _closed_superop_tensor(t: float, params: MesonParams) -> np.ndarray:
    """K[i,j,k,l] with Phi(rho)[i,j] = sum_kl K[i,j,k,l] rho[k,l]."""
    es = math.exp(-params.gamma_s * t)
    el = math.exp(-params.gamma_l * t)
    osc = np.exp((1j - params.gamma_mean) * t)
    k = np.zeros((4, 4, 4, 4), dtype=complex)
    k[0, 0, 0, 0] = es
    k[1, 1, 1, 1] = el
    k[0, 1, 0, 1] = osc
    k[1, 0, 1, 0] = np.conj(osc)
    k[2, 2, 2, 2] = 1.0
    k[3, 3, 3, 3] = 1.0
    k[2, 2, 1, 1] = 1.0 - el
    k[3, 3, 0, 0] = 1.0 - es
    return k


def evolve_bipartite(rho, t: float, params: MesonParams) -> DensityMatrix:
    """Pair evolution: the single-particle map applied to each factor.

    Each meson decays into its own environment, so the map factorizes and
    product states stay products.  (The variant with one summed decay
    generator is available through lindblad_integrate(summed_generator=True)
    for comparison; it breaks this factorization.)
    """
    if t < 0.0:
        raise ValueError("closed form is valid forward in time only")
    m = _entries(rho)
    if m.shape != (16, 16):
        raise ValueError("expected a 16x16 pair state")
    k = _closed_superop_tensor(t, params)
    r = m.reshape(4, 4, 4, 4)
    out = np.einsum("acpr,bdqs,pqrs->abcd", k, k, r).reshape(16, 16)
    return DensityMatrix(out)


def _generators(params: MesonParams, dim: int, summed: bool):
    """Hamiltonian and decay generators on the 4- or 16-dim space."""
    h4 = np.zeros((4, 4), dtype=complex)
    h4[1, 1] = 1.0  # mass splitting: m_L - m_S = 1 in rescaled units
    a4 = np.zeros((4, 4), dtype=complex)
    a4[3, 0] = math.sqrt(params.gamma_s)  # K_S decays into the f_S slot
    a4[2, 1] = math.sqrt(params.gamma_l)  # K_L decays into the f_L slot
    if dim == 4:
        return h4, [a4]
    i4 = np.eye(4, dtype=complex)
    h = np.kron(h4, i4) + np.kron(i4, h4)
    a_left, a_right = np.kron(a4, i4), np.kron(i4, a4)
    return h, [a_left + a_right] if summed else [a_left, a_right]


def lindblad_integrate(rho, t: float, params: MesonParams, dt: float = 1e-3,
                       summed_generator: bool = False) -> DensityMatrix:
    """Fixed-step RK4 integration of drho/dt = -i[H, rho] - D[rho].

    Independent oracle for the closed-form maps.  Handles 4-dim single states
    and 16-dim pairs (two independent decay generators by default; pass
    summed_generator=True for the single summed generator, which introduces
    decay cross terms and breaks product factorization).  Unmeasurable final
    coherences are zeroed on output, matching the closed form.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if t < 0.0:
        raise ValueError("integration runs forward in time only")
    m = _entries(rho)
    if m.shape not in ((4, 4), (16, 16)):
        raise ValueError("expected a 4x4 or 16x16 state")
    dim = m.shape[0]
    h, gens = _generators(params, dim, summed_generator)
    pairs = [(a, a.conj().T @ a) for a in gens]

    def rhs(r):
        out = -1j * (h @ r - r @ h)
        for a, ada in pairs:
            out = out + a @ r @ a.conj().T - 0.5 * (ada @ r + r @ ada)
        return out

    def rk4_step(r, h_step):
        k1 = rhs(r)
        k2 = rhs(r + 0.5 * h_step * k1)
        k3 = rhs(r + 0.5 * h_step * k2)
        k4 = rhs(r + h_step * k3)
        return r + (h_step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    trace0 = np.trace(m).real
    steps = max(1, math.ceil(t / dt))
    step = t / steps
    if step > 0.0:
        # the generator conserves the trace identically, so a coarse step
        # shows up in the entries, not the trace: estimate it by doubling
        one = rk4_step(m, step)
        two = rk4_step(rk4_step(m, 0.5 * step), 0.5 * step)
        if float(np.abs(one - two).max()) * steps > _STEP_ERROR_LIMIT:
            raise ValueError("integration error above 1e-6: reduce dt")
    r = m
    for _ in range(steps):
        r = rk4_step(r, step)
    if abs(np.trace(r).real - trace0) > _STEP_ERROR_LIMIT:
        raise ValueError("trace drift above 1e-6: reduce dt")
    mask = _MASK4 if dim == 4 else _MASK16
    r = 0.5 * (r + r.conj().T) * mask
    return DensityMatrix(r)


def singlet_vector() -> np.ndarray:
    """Antisymmetric pair state (|K0, K0bar> - |K0bar, K0>)/sqrt(2), 16-dim.

    With delta = 0 the same components describe it in the mass basis,
    (|K_S, K_L> - |K_L, K_S>)/sqrt(2): the antisymmetric combination keeps
    its form under any basis rotation (up to a global phase).
    """
    k0 = np.zeros(4, dtype=complex)
    k0bar = np.zeros(4, dtype=complex)
    k0[0] = k0[1] = 1.0 / math.sqrt(2.0)
    k0bar[0], k0bar[1] = -1.0 / math.sqrt(2.0), 1.0 / math.sqrt(2.0)
    return (np.kron(k0, k0bar) - np.kron(k0bar, k0)) / math.sqrt(2.0)


def singlet_state() -> DensityMatrix:
    """Maximally entangled antisymmetric pair, embedded with empty decay slots."""
    return pure_density(singlet_vector())


@dataclass(frozen=True)
class JointOutcome:
    """The four yes/no probabilities of a two-sided quasispin measurement."""

    p_yy: float
    p_yn: float
    p_ny: float
    p_nn: float

    @property
    def expectation(self) -> float:
        return self.p_yy + self.p_nn - self.p_yn - self.p_ny

    @property
    def total(self) -> float:
        return self.p_yy + self.p_yn + self.p_ny + self.p_nn


def joint_probabilities(rho, k_n: Quasispin, t_n: float, k_m: Quasispin,
                        t_m: float, params: MesonParams) -> JointOutcome:
    """Joint outcome probabilities: side B asked k_m at t_m, side A asked k_n at t_n.

    The pair evolves to t_m, side B is projected onto |k_m> or its complement
    (the complement includes everything decayed), side B is traced out, and
    the leftover single particle runs on to t_n.  Requires t_n >= t_m >= 0.
    """
    if t_m < 0.0 or t_n < t_m:
        raise ValueError("measurement ordering requires t_n >= t_m >= 0")
    m = _entries(rho)
    if m.shape != (16, 16):
        raise ValueError("expected a 16x16 pair state")
    r = evolve_bipartite(m, t_m, params).entries.reshape(4, 4, 4, 4)
    p_m = quasispin_projector4(k_m)
    p_n = quasispin_projector4(k_n)
    probs = {}
    for yes_m, x_b in ((True, p_m), (False, np.eye(4) - p_m)):
        sigma = np.einsum("bq,aqcb->ac", x_b, r)  # Tr_B[(1 x X) rho]
        sigma = _closed_map4(0.5 * (sigma + sigma.conj().T), t_n - t_m, params)
        p_yes = float(np.trace(p_n @ sigma).real)
        probs[(True, yes_m)] = p_yes
        probs[(False, yes_m)] = float(np.trace(sigma).real) - p_yes
    return JointOutcome(p_yy=probs[(True, True)], p_yn=probs[(True, False)],
                        p_ny=probs[(False, True)], p_nn=probs[(False, False)])
