"""Single relativistic particle as a canonical system in Clifford space.

The state is a pair of spinor doublets (c^A, d*_A) whose mutual bullet
products carry the space-time data:

    x^{AB} = bullet(c^A, conj(c^B)),   p_{AB} = bullet(d*_A, conj(d*_B)).

Dynamics integrates the first-order flow obtained by independent variation
of c and d*,

    dc^A/dtau   = (dH/dp_{AE}) conj(d*_E),
    dd*_A/dtau  = -(dH/dx^{AE}) conj(c^E),

with H = e(tau) (p.p - m^2).  The einbein keeps the mass shell enforced; the
proper-time parametrization ebar = 1/(2 m mu) is reached by integrating
dtaubar/dtau = 2 m mu(tau) e(tau) alongside the flow, where mu is half the
real trace of the mixed Gram bullet(c^A, d*_B).

Matrix-valued gradients with respect to the spinor blocks come from the
probed dictionaries in :mod:`cliffdyn.spinors`, so no sigma-contraction
factor is ever written by hand.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .clifford import ClVector, GeneratorSpace, bullet, resolve_pair
from .errors import InputError, PreconditionError
from .spinors import (
    DP_DOWN,
    DX_UP,
    ETA,
    covec_to_spinor_down,
    eps_flip_pair,
    minkowski_dot,
    spinor_down_to_covec,
    spinor_to_vec,
    vec_to_spinor,
)

__all__ = [
    "EinbeinFn",
    "constant_einbein",
    "linear_einbein",
    "Observable",
    "coordinate_observable",
    "momentum_observable",
    "polynomial_observable",
    "ParticleState",
    "build_state",
    "lagrangian_c2",
    "polyakov_lagrangian",
    "conjugate_momentum_norm",
    "hamiltonian_c5",
    "canonical_rhs",
    "integrate",
    "Trajectory",
    "noether_charges",
    "mu_of_tau",
    "clifford_bracket",
    "poisson_bracket",
]


@dataclass(frozen=True)
class EinbeinFn:
    """Positive worldline density e(tau) with the turning point tau0.

    mu(tau) = integral_{tau0}^{tau} m^2 e(t) dt vanishes at tau0; proper time
    is undefined there.
    """

    fn: Callable[[float], float]
    tau0: float = 0.0

    def __call__(self, tau: float) -> float:
        value = float(self.fn(tau))
        if value <= 0.0:
            raise PreconditionError(f"einbein must stay positive, got e({tau}) = {value}")
        return value


def constant_einbein(e0: float, tau0: float = 0.0) -> EinbeinFn:
    return EinbeinFn(lambda tau: e0, tau0)


def linear_einbein(a: float, b: float, tau0: float = 0.0) -> EinbeinFn:
    return EinbeinFn(lambda tau: a + b * tau, tau0)


@dataclass(frozen=True)
class Observable:
    """Real function of (x, p) with analytic four-gradients.

    ``grad_x(x, p)[mu] = dN/dx^mu`` (derivative in the contravariant
    coordinates) and ``grad_p(x, p)[mu] = dN/dp_mu`` (derivative in the
    covariant momenta), matching the canonical pairing of the Poisson
    bracket.
    """

    value: Callable[[np.ndarray, np.ndarray], float]
    grad_x: Callable[[np.ndarray, np.ndarray], np.ndarray]
    grad_p: Callable[[np.ndarray, np.ndarray], np.ndarray]
    name: str = ""

    def validate_gradients(self, x: np.ndarray, p: np.ndarray, rtol: float = 1e-6) -> float:
        """Central finite differences against the analytic gradients."""
        worst = 0.0
        for which in ("x", "p"):
            base = np.array(x if which == "x" else p, dtype=float)
            analytic = (self.grad_x if which == "x" else self.grad_p)(x, p)
            scale = max(1.0, float(np.abs(base).max()))
            h = 1e-6 * scale
            for mu in range(4):
                plus = base.copy(); plus[mu] += h
                minus = base.copy(); minus[mu] -= h
                if which == "x":
                    fd = (self.value(plus, p) - self.value(minus, p)) / (2 * h)
                else:
                    fd = (self.value(x, plus) - self.value(x, minus)) / (2 * h)
                err = abs(fd - analytic[mu]) / max(1.0, abs(analytic[mu]))
                worst = max(worst, err)
        if worst > rtol:
            raise InputError(f"observable {self.name!r}: gradient mismatch {worst:.2e}")
        return worst


def coordinate_observable(mu: int) -> Observable:
    gx = np.zeros(4); gx[mu] = 1.0
    return Observable(
        value=lambda x, p, _mu=mu: float(x[_mu]),
        grad_x=lambda x, p, _gx=gx: _gx.copy(),
        grad_p=lambda x, p: np.zeros(4),
        name=f"x^{mu}")


def momentum_observable(mu: int) -> Observable:
    gp = np.zeros(4); gp[mu] = 1.0
    return Observable(
        value=lambda x, p, _mu=mu: float(p[_mu]),
        grad_x=lambda x, p: np.zeros(4),
        grad_p=lambda x, p, _gp=gp: _gp.copy(),
        name=f"p_{mu}")


def polynomial_observable(terms: Sequence[tuple[float, Sequence[int], Sequence[int]]],
                          name: str = "poly") -> Observable:
    """Polynomial sum of c * prod_mu x^mu^a_mu * prod_mu p_mu^b_mu terms."""
    terms = [(float(c), np.asarray(a, dtype=int), np.asarray(b, dtype=int))
             for c, a, b in terms]

    def value(x, p):
        total = 0.0
        for cf, ax, bp in terms:
            total += cf * np.prod(x ** ax) * np.prod(p ** bp)
        return float(total)

    def _grad(x, p, wrt_x: bool):
        g = np.zeros(4)
        for cf, ax, bp in terms:
            exps = ax if wrt_x else bp
            base = x if wrt_x else p
            other = np.prod((p if wrt_x else x) ** (bp if wrt_x else ax))
            for mu in range(4):
                if exps[mu] == 0:
                    continue
                rest = 1.0
                for nu in range(4):
                    e = exps[nu] - (1 if nu == mu else 0)
                    rest *= base[nu] ** e
                g[mu] += cf * exps[mu] * rest * other
        return g

    return Observable(
        value=value,
        grad_x=lambda x, p: _grad(x, p, True),
        grad_p=lambda x, p: _grad(x, p, False),
        name=name)


class ParticleState:
    """Canonical pair (c^A, d*_A) plus mass and parameter value."""

    __slots__ = ("c", "dstar", "mass", "tau", "space")

    def __init__(self, c: Sequence[ClVector], dstar: Sequence[ClVector],
                 mass: float, tau: float = 0.0):
        if len(c) != 2 or len(dstar) != 2:
            raise InputError("need two spinor components for c and dstar")
        if mass <= 0:
            raise InputError("mass must be positive")
        self.c = tuple(c)
        self.dstar = tuple(dstar)
        self.mass = float(mass)
        self.tau = float(tau)
        self.space = c[0].space

    # -- packed coefficient view used by the integrator ------------------
    def packed(self) -> np.ndarray:
        return np.stack([v.coeffs for v in (*self.c, *self.dstar)])

    @classmethod
    def from_packed(cls, Y: np.ndarray, space: GeneratorSpace, mass: float,
                    tau: float) -> "ParticleState":
        vecs = [ClVector(space, Y[i]) for i in range(4)]
        return cls(vecs[:2], vecs[2:], mass, tau)

    # -- derived space-time data ------------------------------------------
    def x_spinor(self) -> np.ndarray:
        return _gram_xc(self.packed()[:2], self.space.signs)

    def p_spinor(self) -> np.ndarray:
        return _gram_xc(self.packed()[2:], self.space.signs)

    def cd_gram(self) -> np.ndarray:
        Y = self.packed()
        return _gram_cd(Y[:2], Y[2:], self.space.signs)

    def x_vec(self) -> np.ndarray:
        return spinor_to_vec(self.x_spinor()).real

    def p_vec(self) -> np.ndarray:
        """Covariant momentum components p_mu."""
        return spinor_down_to_covec(self.p_spinor()).real

    def mu_charge(self) -> float:
        return 0.5 * np.trace(self.cd_gram()).real

    def mass_shell(self) -> float:
        """p.p - m^2, zero on shell."""
        p = self.p_vec()
        return float(minkowski_dot(p, p).real) - self.mass ** 2


def _gram_xc(C: np.ndarray, signs: np.ndarray) -> np.ndarray:
    """bullet(v_A, conj(v_B)) over a (2, G) coefficient stack."""
    return (C * signs) @ C.conj().T


def _gram_cd(C: np.ndarray, D: np.ndarray, signs: np.ndarray) -> np.ndarray:
    """bullet(c_A, d_B): bilinear, no conjugation."""
    return (C * signs) @ D.T


def build_state(x: np.ndarray, p: np.ndarray, M, mass: float,
                tau: float = 0.0) -> ParticleState:
    """State with prescribed four-vectors x, p and mixed Gram M.

    ``M`` may be a scalar mu (meaning mu times the identity) or a full 2x2
    complex matrix.
    """
    x_up = vec_to_spinor(np.asarray(x, dtype=float))
    p_down = covec_to_spinor_down(np.asarray(p, dtype=float))
    M = np.asarray(M, dtype=complex)
    if M.ndim == 0:
        M = complex(M) * np.eye(2)
    c, dstar, _ = resolve_pair(x_up, p_down, M)
    return ParticleState(c, dstar, mass, tau)


# -- actions and Hamiltonian ------------------------------------------------

def _velocity_contraction(cdot: Sequence[ClVector]) -> float:
    """(1/2) (dc^A . dc*^B)(dc_A . dc*_B): the quartic invariant of the velocity.

    Equals W.W for the four-vector W behind the matrix bullet(dc, conj(dc)).
    """
    W = np.array([[bullet(cdot[a], cdot[b].conj()) for b in range(2)] for a in range(2)])
    w = spinor_to_vec(W)
    return float(minkowski_dot(w, w).real)


def lagrangian_c2(cdot: Sequence[ClVector], mass: float) -> float:
    """Reparametrization-invariant integrand 4 sqrt(m) Q^{1/4}.

    Q is the quartic velocity invariant; Q < 0 signals non-timelike motion
    and raises.
    """
    Q = _velocity_contraction(cdot)
    if Q < 0:
        raise PreconditionError(f"quartic radicand is negative ({Q:.3e}): non-timelike velocity")
    return 4.0 * math.sqrt(mass) * Q ** 0.25


def polyakov_lagrangian(cdot: Sequence[ClVector], e: float, mass: float) -> float:
    """Einbein form whose e-elimination reproduces :func:`lagrangian_c2`."""
    Q = _velocity_contraction(cdot)
    if Q < 0:
        raise PreconditionError(f"cubic radicand is negative ({Q:.3e})")
    return 3.0 * e ** (-1.0 / 3.0) * Q ** (1.0 / 3.0) + mass ** 2 * e


def conjugate_momentum_norm(cdot: Sequence[ClVector], e: float) -> float:
    """p.p implied by the einbein-form momenta: e^{-4/3} Q^{1/3}."""
    Q = _velocity_contraction(cdot)
    return e ** (-4.0 / 3.0) * Q ** (1.0 / 3.0)


def hamiltonian_c5(state: ParticleState, e: float) -> float:
    """H = e (p.p - m^2); vanishes on shell for any einbein value."""
    return e * state.mass_shell()


def _rhs_packed(Y: np.ndarray, signs: np.ndarray, e_val: float, mass: float
                ) -> tuple[np.ndarray, float]:
    """Flow of the packed (4, G) coefficients plus dtaubar/dtau."""
    C, D = Y[:2], Y[2:]
    P = _gram_cd(D, D.conj(), signs)          # p_{AB} = bullet(d*_A, conj(d*_B))
    p_cov = spinor_down_to_covec(P)
    grad_p = 2.0 * e_val * (ETA @ p_cov)      # dH/dp_mu for H = e (p.p - m^2)
    Gp = np.einsum("m,mab->ab", grad_p, DP_DOWN)
    dC = Gp @ D.conj()
    dD = np.zeros_like(D)                     # dH/dx = 0 for the free constraint Hamiltonian
    mu = 0.5 * np.trace(_gram_cd(C, D, signs)).real
    dtaubar = 2.0 * mass * mu * e_val
    return np.vstack([dC, dD]), dtaubar


def canonical_rhs(state: ParticleState, e: float
                  ) -> tuple[list[ClVector], list[ClVector]]:
    """(dc/dtau, dd*/dtau) for the constraint Hamiltonian H = e (p.p - m^2)."""
    dY, _ = _rhs_packed(state.packed(), state.space.signs, e, state.mass)
    space = state.space
    return ([ClVector(space, dY[0]), ClVector(space, dY[1])],
            [ClVector(space, dY[2]), ClVector(space, dY[3])])


@dataclass
class Trajectory:
    """Sampled states plus derived columns, one row per RK4 step."""

    space: GeneratorSpace
    mass: float
    tau: np.ndarray
    taubar: np.ndarray
    Y: np.ndarray            # (n_samples, 4, G) complex coefficients
    x: np.ndarray            # (n_samples, 4) real
    p: np.ndarray            # (n_samples, 4) real covariant
    J: np.ndarray            # (n_samples, 2, 2) complex Noether charge
    j: np.ndarray            # (n_samples,) real U(1) charge
    mu: np.ndarray           # (n_samples,) real

    def state(self, k: int) -> ParticleState:
        return ParticleState.from_packed(self.Y[k], self.space, self.mass, float(self.tau[k]))

    def final_state(self) -> ParticleState:
        return self.state(len(self.tau) - 1)

    def constraint_drift(self) -> float:
        shell = np.array([self.state(k).mass_shell() for k in range(len(self.tau))])
        return float(np.abs(shell - shell[0]).max())

    def charge_drift(self) -> float:
        dJ = np.abs(self.J - self.J[0]).max()
        dj = np.abs(self.j - self.j[0]).max()
        return float(max(dJ, dj))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(
            ["tau", "taubar", "x0", "x1", "x2", "x3", "p0", "p1", "p2", "p3",
             "J11_re", "J11_im", "J12_re", "J12_im", "J22_re", "J22_im", "j", "mu"])
        for k in range(len(self.tau)):
            writer.writerow([
                f"{self.tau[k]:.17g}", f"{self.taubar[k]:.17g}",
                *(f"{v:.17g}" for v in self.x[k]),
                *(f"{v:.17g}" for v in self.p[k]),
                f"{self.J[k, 0, 0].real:.17g}", f"{self.J[k, 0, 0].imag:.17g}",
                f"{self.J[k, 0, 1].real:.17g}", f"{self.J[k, 0, 1].imag:.17g}",
                f"{self.J[k, 1, 1].real:.17g}", f"{self.J[k, 1, 1].imag:.17g}",
                f"{self.j[k]:.17g}", f"{self.mu[k]:.17g}"])
        return buf.getvalue()


def integrate(state0: ParticleState, e: EinbeinFn, tau_end: float,
              steps: int) -> Trajectory:
    """Classic fixed-step RK4 on the coefficient flow, tracking taubar.

    taubar accumulates dtaubar/dtau = 2 m mu(tau) e(tau) through the same RK4
    stages, so the reparametrized columns are consistent to integrator order.
    """
    if steps < 1:
        raise InputError("steps must be >= 1")
    signs = state0.space.signs
    mass = state0.mass
    tau0 = state0.tau
    h = (tau_end - tau0) / steps
    n = steps + 1
    Y = state0.packed().astype(complex)
    taubar = 0.0
    out_Y = np.empty((n, 4, Y.shape[1]), dtype=complex)
    out_tau = np.empty(n)
    out_taubar = np.empty(n)
    out_Y[0] = Y
    out_tau[0] = tau0
    out_taubar[0] = 0.0
    for k in range(steps):
        tau = tau0 + k * h
        k1, b1 = _rhs_packed(Y, signs, e(tau), mass)
        k2, b2 = _rhs_packed(Y + 0.5 * h * k1, signs, e(tau + 0.5 * h), mass)
        k3, b3 = _rhs_packed(Y + 0.5 * h * k2, signs, e(tau + 0.5 * h), mass)
        k4, b4 = _rhs_packed(Y + h * k3, signs, e(tau + h), mass)
        Y = Y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        taubar = taubar + (h / 6.0) * (b1 + 2 * b2 + 2 * b3 + b4)
        if not np.all(np.isfinite(Y)):
            raise ArithmeticError(f"integration produced non-finite values at step {k}")
        out_Y[k + 1] = Y
        out_tau[k + 1] = tau0 + (k + 1) * h
        out_taubar[k + 1] = taubar
    # derived columns
    x = np.empty((n, 4))
    p = np.empty((n, 4))
    J = np.empty((n, 2, 2), dtype=complex)
    jq = np.empty(n)
    mu = np.empty(n)
    for k in range(n):
        st = ParticleState.from_packed(out_Y[k], state0.space, mass, float(out_tau[k]))
        x[k] = st.x_vec()
        p[k] = st.p_vec()
        J[k], jq[k] = noether_charges(st)
        mu[k] = st.mu_charge()
    return Trajectory(state0.space, mass, out_tau, out_taubar, out_Y, x, p, J, jq, mu)


def noether_charges(state: ParticleState) -> tuple[np.ndarray, float]:
    """Global symmetry charges: J_AB = d*_A . c_B + d*_B . c_A and the U(1) charge.

    Both vanish identically on Noether-constrained states (mixed Gram equal
    to a real multiple of the identity).
    """
    c_low = eps_flip_pair(list(state.c))
    J = np.empty((2, 2), dtype=complex)
    for a in range(2):
        for b in range(2):
            J[a, b] = bullet(state.dstar[a], c_low[b]) + bullet(state.dstar[b], c_low[a])
    trace_cd = np.trace(state.cd_gram())
    j = float((1j * (trace_cd - np.conj(trace_cd))).real)
    return J, j


def _adaptive_simpson(f, a: float, b: float, rel_tol: float) -> float:
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, b, fa, fm, fb, whole, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        if depth > 48:
            return left + right
        err = left + right - whole
        if abs(err) <= 15.0 * rel_tol * max(1.0, abs(left + right)):
            return left + right + err / 15.0
        return (recurse(a, m, fa, flm, fm, left, depth + 1)
                + recurse(m, b, fm, frm, fb, right, depth + 1))

    if a == b:
        return 0.0
    return recurse(a, b, fa, fm, fb, whole, 0)


def mu_of_tau(e: EinbeinFn, mass: float, tau: float, rel_tol: float = 1e-12) -> float:
    """mu(tau) = integral_{tau0}^{tau} m^2 e(t) dt by adaptive Simpson."""
    if tau < e.tau0:
        raise PreconditionError(f"tau = {tau} lies before the turning point {e.tau0}")
    if tau == e.tau0:
        return 0.0
    return _adaptive_simpson(lambda t: mass ** 2 * e(t), e.tau0, tau, rel_tol)


def clifford_bracket(N: Observable, M: Observable, state: ParticleState) -> float:
    """Generalized bracket of two observables evaluated on the actual spinor Gram.

    Expands both derivative chains through the spinor dictionaries and pairs
    them with the mixed Gram bullet(c^A, d*_B); no constraint is assumed.
    When the state is Noether-constrained the value collapses to mu times
    the canonical Poisson bracket.
    """
    x = state.x_vec()
    p = state.p_vec()
    CD = state.cd_gram()
    GxN = np.einsum("m,mab->ab", N.grad_x(x, p).astype(complex), DX_UP)
    GpN = np.einsum("m,mab->ab", N.grad_p(x, p).astype(complex), DP_DOWN)
    GxM = np.einsum("m,mab->ab", M.grad_x(x, p).astype(complex), DX_UP)
    GpM = np.einsum("m,mab->ab", M.grad_p(x, p).astype(complex), DP_DOWN)
    t1 = np.sum((GxN.T @ GpM) * CD.conj())
    t2 = np.sum((GxM.T @ GpN) * CD.conj())
    return float((t1 + np.conj(t1) - t2 - np.conj(t2)).real)


def poisson_bracket(N: Observable, M: Observable, x: np.ndarray, p: np.ndarray) -> float:
    """Canonical bracket sum_mu (dN/dx^mu dM/dp_mu - dM/dx^mu dN/dp_mu)."""
    return float(N.grad_x(x, p) @ M.grad_p(x, p) - M.grad_x(x, p) @ N.grad_p(x, p))
