"""N-particle assembly, U(N) gauge structure, and matrix-mechanics evolution.

Classically, N independent particles on disjoint Clifford blocks give
diagonal N x N matrices ``X^mu`` and ``P_mu`` whose eigenvalues are the
single-particle phase-space curves; a global U(N) rotation of the kets and
bras produces similarity transformations of both.  The quantum sector keeps
the same equations of motion,

    dX/dtaubar = [X, H] / (i hbar),    H = (P.P - m^2 1) / (2 m),

on matrix pairs with [X, P] ~ i hbar 1.  Exact canonical pairs do not exist
in finite dimension (trace of a commutator vanishes), so the demonstrations
use truncated ladder-operator pairs whose commutator defect sits in the last
basis row and column; quantum checks stay away from that corner.

A gauge connection Gamma (stored Hermitian, the i sits in the covariant
derivative) moves between pictures: Gamma = 0 is the Heisenberg picture,
Gamma = -H/hbar freezes X and P and pushes all evolution into the state
vector.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .clifford import ClVector
from .errors import InputError, PreconditionError
from .particle import ParticleState
from .spinors import DP_DOWN, DX_UP, ETA

__all__ = [
    "NSystem",
    "assemble",
    "gauge_transform",
    "MatrixTrajectory",
    "evolve_matrix_classical",
    "evolve_heisenberg",
    "covariant_evolve",
    "schrodinger_gauge",
    "expectation",
    "evolve_state",
    "truncated_oscillator",
    "born_sample",
    "nonrelativistic_rate",
    "load_system_config",
    "eigenvalue_trajectories_csv",
]


class NSystem:
    """Kets C^A and bras D_A for N particles plus derived matrix caches.

    ``gamma``, when set, is the gauge connection tau -> N x N Hermitian
    matrix (the i sits in the covariant derivative); ``phi`` is the diagonal
    real weight matrix, which the equations of motion never see.
    """

    def __init__(self, kets: Sequence[Sequence[ClVector]],
                 bras: Sequence[Sequence[ClVector]], mass: float,
                 hbar: float = 0.0, phi: np.ndarray | None = None,
                 gamma=None):
        if len(kets) != 2 or len(bras) != 2:
            raise InputError("kets and bras carry two spinor components each")
        self.kets = [list(kets[0]), list(kets[1])]
        self.bras = [list(bras[0]), list(bras[1])]
        self.n = len(self.kets[0])
        if any(len(row) != self.n for row in (*self.kets, *self.bras)):
            raise InputError("all ket/bra rows must have N entries")
        self.mass = float(mass)
        self.hbar = float(hbar)
        self.space = self.kets[0][0].space
        if phi is None:
            phi = np.ones(self.n)
        self.phi = np.asarray(phi, dtype=float)
        self.gamma = gamma
        self._xs = None
        self._ps = None

    # -- derived matrices -------------------------------------------------
    def _stack(self, rows) -> np.ndarray:
        return np.stack([[v.coeffs for v in row] for row in rows])  # (2, N, G)

    def x_spin(self) -> np.ndarray:
        """X^{AB}_{ij} = bullet(ket_i^A, conj(ket_j^B)); shape (2, 2, N, N)."""
        C = self._stack(self.kets)
        s = self.space.signs
        return np.einsum("aig,g,bjg->abij", C, s, C.conj())

    def p_spin(self) -> np.ndarray:
        """P_{AB}_{ij} = bullet(conj(d*_B)_i, d*_A_j).

        The ket index rides on the conjugated momenta, which is what makes a
        bra rotation D -> D U^dagger act on P as a similarity U P U^dagger.
        """
        D = self._stack(self.bras)
        s = self.space.signs
        return np.einsum("big,g,ajg->abij", D.conj(), s, D)

    def x_matrices(self) -> np.ndarray:
        """Space-time position matrices X^mu, shape (4, N, N)."""
        if self._xs is None:
            self._xs = np.einsum("mab,abij->mij", DX_UP, self.x_spin())
        return self._xs

    def p_matrices(self) -> np.ndarray:
        """Covariant momentum matrices P_mu, shape (4, N, N)."""
        if self._ps is None:
            self._ps = np.einsum("mab,abij->mij", DP_DOWN, self.p_spin())
        return self._ps

    def constraint_matrix(self) -> np.ndarray:
        """(C^A . D_B)_{ij}, shape (2, 2, N, N); mu delta^A_B 1 when constrained."""
        C = self._stack(self.kets)
        D = self._stack(self.bras)
        s = self.space.signs
        return np.einsum("aig,g,bjg->abij", C, s, D)


def assemble(particles: Sequence[ParticleState], hbar: float = 0.0,
             phi: np.ndarray | None = None) -> NSystem:
    """Stack single-particle states sharing one space into an NSystem.

    The states must occupy pairwise disjoint generator blocks; their X and P
    matrices are then diagonal and all mutual commutators vanish exactly.
    """
    if not particles:
        raise InputError("need at least one particle")
    space = particles[0].space
    masses = {st.mass for st in particles}
    if len(masses) != 1:
        raise InputError("assembled particles must share one mass")
    supports = []
    for st in particles:
        if st.space is not space:
            raise PreconditionError("all particles must live on one generator space")
        sup = set()
        for v in (*st.c, *st.dstar):
            sup.update(v.support().tolist())
        supports.append(sup)
    for i in range(len(particles)):
        for k in range(i + 1, len(particles)):
            if supports[i] & supports[k]:
                raise PreconditionError(f"particles {i} and {k} overlap in generator support")
    kets = [[st.c[a] for st in particles] for a in range(2)]
    bras = [[st.dstar[a] for st in particles] for a in range(2)]
    return NSystem(kets, bras, particles[0].mass, hbar=hbar, phi=phi)


def gauge_transform(sys: NSystem, U: np.ndarray) -> NSystem:
    """Rotate kets by U and bras by U^dagger; X and P transform by similarity."""
    U = np.asarray(U, dtype=complex)
    n = sys.n
    if U.shape != (n, n):
        raise InputError(f"U must be {n}x{n}")
    if np.abs(U @ U.conj().T - np.eye(n)).max() > 1e-12:
        raise InputError("U is not unitary within 1e-12")
    kets = [[_combine(sys.kets[a], U[i, :]) for i in range(n)] for a in range(2)]
    bras = [[_combine(sys.bras[a], U.conj()[i, :]) for i in range(n)] for a in range(2)]
    phi = None if sys.phi is None else sys.phi
    return NSystem(kets, bras, sys.mass, hbar=sys.hbar, phi=phi)


def _combine(vectors: Sequence[ClVector], weights: np.ndarray) -> ClVector:
    space = vectors[0].space
    acc = np.zeros(space.size, dtype=complex)
    for w, v in zip(weights, vectors):
        acc += w * v.coeffs
    return ClVector(space, acc)


@dataclass
class MatrixTrajectory:
    taubar: np.ndarray
    X: np.ndarray            # (n_samples, 4 or 1, N, N)
    P: np.ndarray

    def hermiticity_drift(self) -> float:
        dx = np.abs(self.X - np.swapaxes(self.X, -1, -2).conj()).max()
        dp = np.abs(self.P - np.swapaxes(self.P, -1, -2).conj()).max()
        return float(max(dx, dp))


def _rk4_matrix(X0, P0, rhs, tau_end, steps, t0=0.0):
    h = (tau_end - t0) / steps
    X = np.array(X0, dtype=complex)
    P = np.array(P0, dtype=complex)
    n = steps + 1
    Xs = np.empty((n, *X.shape), dtype=complex)
    Ps = np.empty((n, *P.shape), dtype=complex)
    ts = np.empty(n)
    Xs[0], Ps[0], ts[0] = X, P, t0
    for k in range(steps):
        t = t0 + k * h
        k1x, k1p = rhs(t, X, P)
        k2x, k2p = rhs(t + h / 2, X + h / 2 * k1x, P + h / 2 * k1p)
        k3x, k3p = rhs(t + h / 2, X + h / 2 * k2x, P + h / 2 * k2p)
        k4x, k4p = rhs(t + h, X + h * k3x, P + h * k3p)
        X = X + (h / 6) * (k1x + 2 * k2x + 2 * k3x + k4x)
        P = P + (h / 6) * (k1p + 2 * k2p + 2 * k3p + k4p)
        Xs[k + 1], Ps[k + 1], ts[k + 1] = X, P, t0 + (k + 1) * h
    return MatrixTrajectory(ts, Xs, Ps)


def evolve_matrix_classical(sys: NSystem, tau_end: float, steps: int) -> MatrixTrajectory:
    """Proper-time flow dX^mu = P^mu/m, dP = 0 of Tr H with H = (P.P - m^2 1)/(2m)."""
    if sys.hbar != 0.0:
        raise PreconditionError("classical evolution requires hbar = 0")
    m = sys.mass

    def rhs(t, X, P):
        dX = np.einsum("mn,nij->mij", ETA, P) / m     # P^mu / m
        return dX, np.zeros_like(P)

    return _rk4_matrix(sys.x_matrices(), sys.p_matrices(), rhs, tau_end, steps)


def _free_hamiltonian(P: np.ndarray, mass: float) -> np.ndarray:
    """(P.P - m^2 1)/(2m) for a single matrix P (one momentum component)."""
    n = P.shape[0]
    return (P @ P - mass ** 2 * np.eye(n)) / (2.0 * mass)


def evolve_heisenberg(X0: np.ndarray, P0: np.ndarray, hbar: float, mass: float,
                      tau_end: float, steps: int) -> MatrixTrajectory:
    """Heisenberg flow dX = [X,H]/(i hbar), dP = [P,H]/(i hbar) on one matrix pair."""
    if hbar <= 0:
        raise PreconditionError("evolve_heisenberg requires hbar > 0")

    def rhs(t, X, P):
        H = _free_hamiltonian(P, mass)
        return (X @ H - H @ X) / (1j * hbar), (P @ H - H @ P) / (1j * hbar)

    return _rk4_matrix(X0, P0, rhs, tau_end, steps)


def covariant_evolve(X0: np.ndarray, P0: np.ndarray, hbar: float, mass: float,
                     gamma: Callable[[float, np.ndarray, np.ndarray], np.ndarray],
                     tau_end: float, steps: int) -> MatrixTrajectory:
    """Gauge-covariant flow: dX = i[Gamma, X] + [X, H]/(i hbar).

    ``gamma(taubar, X, P)`` returns the Hermitian connection.  Gamma = 0
    reproduces :func:`evolve_heisenberg` exactly; Gamma = -H/hbar cancels the
    commutators and freezes X and P (the Schrodinger picture).
    """
    if hbar <= 0:
        raise PreconditionError("covariant_evolve requires hbar > 0")

    def rhs(t, X, P):
        H = _free_hamiltonian(P, mass)
        G = gamma(t, X, P)
        dX = 1j * (G @ X - X @ G) + (X @ H - H @ X) / (1j * hbar)
        dP = 1j * (G @ P - P @ G) + (P @ H - H @ P) / (1j * hbar)
        return dX, dP

    return _rk4_matrix(X0, P0, rhs, tau_end, steps)


def schrodinger_gauge(hbar: float, mass: float):
    """The connection Gamma = -H/hbar that makes X and P stationary."""
    return lambda t, X, P: -_free_hamiltonian(P, mass) / hbar


def expectation(s: np.ndarray, target, which: str = "X"):
    """Unitarily covariant expectation value through a state vector.

    which = "X" or "P": <s|M|s> per component of an NSystem (or a bare
    matrix / stack of matrices).  which = "C": the Clifford coordinate
    <s| C^A, a pair of ClVectors.
    """
    s = np.asarray(s, dtype=complex)
    if abs(s @ s.conj() - 1.0) > 1e-12:
        raise InputError("state vector must have unit norm")
    if which == "C":
        if not isinstance(target, NSystem):
            raise InputError("expectation of C needs an NSystem")
        return [_combine(target.kets[a], s.conj()) for a in range(2)]
    if isinstance(target, NSystem):
        mats = target.x_matrices() if which == "X" else target.p_matrices()
    else:
        mats = np.asarray(target, dtype=complex)
    if mats.ndim == 2:
        return complex(s.conj() @ mats @ s)
    return np.array([complex(s.conj() @ M @ s) for M in mats])


def evolve_state(s: np.ndarray, gamma: Callable[[float], np.ndarray],
                 tau_end: float, steps: int, t0: float = 0.0) -> np.ndarray:
    """Integrate (d/dtau - i Gamma(tau)) |s> = 0 with RK4; norm is preserved."""
    s = np.asarray(s, dtype=complex).copy()
    h = (tau_end - t0) / steps
    for k in range(steps):
        t = t0 + k * h
        f = lambda tt, v: 1j * (gamma(tt) @ v)
        k1 = f(t, s)
        k2 = f(t + h / 2, s + h / 2 * k1)
        k3 = f(t + h / 2, s + h / 2 * k2)
        k4 = f(t + h, s + h * k3)
        s = s + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
    return s


def truncated_oscillator(nlev: int, mass: float = 1.0, omega: float = 1.0,
                         hbar: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Truncated ladder pair: [X, P] = i hbar (1 - nlev |top><top|).

    The commutator defect lives entirely in the last diagonal entry; every
    interior matrix element satisfies the canonical relation exactly.
    """
    n = np.arange(1, nlev)
    a = np.diag(np.sqrt(n), k=1)
    X = np.sqrt(hbar / (2 * mass * omega)) * (a + a.T)
    P = 1j * np.sqrt(mass * omega * hbar / 2) * (a.T - a)
    return X, P


def born_sample(rng: np.random.Generator, s: np.ndarray, eigvecs: np.ndarray) -> int:
    """Sample an eigenvector index with probability |<x_i|s>|^2."""
    amps = eigvecs.conj().T @ np.asarray(s, dtype=complex)
    probs = np.abs(amps) ** 2
    probs = probs / probs.sum()
    return int(rng.choice(len(probs), p=probs))


def nonrelativistic_rate(P0: np.ndarray, s: np.ndarray, mass: float) -> float:
    """dt/dtaubar = <s|P^0|s>/m; approaches 1 when |p| << m."""
    return float((np.asarray(s).conj() @ P0 @ np.asarray(s)).real / mass)


# -- external interfaces -------------------------------------------------------

def load_system_config(obj: dict | str):
    """Build an NSystem from a JSON config.

    Schema: {"N": int, "mass": float, "hbar": float,
             "particles": [{"x": [4], "p": [4], "mu": float}, ...],
             "gauge": "heisenberg" | "schrodinger"}
    """
    from .clifford import allocate_blocks, resolve_pair
    from .spinors import covec_to_spinor_down, vec_to_spinor

    if isinstance(obj, str):
        obj = json.loads(obj)
    try:
        n = int(obj["N"])
        mass = float(obj["mass"])
        hbar = float(obj.get("hbar", 0.0))
        particles = obj["particles"]
        gauge = obj.get("gauge", "heisenberg")
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad system config: {exc}") from exc
    if len(particles) != n:
        raise InputError(f"config says N={n} but lists {len(particles)} particles")
    if gauge not in ("heisenberg", "schrodinger"):
        raise InputError(f"unknown gauge {gauge!r}")
    blocks = []
    for i in range(n):
        blocks += [(f"c{i}", 4, 4), (f"d{i}", 4, 4), (f"h{i}", 4, 4)]
    space = allocate_blocks(blocks)
    states = []
    for i, spec in enumerate(particles):
        x_up = vec_to_spinor(np.asarray(spec["x"], dtype=float))
        p_down = covec_to_spinor_down(np.asarray(spec["p"], dtype=float))
        M = complex(spec.get("mu", 0.0)) * np.eye(2)
        c, dstar, _ = resolve_pair(x_up, p_down, M, space,
                                   labels=(f"c{i}", f"d{i}", f"h{i}"))
        states.append(ParticleState(c, dstar, mass))
    return assemble(states, hbar=hbar), gauge


def eigenvalue_trajectories_csv(traj: MatrixTrajectory) -> str:
    """CSV export of the eigenvalues of X^0 (or the single X) per sample."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    X = traj.X
    if X.ndim == 3:
        X = X[:, None, :, :]
    nser = X.shape[2]
    writer.writerow(["taubar"] + [f"x0_eig{i}" for i in range(nser)])
    for k in range(len(traj.taubar)):
        eig = np.sort(np.linalg.eigvalsh(X[k, 0]))
        writer.writerow([f"{traj.taubar[k]:.17g}"] + [f"{v:.17g}" for v in eig])
    return buf.getvalue()
