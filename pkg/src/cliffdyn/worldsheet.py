"""Flat-worldsheet classical string built from a mode-coefficient Gram matrix.

A state is a truncated travelling-wave field

    c^A(tau, sigma) = k^A + l^A tau
                    + sum_n a_n^A exp(i n (tau+sigma)/2)
                    + sum_n b_n^A exp(i n (tau-sigma)/2),      n != 0,

whose coefficients are grade-1 Clifford vectors realized (by
:func:`cliffdyn.clifford.resolve_hermitian`) from a prescribed Gram matrix.
All inner products between different coefficient labels vanish except the
self products and the cross pairs (a_n, a_{-n}) and (b_n, b_{-n}); this
sparsity is what collapses bullet(c, conj(c)) to a closed form with spatial
period 2 pi.

The induced momentum comes from the l-coefficient alone,

    p2 p^{AB} = eta^{ab} d_a c^A . d_b conj(c)^B = l^A . conj(l)^B,

with p2 = (L.L)^{1/3} (real cube root); states are built on shell,
p2 = m^2 > 0.  Polymomenta, energy-momentum tensor, dilaton and total
charges all come from that one matrix plus worldsheet derivatives of c.

Worldsheet conventions: indices (0, 1) = (tau, sigma), metric diag(1, -1),
epsilon_{01} = +1; these are pinned by the pi^2 p total-momentum identity
of the non-vibrating string.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .clifford import ClVector, GeneratorSpace, allocate, resolve_hermitian
from .errors import InputError, PreconditionError, VerificationError
from .spinors import flip_both, minkowski_norm
from .tolerances import DEFAULT

__all__ = [
    "ModeSpec",
    "make_mode_spec",
    "StringState",
    "build_wave_state",
    "eval_c",
    "eval_dc",
    "eval_x",
    "eval_x_from_vectors",
    "wave_residual",
    "momentum_and_polymomenta",
    "dstar_upper",
    "residual_f51",
    "residual_f52",
    "energy_momentum",
    "dilaton",
    "dilaton_residual",
    "Curve",
    "constant_time_curve",
    "arc_curve",
    "total_momentum",
    "spinning_mode_spec",
    "spinning_string",
    "estimate_order",
    "mode_spec_to_json",
    "mode_spec_from_json",
]

ETA_WS = np.diag([1.0, -1.0])


class ModeSpec:
    """Mode set, mass, and the Hermitian Gram over the coefficient labels.

    Labels are "k", "l", "a<n>", "b<n>" for n in ``modes``; each label
    carries two spinor components, so the Gram has one 2x2 block per label
    pair.  Only the allowed blocks may be nonzero.
    """

    def __init__(self, mass: float, modes: Sequence[int], gram: np.ndarray,
                 on_shell: bool = True):
        modes = tuple(sorted(set(int(n) for n in modes), key=lambda n: (abs(n), -n)))
        if any(n == 0 for n in modes):
            raise InputError("mode numbers must be nonzero")
        self.modes = modes
        self.labels = tuple(["k", "l"] + [f"a{n}" for n in modes] + [f"b{n}" for n in modes])
        dim = 2 * len(self.labels)
        gram = np.asarray(gram, dtype=complex)
        if gram.shape != (dim, dim):
            raise InputError(f"gram must be {dim}x{dim} for labels {self.labels}")
        if np.abs(gram - gram.conj().T).max() > 1e-12:
            raise InputError("gram is not Hermitian")
        self.gram = 0.5 * (gram + gram.conj().T)
        self.mass = float(mass)
        self.on_shell = bool(on_shell)
        self._check_sparsity()
        if self.on_shell:
            p2 = self.p_squared()
            if p2 <= 0:
                raise InputError(f"induced p.p = {p2:.3e} must be positive")
            if abs(p2 - self.mass ** 2) > 1e-9 * self.mass ** 2:
                raise InputError(
                    f"l block is off shell: (L.L)^(1/3) = {p2:.12g} vs m^2 = {self.mass ** 2:.12g}")

    def index(self, label: str, A: int) -> int:
        return 2 * self.labels.index(label) + A

    def block(self, lab_i: str, lab_j: str) -> np.ndarray:
        i = 2 * self.labels.index(lab_i)
        j = 2 * self.labels.index(lab_j)
        return self.gram[i:i + 2, j:j + 2]

    def _allowed_pairs(self) -> set[tuple[str, str]]:
        allowed = {(lab, lab) for lab in self.labels}
        for n in self.modes:
            if -n in self.modes:
                allowed.add((f"a{n}", f"a{-n}"))
                allowed.add((f"b{n}", f"b{-n}"))
        return allowed

    def _check_sparsity(self):
        allowed = self._allowed_pairs()
        for li in self.labels:
            for lj in self.labels:
                if (li, lj) in allowed:
                    continue
                if np.abs(self.block(li, lj)).max() > 0.0:
                    raise InputError(f"gram block ({li}, {lj}) must vanish")

    def l_block(self) -> np.ndarray:
        return self.block("l", "l")

    def p_squared(self) -> float:
        """(L.L)^{1/3} with the real cube root."""
        return float(np.cbrt(np.real(minkowski_norm(self.l_block()))))


def make_mode_spec(mass: float | None = None, modes: Sequence[int] = (),
                   k_block=None, l_block=None,
                   a_self=None, a_cross=None, b_self=None, b_cross=None,
                   on_shell: bool = True) -> ModeSpec:
    """Assemble a ModeSpec from per-label 2x2 blocks.

    ``a_self[n]`` is the Hermitian block bullet(a_n, conj(a_n)); ``a_cross[n]``
    (for n > 0) the block bullet(a_n, conj(a_{-n})), mirrored Hermitianly.
    With ``l_block`` omitted, l.conj(l) = m^3 I puts the string at rest on
    shell; with ``mass`` omitted it is inferred from the l block.
    """
    modes = tuple(sorted(set(int(n) for n in modes), key=lambda n: (abs(n), -n)))
    labels = ["k", "l"] + [f"a{n}" for n in modes] + [f"b{n}" for n in modes]
    if l_block is None:
        if mass is None:
            raise InputError("need mass or an explicit l block")
        l_block = mass ** 3 * np.eye(2)
    l_block = np.asarray(l_block, dtype=complex)
    if mass is None:
        mass = math.sqrt(float(np.cbrt(np.real(minkowski_norm(l_block)))))
    dim = 2 * len(labels)
    G = np.zeros((dim, dim), dtype=complex)

    def put(lab_i, lab_j, M):
        i = 2 * labels.index(lab_i)
        j = 2 * labels.index(lab_j)
        G[i:i + 2, j:j + 2] = np.asarray(M, dtype=complex)

    put("l", "l", l_block)
    if k_block is not None:
        put("k", "k", k_block)
    for store, prefix in ((a_self, "a"), (b_self, "b")):
        for n, M in (store or {}).items():
            put(f"{prefix}{n}", f"{prefix}{n}", M)
    for store, prefix in ((a_cross, "a"), (b_cross, "b")):
        for n, M in (store or {}).items():
            if n <= 0 or -n not in modes:
                raise InputError(f"cross block key {n} needs both +n and -n in modes")
            M = np.asarray(M, dtype=complex)
            put(f"{prefix}{n}", f"{prefix}{-n}", M)
            put(f"{prefix}{-n}", f"{prefix}{n}", M.conj().T)
    return ModeSpec(mass, modes, G, on_shell=on_shell)


class StringState:
    """Mode coefficients realized as Clifford vectors, plus fast packed views.

    ``grid`` is the default (tau, sigma) sample lattice for the residual
    suites (sigma inside [0, pi]) and ``h_grid`` the default stencil step;
    explicit points override both.
    """

    def __init__(self, spec: ModeSpec, space: GeneratorSpace,
                 vectors: dict[tuple[str, int], ClVector],
                 grid: tuple[np.ndarray, np.ndarray] | None = None,
                 h_grid: float = DEFAULT.h_grid):
        self.spec = spec
        self.space = space
        self.vectors = vectors
        if grid is None:
            grid = (np.linspace(0.15, 1.35, 4), np.linspace(0.3, math.pi - 0.3, 4))
        self.grid = grid
        self.h_grid = float(h_grid)
        self._K = np.stack([vectors[("k", A)].coeffs for A in range(2)])
        self._L = np.stack([vectors[("l", A)].coeffs for A in range(2)])
        self._A = {n: np.stack([vectors[(f"a{n}", A)].coeffs for A in range(2)])
                   for n in spec.modes}
        self._B = {n: np.stack([vectors[(f"b{n}", A)].coeffs for A in range(2)])
                   for n in spec.modes}
        self.p2 = spec.p_squared()
        self.L_up = spec.l_block()
        self.L_down = flip_both(self.L_up)
        self.p_up = self.L_up / self.p2 if abs(self.p2) > 1e-12 else None

    def bullet_gram_residual(self) -> float:
        vecs = [self.vectors[(lab, A)] for lab in self.spec.labels for A in range(2)]
        stack = np.stack([v.coeffs for v in vecs])
        realized = (stack * self.space.signs) @ stack.conj().T
        return float(np.abs(realized - self.spec.gram).max())


def build_wave_state(spec: ModeSpec) -> StringState:
    """Realize the coefficient Gram on a fresh generator space.

    Raises VerificationError when the resolution misses the Gram by more
    than the feasibility gate (1e-9).
    """
    dim = 2 * len(spec.labels)
    space = allocate(2 * dim, 2 * dim, label="modes")
    res = resolve_hermitian(spec.gram, space)
    vectors = {}
    for idx, lab in enumerate(spec.labels):
        for A in range(2):
            vectors[(lab, A)] = res.vectors[2 * idx + A]
    state = StringState(spec, space, vectors)
    resid = state.bullet_gram_residual()
    if resid > DEFAULT.mode_gram_residual:
        raise VerificationError(f"mode Gram infeasible: residual {resid:.3e}")
    if res.null_residual() > DEFAULT.gram_null:
        raise VerificationError("same-kind products failed to vanish")
    return state


# -- field evaluation (packed (2, G) arrays internally) -------------------------

def _eval_c_packed(state: StringState, tau: float, sigma: float) -> np.ndarray:
    out = state._K + tau * state._L
    for n in state.spec.modes:
        out = out + np.exp(0.5j * n * (tau + sigma)) * state._A[n]
        out = out + np.exp(0.5j * n * (tau - sigma)) * state._B[n]
    return out


def _eval_dc_packed(state: StringState, tau: float, sigma: float, beta: int) -> np.ndarray:
    if beta == 0:
        out = state._L.astype(complex).copy()
        for n in state.spec.modes:
            out = out + (0.5j * n) * np.exp(0.5j * n * (tau + sigma)) * state._A[n]
            out = out + (0.5j * n) * np.exp(0.5j * n * (tau - sigma)) * state._B[n]
    elif beta == 1:
        out = np.zeros_like(state._L)
        for n in state.spec.modes:
            out = out + (0.5j * n) * np.exp(0.5j * n * (tau + sigma)) * state._A[n]
            out = out - (0.5j * n) * np.exp(0.5j * n * (tau - sigma)) * state._B[n]
    else:
        raise InputError(f"worldsheet index must be 0 or 1, got {beta}")
    return out


def eval_c(state: StringState, tau: float, sigma: float) -> list[ClVector]:
    C = _eval_c_packed(state, tau, sigma)
    return [ClVector(state.space, C[A]) for A in range(2)]


def eval_dc(state: StringState, tau: float, sigma: float, beta: int) -> list[ClVector]:
    D = _eval_dc_packed(state, tau, sigma, beta)
    return [ClVector(state.space, D[A]) for A in range(2)]


def eval_x(state: StringState, tau: float, sigma: float) -> np.ndarray:
    """Closed-form x^{AB}(tau, sigma) read directly off the Gram blocks."""
    spec = state.spec
    x = spec.block("k", "k") + spec.block("l", "l") * tau ** 2
    for n in spec.modes:
        x = x + spec.block(f"a{n}", f"a{n}") + spec.block(f"b{n}", f"b{n}")
        if -n in spec.modes:
            x = x + spec.block(f"a{n}", f"a{-n}") * np.exp(1j * n * (tau + sigma))
            x = x + spec.block(f"b{n}", f"b{-n}") * np.exp(1j * n * (tau - sigma))
    return x


def eval_x_from_vectors(state: StringState, tau: float, sigma: float) -> np.ndarray:
    """Independent route: bullet(c^A, conj(c^B)) from the realized vectors."""
    C = _eval_c_packed(state, tau, sigma)
    return (C * state.space.signs) @ C.conj().T


# -- finite-difference residuals -------------------------------------------------

def _grid_points(state: StringState) -> list[tuple[float, float]]:
    taus, sigmas = state.grid
    return [(float(t), float(s)) for t in taus for s in sigmas]


def wave_residual(state: StringState, points=None, h: float | None = None) -> np.ndarray:
    """max-norm of the 5-point box stencil of x minus 2 l.conj(l), per point.

    The cross stencil uses steps (h, h/2) in (tau, sigma): with equal steps
    the two second-difference errors cancel identically on null movers and
    the residual would be pure roundoff, leaving no convergence order to
    measure.  The anisotropic choice keeps the stencil second order while
    exposing the genuine O(h^2) truncation term.
    """
    if h is None:
        h = state.h_grid
    ht, hs = h, 0.5 * h
    pts = points if points is not None else _grid_points(state)
    target = 2.0 * state.L_up
    out = np.empty(len(pts))
    for i, (t, s) in enumerate(pts):
        box = (eval_x(state, t + ht, s) - 2 * eval_x(state, t, s)
               + eval_x(state, t - ht, s)) / ht ** 2 \
            - (eval_x(state, t, s + hs) - 2 * eval_x(state, t, s)
               + eval_x(state, t, s - hs)) / hs ** 2
        out[i] = np.abs(box - target).max()
    return out


def dstar_upper(state: StringState, tau: float, sigma: float) -> list[np.ndarray]:
    """Polymomenta d*^alpha_A as packed (2, G) arrays for alpha = tau, sigma.

    d*^alpha_A = p2^{-2} L_down[A, B] eta^{alpha beta} d_beta conj(c^B).
    """
    if state.p_up is None:
        raise PreconditionError("p.p = 0 branch is unsupported")
    scale = state.p2 ** -2
    out = []
    for alpha in range(2):
        dcbar = _eval_dc_packed(state, tau, sigma, alpha).conj()
        d = scale * ETA_WS[alpha, alpha] * (state.L_down @ dcbar)
        out.append(d)
    return out


def momentum_and_polymomenta(state: StringState):
    """(p^{AB}, polymomenta) with polymomenta(tau, sigma, beta) -> [ClVector, ClVector].

    The callable returns the dotted, worldsheet-lowered momenta
    d_{beta E} = conj(d*^beta_E) eta_{beta beta}; the constant matrix p is
    l.conj(l) / p2.  Rejects the unsupported null branch p.p = 0.
    """
    if state.p_up is None or state.p2 <= 0:
        raise PreconditionError("p.p = 0 branch is unsupported")

    def polymomenta(tau: float, sigma: float, beta: int) -> list[ClVector]:
        ds = dstar_upper(state, tau, sigma)[beta]
        lowered = ETA_WS[beta, beta] * ds.conj()
        return [ClVector(state.space, lowered[A]) for A in range(2)]

    return state.p_up.copy(), polymomenta


def residual_f51(state: StringState, points=None, h: float | None = None) -> np.ndarray:
    """|d_alpha c^A - p^{AE} d_{alpha E}| with the gradient by central differences."""
    if h is None:
        h = state.h_grid
    pts = points if points is not None else _grid_points(state)
    out = np.empty(len(pts))
    for i, (t, s) in enumerate(pts):
        worst = 0.0
        ds = dstar_upper(state, t, s)
        for alpha in range(2):
            if alpha == 0:
                fd = (_eval_c_packed(state, t + h, s) - _eval_c_packed(state, t - h, s)) / (2 * h)
            else:
                fd = (_eval_c_packed(state, t, s + h) - _eval_c_packed(state, t, s - h)) / (2 * h)
            lowered = ETA_WS[alpha, alpha] * ds[alpha].conj()
            rhs = state.p_up @ lowered
            worst = max(worst, float(np.abs(fd - rhs).max()))
        out[i] = worst
    return out


def residual_f52(state: StringState, points=None, h: float | None = None) -> np.ndarray:
    """|d_alpha d*^alpha| (conservation of the polymomenta current).

    Central differences with steps (h, h/2); equal steps would cancel the
    truncation error exactly on null movers (see :func:`wave_residual`).
    """
    if h is None:
        h = state.h_grid
    ht, hs = h, 0.5 * h
    pts = points if points is not None else _grid_points(state)
    out = np.empty(len(pts))
    for i, (t, s) in enumerate(pts):
        div = (dstar_upper(state, t + ht, s)[0] - dstar_upper(state, t - ht, s)[0]) / (2 * ht) \
            + (dstar_upper(state, t, s + hs)[1] - dstar_upper(state, t, s - hs)[1]) / (2 * hs)
        out[i] = float(np.abs(div).max())
    return out


def energy_momentum(state: StringState, tau: float, sigma: float) -> np.ndarray:
    """T^{ab} = (3 p.p - m^2)/2 eta^{ab} - p^{AB} d*^{(a}_A . conj(d*^{b)}_B).

    Symmetric and real; its eta-trace vanishes on shell.
    """
    ds = dstar_upper(state, tau, sigma)
    signs = state.space.signs
    D = np.empty((2, 2, 2, 2), dtype=complex)       # (alpha, beta, A, B)
    for a in range(2):
        for b in range(2):
            D[a, b] = (ds[a] * signs) @ ds[b].conj().T
    Dsym = 0.5 * (D + np.swapaxes(D, 0, 1))
    T = 0.5 * (3 * state.p2 - state.spec.mass ** 2) * ETA_WS \
        - np.einsum("AB,abAB->ab", state.p_up, Dsym)
    if np.abs(T.imag).max() > 1e-10 * max(1.0, np.abs(T).max()):
        raise VerificationError("energy-momentum tensor came out non-real")
    return T.real


def _l_contract(state: StringState, block: np.ndarray) -> complex:
    """l_A . conj(l)_B contracted with an upper-index 2x2 block."""
    return complex(np.sum(state.L_down * block))


def dilaton(state: StringState, tau: float, sigma: float,
            k_const: float = 0.0, k_lin: tuple[float, float] = (0.0, 0.0)) -> float:
    """Closed-form dilaton field for the flat-gauge wave solutions.

    phi = k + k_a sigma^a + m^2 (tau^2 + sigma^2) / 2 plus left/right mover
    parts quadratic in the mode amplitudes; the mover coefficient
    +1/(4 m^4) times the l contraction is the one that actually solves the
    on-shell worldsheet equation d_a d_b phi = -T_ab (equivalently (f90)-form
    with the energy-momentum tensor of :func:`energy_momentum`), verified by
    the finite-difference residual suite.  Integration constants default to
    zero.
    """
    spec = state.spec
    m2 = spec.mass ** 2
    phi = k_const + k_lin[0] * tau + k_lin[1] * sigma + 0.5 * m2 * (tau ** 2 + sigma ** 2)
    mode_sum = 0.0 + 0.0j
    for n in spec.modes:
        mode_sum += 0.5 * n ** 2 * _l_contract(state, spec.block(f"a{n}", f"a{n}")) \
            * (tau + sigma) ** 2
        mode_sum += 0.5 * n ** 2 * _l_contract(state, spec.block(f"b{n}", f"b{n}")) \
            * (tau - sigma) ** 2
        if -n in spec.modes:
            mode_sum += _l_contract(state, spec.block(f"a{n}", f"a{-n}")) \
                * np.exp(1j * n * (tau + sigma))
            mode_sum += _l_contract(state, spec.block(f"b{n}", f"b{-n}")) \
                * np.exp(1j * n * (tau - sigma))
    phi += 0.25 / m2 ** 2 * mode_sum
    if abs(np.imag(phi)) > 1e-10 * max(1.0, abs(phi)):
        raise VerificationError("dilaton came out non-real")
    return float(np.real(phi))


def dilaton_residual(state: StringState, points=None, h: float | None = None,
                     k_const: float = 0.0, k_lin: tuple[float, float] = (0.0, 0.0)
                     ) -> np.ndarray:
    """FD residual of d_a d_b phi = -m^2 eta_ab + (eta_cd d*^c.d^d) d*_(a.d_b)."""
    if h is None:
        h = state.h_grid
    pts = points if points is not None else _grid_points(state)
    out = np.empty(len(pts))

    def phi(t, s):
        return dilaton(state, t, s, k_const, k_lin)

    signs = state.space.signs
    m2 = state.spec.mass ** 2
    for i, (t, s) in enumerate(pts):
        dtt = (phi(t + h, s) - 2 * phi(t, s) + phi(t - h, s)) / h ** 2
        dss = (phi(t, s + h) - 2 * phi(t, s) + phi(t, s - h)) / h ** 2
        dts = (phi(t + h, s + h) - phi(t + h, s - h)
               - phi(t - h, s + h) + phi(t - h, s - h)) / (4 * h ** 2)
        fd = np.array([[dtt, dts], [dts, dss]])
        ds = dstar_upper(state, t, s)
        Pi = sum(ETA_WS[g, g] * (ds[g] * signs) @ ds[g].conj().T for g in range(2))
        u = [ETA_WS[a, a] * np.stack([ds[a][1], -ds[a][0]]) for a in range(2)]
        D = np.empty((2, 2, 2, 2), dtype=complex)
        for a in range(2):
            for b in range(2):
                D[a, b] = (u[a] * signs) @ u[b].conj().T
        Dsym = 0.5 * (D + np.swapaxes(D, 0, 1))
        rhs = -m2 * ETA_WS + np.einsum("AB,abAB->ab", Pi, Dsym).real
        out[i] = np.abs(fd - rhs).max()
    return out


# -- curves and total charges ------------------------------------------------------

@dataclass
class Curve:
    """Worldsheet path u in [0, 1] -> (tau, sigma), optionally with derivative."""

    fn: Callable[[float], tuple[float, float]]
    dfn: Callable[[float], tuple[float, float]] | None = None

    def __call__(self, u: float) -> tuple[float, float]:
        return self.fn(u)

    def velocity(self, u: float) -> tuple[float, float]:
        if self.dfn is not None:
            return self.dfn(u)
        h = 1e-7
        a = self.fn(min(u + h, 1.0))
        b = self.fn(max(u - h, 0.0))
        du = min(u + h, 1.0) - max(u - h, 0.0)
        return ((a[0] - b[0]) / du, (a[1] - b[1]) / du)


def constant_time_curve(tau0: float) -> Curve:
    return Curve(lambda u: (tau0, math.pi * u), lambda u: (0.0, math.pi))


def arc_curve(tau0: float, amp: float, k: int = 2) -> Curve:
    """Spacelike wiggle between the same endpoints as the straight curve."""
    if abs(amp) * k >= 1.0:
        raise InputError("amplitude too large: curve would stop being spacelike")
    return Curve(
        lambda u: (tau0 + amp * math.sin(k * math.pi * u) ** 2, math.pi * u),
        lambda u: (amp * k * math.pi * math.sin(2 * k * math.pi * u) * 1.0, math.pi))


def _simpson_weights(n_nodes: int, du: float) -> np.ndarray:
    if n_nodes % 2 == 0 or n_nodes < 3:
        raise InputError("composite Simpson needs an odd node count >= 3")
    w = np.ones(n_nodes)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * du / 3.0


def total_momentum(state: StringState, curve: Curve, n_nodes: int = 257
                   ) -> tuple[list[ClVector], np.ndarray]:
    """Total Clifford momentum and the induced total space-time momentum.

    d*tot_A = integral over the curve of dsigma^a eps_{ba} d*^b_A, by
    composite Simpson; p_tot[A, B] = bullet(d*tot_A, conj(d*tot_B)).
    The curve must run between the sigma = 0 and sigma = pi boundaries and
    stay spacelike.
    """
    us = np.linspace(0.0, 1.0, n_nodes)
    t0, s0 = curve(0.0)
    t1, s1 = curve(1.0)
    if abs(s0) > 1e-9 or abs(s1 - math.pi) > 1e-9:
        raise PreconditionError("curve endpoints must sit on sigma = 0 and sigma = pi")
    w = _simpson_weights(n_nodes, us[1] - us[0])
    signs = state.space.signs
    acc = np.zeros((2, state.space.size), dtype=complex)
    for u, wu in zip(us, w):
        t, s = curve(float(u))
        vt, vs = curve.velocity(float(u))
        if vs ** 2 - vt ** 2 <= 0:
            raise PreconditionError(f"curve is not spacelike at u = {u}")
        ds = dstar_upper(state, t, s)
        # dsigma^a eps_{ba} d*^b = sigma' d*^tau - tau' d*^sigma (eps_{01} = +1)
        acc += wu * (vs * ds[0] - vt * ds[1])
    p_tot = (acc * signs) @ acc.conj().T
    dtot = [ClVector(state.space, acc[A]) for A in range(2)]
    return dtot, p_tot


# -- spinning string -----------------------------------------------------------------

def spinning_mode_spec(a_norm: float, k_norm: float) -> ModeSpec:
    """Subset Gram of the spinning string: a.a* = b.b*, k.k* = l.l*.

    Component assignment places the +1 mode in the second spinor slot so the
    generic closed form reproduces (x, y) = 2 a.a* (cos tau, sin tau) cos sigma
    with the package's sigma-matrix conventions.
    """
    zero = np.zeros((2, 2))
    up = np.diag([0.0, a_norm])            # a_{+1} lives in component A = 1
    dn = np.diag([a_norm, 0.0])            # a_{-1} in component A = 0
    cross = np.array([[0.0, 0.0], [a_norm, 0.0]])
    return make_mode_spec(
        modes=(1, -1),
        l_block=k_norm * np.eye(2),
        k_block=zero,
        a_self={1: up, -1: dn}, a_cross={1: cross},
        b_self={1: up, -1: dn}, b_cross={1: cross})


def spinning_string(a_norm: float, k_norm: float, tau: float, sigma: float
                    ) -> tuple[float, float, float, float]:
    """Closed-form trajectory (x, y, z, t) of the spinning string."""
    x = 2 * a_norm * math.cos(tau) * math.cos(sigma)
    y = 2 * a_norm * math.sin(tau) * math.cos(sigma)
    z = 0.0
    t = 2 * a_norm + k_norm * tau ** 2
    return x, y, z, t


def estimate_order(res_h: float, res_h2: float) -> float:
    """Richardson slope log2(res(h) / res(h/2))."""
    if res_h2 <= 0 or res_h <= 0:
        raise InputError("residuals must be positive to estimate an order")
    return math.log2(res_h / res_h2)


# -- JSON interface ---------------------------------------------------------------

def mode_spec_to_json(spec: ModeSpec) -> dict:
    entries = {}
    for i, li in enumerate(spec.labels):
        for A in range(2):
            for j, lj in enumerate(spec.labels):
                for B in range(2):
                    v = spec.gram[2 * i + A, 2 * j + B]
                    if v != 0:
                        entries[f"{li}.{A}|{lj}.{B}"] = [v.real, v.imag]
    return {"mass": spec.mass, "modes": list(spec.modes), "gram": entries}


def mode_spec_from_json(obj: dict) -> ModeSpec:
    try:
        mass = float(obj["mass"])
        modes = [int(n) for n in obj["modes"]]
        entries = obj["gram"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad mode spec JSON: {exc}") from exc
    labels = ["k", "l"] + [f"a{n}" for n in sorted(set(modes), key=lambda n: (abs(n), -n))] \
        + [f"b{n}" for n in sorted(set(modes), key=lambda n: (abs(n), -n))]
    dim = 2 * len(labels)
    G = np.zeros((dim, dim), dtype=complex)
    for key, val in entries.items():
        try:
            left, right = key.split("|")
            li, As = left.rsplit(".", 1)
            lj, Bs = right.rsplit(".", 1)
            i = 2 * labels.index(li) + int(As)
            j = 2 * labels.index(lj) + int(Bs)
        except (ValueError, IndexError) as exc:
            raise InputError(f"bad gram key {key!r}") from exc
        G[i, j] = complex(val[0], val[1])
    # fill Hermitian partners that were omitted
    for i in range(dim):
        for j in range(dim):
            if G[i, j] == 0 and G[j, i] != 0:
                G[i, j] = np.conj(G[j, i])
    return ModeSpec(mass, modes, G)
