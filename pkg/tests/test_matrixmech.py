"""N-particle assembly, gauge covariance, and quantum matrix evolution."""

import json

import numpy as np
import pytest

from cliffdyn.clifford import allocate_blocks, resolve_pair
from cliffdyn.errors import InputError, PreconditionError
from cliffdyn.matrixmech import (
    assemble,
    born_sample,
    covariant_evolve,
    eigenvalue_trajectories_csv,
    evolve_heisenberg,
    evolve_matrix_classical,
    evolve_state,
    expectation,
    gauge_transform,
    load_system_config,
    nonrelativistic_rate,
    schrodinger_gauge,
    truncated_oscillator,
)
from cliffdyn.particle import ParticleState
from cliffdyn.sampling import random_unitary
from cliffdyn.spinors import ETA, covec_to_spinor_down, vec_to_spinor

MASS = 1.0


def _system(n=3, mu=0.6, seed=0, hbar=0.0):
    blocks = []
    for i in range(n):
        blocks += [(f"c{i}", 4, 4), (f"d{i}", 4, 4), (f"h{i}", 4, 4)]
    space = allocate_blocks(blocks)
    rng = np.random.default_rng(seed)
    states = []
    for i in range(n):
        x = rng.uniform(-1, 1, 4)
        sp = rng.uniform(-0.3, 0.3, 3)
        p = np.array([np.sqrt(MASS ** 2 + sp @ sp), *sp])
        c, d, _ = resolve_pair(vec_to_spinor(x), covec_to_spinor_down(p),
                               mu * np.eye(2), space,
                               labels=(f"c{i}", f"d{i}", f"h{i}"))
        states.append(ParticleState(c, d, MASS))
    return assemble(states, hbar=hbar), states


# -- assembly -----------------------------------------------------------------

def test_assemble_single_particle_reduces():
    sys1, states = _system(n=1)
    assert np.abs(sys1.x_matrices()[:, 0, 0].real - states[0].x_vec()).max() < 1e-13
    assert np.abs(sys1.p_matrices()[:, 0, 0].real - states[0].p_vec()).max() < 1e-13


def test_assemble_diagonal_and_commuting():
    sys3, states = _system(n=3)
    X, P = sys3.x_matrices(), sys3.p_matrices()
    for mu in range(4):
        assert np.abs(X[mu] - np.diag(np.diag(X[mu]))).max() == 0.0
        assert np.abs(X[mu] - X[mu].conj().T).max() < 1e-12
        assert np.abs(P[mu] - P[mu].conj().T).max() < 1e-12
    expected = np.array([st.x_vec()[0] for st in states])
    assert np.allclose(np.diag(X[0]).real, expected)
    for a in range(4):
        for b in range(4):
            assert np.abs(X[a] @ X[b] - X[b] @ X[a]).max() == 0.0
            assert np.abs(X[a] @ P[b] - P[b] @ X[a]).max() == 0.0
            assert np.abs(P[a] @ P[b] - P[b] @ P[a]).max() == 0.0


def test_assemble_rejects_overlapping_blocks():
    space = allocate_blocks([("c0", 4, 4), ("d0", 4, 4), ("h0", 4, 4)])
    c, d, _ = resolve_pair(np.eye(2), np.eye(2), np.zeros((2, 2)), space,
                           labels=("c0", "d0", "h0"))
    st = ParticleState(c, d, MASS)
    with pytest.raises(PreconditionError):
        assemble([st, st])


def test_assemble_requires_common_mass():
    sys1, states = _system(n=1)
    other = ParticleState(states[0].c, states[0].dstar, 2 * MASS)
    with pytest.raises(InputError):
        assemble([states[0], other])


# -- gauge transformations -----------------------------------------------------

def test_gauge_transform_similarity_and_constraint():
    sys3, _ = _system(n=3, mu=0.6)
    rng = np.random.default_rng(5)
    U = random_unitary(rng, 3)
    out = gauge_transform(sys3, U)
    X, P = sys3.x_matrices(), sys3.p_matrices()
    for mu in range(4):
        assert np.abs(out.x_matrices()[mu] - U @ X[mu] @ U.conj().T).max() < 1e-11
        assert np.abs(out.p_matrices()[mu] - U @ P[mu] @ U.conj().T).max() < 1e-11
    CD = out.constraint_matrix()
    target = 0.6 * np.einsum("ab,ij->abij", np.eye(2), np.eye(3))
    assert np.abs(CD - target).max() < 1e-11


def test_gauge_transform_identity_fixed_point():
    sys3, _ = _system(n=2)
    out = gauge_transform(sys3, np.eye(2))
    assert np.abs(out.x_matrices() - sys3.x_matrices()).max() == 0.0


def test_gauge_transform_rejects_non_unitary():
    sys3, _ = _system(n=2)
    with pytest.raises(InputError):
        gauge_transform(sys3, np.diag([1.0, 2.0]))


# -- classical evolution ---------------------------------------------------------

def test_classical_flow_affine_in_taubar():
    sys3, _ = _system(n=3)
    traj = evolve_matrix_classical(sys3, 1.5, 300)
    X, P = sys3.x_matrices(), sys3.p_matrices()
    pred = X + np.einsum("mn,nij->mij", ETA, P) / MASS * 1.5
    assert np.abs(traj.X[-1] - pred).max() < 1e-9
    assert np.abs(traj.P[-1] - P).max() == 0.0


def test_classical_eigenvalues_are_particle_trajectories():
    sys3, states = _system(n=3)
    traj = evolve_matrix_classical(sys3, 1.0, 200)
    eigs = np.sort(np.linalg.eigvalsh(traj.X[-1][0]))
    direct = np.sort([st.x_vec()[0] + (ETA @ st.p_vec())[0] / MASS for st in states])
    assert np.abs(eigs - direct).max() < 1e-9


def test_classical_flow_commutes_with_gauge():
    sys3, _ = _system(n=3)
    rng = np.random.default_rng(9)
    U = random_unitary(rng, 3)
    a = evolve_matrix_classical(gauge_transform(sys3, U), 1.0, 100)
    b = evolve_matrix_classical(sys3, 1.0, 100)
    rotated = np.stack([U @ b.X[-1][mu] @ U.conj().T for mu in range(4)])
    assert np.abs(a.X[-1] - rotated).max() < 1e-10


def test_classical_flow_independent_of_phi():
    sys3, states = _system(n=3)
    other = assemble(states, phi=np.array([0.3, 1.7, -2.0]))
    a = evolve_matrix_classical(sys3, 1.0, 50)
    b = evolve_matrix_classical(other, 1.0, 50)
    assert np.abs(a.X[-1] - b.X[-1]).max() == 0.0


def test_classical_requires_hbar_zero():
    sys3, _ = _system(n=2, hbar=1.0)
    with pytest.raises(PreconditionError):
        evolve_matrix_classical(sys3, 1.0, 10)


# -- quantum sector ---------------------------------------------------------------

def test_truncated_oscillator_commutator_support():
    X, P = truncated_oscillator(20, hbar=1.0)
    comm = X @ P - P @ X
    defect = comm - 1j * np.eye(20)
    # support only in the last diagonal entry
    defect[19, 19] = 0.0
    assert np.abs(defect).max() < 1e-13
    assert np.abs(X - X.conj().T).max() == 0.0
    assert np.abs(P - P.conj().T).max() == 0.0


def test_heisenberg_momentum_frozen_commutator_unitary_equivalent():
    X0, P0 = truncated_oscillator(20, hbar=1.0)
    taubar = 0.4
    traj = evolve_heisenberg(X0, P0, 1.0, MASS, taubar, 10_000)
    assert np.abs(traj.P[-1] - P0).max() < 1e-13
    assert traj.hermiticity_drift() < 1e-10
    # the conserved object: [X, P] evolves by the similarity exp(i H taubar / hbar);
    # oracle built from an independent eigendecomposition of H
    H = (P0 @ P0 - MASS ** 2 * np.eye(20)) / (2 * MASS)
    w, V = np.linalg.eigh(H)
    U = (V * np.exp(1j * w * taubar)) @ V.conj().T
    comm0 = X0 @ P0 - P0 @ X0
    commT = traj.X[-1] @ traj.P[-1] - traj.P[-1] @ traj.X[-1]
    assert np.abs(commT - U @ comm0 @ U.conj().T).max() < 1e-9
    # spectrum of the commutator is exactly conserved
    assert np.abs(np.sort(np.linalg.eigvalsh(commT / 1j))
                  - np.sort(np.linalg.eigvalsh(comm0 / 1j))).max() < 1e-9


def test_covariant_gamma_zero_matches_heisenberg():
    X0, P0 = truncated_oscillator(12, hbar=1.0)
    a = evolve_heisenberg(X0, P0, 1.0, MASS, 0.5, 500)
    b = covariant_evolve(X0, P0, 1.0, MASS, lambda t, X, P: np.zeros_like(X0),
                         0.5, 500)
    assert np.abs(a.X[-1] - b.X[-1]).max() == 0.0


def test_schrodinger_gauge_freezes_matrices():
    X0, P0 = truncated_oscillator(20, hbar=1.0)
    traj = covariant_evolve(X0, P0, 1.0, MASS, schrodinger_gauge(1.0, MASS), 1.0, 1000)
    assert np.abs(traj.X[-1] - X0).max() < 1e-9
    assert np.abs(traj.P[-1] - P0).max() < 1e-9


def test_gamma_gauge_transformation_law():
    # Gamma' = U Gamma U^dagger - i (dU/dtau) U^dagger makes the covariant
    # derivative transform covariantly; checked by finite differences of U.
    rng = np.random.default_rng(3)
    n = 6
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    K = 0.5 * (A + A.conj().T)            # Hermitian generator of U(t)

    def U_of(t):
        w, V = np.linalg.eigh(K)
        return (V * np.exp(-1j * w * t)) @ V.conj().T

    G = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    G = 0.5 * (G + G.conj().T)            # connection at t0
    X = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    X = 0.5 * (X + X.conj().T)
    t0, h = 0.3, 1e-6
    U0 = U_of(t0)
    dU = (U_of(t0 + h) - U_of(t0 - h)) / (2 * h)
    Gp = U0 @ G @ U0.conj().T - 1j * dU @ U0.conj().T
    # nabla X = dX/dt - i[Gamma, X]; take dX/dt = 0 at t0 in the original frame,
    # then X'(t) = U X U^dagger and nabla' X' must equal U (nabla X) U^dagger
    nabla = -1j * (G @ X - X @ G)
    dXp = dU @ X @ U0.conj().T + U0 @ X @ dU.conj().T
    nabla_p = dXp - 1j * (Gp @ (U0 @ X @ U0.conj().T) - (U0 @ X @ U0.conj().T) @ Gp)
    assert np.abs(nabla_p - U0 @ nabla @ U0.conj().T).max() < 1e-9


# -- expectation and state evolution ----------------------------------------------

def test_expectation_eigenvector_returns_eigenvalue():
    sys3, states = _system(n=3)
    s = np.zeros(3, dtype=complex)
    s[1] = 1.0
    val = expectation(s, sys3, "X")
    assert np.abs(val.real - states[1].x_vec()).max() < 1e-12
    cvec = expectation(s, sys3, "C")
    assert np.allclose(cvec[0].coeffs, states[1].c[0].coeffs)


def test_expectation_linearity_on_diagonal_x():
    sys3, states = _system(n=2)
    s = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2)
    val = expectation(s, sys3, "X")
    mean = 0.5 * (states[0].x_vec() + states[1].x_vec())
    assert np.abs(val.real - mean).max() < 1e-12


def test_expectation_requires_unit_norm():
    sys3, _ = _system(n=2)
    with pytest.raises(InputError):
        expectation(np.array([1.0, 1.0]), sys3, "X")


def test_classical_expectation_stays_on_integral_curve():
    sys3, states = _system(n=3)
    traj = evolve_matrix_classical(sys3, 1.0, 100)
    s = np.zeros(3, dtype=complex)
    s[2] = 1.0
    # Gamma = 0: s constant; <s|X(t)|s> must track particle 2 exactly
    val = complex(s.conj() @ traj.X[-1][0] @ s)
    expect = states[2].x_vec()[0] + (ETA @ states[2].p_vec())[0] / MASS
    assert abs(val.real - expect) < 1e-9


def test_evolve_state_gamma_zero_constant_and_norm_preserved():
    s0 = np.array([0.6, 0.8j], dtype=complex)
    out = evolve_state(s0, lambda t: np.zeros((2, 2)), 1.0, 100)
    assert np.abs(out - s0).max() == 0.0
    rng = np.random.default_rng(8)
    H = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    H = 0.5 * (H + H.conj().T)
    s0 = rng.normal(size=8) + 1j * rng.normal(size=8)
    s0 = s0 / np.linalg.norm(s0)
    out = evolve_state(s0, lambda t: -H, 1.0, 10000)
    assert abs(np.linalg.norm(out) - 1.0) < 1e-10


def test_nonrelativistic_schrodinger_equation():
    # in the -H~/hbar gauge the state obeys the matrix Schrodinger equation
    # with the spatial-momentum Hamiltonian; oracle: eigendecomposition
    nlev, m, hbar = 12, 5.0, 1.0
    _, P = truncated_oscillator(nlev, mass=m, omega=0.2, hbar=hbar)
    H_nr = (P @ P) / (2 * m)
    s0 = np.zeros(nlev, dtype=complex)
    s0[0], s0[2] = 0.8, 0.6
    taubar, steps = 1.0, 4000
    out = evolve_state(s0, lambda t: -H_nr / hbar, taubar, steps)
    w, V = np.linalg.eigh(H_nr)
    oracle = (V * np.exp(-1j * w * taubar / hbar)) @ V.conj().T @ s0
    assert np.abs(out - oracle).max() < 1e-10


def test_picture_equivalence_expectations():
    nlev = 20
    X0, P0 = truncated_oscillator(nlev, hbar=1.0)
    taubar = 0.8
    steps = 1200
    heis = evolve_heisenberg(X0, P0, 1.0, MASS, taubar, steps)
    # state supported on the interior levels, away from the truncation corner
    s0 = np.zeros(nlev, dtype=complex)
    s0[1], s0[3], s0[5] = 0.6, 0.64, 0.48
    s0 /= np.linalg.norm(s0)
    H = (P0 @ P0 - MASS ** 2 * np.eye(nlev)) / (2 * MASS)
    sT = evolve_state(s0, lambda t: -H, taubar, steps)
    lhs = complex(s0.conj() @ heis.X[-1] @ s0)
    rhs = complex(sT.conj() @ X0 @ sT)
    assert abs(lhs - rhs) < 1e-8


def test_born_sampling_normalized_and_deterministic():
    rng = np.random.default_rng(42)
    eigvecs = np.eye(4, dtype=complex)
    s = np.array([0.5, 0.5, 0.5, 0.5], dtype=complex)
    draws = [born_sample(np.random.default_rng(7), s, eigvecs) for _ in range(3)]
    assert draws[0] == draws[1] == draws[2]
    counts = np.bincount([born_sample(rng, s, eigvecs) for _ in range(2000)], minlength=4)
    assert counts.min() > 350  # uniform Born weights


def test_nonrelativistic_rate_near_unity():
    # |p| << m: dt/dtaubar = <P^0>/m within |p|^2/m^2
    m = 5.0
    sp = np.array([0.1, 0.05, 0.0])
    p0 = np.sqrt(m ** 2 + sp @ sp)
    P0 = np.diag([p0, p0])
    s = np.array([1.0, 0.0], dtype=complex)
    rate = nonrelativistic_rate(P0, s, m)
    assert abs(rate - 1.0) <= (sp @ sp) / m ** 2


# -- config and export ---------------------------------------------------------------

def test_load_system_config_and_csv():
    cfg = {
        "N": 2,
        "mass": 1.0,
        "hbar": 0.0,
        "particles": [
            {"x": [0, 0, 0, 0], "p": [1.0, 0, 0, 0], "mu": 0.5},
            {"x": [1, 0.2, 0, 0], "p": [1.25, 0.75, 0, 0], "mu": 0.5},
        ],
    }
    sys2, gauge = load_system_config(json.dumps(cfg))
    assert gauge == "heisenberg"
    assert sys2.n == 2
    assert np.allclose(np.diag(sys2.x_matrices()[0]).real, [0.0, 1.0])
    traj = evolve_matrix_classical(sys2, 0.5, 10)
    text = eigenvalue_trajectories_csv(traj)
    assert text.splitlines()[0] == "taubar,x0_eig0,x0_eig1"
    assert len(text.splitlines()) == 12


def test_load_system_config_rejects_bad_input():
    with pytest.raises(InputError):
        load_system_config({"N": 2, "mass": 1.0, "particles": []})
    with pytest.raises(InputError):
        load_system_config({"N": 1, "mass": 1.0,
                            "particles": [{"x": [0] * 4, "p": [1, 0, 0, 0]}],
                            "gauge": "interaction"})
