"""The eight verification criteria, runnable from pytest or the CLI.

Each criterion draws its inputs from a seeded generator, evaluates the
relevant identities at the tolerances in :mod:`cliffdyn.tolerances`, and
returns a result record; nothing here loosens a tolerance at run time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import clifford, current_algebra, matrixmech, particle, worldsheet
from .sampling import random_fourvector, random_hermitian, random_timelike, random_unitary
from .spinors import eta_flip, flip_both, spinor_to_vec, vec_to_spinor
from .tolerances import DEFAULT, Tolerances

__all__ = ["CriterionResult", "CRITERIA", "run_criterion", "run_all"]


@dataclass
class CriterionResult:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        parts = ", ".join(f"{k}={v:.3e}" if isinstance(v, float) else f"{k}={v}"
                          for k, v in self.details.items())
        return f"[{status}] {self.name}: {parts}"


def proposition_suite(seed: int, tols: Tolerances = DEFAULT) -> CriterionResult:
    """200 random Hermitian matrices resolve into exact bullet Gram matrices."""
    rng = np.random.default_rng(seed)
    worst_gram = 0.0
    worst_null = 0.0
    for _ in range(200):
        n = int(rng.integers(1, 9))
        n_zero = int(rng.integers(0, n + 1)) if rng.random() < 0.35 else 0
        H = random_hermitian(rng, n, n_zero=n_zero)
        space = clifford.allocate(2 * n, 2 * n)
        res = clifford.resolve_hermitian(H, space)
        worst_gram = max(worst_gram, res.gram_residual())
        worst_null = max(worst_null, res.null_residual())
    passed = worst_gram < tols.gram_residual and worst_null < tols.gram_null
    return CriterionResult("proposition suite (200 random Hermitian)", passed,
                           {"gram_residual": worst_gram, "null_residual": worst_null})


def contraction_identity(seed: int, tols: Tolerances = DEFAULT) -> CriterionResult:
    """The two-spinor contraction identity for 1000 random complex four-vectors."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(1000):
        v = random_fourvector(rng, complex_valued=True)
        up = vec_to_spinor(v)
        down = flip_both(up)
        full = np.sum(down * up)
        lhs = down @ up.T
        rhs = 0.5 * full * np.eye(2)
        worst = max(worst, float(np.abs(lhs - rhs).max() / max(1.0, abs(full))))
    return CriterionResult("four-vector contraction identity (1000 vectors)",
                           worst < tols.c30_identity, {"rel_residual": worst})


def bracket_reduction(seed: int, tols: Tolerances = DEFAULT) -> CriterionResult:
    """Generalized bracket equals mu times the Poisson bracket on constrained states."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(100):
        mu = rng.uniform(0.2, 1.5)
        x = rng.uniform(-1, 1, size=4)
        p = random_timelike(rng)
        mass = math.sqrt(max(p[0] ** 2 - p[1:] @ p[1:], 0.04))
        st = particle.build_state(x, p, mu, mass)
        terms_n = [(rng.normal(), rng.integers(0, 3, 4), rng.integers(0, 2, 4))
                   for _ in range(3)]
        terms_m = [(rng.normal(), rng.integers(0, 2, 4), rng.integers(0, 3, 4))
                   for _ in range(3)]
        N = particle.polynomial_observable(terms_n)
        M = particle.polynomial_observable(terms_m)
        cb = particle.clifford_bracket(N, M, st)
        pb = particle.poisson_bracket(N, M, st.x_vec(), st.p_vec())
        worst = max(worst, abs(cb - mu * pb) / (1.0 + abs(pb)))
    return CriterionResult("bracket reduction (100 constrained states)",
                           worst < tols.bracket_reduction, {"scaled_residual": worst})


def particle_dynamics(seed: int, tols: Tolerances = DEFAULT) -> CriterionResult:
    """Free particle: straight line in proper time, shell drift, mu quadrature."""
    rng = np.random.default_rng(seed)
    mass = 1.3
    mu0 = 0.7
    e0 = 0.5
    e = particle.constant_einbein(e0, tau0=0.0)
    tau_s = mu0 / (mass ** 2 * e0)
    x0 = rng.uniform(-1, 1, 4)
    p = random_timelike(rng)
    p = p * (mass / math.sqrt(p[0] ** 2 - p[1:] @ p[1:]))
    st = particle.build_state(x0, p, mu0, mass, tau=tau_s)
    traj = particle.integrate(st, e, tau_s + 2.0, 10_000)
    p_contra = eta_flip(p).real
    pred = x0[None, :] + np.outer(traj.taubar, p_contra / mass)
    straight = float(np.abs(traj.x - pred).max())
    drift = traj.constraint_drift()
    mu_err = 0.0
    for k in range(0, len(traj.tau), 500):
        mu_err = max(mu_err, abs(traj.mu[k] - particle.mu_of_tau(e, mass, traj.tau[k])))
    passed = (straight < tols.straight_line and drift < tols.constraint_drift
              and mu_err < tols.mu_match)
    return CriterionResult("particle dynamics (10^4 RK4 steps)", passed,
                           {"straight_line": straight, "shell_drift": drift,
                            "mu_quadrature": mu_err})


def un_covariance(seed: int, tols: Tolerances = DEFAULT) -> CriterionResult:
    """Gauge transformation commutes with the flow; constraint matrix invariant."""
    rng = np.random.default_rng(seed)
    n = 3
    mass = 1.0
    mu = 0.6
    blocks = []
    for i in range(n):
        blocks += [(f"c{i}", 4, 4), (f"d{i}", 4, 4), (f"h{i}", 4, 4)]
    space = clifford.allocate_blocks(blocks)
    states = []
    for i in range(n):
        x = rng.uniform(-1, 1, 4)
        p = random_timelike(rng)
        p = p * (mass / math.sqrt(p[0] ** 2 - p[1:] @ p[1:]))
        c, d, _ = clifford.resolve_pair(
            vec_to_spinor(x), flip_both(vec_to_spinor(eta_flip(p))), mu * np.eye(2),
            space, labels=(f"c{i}", f"d{i}", f"h{i}"))
        states.append(particle.ParticleState(c, d, mass))
    sys0 = matrixmech.assemble(states)
    U = random_unitary(rng, n)
    a = matrixmech.evolve_matrix_classical(matrixmech.gauge_transform(sys0, U), 1.0, 200)
    b = matrixmech.evolve_matrix_classical(sys0, 1.0, 200)
    rotated = np.stack([U @ b.X[-1][m] @ U.conj().T for m in range(4)])
    commute = float(np.abs(a.X[-1] - rotated).max())
    CD = matrixmech.gauge_transform(sys0, U).constraint_matrix()
    target = mu * np.einsum("ab,ij->abij", np.eye(2), np.eye(n))
    invariance = float(np.abs(CD - target).max())
    passed = commute < tols.unitary_covariance and invariance < tols.constraint_invariance
    return CriterionResult("U(N) covariance", passed,
                           {"evolve_gauge_commutator": commute,
                            "constraint_invariance": invariance})


def picture_equivalence(seed: int, tols: Tolerances = DEFAULT) -> CriterionResult:
    """Heisenberg and Schrodinger-gauge expectations agree; -H/hbar freezes X, P."""
    nlev = 20
    mass = 1.0
    hbar = 1.0
    X0, P0 = matrixmech.truncated_oscillator(nlev, hbar=hbar)
    taubar, steps = 0.8, 2000
    heis = matrixmech.evolve_heisenberg(X0, P0, hbar, mass, taubar, steps)
    s0 = np.zeros(nlev, dtype=complex)
    s0[1], s0[3], s0[5] = 0.6, 0.64, 0.48          # interior support, away from the corner
    s0 /= np.linalg.norm(s0)
    H = (P0 @ P0 - mass ** 2 * np.eye(nlev)) / (2 * mass)
    sT = matrixmech.evolve_state(s0, lambda t: -H / hbar, taubar, steps)
    equiv = abs(complex(s0.conj() @ heis.X[-1] @ s0) - complex(sT.conj() @ X0 @ sT))
    frozen = matrixmech.covariant_evolve(
        X0, P0, hbar, mass, matrixmech.schrodinger_gauge(hbar, mass), taubar, steps)
    stationary = float(max(np.abs(frozen.X[-1] - X0).max(), np.abs(frozen.P[-1] - P0).max()))
    passed = equiv < tols.picture_equivalence and stationary < tols.stationarity
    return CriterionResult("picture equivalence (20-level oscillator)", passed,
                           {"expectation_gap": equiv, "stationarity": stationary})


def _acceptance_mode_spec(mass=1.1):
    return worldsheet.make_mode_spec(
        mass=mass, modes=(1, -1, 2, -2),
        k_block=0.3 * np.eye(2),
        a_self={1: np.diag([0.15, 0.18]), -1: np.diag([0.17, 0.14]),
                2: 0.12 * np.eye(2), -2: 0.13 * np.eye(2)},
        a_cross={1: np.array([[0.14, 0.01], [0.02, 0.15]]), 2: 0.115 * np.eye(2)},
        b_self={1: np.diag([0.16, 0.13]), -1: np.diag([0.12, 0.19])},
        b_cross={1: np.array([[0.13, -0.01j], [0.01, 0.12]])})


def string_suite(seed: int, tols: Tolerances = DEFAULT) -> CriterionResult:
    """Wave-solution residuals, convergence order, trace, total momentum, spinning."""
    st = worldsheet.build_wave_state(_acceptance_mode_spec())
    h = tols.h_grid
    residuals = {}
    orders = {}
    for name, fn in (("box", worldsheet.wave_residual),
                     ("f51", worldsheet.residual_f51),
                     ("f52", worldsheet.residual_f52),
                     ("f90", worldsheet.dilaton_residual)):
        residuals[name] = float(fn(st, h=h).max())
        # order estimated where truncation dominates roundoff
        r1 = float(fn(st, h=2e-3).max())
        r2 = float(fn(st, h=1e-3).max())
        orders[name] = worldsheet.estimate_order(r1, r2)
    rng = np.random.default_rng(seed)
    trace = 0.0
    for _ in range(10):
        T = worldsheet.energy_momentum(st, rng.uniform(-1, 1), rng.uniform(0, math.pi))
        trace = max(trace, abs(T[0, 0] - T[1, 1]))
    plain = worldsheet.build_wave_state(
        worldsheet.make_mode_spec(mass=1.1, k_block=0.4 * np.eye(2)))
    _, p_tot = worldsheet.total_momentum(plain, worldsheet.constant_time_curve(0.5))
    pi2 = float(np.abs(p_tot - math.pi ** 2 * flip_both(plain.p_up)).max())
    spin_state = worldsheet.build_wave_state(worldsheet.spinning_mode_spec(0.35, 0.8))
    spin = 0.0
    for _ in range(10):
        t, s = rng.uniform(0, 2 * math.pi), rng.uniform(0, math.pi)
        x, y, z, tt = worldsheet.spinning_string(0.35, 0.8, t, s)
        v = spinor_to_vec(worldsheet.eval_x(spin_state, t, s)).real
        spin = max(spin, abs(v[0] - tt), abs(v[1] - x), abs(v[2] - y), abs(v[3] - z))
    lo, hi = 2 - tols.fd_order_window, 2 + tols.fd_order_window
    passed = (all(lo <= o <= hi for o in orders.values())
              and residuals["f51"] < tols.fd_residual
              and residuals["f52"] < tols.fd_residual
              and residuals["f90"] < tols.fd_residual
              and trace < tols.trace_vanish
              and pi2 < tols.total_momentum
              and spin < tols.spinning_match)
    details = {f"{k}_order": v for k, v in orders.items()}
    details.update({f"{k}_residual": v for k, v in residuals.items()})
    details.update({"trace_T": trace, "pi2_p": pi2, "spinning": spin})
    return CriterionResult("string suite", passed, details)


def algebra_suite(seed: int, tols: Tolerances = DEFAULT) -> CriterionResult:
    """Current brackets, charge algebra, su(2) split, Poincare oracle, U(1) current."""
    st = worldsheet.build_wave_state(_acceptance_mode_spec())
    sample = current_algebra.sample_currents(st, worldsheet.constant_time_curve(0.4), 128)
    g1 = 0.0
    for (A, B) in ((0, 0), (0, 1), (1, 1)):
        for (E, F) in ((0, 0), (0, 1), (1, 1)):
            for k in (0, 33, 77, 128):
                lhs = current_algebra.current_bracket(sample, A, B, E, F, k, k)
                rhs = current_algebra.g1_pattern(sample, A, B, E, F, k, k)
                g1 = max(g1, abs(lhs - rhs) / max(1.0, abs(rhs)))
                g1 = max(g1, abs(current_algebra.current_bracket_dotted(
                    sample, A, B, E, F, k, k)))
    pres, charge_report = current_algebra.charge_algebra(sample)
    dagger_cross = float(np.abs(pres.f[:3, 3:, :]).max())
    _, _, su2_report = current_algebra.nk_decomposition(pres)
    poincare = current_algebra.poincare_check(sample)
    unitary = current_algebra.unitary_current_check(sample)
    passed = (g1 < tols.g1_identity
              and dagger_cross == 0.0
              and su2_report["max_residual"] < tols.algebra_closure
              and poincare["max_structure_mismatch"] < tols.algebra_closure
              and poincare["pp_residual"] == 0.0
              and unitary["ii_residual"] < tols.unitary_brackets
              and unitary["ij_residual"] < tols.unitary_brackets)
    return CriterionResult("algebra suite", passed, {
        "g1_residual": g1,
        "su2_residual": su2_report["max_residual"],
        "poincare_mismatch": poincare["max_structure_mismatch"],
        "pp_residual": poincare["pp_residual"],
        "unitary_brackets": max(unitary["ii_residual"], unitary["ij_residual"]),
        "jacobi": charge_report["jacobi_residual"],
        "n_nodes": sample.n_nodes,
    })


CRITERIA = (
    ("proposition", proposition_suite),
    ("c30-identity", contraction_identity),
    ("bracket-reduction", bracket_reduction),
    ("particle-dynamics", particle_dynamics),
    ("un-covariance", un_covariance),
    ("picture-equivalence", picture_equivalence),
    ("string-suite", string_suite),
    ("algebra-suite", algebra_suite),
)


def run_criterion(key: str, seed: int = 0, tols: Tolerances = DEFAULT) -> CriterionResult:
    for name, fn in CRITERIA:
        if name == key:
            return fn(seed, tols)
    raise KeyError(f"unknown criterion {key!r}")


def run_all(seed: int = 0, tols: Tolerances = DEFAULT, max_workers: int | None = None
            ) -> list[CriterionResult]:
    """Run every criterion; independent criteria may run on a thread pool.

    Results are returned in the canonical CRITERIA order regardless of
    completion order, so output is deterministic.
    """
    import concurrent.futures as cf
    import os

    if max_workers is None:
        env = os.environ.get("CLIFFDYN_THREADS")
        max_workers = max(1, int(env)) if env else min(4, os.cpu_count() or 1)
    rngs = np.random.default_rng(seed).spawn(len(CRITERIA))
    seeds = [int(r.integers(0, 2 ** 63 - 1)) for r in rngs]
    if max_workers == 1:
        return [fn(s, tols) for (name, fn), s in zip(CRITERIA, seeds)]
    with cf.ThreadPoolExecutor(max_workers=max_workers) as pool:
        futures = [pool.submit(fn, s, tols) for (name, fn), s in zip(CRITERIA, seeds)]
        return [f.result() for f in futures]
