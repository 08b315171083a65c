"""Current brackets, charge algebra, su(2) split, Poincare verification."""

from fractions import Fraction

import numpy as np
import pytest

from cliffdyn.errors import PreconditionError
from cliffdyn.current_algebra import (
    LiePresentation,
    _make_sample,
    charge_algebra,
    current_bracket,
    current_bracket_dotted,
    fit_structure_constants,
    g1_pattern,
    nk_decomposition,
    poincare_check,
    poincare_matrix_oracle,
    sample_currents,
    unitary_current_check,
)
from cliffdyn.worldsheet import (
    arc_curve,
    build_wave_state,
    constant_time_curve,
    make_mode_spec,
)

MASS = 1.1
SYM = ((0, 0), (0, 1), (1, 1))


def _rich_spec(shift=0.0):
    return make_mode_spec(
        mass=MASS, modes=(1, -1, 2, -2),
        k_block=0.3 * np.eye(2),
        a_self={1: np.diag([0.15, 0.18 + shift]), -1: np.diag([0.17, 0.14]),
                2: 0.12 * np.eye(2), -2: 0.13 * np.eye(2)},
        a_cross={1: np.array([[0.14, 0.01], [0.02, 0.15]]), 2: 0.115 * np.eye(2)},
        b_self={1: np.diag([0.16, 0.13]), -1: np.diag([0.12, 0.19])},
        b_cross={1: np.array([[0.13, -0.01j], [0.01, 0.12]])})


@pytest.fixture(scope="module")
def rich_state():
    return build_wave_state(_rich_spec())


@pytest.fixture(scope="module")
def sample(rich_state):
    return sample_currents(rich_state, constant_time_curve(0.4), 128)


# -- sampling -------------------------------------------------------------------

def test_current_scalars_symmetric(sample):
    assert np.abs(sample.j - np.swapaxes(sample.j, 1, 2)).max() == 0.0


def test_sampling_rejects_timelike_curve(rich_state):
    from cliffdyn.worldsheet import Curve
    import math
    bad = Curve(lambda u: (2.0 * math.sin(math.pi * u), math.pi * u),
                lambda u: (2.0 * math.pi * math.cos(math.pi * u), math.pi))
    with pytest.raises(PreconditionError):
        sample_currents(rich_state, bad, 16)


def test_total_charge_path_independent(rich_state, sample):
    other = sample_currents(rich_state, arc_curve(0.4, 0.2), 128)
    assert np.abs(sample.j_total() - other.j_total()).max() < 1e-8


def test_no_mode_currents_constant_along_curve():
    st = build_wave_state(make_mode_spec(mass=MASS, k_block=0.4 * np.eye(2)))
    s = sample_currents(st, constant_time_curve(0.4), 32)
    assert np.abs(s.j - s.j[0]).max() < 1e-13


# -- pointwise brackets -----------------------------------------------------------

def test_pointwise_bracket_matches_pattern(sample):
    worst = 0.0
    for (A, B) in SYM:
        for (E, F) in SYM:
            for k in (0, 17, 64, 127):
                lhs = current_bracket(sample, A, B, E, F, k, k)
                rhs = g1_pattern(sample, A, B, E, F, k, k)
                worst = max(worst, abs(lhs - rhs) / max(1.0, abs(rhs)))
    assert worst < 1e-9


def test_pointwise_bracket_delta_support(sample):
    assert current_bracket(sample, 0, 1, 0, 0, 3, 4) == 0.0
    assert g1_pattern(sample, 0, 1, 0, 0, 3, 4) == 0.0


def test_dotted_undotted_bracket_vanishes(sample):
    for (A, B) in SYM:
        for (E, F) in SYM:
            assert abs(current_bracket_dotted(sample, A, B, E, F, 11, 11)) < 1e-12


def test_bracket_grid_independence(rich_state, sample):
    coarse = sample_currents(rich_state, constant_time_curve(0.4), 64)
    worst = 0.0
    for k64 in (0, 10, 32, 63):
        a = current_bracket(coarse, 0, 1, 0, 0, k64, k64) * coarse.du
        b = current_bracket(sample, 0, 1, 0, 0, 2 * k64, 2 * k64) * sample.du
        worst = max(worst, abs(a - b))
    assert worst < 1e-8


def test_exact_arithmetic_oracle():
    """Hand-built sample with dyadic coefficients: bracket equals pattern exactly.

    The oracle reimplements the pointwise bracket in exact Fractions and the
    engine must agree bit for bit (dyadic rationals stay exact in floats).
    """
    from cliffdyn.clifford import allocate
    space = allocate(3, 3)
    signs = space.signs
    # three nodes (Simpson wants an odd count), dyadic coefficients; the
    # third node mirrors the first
    c = np.zeros((3, 2, 6), dtype=complex)
    d = np.zeros((3, 2, 6), dtype=complex)
    c[0, 0, 0], c[0, 0, 3] = 0.5, 0.25
    c[0, 1, 1], c[0, 1, 4] = -0.5, 1.0
    c[1, 0, 0], c[1, 0, 4] = 0.75, -0.25
    c[1, 1, 2], c[1, 1, 5] = 0.5, 0.5
    d[0, 0, 1], d[0, 0, 5] = 1.0, -0.5
    d[0, 1, 0], d[0, 1, 2] = 0.25, 0.75
    d[1, 0, 3], d[1, 0, 1] = -1.0, 0.5
    d[1, 1, 4], d[1, 1, 0] = 0.5, 0.25
    c[2], d[2] = c[0], d[0]
    sample = _make_sample(np.array([0.0, 0.5, 1.0]), 0.5, c, d, signs)

    def fr(x):
        return Fraction(float(x))            # exact for dyadic inputs

    def bullet_fr(u, v):
        return sum(fr(u[g].real) * fr(v[g].real) * fr(signs[g]) for g in range(6))

    eps = [[Fraction(0), Fraction(-1)], [Fraction(1), Fraction(0)]]
    for k in range(2):
        c_low = [[sum(fr(c[k][G][g].real) * eps[G][A] for G in range(2)) for g in range(6)]
                 for A in range(2)]
        # exact j values
        j_fr = [[bullet_fr(c_low[A], d[k][B].real) + bullet_fr(c_low[B], d[k][A].real)
                 for B in range(2)] for A in range(2)]
        for (A, B) in SYM:
            for (E, F) in SYM:
                pattern = (j_fr[A][E] * eps[F][B] + j_fr[B][E] * eps[F][A]
                           + j_fr[A][F] * eps[E][B] + j_fr[B][F] * eps[E][A]) / fr(0.5)
                engine = current_bracket(sample, A, B, E, F, k, k)
                assert engine.imag == 0.0
                assert Fraction(engine.real) == pattern


# -- charge algebra ---------------------------------------------------------------

def test_charge_algebra_closure_and_jacobi(sample):
    pres, report = charge_algebra(sample)
    assert report["closure_rel_residual"] < 1e-9
    assert report["dagger_cross_residual"] < 1e-9
    assert report["jacobi_residual"] < 1e-10
    assert pres.antisymmetry_residual() == 0.0
    # [J, Jdagger] = 0 is encoded as vanishing cross constants
    assert np.abs(pres.f[:3, 3:, :]).max() == 0.0


def test_structure_constants_state_independent():
    fits = []
    for shift in (0.0, 0.04):
        st = build_wave_state(_rich_spec(shift))
        samples = [sample_currents(st, constant_time_curve(t), 64) for t in (0.4, 0.9)]
        fits.append(fit_structure_constants(samples))
    assert np.abs(fits[0] - fits[1]).max() < 1e-9


def test_fit_rejects_degenerate_single_slice():
    st = build_wave_state(_rich_spec(0.04))
    s = sample_currents(st, constant_time_curve(0.4), 64)
    with pytest.raises(PreconditionError):
        fit_structure_constants([s])


# -- su(2) decomposition -------------------------------------------------------------

def test_nk_decomposition(sample):
    pres, _ = charge_algebra(sample)
    suA, suB, report = nk_decomposition(pres)
    # the printed combinations close with -i hbar; the fitted constant records it
    assert report["closure_constant"] == pytest.approx(-1j, abs=1e-12)
    assert report["max_residual"] < 1e-10
    assert report["casimir_residual"] < 1e-10
    assert suA.jacobi_residual() < 1e-12
    assert suB.jacobi_residual() < 1e-12


# -- Poincare ---------------------------------------------------------------------------

def test_poincare_structure_constants_match_oracle(sample):
    report = poincare_check(sample)
    assert report["max_structure_mismatch"] < 1e-10
    assert report["pp_residual"] == 0.0
    assert report["pj_pattern_residual"] < 1e-10


def test_poincare_oracle_self_consistent():
    F, labels = poincare_matrix_oracle()
    pres = LiePresentation(labels, F)
    assert pres.antisymmetry_residual() < 1e-12
    assert pres.jacobi_residual() < 1e-12
    # spot checks of textbook relations: [M12, M23] = -i M13 ... sign per rep;
    # verify [P1, P2] = 0 and that [M12, P1] lands on P2 only
    i_m12, i_p1, i_p2 = labels.index("M12"), labels.index("P1"), labels.index("P2")
    assert np.abs(F[i_p1, i_p2]).max() == 0.0
    out = F[i_m12, i_p1]
    nonzero = {labels[c] for c in range(10) if abs(out[c]) > 1e-12}
    assert nonzero == {"P2"}


def test_poincare_check_on_second_state():
    st = build_wave_state(_rich_spec(0.04))
    s = sample_currents(st, constant_time_curve(0.7), 64)
    report = poincare_check(s)
    assert report["max_structure_mismatch"] < 1e-10


# -- unitary current ---------------------------------------------------------------------

def test_unitary_current_brackets_vanish(sample):
    report = unitary_current_check(sample)
    assert report["ii_residual"] < 1e-10
    assert report["ij_residual"] < 1e-10


def test_unitary_charge_vanishes_on_constrained_state():
    st = build_wave_state(make_mode_spec(mass=MASS, k_block=0.4 * np.eye(2)))
    s = sample_currents(st, constant_time_curve(0.4), 64)
    report = unitary_current_check(s)
    assert abs(report["i_total"]) < 1e-12
