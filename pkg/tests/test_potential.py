import itertools
import math

import pytest
from hypothesis import given, strategies as st

from qdim import symbolic as sy
from qdim.exceptions import DomainError, StandingAssumptionError
from qdim.potential import Potential, ProbabilityVector, xi


def test_probability_vector_validation():
    with pytest.raises(DomainError):
        ProbabilityVector.from_sequence((0.5, 0.5, 0.0))
    with pytest.raises(DomainError):
        ProbabilityVector.from_sequence((0.5, 0.4, 0.2))
    p = ProbabilityVector.from_sequence((0.4, 0.35, 0.25 + 1e-11), normalize_tol=1e-9)
    assert math.isclose(sum(p.as_tuple()), 1.0, abs_tol=1e-15)
    assert p[3] == pytest.approx(0.25)


def test_enumerate_class_examples(pot):
    assert set(pot.enumerate_class((1, 0))) == {(1, 0), (0, 3)}
    assert set(pot.enumerate_class((1, 1, 0))) == {(1, 1, 0), (1, 0, 3), (0, 3, 3)}
    assert pot.enumerate_class((3, 1)) == [(3, 1)]
    assert pot.class_size((1, 1, 0, 1, 0)) == 6


def test_psi_examples(pot):
    assert pot.psi((3, 1)) == pytest.approx(0.0875, abs=1e-15)
    assert pot.psi((1, 0)) == pytest.approx(0.24, abs=1e-15)
    assert pot.psi((1, 1, 0)) == pytest.approx(0.109, abs=1e-15)
    assert pot.psi(()) == 1.0
    with pytest.raises(DomainError):
        pot.psi((0, 3))


def test_psi_matches_enumeration(pot):
    for n in range(1, 7):
        for i in sy.enumerate_words(n, "A"):
            assert pot.psi(i) == pytest.approx(pot.psi_by_enumeration(i), rel=1e-12)


def test_xi_examples():
    assert xi((1, 1)) == 0
    assert xi((3, 1, 1)) == 1
    assert xi((1, 0)) == 2
    assert xi(()) == 0


def test_a_values(pot):
    assert pot.a_value(1) == pytest.approx(0.4)
    assert pot.a_value(2) == pytest.approx(0.24)
    assert pot.a_value(3) == pytest.approx(0.109)
    for w in range(1, 8):
        assert pot.a_value(w) == pytest.approx(pot.psi((1,) * (w - 1) + (0,)), rel=1e-13)


def test_q0_examples():
    assert Potential(ProbabilityVector.from_sequence((0.4, 0.35, 0.25))).q0 == 1
    assert Potential(ProbabilityVector.from_sequence((0.2, 0.6, 0.2))).q0 == math.inf
    assert Potential(ProbabilityVector.uniform()).q0 == 2
    with pytest.raises(StandingAssumptionError):
        Potential(ProbabilityVector.from_sequence((0.3, 0.3, 0.4))).q0


def test_star_examples(pot):
    assert pot.star((1, 1)) == (1, 0)
    assert pot.star((3, 1)) == (3, 0)
    assert pot.star((1, 0)) == (1, 0)


def test_psi_hat_examples(pot):
    assert pot.psi_hat((1, 0)) == pytest.approx(0.24)
    assert pot.psi_hat((1, 1)) == pytest.approx(0.24)
    assert pot.psi_hat((3, 1)) == pytest.approx(0.10)
    assert pot.psi_hat(()) == 1.0


@pytest.mark.parametrize("p", [(0.4, 0.35, 0.25), (1 / 3, 1 / 3, 1 / 3), (0.2, 0.6, 0.2), (0.1, 0.5, 0.4)])
def test_psi_hat_forms_agree(p):
    pot = Potential(ProbabilityVector.from_sequence(p))
    for n in range(1, 8):
        for i in sy.enumerate_words(n, "A"):
            h = pot.psi_hat(i)
            assert h == pytest.approx(pot.psi_hat(i, method="star"), rel=1e-13)
            assert h >= pot.psi(i) * (1 - 1e-15)
            if i[-1] != 1:
                assert h == pot.psi(i)


def test_psi_hat_requires_standing_assumption():
    pot = Potential(ProbabilityVector.from_sequence((0.3, 0.3, 0.4)))
    with pytest.raises(StandingAssumptionError):
        pot.psi_hat((1, 1))
    assert pot.psi((1, 1)) == pytest.approx(0.09)


def test_phi_t(pot):
    assert pot.phi_t((1, 0), 0.0, 2) == 1.0
    assert pot.phi_t((1, 0), 0.5, 2, hat=True) == pytest.approx(math.sqrt(0.24 / 81), rel=1e-12)
    assert pot.phi_t((1, 0), 1.0, 1) == pytest.approx(0.24 / 9)


@given(st.lists(st.sampled_from((0, 1, 3)), min_size=1, max_size=12).map(tuple))
def test_psi_class_masses_sum_to_word_masses(w):
    pot = Potential(ProbabilityVector.from_sequence((0.4, 0.35, 0.25)))
    i = sy.canonicalize(w)
    total = sum(pot.p.word_mass(eta) for eta in pot.enumerate_class(i))
    assert pot.psi(i) == pytest.approx(total, rel=1e-12)


def test_psi_partition_of_unity(pot):
    for n in range(1, 8):
        assert math.fsum(pot.psi(i) for i in sy.enumerate_words(n)) == pytest.approx(1.0, abs=1e-13)


def test_multiplicativity_at_good_split_points(pot):
    for i in sy.enumerate_words(7):
        for z in sy.decompose_blocks(i)["D_Good"]:
            assert pot.psi(i) == pytest.approx(pot.psi(i[:z]) * pot.psi(i[z:]), rel=1e-12)


def test_enumeration_class_matches_fiber(pot):
    for eta in itertools.product(sy.ALPHABET, repeat=5):
        assert eta in pot.enumerate_class(sy.canonicalize(eta))
