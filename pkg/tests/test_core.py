from __future__ import annotations

from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cryocount.core import (
    IncompatibleGroup,
    IsingProblem,
    Paulimask,
    PauliGroup,
    PauliString,
    QmlProblem,
    ShotRecord,
    default_b_theta,
    default_b_x,
    hamiltonian_expectation,
    hea_parameter_count,
    inclusive_pauli,
    pair_index,
    parity,
    pauli_expectation,
    paulimask_of,
    qaoa_cost,
    qaoa_expectation_from_counters,
    qml_class_probs,
    qml_loss,
    synthetic_grouping,
)

bitvec = lambda n: st.lists(st.integers(0, 1), min_size=n, max_size=n)


def test_paulimask_marks_non_identity_positions():
    assert str(paulimask_of(PauliString("XIZY"))) == "1011"
    assert paulimask_of(PauliString("IIII")).popcount() == 0


def test_pauli_string_rejects_bad_ops():
    with pytest.raises(ValueError):
        PauliString("XQ")


def test_lowercase_normalised():
    assert PauliString("xz").ops == "XZ"


def test_inclusive_string_is_union():
    members = [PauliString("XIZ"), PauliString("IYZ"), PauliString("XII")]
    assert inclusive_pauli(members).ops == "XYZ"


def test_incompatible_group_detected():
    with pytest.raises(IncompatibleGroup):
        inclusive_pauli([PauliString("XI"), PauliString("ZI")])
    with pytest.raises(IncompatibleGroup):
        PauliGroup([PauliString("XI")], PauliString("ZZ"), [1.0])


def test_group_masks():
    g = PauliGroup.from_members([PauliString("XI"), PauliString("XZ")], [0.5, -1])
    assert [str(m) for m in g.masks] == ["10", "11"]
    assert g.inclusive.ops == "XZ"


@pytest.mark.parametrize(
    "mask,z,want",
    [("1011", "1001", 0), ("0000", "1111", 0), ("1", "1", 1), ("111", "101", 0), ("110", "100", 1)],
)
def test_parity_examples(mask, z, want):
    assert parity(Paulimask.from_string(mask), ShotRecord.from_string(z)) == want


def test_parity_length_mismatch():
    with pytest.raises(ValueError):
        parity([1, 0], [1, 0, 1])


@given(st.integers(1, 12).flatmap(lambda n: st.tuples(bitvec(n), bitvec(n), bitvec(n))))
def test_parity_is_linear_in_mask(data):
    m1, m2, z = data
    xor = [a ^ b for a, b in zip(m1, m2)]
    assert parity(xor, z) == parity(m1, z) ^ parity(m2, z)


@given(st.integers(1, 12).flatmap(lambda n: st.tuples(bitvec(n), bitvec(n), bitvec(n))))
def test_parity_is_linear_in_shot(data):
    m, z1, z2 = data
    xor = [a ^ b for a, b in zip(z1, z2)]
    assert parity(m, xor) == parity(m, z1) ^ parity(m, z2)


def test_pauli_expectation_exact():
    assert pauli_expectation(0, 10) == 1
    assert pauli_expectation(10, 10) == -1
    assert pauli_expectation(3, 8) == Fraction(1, 4)
    with pytest.raises(ValueError):
        pauli_expectation(9, 8)


@given(st.integers(1, 10**6).flatmap(lambda T: st.tuples(st.just(T), st.integers(0, T))))
def test_pauli_expectation_in_range(tc):
    T, c = tc
    e = pauli_expectation(c, T)
    assert -1 <= e <= 1 and isinstance(e, Fraction)


def test_hamiltonian_expectation_weighted_sum():
    e = hamiltonian_expectation([0.5, -2], [Fraction(1, 2), Fraction(-1, 4)])
    assert e == Fraction(1, 4) + Fraction(1, 2)


def _ising(N, seed):
    return IsingProblem.random(N, seed, T=64)


def test_ising_validation():
    with pytest.raises(ValueError):
        IsingProblem(2, np.zeros(2), np.array([[0, 1], [2, 0]]))
    with pytest.raises(ValueError):
        IsingProblem(2, np.zeros(2), np.eye(2))


def test_pair_index_order():
    assert pair_index(3) == [(0, 1), (0, 2), (1, 2)]


@settings(max_examples=50)
@given(st.integers(1, 6), st.integers(0, 1000), st.data())
def test_counter_form_matches_direct_qaoa_average(N, seed, data):
    prob = _ising(N, seed)
    shots = np.array(data.draw(st.lists(bitvec(N), min_size=1, max_size=40)), dtype=np.int64)
    T = len(shots)
    C_i = shots.sum(axis=0)
    C_ij = [int((shots[:, i] ^ shots[:, j]).sum()) for i, j in pair_index(N)]
    direct = sum((qaoa_cost(z, prob) for z in shots), Fraction(0)) / T
    assert qaoa_expectation_from_counters(C_i, C_ij, prob, T) == direct


def test_qml_probs_softmax():
    p = qml_class_probs([0, 16], 16)
    assert p.sum() == pytest.approx(1)
    assert p[1] / p[0] == pytest.approx(np.e)


def test_qml_loss():
    probs = [[0.5, 0.5], [0.25, 0.75]]
    assert qml_loss(probs, [0, 1]) == pytest.approx(-(np.log(0.5) + np.log(0.75)) / 2)
    with pytest.raises(ValueError):
        qml_loss([[1.0, 0.0]], [1])


def test_qml_problem_defaults():
    q = QmlProblem(3, [0, 1, 2, 1], T=10)
    assert q.N_d == 4


def test_parameter_defaults():
    assert hea_parameter_count(4, 1) == 16
    assert default_b_theta(4) == 32 * 16
    assert default_b_x(10) == 320


def test_synthetic_grouping_shape_and_cover():
    prob = synthetic_grouping(3, seed=7)
    assert prob.N_G == 9 and prob.K == 9
    for g in prob.groups:
        assert all(m.covered_by(g.inclusive) for m in g.members)
        assert all(m.weight >= 1 for m in g.members)


def test_synthetic_grouping_deterministic():
    a = synthetic_grouping(2, seed=3)
    b = synthetic_grouping(2, seed=3)
    assert [g.members for g in a.groups] == [g.members for g in b.groups]


def test_all_z_shots_expectation_brute_force():
    # <ZZ> on every 2-bit outcome of a uniform sample
    shots = list(product([0, 1], repeat=2))
    c = sum(parity([1, 1], z) for z in shots)
    assert pauli_expectation(c, len(shots)) == 0


@given(st.lists(st.sampled_from("IXYZ"), min_size=1, max_size=10))
def test_inclusive_of_inclusive_is_itself(ops):
    gp = PauliString("".join(ops))
    assert inclusive_pauli([gp]) == gp


@given(st.integers(1, 1000).flatmap(lambda T: st.tuples(st.just(T), st.lists(st.integers(0, T), min_size=1, max_size=12))),
       st.randoms())
def test_qml_probs_normalised_and_permutation_equivariant(tc, rnd):
    T, counts = tc
    p = qml_class_probs(counts, T)
    assert abs(p.sum() - 1) <= 1e-12
    perm = list(range(len(counts)))
    rnd.shuffle(perm)
    q = qml_class_probs([counts[i] for i in perm], T)
    # summation order may move the last ulp
    assert np.allclose(q, p[perm], rtol=1e-14, atol=0)
