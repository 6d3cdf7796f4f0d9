import random

import numpy as np
import pytest
from gmpy2 import mpq

from superbethe.errors import BackendMismatch, DimensionMismatch
from superbethe.graded import (
    GradedSpace, GradedVector, Grading, elementary, from_coefficients, graded_kron, grading_operator,
    identity, perm_P, split_first_factor, supercommutator, supertrace, supertranspose, to_coefficients,
)

G21 = Grading.distinguished(2, 1)
G12 = Grading.distinguished(1, 2)
S1 = GradedSpace.power(G21, 1)
S2 = GradedSpace.power(G21, 2)


def E(space, p, i, j, backend="exact"):
    return elementary(space, p, i, j, backend)


def random_homogeneous(space, parity, rng):
    """Random exact operator of definite parity."""
    acc = None
    for col in range(space.dim):
        for row in range(space.dim):
            if (space.total_parity[row] + space.total_parity[col]) % 2 != parity:
                continue
            w = mpq(rng.randint(-5, 5), rng.randint(1, 3))
            coeffs = np.zeros((space.dim, space.dim), dtype=object)
            coeffs[:] = mpq(0)
            coeffs[row, col] = w
            term = from_coefficients(space, coeffs, parity)
            acc = term if acc is None else acc + term
    return acc


def test_grading_flavours():
    assert tuple(G21.parity) == (0, 0, 1)
    assert tuple(G12.parity) == (0, 1, 1)
    assert G21.m == 2 and G21.n == 1 and G21.dim == 3
    assert Grading.custom([1, 0, 0]).dim == 3


def test_space_indexing_round_trip():
    sp = GradedSpace.power(G21, 3)
    for flat in range(sp.dim):
        assert sp.index(sp.multi(flat)) == flat
    assert sp.label(sp.index((1, 2, 3))) == "e1⊗e2⊗e3"


def test_koszul_exchange_sign():
    left = E(S2, 2, 3, 1) @ E(S2, 1, 3, 2)
    right = E(S2, 1, 3, 2) @ E(S2, 2, 3, 1)
    kron = graded_kron(E(S1, 1, 3, 2), E(S1, 1, 3, 1))
    assert (left + kron).is_zero()
    assert (right - kron).is_zero()


def test_even_factors_commute():
    assert (E(S2, 1, 1, 1) @ E(S2, 2, 2, 2) - graded_kron(E(S1, 1, 1, 1), E(S1, 1, 2, 2))).is_zero()


def test_single_factor_action():
    e3 = GradedVector.basis(S1, (3,))
    e2 = GradedVector.basis(S1, (2,))
    assert (E(S1, 1, 2, 3) @ e3).equals(e2)


def test_kron_identity_and_block_embedding():
    B = E(S1, 1, 2, 1)
    out = graded_kron(identity(S1), B)
    assert out.equals(E(S2, 2, 2, 1))


def test_kron_matches_elementary_route():
    sq = graded_kron(E(S1, 1, 3, 2), E(S1, 1, 3, 2))
    other = E(S2, 1, 3, 2) @ E(S2, 2, 3, 2)
    assert (sq - other).is_zero()
    assert (sq @ sq).is_zero()


def test_odd_exchange_consistency():
    rng = random.Random(3)
    A = random_homogeneous(S1, 1, rng)
    B = random_homogeneous(S1, 1, rng)
    A1 = graded_kron(A, identity(S1))
    B2 = graded_kron(identity(S1), B)
    assert ((A1 @ B2) + (B2 @ A1)).is_zero()
    assert (A1 @ B2).equals(graded_kron(A, B))


def test_supertrace_basics():
    assert supertrace(E(S1, 1, 1, 1)) == 1
    assert supertrace(E(S1, 1, 3, 3)) == -1
    assert supertrace(identity(S1)) == 1
    assert supertrace(identity(GradedSpace.power(G12, 1))) == -1


def test_supertrace_graded_cyclic():
    rng = random.Random(11)
    for pa in (0, 1):
        for pb in (0, 1):
            A = random_homogeneous(S2, pa, rng)
            B = random_homogeneous(S2, pb, rng)
            sign = -1 if pa * pb else 1
            assert supertrace(A @ B) == sign * supertrace(B @ A)


def test_partial_supertrace():
    A = graded_kron(E(S1, 1, 2, 2), E(S1, 1, 1, 3))
    red = supertrace(A, [1])
    assert red.equals(E(S1, 1, 1, 3))
    assert supertrace(graded_kron(E(S1, 1, 3, 3), E(S1, 1, 1, 3)), [1]).equals(-E(S1, 1, 1, 3))
    with pytest.raises(IndexError):
        supertrace(A, [3])


def test_supertranspose_orbit():
    E32, E23 = E(S1, 1, 3, 2), E(S1, 1, 2, 3)
    assert supertranspose(E32, 1).equals(E23)
    assert supertranspose(E32, 2).equals(-E32)
    assert supertranspose(E32, 3).equals(-E23)
    assert supertranspose(E32, 4).equals(E32)
    assert supertranspose(E(S1, 1, 2, 1), 1).equals(E(S1, 1, 1, 2))


def test_supertranspose_preserves_supertrace():
    rng = random.Random(5)
    A = random_homogeneous(S2, 0, rng) + random_homogeneous(S2, 1, rng)
    assert supertrace(supertranspose(A, 1)) == supertrace(A)


def test_permutation_operator():
    P = perm_P(G21)
    v33 = GradedVector.basis(S2, (3, 3))
    assert (P @ v33).equals(-v33)
    assert (P @ GradedVector.basis(S2, (1, 2))).equals(GradedVector.basis(S2, (2, 1)))
    assert supertranspose(P, 1, [1, 2]).equals(P)
    assert (P @ P).equals(identity(S2))


def test_grading_operator_realizes_parity():
    om = grading_operator(S2)
    X = E(S2, 1, 3, 1)
    assert (om @ X @ om).equals(-X)


def test_split_first_factor_reassembles():
    rng = random.Random(8)
    A = random_homogeneous(S2, 1, rng)
    parts = split_first_factor(A)
    acc = None
    for (i, j), blk in parts.items():
        term = graded_kron(E(S1, 1, i, j), blk)
        acc = term if acc is None else acc + term
    assert acc.equals(A)


def test_supercommutator_of_odd_elementaries():
    X, Y = E(S1, 1, 1, 3), E(S1, 1, 3, 1)
    assert supercommutator(X, Y).equals(E(S1, 1, 1, 1) + E(S1, 1, 3, 3))


def test_backend_and_shape_errors():
    with pytest.raises(BackendMismatch):
        E(S1, 1, 1, 1) + E(S1, 1, 1, 1, "float")
    with pytest.raises(DimensionMismatch):
        E(S1, 1, 1, 1) @ E(S2, 1, 1, 1)
    with pytest.raises(IndexError):
        E(S1, 2, 1, 1)


def test_float_backend_agrees_with_exact():
    A = E(S2, 2, 3, 1) @ E(S2, 1, 3, 2)
    Af = E(S2, 2, 3, 1, "float") @ E(S2, 1, 3, 2, "float")
    assert np.allclose(np.asarray(A.entries, dtype=complex), Af.entries)
    assert A.to_backend("float").equals(Af)


def test_coefficient_round_trip():
    rng = random.Random(2)
    A = random_homogeneous(S2, 1, rng)
    assert from_coefficients(S2, to_coefficients(A), 1).equals(A)
