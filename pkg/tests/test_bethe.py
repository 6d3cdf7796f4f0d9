import random

import numpy as np
import pytest
from gmpy2 import mpq

from superbethe import bethe as B
from superbethe.errors import DimensionMismatch, PoleError, SizeGuard, TagMismatch
from superbethe.expr import Expr, T, evaluate, psi_expr
from superbethe.kernels import f, g, h
from superbethe.lattice import PhiImageFamily

from conftest import chain

GRID = [(1, 0), (0, 1), (1, 1), (2, 1), (1, 2), (2, 2)]


def draw(seed, a, b, fam):
    return B.draw_bethe_data(random.Random(seed), a, b, fam.c, avoid=fam.model.z)


def routes(fam, d):
    out = {
        "supertrace": B.bv_supertrace(fam, d),
        "rec-u": B.bv_recursive(fam, d, "rec-u"),
        "rec-v": B.bv_recursive(fam, d, "rec-v"),
        "explicit-x": B.bv_explicit(fam, d, "X")[1],
        "explicit-y": B.bv_explicit(fam, d, "Y")[1],
        "second-order": B.bv_supertrace(fam, d, r_order="second"),
    }
    if fam.algebra == "Y21":
        out["reversed"] = B.bv_supertrace(fam, d, variant="reversed")
        out["tv-scaled"] = B.bv_tv(fam, d.conj()) * (1 / B.tv_prefactor(d.conj()))
    return out


def dual_routes(fam, d):
    return {
        "supertrace": B.dual_supertrace(fam, d),
        "rec-21": B.dual_recursive(fam, d, "rec-21"),
        "rec-32": B.dual_recursive(fam, d, "rec-32"),
        "explicit-1": B.dual_explicit(fam, d, "X")[1],
        "explicit-2": B.dual_explicit(fam, d, "Y")[1],
    }


def assert_all_equal(vectors: dict):
    names = list(vectors)
    ref = vectors[names[0]]
    for name in names[1:]:
        assert (vectors[name] - ref).is_zero(), f"{name} differs from {names[0]}"


# ---------------------------------------------------------------- data and partitions

def test_partitions():
    assert len(list(B.enumerate_partitions(["v1", "v2"], [1, 1]))) == 2
    assert len(list(B.enumerate_partitions(["u1", "u2", "u3"], [2, 1]))) == 3
    parts = list(B.enumerate_partitions(["x"], [0, 1]))
    assert len(parts) == 1 and parts[0][0] == () and parts[0][1] == ("x",)


def test_bethe_data_validation():
    with pytest.raises(PoleError):
        B.BetheData((mpq(1), mpq(1)), (), 1)
    d = B.BetheData((1, 2), (3,), 1)
    assert (d.a, d.b, d.backend) == (2, 1, "exact")
    assert d.conj().u == (2, 1) and d.swapped().u == (3,)
    assert d.to_backend("float").backend == "float"


def test_draws_avoid_poles():
    d = B.draw_bethe_data(random.Random(1), 3, 3, mpq(1), avoid=(mpq(0),))
    pts = d.u + d.v + (mpq(0),)
    for i, x in enumerate(d.u + d.v):
        for j, y in enumerate(pts):
            if i != j:
                assert x - y not in (0, 1, -1)


def test_size_guard():
    fam = chain(z=("0", "1", "2"))
    with pytest.raises(SizeGuard):
        B.bv_supertrace(fam, draw(0, 3, 2, fam))


# ---------------------------------------------------------------- low orders

def test_first_order_vectors():
    fam = chain(kappa=(1, 2, 3))
    u, v = mpq(2, 3), mpq(-7, 2)
    om = fam.omega()
    assert B.bv_supertrace(fam, B.BetheData((u,), (), 1)).equals(fam.entry(1, 2, u) @ om)
    assert B.bv_supertrace(fam, B.BetheData((), (v,), 1)).equals(fam.entry(2, 3, v) @ om)
    assert B.bv_tv(fam, B.BetheData((u,), (), 1)).equals(fam.entry(1, 2, u) @ om)
    assert B.dual_supertrace(fam, B.BetheData((u,), (), 1)).equals(fam.omega_dag() @ fam.entry(2, 1, u))


def test_phi11_display():
    fam = chain(kappa=(1, 2, 3))
    u, v = mpq(5, 3), mpq(-1, 4)
    om = fam.omega()
    want = fam.entry(1, 2, u) @ (fam.entry(2, 3, v) @ om) + (fam.entry(1, 3, u) @ om) * (fam.weight(2, v) * g(v, u, 1))
    assert B.bv_supertrace(fam, B.BetheData((u,), (v,), 1)).equals(want)


def test_phi21_and_phi12_displays():
    fam = chain(kappa=(1, 2, 3))
    u1, u2, v = mpq(1, 3), mpq(9, 2), mpq(-2)
    T_ = lambda i, j, x: T(i, j, x)
    e21 = (Expr.monomial([T_(1, 2, u1), T_(1, 2, u2), T_(2, 3, v)])
           + Expr.monomial([T_(1, 2, u1), T_(1, 3, u2)], g(v, u2, 1), [(2, v)])
           + Expr.monomial([T_(1, 3, u1), T_(1, 2, u2)], g(v, u1, 1) * f(v, u2, 1), [(2, v)]))
    assert evaluate(e21, fam).equals(B.bv_supertrace(fam, B.BetheData((u1, u2), (v,), 1)))
    u, v1, v2 = mpq(7, 5), mpq(3), mpq(-1, 2)
    e12 = (Expr.monomial([T_(1, 2, u), T_(2, 3, v1), T_(2, 3, v2)], 1 / h(v2, v1, 1))
           + Expr.monomial([T_(1, 3, u), T_(2, 3, v2)], g(v2, v1, 1) * g(v1, u, 1), [(2, v1)])
           - Expr.monomial([T_(1, 3, u), T_(2, 3, v1)], g(v2, v1, 1) * g(v2, u, 1), [(2, v2)]))
    assert evaluate(e12, fam).equals(B.bv_supertrace(fam, B.BetheData((u,), (v1, v2), 1)))


# ---------------------------------------------------------------- route agreement

@pytest.mark.parametrize("m,n", [(2, 1), (1, 2)])
@pytest.mark.parametrize("kappa", [(1, 1, 1), (1, 2, 3)])
@pytest.mark.parametrize("ab", GRID)
def test_bv_routes_agree(m, n, kappa, ab):
    fam = chain(m, n, z=("0",), kappa=kappa)
    d = draw(hash((m, kappa, ab)) % 1000, *ab, fam)
    assert_all_equal(routes(fam, d))


@pytest.mark.parametrize("m,n", [(2, 1), (1, 2)])
@pytest.mark.parametrize("ab", GRID)
def test_dual_routes_agree(m, n, ab):
    fam = chain(m, n, z=("0",), kappa=(1, 2, 3))
    d = draw(17 + ab[0] * 3 + ab[1], *ab, fam)
    assert_all_equal(dual_routes(fam, d))


@pytest.mark.parametrize("ab", [(1, 1), (2, 1), (1, 2)])
@pytest.mark.parametrize("dual", [False, True])
def test_dense_supertrace_matches_expansion(ab, dual):
    fam = chain(z=("0",), kappa=(1, 2, 3))
    d = draw(5, *ab, fam)
    fast = B.dual_supertrace(fam, d) if dual else B.bv_supertrace(fam, d)
    assert (B.dense_supertrace(fam, d, dual=dual) - fast).is_zero()


def test_routes_on_two_sites():
    fam = chain(z=("0", "1/3"), kappa=(2, 3, 5))
    for ab in [(1, 1), (2, 1), (1, 2)]:
        d = draw(ab[0] * 10 + ab[1], *ab, fam)
        assert_all_equal(routes(fam, d))
        assert_all_equal(dual_routes(fam, d))


def test_explicit_forms_beyond_supertrace_guard():
    fam = chain(z=("0",), kappa=(1, 2, 3))
    d = draw(3, 3, 2, fam)
    assert (B.bv_explicit(fam, d, "X")[1] - B.bv_explicit(fam, d, "Y")[1]).is_zero()


def test_explicit_rejects_unknown_form():
    with pytest.raises(ValueError):
        B.explicit_expr(B.BetheData((1,), (), 1), "Z")


def test_float_backend_agrees():
    fe = chain(z=("0",), kappa=(1, 2, 3))
    ff = chain(z=("0",), kappa=(1, 2, 3), backend="float")
    d = draw(2, 2, 1, fe)
    ex = np.asarray(B.bv_supertrace(fe, d).entries, dtype=complex)
    fl = B.bv_supertrace(ff, d.to_backend("float")).entries
    assert np.allclose(ex, fl, rtol=1e-12, atol=1e-12)


# ---------------------------------------------------------------- relations

@pytest.mark.parametrize("ab", GRID)
def test_tv_relation(ab):
    fam = chain(z=("0",), kappa=(1, 2, 3))
    assert B.tv_relation_residual(fam, draw(41, *ab, fam)).is_zero()


@pytest.mark.parametrize("ab", [(1, 1), (2, 1), (1, 2), (2, 2)])
def test_morphism_residuals(ab):
    fam = chain(z=("0",), kappa=(1, 2, 3))
    tf = PhiImageFamily(fam)
    res = B.morphism_residuals(fam, tf, draw(8, *ab, fam))
    assert len(res) == 16
    for name, r in res.items():
        assert r.is_zero(), name


def test_morphisms_require_matching_pair():
    fam = chain(z=("0",))
    with pytest.raises(TagMismatch):
        B.morphism_residuals(fam, fam, draw(0, 1, 1, fam))


def test_dual_is_psi_of_conjugated_vector():
    fam = chain(z=("0",), kappa=(1, 2, 3))
    d = draw(12, 2, 1, fam)
    lhs = evaluate(psi_expr(B.explicit_expr(d.conj(), "X")), fam)
    assert (lhs - B.dual_explicit(fam, d, "X")[1]).is_zero()


@pytest.mark.parametrize("route", ["explicit-x", "explicit-y", "supertrace"])
def test_symmetry(route):
    fam = chain(z=("0",), kappa=(1, 2, 3))
    for r in B.symmetry_residuals(fam, draw(4, 2, 2, fam), route).values():
        assert r.is_zero()


def test_symmetry_three_by_three_explicit():
    fam = chain(z=("0",), kappa=(1, 2, 3))
    res = B.symmetry_residuals(fam, draw(6, 3, 3, fam), "explicit-x")
    assert len(res) == 4 and all(r.is_zero() for r in res.values())


# ---------------------------------------------------------------- operators and Cartan

@pytest.mark.parametrize("ab", [(1, 1), (2, 1), (1, 2), (2, 2)])
def test_operator_recursions(ab):
    fam = chain(z=("0",), kappa=(1, 2, 3))
    d = draw(21, *ab, fam)
    assert B.operator_recursion_residual(fam, d, "X").is_zero()
    assert B.operator_recursion_residual(fam, d, "Y").is_zero()
    for form in ("X", "Y"):
        assert (B.operator_XY(fam, d, form) @ fam.omega() - B.bv_supertrace(fam, d)).is_zero()


def test_operator_recursion_edge_cases():
    fam = chain(z=("0",))
    with pytest.raises(DimensionMismatch):
        B.operator_recursion_residual(fam, B.BetheData((), (1,), 1), "X")
    with pytest.raises(ValueError):
        B.operator_recursion_residual(fam, B.BetheData((2,), (1,), 1), "Z")


@pytest.mark.parametrize("ell", [1, 2, 3])
@pytest.mark.parametrize("which", ["T12-thru-T13", "T23-thru-T13"])
def test_multiple_commutation(ell, which):
    fam = chain(z=("0", "1"), kappa=(1, 2, 3))
    us = [mpq(3, 2), mpq(-7, 3), mpq(11, 5)][:ell]
    assert B.commutation_check(fam, mpq(5, 7), us, which).is_zero()


@pytest.mark.parametrize("m,n", [(2, 1), (1, 2)])
@pytest.mark.parametrize("ab", GRID)
def test_cartan_eigenvalues(m, n, ab):
    fam = chain(m, n, z=("0",))
    d = draw(31, *ab, fam)
    phi = B.bv_supertrace(fam, d)
    assert all(r.is_zero() for r in B.cartan_residuals(fam, phi, *ab).values())


def test_cartan_detects_wrong_labels():
    fam = chain(z=("0", "1"))
    phi = B.bv_supertrace(fam, draw(2, 1, 1, fam))
    assert not all(r.is_zero() for r in B.cartan_residuals(fam, phi, 2, 1).values())


def test_empty_vector_is_vacuum():
    fam = chain(z=("0",), kappa=(1, 2, 3))
    assert B.bv_supertrace(fam, B.BetheData((), (), 1)).equals(fam.omega())
    assert B.bv_recursive(fam, B.BetheData((), (), 1)).equals(fam.omega())
