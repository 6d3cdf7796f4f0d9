import itertools

import pytest
from gmpy2 import mpq
from hypothesis import given, settings, strategies as st

from superbethe.errors import DimensionMismatch, PoleError
from superbethe.kernels import (
    EXACT, FLOAT, H_norm, as_scalar, det, eval_structure, f, format_scalar, g, h, izergin_kernel, parse_scalar,
    product_over, verify_scalar_identity,
)

rationals = st.fractions(min_value=-20, max_value=20, max_denominator=9).map(mpq)


@pytest.mark.parametrize("kind, expected", [("g", 1), ("h", 2), ("f1", 0), ("f", 2), ("f0", 2)])
def test_structure_values(kind, expected):
    assert eval_structure(kind, 3, 1, 2) == expected


def test_poles_raise():
    with pytest.raises(PoleError):
        g(mpq(2), mpq(2), 1)
    with pytest.raises(PoleError):
        eval_structure("h", mpq(1), mpq(1), 1)
    with pytest.raises(PoleError):
        g(1, 0, 0)
    with pytest.raises(ValueError):
        eval_structure("q", 1, 2, 1)


def test_h_on_diagonal_is_one():
    assert h(mpq(4), mpq(4), 1) == 1


def test_products():
    assert product_over("f", (), 5, mpq(1)) == 1
    assert product_over("g", (3, 5), 1, mpq(2)) == mpq(1, 2)
    assert product_over("f", (2,), (4, 6), mpq(1)) == mpq(3, 8)
    with pytest.raises(PoleError) as info:
        product_over("g", (1, 2), (2,), mpq(1))
    assert info.value.pair == (2, 2)


def test_H_norm():
    assert H_norm([7], mpq(1)) == 1
    assert H_norm([1, 2], mpq(1)) == 2
    assert H_norm([1, 2], mpq(1), conjugated=True) == 0


def test_izergin_small_cases():
    assert izergin_kernel((2,), (1,), mpq(1)) == g(2, 1, 1)
    assert izergin_kernel((), (), mpq(1)) == 1
    assert izergin_kernel((3, 5), (1, 2), mpq(1)) == mpq(2, 3)
    with pytest.raises(DimensionMismatch):
        izergin_kernel((1,), (), mpq(1))


def test_izergin_through_h_zero():
    # v - u = -c makes an h vanish; the kernel stays finite and matches a nearby limit from both sides
    val = izergin_kernel((mpq(0), mpq(5)), (mpq(1), mpq(3)), mpq(1))
    eps = mpq(1, 10**12)
    near = izergin_kernel((mpq(0) + eps, mpq(5)), (mpq(1), mpq(3)), mpq(1))
    assert abs(val - near) < mpq(1, 10**9)


@settings(max_examples=40, deadline=None)
@given(st.lists(rationals, min_size=4, max_size=4, unique=True))
def test_izergin_symmetric_in_each_set(xs):
    v, u = xs[:2], xs[2:]
    if any(a - b in (0, 1, -1) for a in v for b in u):
        return
    k = izergin_kernel(v, u, mpq(1))
    assert izergin_kernel(v[::-1], u, mpq(1)) == k
    assert izergin_kernel(v, u[::-1], mpq(1)) == k


@settings(max_examples=40, deadline=None)
@given(rationals, rationals, st.sampled_from([mpq(1), mpq(2), mpq(-3, 2)]))
def test_structure_relations(u, v, c):
    if u == v:
        return
    assert f(u, v, c) == 1 + g(u, v, c)
    assert h(u, v, c) == f(u, v, c) / g(u, v, c)
    assert g(u, v, c) == -g(v, u, c)
    assert eval_structure("f1", u, v, c) == f(v, u, c)


def test_named_identities():
    c = mpq(1)
    assert verify_scalar_identity("contour-ui", {"u": [mpq(1), mpq(4)], "v": mpq(7)}, c) == 0
    assert verify_scalar_identity("kernel-recursion", {"v": [mpq(3), mpq(5)], "u": [mpq(1), mpq(2)],
                                                       "vb_index": 1}, c) == 0
    assert verify_scalar_identity("pole-expansion", {"v": [mpq(2), mpq(6)], "u": [mpq(4)], "x": mpq(9)}, c) == 0
    assert verify_scalar_identity("contour-v0", {"v": [mpq(2), mpq(6)], "vb": mpq(11), "u": mpq(-3)}, c) == 0
    with pytest.raises(ValueError):
        verify_scalar_identity("nope", {}, c)


@settings(max_examples=25, deadline=None)
@given(st.lists(rationals, min_size=8, max_size=8, unique=True), st.integers(0, 2))
def test_identities_on_random_draws(xs, lm1):
    c = mpq(1)
    if any(a - b in (1, -1) for a, b in itertools.combinations(xs, 2)):
        return
    l = lm1 + 1
    v, u = xs[:l], xs[l:2 * l]
    assert verify_scalar_identity("kernel-recursion", {"v": v, "u": u}, c) == 0
    assert verify_scalar_identity("pole-expansion", {"v": xs[:l + 1], "u": xs[l + 1:2 * l + 1], "x": xs[-1]}, c) == 0
    assert verify_scalar_identity("contour-ui", {"u": xs[:l + 1], "v": xs[-1]}, c) == 0
    assert verify_scalar_identity("contour-v0", {"v": xs[:l], "vb": xs[-2], "u": xs[-1]}, c) == 0


def test_det_matches_numpy_on_floats():
    import numpy as np
    m = [[complex(1, 2), 3], [4, complex(0, -1)]]
    assert abs(det(m) - np.linalg.det(np.array(m))) < 1e-12
    assert det([[mpq(1), mpq(2)], [mpq(2), mpq(4)]]) == 0


def test_scalar_io_round_trip():
    assert parse_scalar("3/4", EXACT) == mpq(3, 4)
    assert parse_scalar([0.5, -1], FLOAT) == complex(0.5, -1)
    assert format_scalar(mpq(-6, 4)) == "-3/2"
    assert format_scalar(mpq(5)) == "5"
    assert parse_scalar(format_scalar(mpq(-3, 2)), EXACT) == mpq(-3, 2)
    z = complex(0.1, 2.5)
    assert parse_scalar([float(t) for t in format_scalar(z)], FLOAT) == z
    assert as_scalar(mpq(1, 2), FLOAT) == 0.5
    with pytest.raises(ValueError):
        parse_scalar("x/y", EXACT)
