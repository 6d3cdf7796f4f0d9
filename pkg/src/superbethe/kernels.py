"""Scalar layer: the two numeric backends, rational structure functions and the Izergin-type kernel.

Exact scalars are ``gmpy2.mpq`` (always reduced, positive denominator); floating
scalars are Python/numpy complex numbers.  The two are never mixed silently:
``mpq + complex`` would promote without complaint, so every public entry point
checks backends explicitly.
"""

from __future__ import annotations

import numbers
from fractions import Fraction
from typing import Sequence

import numpy as np
from gmpy2 import mpq

from .errors import BackendMismatch, DimensionMismatch, PoleError

EXACT = "exact"
FLOAT = "float"
BACKENDS = (EXACT, FLOAT)

MPQ = type(mpq(0))

__all__ = [
    "EXACT", "FLOAT", "BACKENDS", "MPQ",
    "backend_of", "common_backend", "as_scalar", "parse_scalar", "format_scalar",
    "one", "zero", "zeros", "eye", "dtype_for", "is_zero_scalar",
    "eval_structure", "g", "f", "h", "product_over", "H_norm", "det",
    "izergin_kernel", "verify_scalar_identity", "SCALAR_IDENTITIES",
]


def backend_of(x) -> str:
    """Backend tag of a scalar; ints and fractions count as exact."""
    if isinstance(x, MPQ):
        return EXACT
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(x, (numbers.Integral, Fraction)):
        return EXACT
    if isinstance(x, (float, complex, np.floating, np.complexfloating)):
        return FLOAT
    raise TypeError(f"unsupported scalar type {type(x).__name__}")


def common_backend(*xs) -> str:
    tags = {backend_of(x) for x in xs}
    if len(tags) != 1:
        raise BackendMismatch(f"mixed scalar backends: {sorted(tags)}")
    return tags.pop()


def as_scalar(x, backend: str):
    """Coerce ``x`` into ``backend``; exact values may be promoted to float, never the reverse."""
    if backend == EXACT:
        if backend_of(x) != EXACT:
            raise BackendMismatch(f"cannot use floating value {x!r} in the exact backend")
        return mpq(x)
    if backend == FLOAT:
        if isinstance(x, MPQ):
            return complex(float(x))
        return complex(x)
    raise ValueError(f"unknown backend {backend!r}")


def parse_scalar(text, backend: str):
    """Parse ``"p/q"``, an integer string, or a ``[re, im]`` pair."""
    if isinstance(text, (list, tuple)):
        if len(text) != 2:
            raise ValueError(f"complex pairs need two entries, got {text!r}")
        if backend == EXACT:
            raise BackendMismatch("complex pairs are only valid in the float backend")
        return complex(float(text[0]), float(text[1]))
    if isinstance(text, str):
        s = text.strip()
        if backend == EXACT:
            try:
                return mpq(s)
            except ValueError as exc:
                raise ValueError(f"not a rational: {text!r}") from exc
        try:
            return complex(float(mpq(s)))
        except ValueError:
            return complex(s.replace(" ", ""))
    return as_scalar(text, backend)


def format_scalar(x):
    """Lossless JSON form: ``"p/q"`` for exact, ``[re, im]`` for float."""
    if backend_of(x) == EXACT:
        q = mpq(x)
        return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"
    z = complex(x)
    return [repr(z.real), repr(z.imag)]


def one(backend: str):
    return mpq(1) if backend == EXACT else complex(1)


def zero(backend: str):
    return mpq(0) if backend == EXACT else complex(0)


def dtype_for(backend: str):
    return object if backend == EXACT else np.complex128


def zeros(shape, backend: str) -> np.ndarray:
    if backend == EXACT:
        out = np.empty(shape, dtype=object)
        out.fill(mpq(0))
        return out
    return np.zeros(shape, dtype=np.complex128)


def eye(n: int, backend: str) -> np.ndarray:
    out = zeros((n, n), backend)
    for k in range(n):
        out[k, k] = one(backend)
    return out


def is_zero_scalar(x) -> bool:
    return x == 0


# ---------------------------------------------------------------- structure functions

def _pole(kind, u, v):
    raise PoleError(f"{kind}({u}, {v}) has a pole: arguments coincide", pair=(u, v))


def _g(u, v, c):
    d = u - v
    if d == 0:
        _pole("g", u, v)
    return c / d


def _f(u, v, c):
    d = u - v
    if d == 0:
        _pole("f", u, v)
    return 1 + c / d


def _h(u, v, c):
    return (u - v + c) / c


_KINDS = {
    "g": _g,
    "f": _f,
    "h": _h,
    "f0": _f,
    "f1": lambda u, v, c: _f(v, u, c),
}


def eval_structure(kind: str, u, v, c):
    """g = c/(u-v), f = 1+g, h = f/g = (u-v+c)/c, f0 = f, f1(u,v) = f(v,u)."""
    try:
        fn = _KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown structure function {kind!r}") from None
    backend = common_backend(u, v, c)
    if backend == EXACT:
        u, v, c = mpq(u), mpq(v), mpq(c)
        if kind == "h" and u == v:
            # h(u,u) = 1 is finite, but the contract rejects coincident arguments
            _pole("h", u, v)
    elif kind == "h" and u == v:
        _pole("h", u, v)
    if c == 0:
        raise PoleError("the constant c must be nonzero", pair=(c, c))
    return fn(u, v, c)


def g(u, v, c):
    return eval_structure("g", u, v, c)


def f(u, v, c):
    return eval_structure("f", u, v, c)


def h(u, v, c):
    """h(u,v); unlike :func:`eval_structure`, h(u,u) = 1 is allowed (used by double products h(x̄,x̄))."""
    if common_backend(u, v, c) == EXACT:
        u, v, c = mpq(u), mpq(v), mpq(c)
    return _h(u, v, c)


def _as_tuple(x) -> tuple:
    if isinstance(x, (list, tuple)):
        return tuple(x)
    return (x,)


def product_over(kind: str, left, right, c):
    """Double product of ``kind`` over all pairs (x, y), x in ``left``, y in ``right``.

    Either side may be a scalar or a sequence; an empty side gives 1.
    For ``h`` coincident pairs contribute h(x,x) = 1.
    """
    backend = backend_of(c)
    acc = one(backend)
    for x in _as_tuple(left):
        for y in _as_tuple(right):
            if kind == "h" and x == y:
                continue
            try:
                acc *= eval_structure(kind, x, y, c)
            except PoleError as exc:
                raise PoleError(f"{kind}-product: pole at pair ({x}, {y})", pair=(x, y)) from exc
    return acc


def H_norm(vs: Sequence, c, conjugated: bool = False):
    """H(v̄) = prod_{k<j} h(v_j, v_k); the conjugate H(v̄*) = prod_{j<k} h(v_j, v_k)."""
    backend = backend_of(c)
    acc = one(backend)
    vs = tuple(vs)
    for j in range(len(vs)):
        for k in range(j):
            acc *= h(vs[k], vs[j], c) if conjugated else h(vs[j], vs[k], c)
    return acc


def det(matrix):
    """Determinant by Gaussian elimination; exact for mpq, partial pivoting for complex."""
    a = [list(row) for row in matrix]
    n = len(a)
    if any(len(row) != n for row in a):
        raise DimensionMismatch("determinant of a non-square matrix")
    if n == 0:
        return mpq(1)
    exact = all(backend_of(x) == EXACT for row in a for x in row)
    result = mpq(1) if exact else complex(1)
    for col in range(n):
        if exact:
            piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        else:
            piv = max(range(col, n), key=lambda r: abs(a[r][col]))
            if a[piv][col] == 0:
                piv = None
        if piv is None:
            return result * 0
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            result = -result
        p = a[col][col]
        result *= p
        for r in range(col + 1, n):
            factor = a[r][col] / p
            if factor != 0:
                for k in range(col, n):
                    a[r][k] -= factor * a[col][k]
    return result


def izergin_kernel(vs: Sequence, us: Sequence, c):
    """K_l(v̄|ū) = Δ(v̄) Δ'(ū) h(v̄,ū) det[g(v_j,u_k)/h(v_j,u_k)].

    Δ(v̄) = prod_{j>k} g(v_j,v_k), Δ'(ū) = prod_{j>k} g(u_k,u_j); K_0 = 1.
    """
    vs, us = tuple(vs), tuple(us)
    if len(vs) != len(us):
        raise DimensionMismatch(f"kernel needs equal sizes, got {len(vs)} and {len(us)}")
    backend = backend_of(c)
    if not vs:
        return one(backend)
    for v in vs:
        for u in us:
            if v == u:
                raise PoleError(f"kernel: v = u = {v}", pair=(v, u))
    delta = one(backend)
    for j in range(len(vs)):
        for k in range(j):
            delta *= g(vs[j], vs[k], c) * g(us[k], us[j], c)
    hh = product_over("h", vs, us, c)
    if hh == 0:
        # det entries g/h would blow up; expand with the h-product folded into each row
        entries = [[g(v, u, c) * product_over("h", v, us[:k] + us[k + 1:], c)
                    for k, u in enumerate(us)] for v in vs]
        return delta * det(entries)
    entries = [[g(v, u, c) / h(v, u, c) for u in us] for v in vs]
    return delta * hh * det(entries)


# ---------------------------------------------------------------- scalar identities

def _drop(seq, k):
    return seq[:k] + seq[k + 1:]


def _kernel_recursion(sample, c):
    vs, us = tuple(sample["v"]), tuple(sample["u"])
    b = sample.get("vb_index", len(vs) - 1)
    vb, vrest = vs[b], _drop(vs, b)
    rhs = zero(backend_of(c))
    for i, ui in enumerate(us):
        urest = _drop(us, i)
        rhs += (g(vb, ui, c) * product_over("f", vrest, ui, c)
                * product_over("f", ui, urest, c) * izergin_kernel(vrest, urest, c))
    return izergin_kernel(vs, us, c) - rhs


def _pole_expansion(sample, c):
    vs, us, x = tuple(sample["v"]), tuple(sample["u"]), sample["x"]
    if len(vs) != len(us) + 1:
        raise DimensionMismatch("pole expansion needs #v = #u + 1")
    lhs = product_over("g", vs, x, c) / product_over("g", x, us, c)
    rhs = zero(backend_of(c))
    for i, vi in enumerate(vs):
        rhs += g(vi, x, c) * product_over("g", _drop(vs, i), vi, c) / product_over("g", vi, us, c)
    return lhs - rhs


def _contour_ui(sample, c):
    """J = sum_{u_i in ū_a} f(u_i, ū_a minus u_i) g(u_a,u_i) g(v,u_i), with u_a = ū[-1] and ū_a the rest.

    Closed form J = g(v,u_a){f(u_a,ū_a) - f(v,ū_a)}.
    """
    us, v = tuple(sample["u"]), sample["v"]
    ua, ubar_a = us[-1], us[:-1]
    j_sum = zero(backend_of(c))
    for i, ui in enumerate(ubar_a):
        j_sum += product_over("f", ui, _drop(ubar_a, i), c) * g(ua, ui, c) * g(v, ui, c)
    closed = g(v, ua, c) * (product_over("f", ua, ubar_a, c) - product_over("f", v, ubar_a, c))
    return j_sum - closed


def _contour_v0(sample, c):
    vs, vb, ui = tuple(sample["v"]), sample["vb"], sample["u"]
    lhs = zero(backend_of(c))
    for i, vi in enumerate(vs):
        lhs += g(vi, ui, c) * g(vb, vi, c) * product_over("f", _drop(vs, i), vi, c)
    rhs = g(vb, ui, c) * (product_over("f", vs, ui, c) - product_over("f", vs, vb, c))
    return lhs - rhs


SCALAR_IDENTITIES = {
    "kernel-recursion": _kernel_recursion,
    "pole-expansion": _pole_expansion,
    "contour-ui": _contour_ui,
    "contour-v0": _contour_v0,
}


def verify_scalar_identity(name: str, sample: dict, c):
    """Left-minus-right of a named scalar identity; exactly zero on the exact backend.

    Sample keys:
      kernel-recursion  v, u (equal sizes), optional vb_index (default: last v)
      pole-expansion    v (size l+1), u (size l), x
      contour-ui        u (last element plays u_a), v
      contour-v0        v (the set v̄_II'), vb, u
    """
    try:
        fn = SCALAR_IDENTITIES[name]
    except KeyError:
        raise ValueError(f"unknown identity {name!r}") from None
    return fn(sample, c)
