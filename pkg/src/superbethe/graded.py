"""Z2-graded linear algebra on ordered tensor products of C^{m|n}.

Every operator is stored as a plain dense matrix in the product basis
e_{a1} ⊗ ... ⊗ e_{aN} (factor 1 most significant).  The graded basis element
E_{i1 j1} ⊗ ... ⊗ E_{iN jN} has plain matrix sigma(I,J) |I><J| with

    sigma(I,J) = prod_p (-1)^{([i_p]+[j_p]) * sum_{q<p} [j_q]}.

This is the only place Koszul signs enter: kron, partial supertrace, partial
supertransposition and factor splitting all work on graded-basis coefficients
``sigma * plain`` and convert back.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import BackendMismatch, DimensionMismatch
from .kernels import EXACT, FLOAT, as_scalar, backend_of, eye, one, zero, zeros

__all__ = [
    "Grading", "GradedSpace", "GradedMatrix", "GradedVector",
    "identity", "elementary", "elementary_action", "graded_kron", "supertrace",
    "supertranspose", "perm_P", "grading_operator", "split_first_factor",
    "to_coefficients", "from_coefficients", "supercommutator",
]


@dataclass(frozen=True)
class Grading:
    """Parity assignment on the basis of C^{m|n}; indices are 1-based."""

    parity: tuple
    flavor: str = "custom"

    def __post_init__(self):
        p = tuple(int(x) for x in self.parity)
        if not p or any(x not in (0, 1) for x in p):
            raise ValueError(f"parities must be a nonempty sequence of 0/1, got {self.parity!r}")
        object.__setattr__(self, "parity", p)

    @classmethod
    def distinguished(cls, m: int, n: int) -> "Grading":
        return cls((0,) * m + (1,) * n, "distinguished")

    @classmethod
    def fermionic(cls, m: int, n: int) -> "Grading":
        par = tuple(1 - (k % 2) for k in range(m + n))  # [2i-1] = 1, [2i] = 0
        return cls._checked(par, m, n, "fermionic")

    @classmethod
    def alternating(cls, m: int, n: int) -> "Grading":
        par = tuple(1 if k % 4 in (0, 1) else 0 for k in range(m + n))
        return cls._checked(par, m, n, "alternating")

    @classmethod
    def custom(cls, parity: Sequence[int]) -> "Grading":
        return cls(tuple(parity), "custom")

    @classmethod
    def _checked(cls, par, m, n, flavor):
        if par.count(0) != m:
            raise ValueError(f"{flavor} grading of length {m + n} has {par.count(0)} even indices, not {m}")
        return cls(par, flavor)

    @property
    def m(self) -> int:
        return self.parity.count(0)

    @property
    def n(self) -> int:
        return self.parity.count(1)

    @property
    def dim(self) -> int:
        return len(self.parity)

    def __getitem__(self, i: int) -> int:
        if not 1 <= i <= len(self.parity):
            raise IndexError(f"basis index {i} outside 1..{len(self.parity)}")
        return self.parity[i - 1]

    def __str__(self):
        return f"({self.m}|{self.n})"


@dataclass(frozen=True)
class GradedSpace:
    """Ordered tensor product of graded factors."""

    factors: tuple

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not all(isinstance(gr, Grading) for gr in self.factors):
            raise TypeError("factors must be Grading instances")

    @classmethod
    def power(cls, grading: Grading, n: int) -> "GradedSpace":
        return cls((grading,) * n)

    @property
    def nfactors(self) -> int:
        return len(self.factors)

    @property
    def dims(self) -> tuple:
        return tuple(gr.dim for gr in self.factors)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64)) if self.factors else 1

    def __add__(self, other: "GradedSpace") -> "GradedSpace":
        return GradedSpace(self.factors + other.factors)

    def without(self, positions: Iterable[int]) -> "GradedSpace":
        drop = set(positions)
        return GradedSpace(tuple(gr for p, gr in enumerate(self.factors, 1) if p not in drop))

    @property
    def digits(self) -> np.ndarray:
        """(dim, nfactors) array of 0-based basis indices per factor."""
        return _digits(self.dims)

    @property
    def parities(self) -> np.ndarray:
        return _parities(self.factors)

    @property
    def total_parity(self) -> np.ndarray:
        return self.parities.sum(axis=1) % 2

    @property
    def koszul(self) -> np.ndarray:
        return _koszul(self.factors)

    def index(self, multi: Sequence[int]) -> int:
        """Flat position of the basis vector with 1-based factor indices ``multi``."""
        if len(multi) != self.nfactors:
            raise DimensionMismatch(f"expected {self.nfactors} indices, got {len(multi)}")
        flat = 0
        for d, a in zip(self.dims, multi):
            if not 1 <= a <= d:
                raise IndexError(f"basis index {a} outside 1..{d}")
            flat = flat * d + (a - 1)
        return flat

    def multi(self, flat: int) -> tuple:
        return tuple(int(x) + 1 for x in self.digits[flat])

    def label(self, flat: int) -> str:
        return "⊗".join(f"e{a}" for a in self.multi(flat))


@lru_cache(maxsize=64)
def _digits(dims: tuple) -> np.ndarray:
    if not dims:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.indices(dims).reshape(len(dims), -1).T
    grids.flags.writeable = False
    return grids


@lru_cache(maxsize=64)
def _parities(factors: tuple) -> np.ndarray:
    dig = _digits(tuple(gr.dim for gr in factors))
    out = np.zeros_like(dig)
    for p, gr in enumerate(factors):
        out[:, p] = np.asarray(gr.parity)[dig[:, p]]
    out.flags.writeable = False
    return out


@lru_cache(maxsize=32)
def _koszul(factors: tuple) -> np.ndarray:
    par = _parities(factors).astype(np.int8)
    n = par.shape[0]
    expo = np.zeros((n, n), dtype=np.int8)
    prefix = np.zeros(n, dtype=np.int8)  # sum_{q<p} [j_q] for the column index
    for p in range(par.shape[1]):
        expo ^= ((par[:, p, None] ^ par[None, :, p]) & prefix[None, :])
        prefix ^= par[:, p]
    sign = (1 - 2 * expo).astype(np.int8)
    sign.flags.writeable = False
    return sign


def _backend_of_array(arr: np.ndarray) -> str:
    return EXACT if arr.dtype == object else FLOAT


def _apply_sign(sign: np.ndarray, arr: np.ndarray) -> np.ndarray:
    """Entrywise ±1 multiplication that keeps mpq entries as mpq."""
    if arr.dtype == object:
        return np.where(sign > 0, arr, -arr)
    return sign * arr


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


class GradedMatrix:
    """Dense operator on a graded space; ``parity`` is set for homogeneous operators."""

    __slots__ = ("space", "entries", "parity")

    def __init__(self, space: GradedSpace, entries: np.ndarray, parity=None, check: bool = True):
        entries = np.asarray(entries)
        if entries.dtype != object and entries.dtype != np.complex128:
            entries = entries.astype(np.complex128)
        if entries.shape != (space.dim, space.dim):
            raise DimensionMismatch(f"matrix shape {entries.shape} does not match space dim {space.dim}")
        if parity is not None and check:
            tp = space.total_parity
            bad = (tp[:, None] + tp[None, :] + parity) % 2 == 1
            if np.any(entries[bad] != 0):
                raise ValueError(f"matrix has entries outside parity sector {parity}")
        self.space = space
        self.entries = _frozen(entries)
        self.parity = parity

    # -- construction helpers
    @property
    def backend(self) -> str:
        return _backend_of_array(self.entries)

    def _like(self, entries, parity=None):
        return GradedMatrix(self.space, entries, parity, check=False)

    def _check_other(self, other: "GradedMatrix"):
        if self.space != other.space:
            raise DimensionMismatch("operators act on different spaces")
        if self.backend != other.backend:
            raise BackendMismatch("operators use different scalar backends")

    # -- arithmetic
    def __matmul__(self, other):
        if isinstance(other, GradedMatrix):
            self._check_other(other)
            par = None if self.parity is None or other.parity is None else (self.parity + other.parity) % 2
            return self._like(self.entries @ other.entries, par)
        if isinstance(other, GradedVector):
            if other.side != "column":
                raise DimensionMismatch("matrix times covector is undefined")
            if self.space != other.space:
                raise DimensionMismatch("operator and vector live on different spaces")
            if self.backend != other.backend:
                raise BackendMismatch("operator and vector use different scalar backends")
            return GradedVector(self.space, self.entries @ other.entries, "column")
        return NotImplemented

    def __add__(self, other):
        if not isinstance(other, GradedMatrix):
            return NotImplemented
        self._check_other(other)
        par = self.parity if self.parity == other.parity else None
        return self._like(self.entries + other.entries, par)

    def __sub__(self, other):
        if not isinstance(other, GradedMatrix):
            return NotImplemented
        self._check_other(other)
        par = self.parity if self.parity == other.parity else None
        return self._like(self.entries - other.entries, par)

    def __neg__(self):
        return self._like(-self.entries, self.parity)

    def __mul__(self, scalar):
        if isinstance(scalar, (GradedMatrix, GradedVector)):
            return NotImplemented
        return self._like(self.entries * as_scalar(scalar, self.backend), self.parity)

    __rmul__ = __mul__

    # -- inspection
    def is_zero(self, tol: float = 0.0) -> bool:
        if self.backend == EXACT:
            return not np.any(self.entries != 0)
        return bool(np.max(np.abs(self.entries), initial=0.0) <= tol)

    def max_abs(self) -> float:
        if self.backend == EXACT:
            return float(max((abs(x) for x in self.entries.flat), default=0))
        return float(np.max(np.abs(self.entries), initial=0.0))

    def equals(self, other: "GradedMatrix") -> bool:
        self._check_other(other)
        return (self - other).is_zero()

    def infer_parity(self):
        even, odd = self.homogeneous_parts()
        if odd.is_zero():
            return 0
        if even.is_zero():
            return 1
        return None

    def homogeneous_parts(self):
        tp = self.space.total_parity
        mask = (tp[:, None] + tp[None, :]) % 2 == 0
        z = zero(self.backend)
        even = np.where(mask, self.entries, z)
        odd = np.where(mask, z, self.entries)
        if self.backend == FLOAT:
            even, odd = even.astype(np.complex128), odd.astype(np.complex128)
        return self._like(even, 0), self._like(odd, 1)

    def to_backend(self, backend: str) -> "GradedMatrix":
        if backend == self.backend:
            return self
        if backend == EXACT:
            raise BackendMismatch("cannot convert floating matrices to exact")
        return self._like(np.vectorize(lambda x: complex(float(x)), otypes=[np.complex128])(self.entries),
                          self.parity)

    def __repr__(self):
        return f"GradedMatrix(space={self.space.dims}, parity={self.parity}, backend={self.backend})"


class GradedVector:
    """A state (``side='column'``) or covector (``side='row'``) on a graded space."""

    __slots__ = ("space", "entries", "side")

    def __init__(self, space: GradedSpace, entries: np.ndarray, side: str = "column"):
        entries = np.asarray(entries)
        if entries.dtype != object and entries.dtype != np.complex128:
            entries = entries.astype(np.complex128)
        if entries.shape != (space.dim,):
            raise DimensionMismatch(f"vector length {entries.shape} does not match space dim {space.dim}")
        if side not in ("column", "row"):
            raise ValueError(f"side must be 'column' or 'row', got {side!r}")
        self.space = space
        self.entries = _frozen(entries)
        self.side = side

    @classmethod
    def basis(cls, space: GradedSpace, multi: Sequence[int], backend: str = EXACT, side: str = "column"):
        arr = zeros(space.dim, backend)
        arr[space.index(multi)] = one(backend)
        return cls(space, arr, side)

    @classmethod
    def zero(cls, space: GradedSpace, backend: str = EXACT, side: str = "column"):
        return cls(space, zeros(space.dim, backend), side)

    @property
    def backend(self) -> str:
        return _backend_of_array(self.entries)

    def _check_other(self, other):
        if not isinstance(other, GradedVector) or other.space != self.space or other.side != self.side:
            raise DimensionMismatch("vectors differ in space or side")
        if other.backend != self.backend:
            raise BackendMismatch("vectors use different scalar backends")

    def __add__(self, other):
        self._check_other(other)
        return GradedVector(self.space, self.entries + other.entries, self.side)

    def __sub__(self, other):
        self._check_other(other)
        return GradedVector(self.space, self.entries - other.entries, self.side)

    def __neg__(self):
        return GradedVector(self.space, -self.entries, self.side)

    def __mul__(self, scalar):
        if isinstance(scalar, (GradedMatrix, GradedVector)):
            return NotImplemented
        return GradedVector(self.space, self.entries * as_scalar(scalar, self.backend), self.side)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, GradedMatrix) and self.side == "row":
            if other.space != self.space:
                raise DimensionMismatch("covector and operator live on different spaces")
            if other.backend != self.backend:
                raise BackendMismatch("covector and operator use different scalar backends")
            return GradedVector(self.space, self.entries @ other.entries, "row")
        if isinstance(other, GradedVector) and self.side == "row" and other.side == "column":
            if other.space != self.space:
                raise DimensionMismatch("pairing vectors on different spaces")
            return self.entries @ other.entries
        return NotImplemented

    def is_zero(self, tol: float = 0.0) -> bool:
        if self.backend == EXACT:
            return not np.any(self.entries != 0)
        return bool(np.max(np.abs(self.entries), initial=0.0) <= tol)

    def equals(self, other: "GradedVector") -> bool:
        self._check_other(other)
        return (self - other).is_zero()

    def norm(self) -> float:
        return float(np.linalg.norm(np.asarray(self.entries, dtype=np.complex128)))

    def max_abs(self) -> float:
        if self.backend == EXACT:
            return float(max((abs(x) for x in self.entries), default=0))
        return float(np.max(np.abs(self.entries), initial=0.0))

    def components(self):
        """Nonzero entries as (basis label, value) in site order."""
        return [(self.space.label(k), x) for k, x in enumerate(self.entries) if x != 0]

    def __repr__(self):
        return f"GradedVector(space={self.space.dims}, side={self.side}, backend={self.backend})"


# ---------------------------------------------------------------- coefficient form

def to_coefficients(A: GradedMatrix) -> np.ndarray:
    """Coefficients of A in the graded basis E_{i1 j1} ⊗ ... ⊗ E_{iN jN}."""
    return _apply_sign(A.space.koszul, A.entries)


def from_coefficients(space: GradedSpace, coeffs: np.ndarray, parity=None) -> GradedMatrix:
    return GradedMatrix(space, _apply_sign(space.koszul, np.asarray(coeffs)), parity, check=False)


def _as_tensor(space: GradedSpace, coeffs: np.ndarray) -> np.ndarray:
    return coeffs.reshape(space.dims + space.dims)


def identity(space: GradedSpace, backend: str = EXACT) -> GradedMatrix:
    return GradedMatrix(space, eye(space.dim, backend), 0, check=False)


def elementary(space: GradedSpace, p: int, i: int, j: int, backend: str = EXACT) -> GradedMatrix:
    """E_ij acting on factor ``p`` (1-based), identity elsewhere, Koszul sign included."""
    if not 1 <= p <= space.nfactors:
        raise IndexError(f"factor {p} outside 1..{space.nfactors}")
    gr = space.factors[p - 1]
    if not (1 <= i <= gr.dim and 1 <= j <= gr.dim):
        raise IndexError(f"elementary index ({i},{j}) outside 1..{gr.dim}")
    out = zeros((space.dim, space.dim), backend)
    for col in range(space.dim):
        res = elementary_action(space.factors, space.multi(col), p, i, j)
        if res is not None:
            sign, row = res
            out[space.index(row), col] = one(backend) * sign
    return GradedMatrix(space, out, (gr[i] + gr[j]) % 2, check=False)


def elementary_action(factors: Sequence[Grading], K: Sequence[int], p: int, i: int, j: int):
    """Action of E_ij^{(p)} on the basis vector e_K; returns (sign, K') or None."""
    if K[p - 1] != j:
        return None
    gr = factors[p - 1]
    mover = (gr[i] + gr[j]) % 2
    sign = 1
    if mover:
        passed = sum(factors[q][K[q]] for q in range(p - 1)) % 2
        sign = -1 if passed else 1
    out = list(K)
    out[p - 1] = i
    return sign, tuple(out)


def graded_kron(A: GradedMatrix, B: GradedMatrix) -> GradedMatrix:
    """Matrix of A ⊗ B on the concatenated space."""
    if A.backend != B.backend:
        raise BackendMismatch("kron of operators with different backends")
    space = A.space + B.space
    coeffs = np.kron(to_coefficients(A), to_coefficients(B))
    par = None if A.parity is None or B.parity is None else (A.parity + B.parity) % 2
    return from_coefficients(space, coeffs, par)


def _factor_signs(gr: Grading, backend: str) -> list:
    return [one(backend) * (1 - 2 * gr[k]) for k in range(1, gr.dim + 1)]


def supertrace(A: GradedMatrix, over: Iterable[int] | None = None):
    """Partial supertrace over the given 1-based factors; the full trace returns a scalar."""
    N = A.space.nfactors
    traced = sorted(set(range(1, N + 1) if over is None else over))
    if any(not 1 <= p <= N for p in traced):
        raise IndexError(f"trace factors {traced} outside 1..{N}")
    backend = A.backend
    t = _as_tensor(A.space, to_coefficients(A))
    nrow = N  # current number of row axes
    for p in reversed(traced):
        gr = A.space.factors[p - 1]
        signs = _factor_signs(gr, backend)
        acc = None
        for k in range(gr.dim):
            piece = np.take(np.take(t, k, axis=nrow + p - 1), k, axis=p - 1) * signs[k]
            acc = piece if acc is None else acc + piece
        t = acc
        nrow -= 1
    rest = A.space.without(traced)
    if rest.nfactors == 0:
        val = t.reshape(()).item() if isinstance(t, np.ndarray) else t
        return val
    return from_coefficients(rest, np.asarray(t).reshape(rest.dim, rest.dim), A.parity)


def supertranspose(A: GradedMatrix, k: int = 1, over: Iterable[int] | None = None) -> GradedMatrix:
    """k-fold supertransposition E_ij -> (-1)^{[i][j]+[j]} E_ji on the chosen factors (default all)."""
    N = A.space.nfactors
    factors = sorted(set(range(1, N + 1) if over is None else over))
    k %= 4
    t = _as_tensor(A.space, to_coefficients(A))
    for _ in range(k):
        for p in factors:
            gr = A.space.factors[p - 1]
            par = np.asarray(gr.parity)
            sign = 1 - 2 * ((par[:, None] * par[None, :] + par[None, :]) % 2)
            shape = [1] * (2 * N)
            shape[p - 1] = gr.dim
            shape[N + p - 1] = gr.dim
            t = _apply_sign(np.broadcast_to(sign.reshape(shape), t.shape), t)
            t = np.swapaxes(t, p - 1, N + p - 1)
    coeffs = np.ascontiguousarray(t).reshape(A.space.dim, A.space.dim)
    return from_coefficients(A.space, coeffs, A.parity)


def perm_P(grading: Grading, backend: str = EXACT) -> GradedMatrix:
    """Graded permutation P = sum_ij (-1)^{[j]} E_ij ⊗ E_ji on C^{m|n} ⊗ C^{m|n}."""
    space = GradedSpace.power(grading, 2)
    d = grading.dim
    coeffs = _as_tensor(space, zeros((space.dim, space.dim), backend))
    for i in range(d):
        for j in range(d):
            coeffs[i, j, j, i] = one(backend) * (1 - 2 * grading[j + 1])
    return from_coefficients(space, coeffs.reshape(space.dim, space.dim), 0)


def grading_operator(space: GradedSpace, backend: str = EXACT) -> GradedMatrix:
    """omega = diag((-1)^{total parity}); conjugation by it realizes gr."""
    out = zeros((space.dim, space.dim), backend)
    for k, par in enumerate(space.total_parity):
        out[k, k] = one(backend) * (1 - 2 * int(par))
    return GradedMatrix(space, out, 0, check=False)


def split_first_factor(A: GradedMatrix) -> dict:
    """Write A = sum_ij E_ij ⊗ A_ij and return {(i, j): A_ij} (1-based indices)."""
    first = A.space.factors[0]
    rest = GradedSpace(A.space.factors[1:])
    d, r = first.dim, rest.dim
    t = to_coefficients(A).reshape(d, r, d, r)
    out = {}
    for i in range(d):
        for j in range(d):
            par = None if A.parity is None else (A.parity + first[i + 1] + first[j + 1]) % 2
            out[(i + 1, j + 1)] = from_coefficients(rest, np.ascontiguousarray(t[i, :, j, :]), par)
    return out


def supercommutator(A: GradedMatrix, B: GradedMatrix) -> GradedMatrix:
    """[A, B} = AB - (-1)^{[A][B]} BA for homogeneous A, B."""
    pa = A.parity if A.parity is not None else A.infer_parity()
    pb = B.parity if B.parity is not None else B.infer_parity()
    if pa is None or pb is None:
        raise ValueError("supercommutator needs homogeneous operands")
    ab, ba = A @ B, B @ A
    return ab + ba if pa * pb else ab - ba
