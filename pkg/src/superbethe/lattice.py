"""Concrete highest-weight realization: R-matrix, twisted inhomogeneous fundamental chain, weights.

The monodromy is T(u) = K R_{0L}(u, z_L) ... R_{01}(u, z_1).  Writing
R_{0n} = sum_ab E_ab ⊗ l_ab with l_ab = δ_ab + g(u, z_n) (-1)^{[b]} E_ba^{(n)},
the entries follow from the graded matrix product

    (AB)_ij = sum_k (-1)^{([i]+[k])([k]+[j])} A_ik B_kj,

and the twist multiplies row i by kappa_i.  :func:`monodromy_dense` builds the
same entries from plain matrices on aux ⊗ phys as an independent check.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError, PoleError, TwistedModelError
from .graded import (
    GradedMatrix, GradedSpace, GradedVector, Grading, elementary, elementary_action,
    identity, perm_P, split_first_factor, supertranspose,
)
from .kernels import (
    BACKENDS, EXACT, FLOAT, as_scalar, backend_of, eval_structure, format_scalar, one,
    parse_scalar, zero, zeros,
)

__all__ = [
    "ALGEBRAS", "algebra_tag", "ModelSpec", "MonodromyFamily", "PhiImageFamily",
    "build_R", "embed_R", "verify_R_axioms", "monodromy_entry", "monodromy_dense",
    "weight_lambda", "transfer", "zero_mode", "rtt_residual", "commutation_residual",
]

ALGEBRAS = {
    "Y21": Grading.distinguished(2, 1),
    "Y12": Grading.distinguished(1, 2),
}


def algebra_tag(grading: Grading) -> str:
    for tag, gr in ALGEBRAS.items():
        if gr.parity == grading.parity:
            return tag
    raise ConfigError(f"no algebra tag for grading {grading.parity}")


@dataclass(frozen=True)
class ModelSpec:
    """Inhomogeneous fundamental chain of length L with diagonal twist kappa."""

    grading: Grading
    L: int
    z: tuple
    kappa: tuple
    c: object
    backend: str = EXACT

    def __post_init__(self):
        if self.backend not in BACKENDS:
            raise ConfigError(f"backend must be one of {BACKENDS}, got {self.backend!r}")
        if self.grading.dim != 3:
            raise ConfigError("only rank-two gradings (m+n = 3) are supported")
        if self.L < 0:
            raise ConfigError("L must be nonnegative")
        conv = lambda x: as_scalar(x, self.backend)
        z = tuple(conv(x) for x in self.z)
        kappa = tuple(conv(x) for x in self.kappa)
        c = conv(self.c)
        if len(z) != self.L:
            raise ConfigError(f"need {self.L} inhomogeneities, got {len(z)}")
        if len(set(z)) != len(z):
            raise ConfigError("inhomogeneities must be pairwise distinct")
        if len(kappa) != 3 or any(k == 0 for k in kappa):
            raise ConfigError("twist needs three nonzero entries")
        if c == 0:
            raise ConfigError("c must be nonzero")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "c", c)

    @classmethod
    def chain(cls, m: int, n: int, z: Sequence, kappa=(1, 1, 1), c=1, backend: str = EXACT):
        return cls(Grading.distinguished(m, n), len(z), tuple(z), tuple(kappa), c, backend)

    @property
    def algebra(self) -> str:
        return algebra_tag(self.grading)

    @property
    def is_twisted(self) -> bool:
        return any(k != 1 for k in self.kappa)

    def to_backend(self, backend: str) -> "ModelSpec":
        if backend == self.backend:
            return self
        return ModelSpec(self.grading, self.L, self.z, self.kappa, self.c, backend)

    def to_dict(self) -> dict:
        return {
            "m": self.grading.m, "n": self.grading.n, "L": self.L,
            "z": [format_scalar(x) for x in self.z],
            "kappa": [format_scalar(x) for x in self.kappa],
            "c": format_scalar(self.c), "backend": self.backend,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ModelSpec":
        try:
            m, n, L = int(data["m"]), int(data["n"]), int(data["L"])
            backend = data.get("backend", EXACT)
            if (m, n) not in ((2, 1), (1, 2)):
                raise ConfigError(f"(m,n) must be (2,1) or (1,2), got ({m},{n})")
            if backend not in BACKENDS:
                raise ConfigError(f"field 'backend': expected one of {BACKENDS}, got {backend!r}")
            parse = lambda x: parse_scalar(x, backend)
            z = tuple(parse(x) for x in data.get("z", [str(k) for k in range(L)]))
            kappa = tuple(parse(x) for x in data.get("kappa", ["1", "1", "1"]))
            c = parse(data.get("c", "1"))
        except KeyError as exc:
            raise ConfigError(f"model is missing field {exc.args[0]!r}") from None
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"invalid model field: {exc}") from None
        return cls(Grading.distinguished(m, n), L, z, kappa, c, backend)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ModelSpec":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"model JSON line {exc.lineno} column {exc.colno}: {exc.msg}") from None
        if not isinstance(data, dict):
            raise ConfigError("model JSON must be an object")
        return cls.from_dict(data)


# ---------------------------------------------------------------- R-matrix

def _check_params(backend, *xs):
    return tuple(as_scalar(x, backend) for x in xs)


def build_R(gr: Grading, u, v, c, backend: str | None = None) -> GradedMatrix:
    """R(u,v) = I + g(u,v) P on C^{m|n} ⊗ C^{m|n}."""
    backend = backend or backend_of(c)
    u, v, c = _check_params(backend, u, v, c)
    P = perm_P(gr, backend)
    return identity(P.space, backend) + P * eval_structure("g", u, v, c)


def embed_R(space: GradedSpace, p: int, q: int, u, v, c) -> GradedMatrix:
    """R_pq(u,v) = I + g(u,v) P_pq with P_pq = sum (-1)^{[b]} E_ab^{(p)} E_ba^{(q)}."""
    backend = backend_of(c)
    gr = space.factors[p - 1]
    P = zeros((space.dim, space.dim), backend)
    # P_pq sends each basis vector to a single signed basis vector: only b = K_p, a = K_q survive
    for col in range(space.dim):
        K = space.multi(col)
        a, b = K[q - 1], K[p - 1]
        s1, K1 = elementary_action(space.factors, K, q, b, a)
        s2, K2 = elementary_action(space.factors, K1, p, a, b)
        P[space.index(K2), col] = one(backend) * (s1 * s2 * (1 - 2 * gr[b]))
    P = GradedMatrix(space, P, 0, check=False)
    return identity(space, backend) + P * eval_structure("g", u, v, c)


def verify_R_axioms(gr: Grading, u, v, w, c) -> dict:
    """Residual matrices of the R-matrix axioms; all vanish exactly on the exact backend."""
    backend = backend_of(c)
    u, v, w, c = _check_params(backend, u, v, w, c)
    s3 = GradedSpace.power(gr, 3)
    s2 = GradedSpace.power(gr, 2)
    R12 = lambda a, b: embed_R(s3, 1, 2, a, b, c)
    R13 = lambda a, b: embed_R(s3, 1, 3, a, b, c)
    R23 = lambda a, b: embed_R(s3, 2, 3, a, b, c)
    ybe = R12(u, v) @ R13(u, w) @ R23(v, w) - R23(v, w) @ R13(u, w) @ R12(u, v)
    R = build_R(gr, u, v, c)
    R21_vu = embed_R(s2, 2, 1, v, u, c)
    ff = eval_structure("f", u, v, c) * eval_structure("f", v, u, c)
    unit = R21_vu @ R - identity(s2, backend) * ff
    P = perm_P(gr, backend)
    return {
        "yang-baxter": ybe,
        "unitarity": unit,
        "symmetry-P": P @ R @ P - R,
        "symmetry-R21": embed_R(s2, 2, 1, u, v, c) - R,
        "symmetry-t1t2": supertranspose(R, 1, [1, 2]) - R,
    }


# ---------------------------------------------------------------- chain monodromy

class MonodromyFamily:
    """Monodromy entries T_ij(u) of a :class:`ModelSpec` on the physical space (C^{m|n})^{⊗L}.

    Entries are computed together per spectral parameter and cached; population is
    guarded by a lock so the family can be shared between threads.
    """

    def __init__(self, model: ModelSpec):
        self.model = model
        self.grading = model.grading
        self.algebra = model.algebra
        self.backend = model.backend
        self.c = model.c
        self.space = GradedSpace.power(model.grading, model.L)
        self.dim = self.space.dim
        self._cache: dict = {}
        self._lock = threading.Lock()
        self._site_ops = self._site_actions()

    def _site_actions(self):
        """Row/column/sign arrays of E_ab^{(n)} as a signed partial permutation."""
        ops = {}
        d = self.grading.dim
        for n in range(1, self.model.L + 1):
            for a in range(1, d + 1):
                for b in range(1, d + 1):
                    rows, cols, signs = [], [], []
                    for col in range(self.dim):
                        res = elementary_action(self.space.factors, self.space.multi(col), n, a, b)
                        if res is not None:
                            rows.append(self.space.index(res[1]))
                            cols.append(col)
                            signs.append(res[0])
                    ops[(n, a, b)] = (np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64),
                                      np.array(signs, dtype=np.int64))
        return ops

    def _apply_site(self, n, a, b, X: np.ndarray) -> np.ndarray:
        rows, cols, signs = self._site_ops[(n, a, b)]
        out = zeros(X.shape, self.backend)
        if rows.size:
            block = X[cols]
            if self.backend == EXACT:
                block = np.where((signs < 0)[:, None], -block, block)
            else:
                block = signs[:, None] * block
            out[rows] = block
        return out

    def _scalar(self, u):
        return as_scalar(u, self.backend)

    def _compute(self, u) -> dict:
        gr, d, L = self.grading, self.grading.dim, self.model.L
        for zk in self.model.z:
            if zk == u:
                raise PoleError(f"spectral parameter {u} coincides with an inhomogeneity", pair=(u, zk))
        ident = np.eye(self.dim, dtype=object) if self.backend == EXACT else np.eye(self.dim, dtype=np.complex128)
        if self.backend == EXACT:
            ident = np.where(ident == 1, one(EXACT), zero(EXACT))
        M = {(i, j): (ident.copy() if i == j else zeros((self.dim, self.dim), self.backend))
             for i in range(1, d + 1) for j in range(1, d + 1)}
        for n in range(1, L + 1):
            gval = eval_structure("g", u, self.model.z[n - 1], self.c)
            new = {}
            for i in range(1, d + 1):
                for j in range(1, d + 1):
                    acc = M[(i, j)].copy()
                    for k in range(1, d + 1):
                        sign = -1 if ((gr[i] + gr[k]) * (gr[k] + gr[j])) % 2 else 1
                        coeff = gval * (sign * (1 - 2 * gr[k]))
                        acc = acc + self._apply_site(n, k, i, M[(k, j)]) * coeff
                    new[(i, j)] = acc
            M = new
        out = {}
        for (i, j), X in M.items():
            X = X * self.model.kappa[i - 1]
            out[(i, j)] = GradedMatrix(self.space, X, (gr[i] + gr[j]) % 2, check=False)
        return out

    def entries(self, u) -> dict:
        u = self._scalar(u)
        hit = self._cache.get(u)
        if hit is not None:
            return hit
        with self._lock:
            hit = self._cache.get(u)
            if hit is None:
                hit = self._compute(u)
                self._cache[u] = hit
        return hit

    def entry(self, i: int, j: int, u) -> GradedMatrix:
        d = self.grading.dim
        if not (1 <= i <= d and 1 <= j <= d):
            raise IndexError(f"monodromy index ({i},{j}) outside 1..{d}")
        return self.entries(u)[(i, j)]

    def weight(self, j: int, u):
        u = self._scalar(u)
        val = self.model.kappa[j - 1]
        if j == 1:
            for zk in self.model.z:
                val = val * eval_structure("f", u, zk, self.c)
        return val

    def omega(self) -> GradedVector:
        return GradedVector.basis(self.space, (1,) * self.model.L, self.backend, "column")

    def omega_dag(self) -> GradedVector:
        return GradedVector.basis(self.space, (1,) * self.model.L, self.backend, "row")

    def identity(self) -> GradedMatrix:
        return identity(self.space, self.backend)

    def transfer(self, u) -> GradedMatrix:
        return transfer(self, u)


class PhiImageFamily:
    """Family of the other super-Yangian on the same physical space.

    T~_kl(u) = (-1)^{[l'][k'] + [k'] + 1} T_{l'k'}(u) with i' = 4 - i and the source
    grading; weights are λ~_j = -λ_{4-j}.  Applying the construction twice returns
    the source entries.
    """

    def __init__(self, base):
        self.base = base
        src = base.grading
        self.grading = Grading.distinguished(src.n, src.m)
        self.algebra = algebra_tag(self.grading)
        self.backend = base.backend
        self.c = base.c
        self.space = base.space
        self.dim = base.dim
        self.model = base.model

    def _sign(self, k, l):
        gr = self.base.grading
        kb, lb = 4 - k, 4 - l
        return -1 if (gr[lb] * gr[kb] + gr[kb] + 1) % 2 else 1

    def entry(self, k: int, l: int, u) -> GradedMatrix:
        src = self.base.entry(4 - l, 4 - k, u)
        return src if self._sign(k, l) > 0 else -src

    def entries(self, u) -> dict:
        return {(k, l): self.entry(k, l, u) for k in range(1, 4) for l in range(1, 4)}

    def weight(self, j: int, u):
        return -self.base.weight(4 - j, u)

    def omega(self) -> GradedVector:
        return self.base.omega()

    def omega_dag(self) -> GradedVector:
        return self.base.omega_dag()

    def identity(self) -> GradedMatrix:
        return self.base.identity()

    def transfer(self, u) -> GradedMatrix:
        return transfer(self, u)


def monodromy_entry(fam, i: int, j: int, u) -> GradedMatrix:
    return fam.entry(i, j, u)


def weight_lambda(fam, j: int, u):
    return fam.weight(j, u)


def transfer(fam, u) -> GradedMatrix:
    """t(u) = sum_j (-1)^{[j]} T_jj(u)."""
    acc = None
    for j in range(1, fam.grading.dim + 1):
        term = fam.entry(j, j, u)
        if fam.grading[j]:
            term = -term
        acc = term if acc is None else acc + term
    return acc


def zero_mode(fam, i: int, j: int) -> GradedMatrix:
    """T^{(0)}_ij = (-1)^{[j]} sum_k E_ji^{(k)}, the c/u coefficient of an untwisted chain."""
    model = fam.model
    if model.is_twisted:
        raise TwistedModelError("zero modes are defined for untwisted chains only")
    gr = fam.grading
    if not isinstance(fam, MonodromyFamily):
        raise TypeError("zero modes are built on a native chain family")
    acc = GradedMatrix(fam.space, zeros((fam.dim, fam.dim), fam.backend), (gr[i] + gr[j]) % 2, check=False)
    for k in range(1, model.L + 1):
        acc = acc + elementary(fam.space, k, j, i, fam.backend)
    return -acc if gr[j] else acc


def monodromy_dense(model: ModelSpec, u) -> dict:
    """Entries T_ij(u) from the plain product of R_{0n} on aux ⊗ phys (independent route)."""
    backend = model.backend
    u = as_scalar(u, backend)
    space = GradedSpace.power(model.grading, model.L + 1)
    T = identity(space, backend)
    for n in range(1, model.L + 1):
        T = embed_R(space, 1, n + 1, u, model.z[n - 1], model.c) @ T
    K = identity(space, backend)
    Kdiag = zeros((space.dim, space.dim), backend)
    aux = space.digits[:, 0]
    for r in range(space.dim):
        Kdiag[r, r] = model.kappa[aux[r]]
    K = GradedMatrix(space, Kdiag, 0, check=False)
    return split_first_factor(K @ T)


# ---------------------------------------------------------------- RTT and commutation checks

def _pair_sign(gr, i, j, k, l):
    s1 = ((gr[i] + gr[j]) * (gr[j] + gr[k])) % 2
    s2 = ((gr[k] + gr[l]) * gr[l]) % 2
    return -1 if (s1 + s2) % 2 else 1


def rtt_residual(fam, u, v) -> dict:
    """Blocks of R_12(u,v) T_1(u) T_2(v) - T_2(v) T_1(u) R_12(u,v) on aux ⊗ aux ⊗ phys.

    Returns {((i,k),(j,l)): residual matrix}; all vanish exactly when RTT holds.
    """
    gr, d = fam.grading, fam.grading.dim
    Tu, Tv = fam.entries(u), fam.entries(v)
    R = build_R(gr, u, v, fam.c, fam.backend).entries
    pairs = [(i, k) for i in range(1, d + 1) for k in range(1, d + 1)]
    t12, t21 = {}, {}
    for (i, k) in pairs:
        for (j, l) in pairs:
            # block ((i,k),(j,l)) of T_1(u) T_2(v) and of T_2(v) T_1(u)
            s_a = _pair_sign(gr, i, j, k, l)
            s_b = (-1 if ((gr[k] + gr[l]) * gr[l]) % 2 else 1) * \
                  (-1 if ((gr[i] + gr[j]) * (gr[j] + gr[l])) % 2 else 1)
            t12[(i, k), (j, l)] = (Tu[(i, j)] @ Tv[(k, l)]) * s_a
            t21[(i, k), (j, l)] = (Tv[(k, l)] @ Tu[(i, j)]) * s_b
    idx = {p: n for n, p in enumerate(pairs)}
    out = {}
    for I in pairs:
        for J in pairs:
            lhs, rhs = None, None
            for M in pairs:
                r_im, r_mj = R[idx[I], idx[M]], R[idx[M], idx[J]]
                if r_im != 0:
                    term = t12[M, J] * r_im
                    lhs = term if lhs is None else lhs + term
                if r_mj != 0:
                    term = t21[I, M] * r_mj
                    rhs = term if rhs is None else rhs + term
            out[I, J] = lhs - rhs
    return out


def commutation_residual(fam, i, j, k, l, z, w) -> GradedMatrix:
    """[T_ij(z), T_kl(w)} - (-1)^{[l]([i]+[j]) + [i][j]} g(z,w) (T_il(z)T_kj(w) - T_il(w)T_kj(z))."""
    gr = fam.grading
    A, B = fam.entry(i, j, z), fam.entry(k, l, w)
    sgn_ex = -1 if ((gr[i] + gr[j]) * (gr[k] + gr[l])) % 2 else 1
    lhs = A @ B - (B @ A) * sgn_ex
    sgn = -1 if (gr[l] * (gr[i] + gr[j]) + gr[i] * gr[j]) % 2 else 1
    gval = eval_structure("g", as_scalar(z, fam.backend), as_scalar(w, fam.backend), fam.c)
    rhs = (fam.entry(i, l, z) @ fam.entry(k, j, w) - fam.entry(i, l, w) @ fam.entry(k, j, z)) * (gval * sgn)
    return lhs - rhs
