"""Bethe equations, their numeric roots, the eigenvalue τ and on-shell verification."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .bethe import BetheData, bv_supertrace
from .errors import ConfigError, NoConvergence, PoleError
from .kernels import FLOAT, as_scalar, format_scalar, product_over

__all__ = [
    "BetheSolution", "bethe_residuals", "solve_bethe", "tau_eigenvalue", "verify_onshell",
    "OnshellReport", "spectrum_coverage", "MAX_EXCITATIONS",
]

MAX_EXCITATIONS = 4
SEPARATION = 1e-8


def _fj(parity: int, xs, ys, c):
    """Double product of f_[j]: f(x, y) for even j, f(y, x) for odd j."""
    return product_over("f0" if parity == 0 else "f1", xs, ys, c)


def bethe_residuals(fam, data: BetheData) -> list:
    """Left minus right side of the a + b Bethe equations, in the order u_1..u_a, v_1..v_b."""
    gr = fam.grading
    c = fam.c
    data = data if data.backend == fam.backend else data.to_backend(fam.backend)
    u, v = data.u, data.v
    out = []
    for j, uj in enumerate(u):
        ur = u[:j] + u[j + 1:]
        lhs = fam.weight(2, uj) / fam.weight(1, uj)
        rhs = _fj(gr[1], ur, uj, c) / _fj(gr[2], uj, ur, c) / _fj(gr[2], v, uj, c)
        out.append(lhs - rhs)
    for j, vj in enumerate(v):
        vr = v[:j] + v[j + 1:]
        lhs = fam.weight(3, vj) / fam.weight(2, vj)
        rhs = _fj(gr[2], vj, u, c) * _fj(gr[2], vr, vj, c) / _fj(gr[3], vj, vr, c)
        out.append(lhs - rhs)
    return out


def tau_eigenvalue(fam, z, data: BetheData):
    """τ(z|ū,v̄) with the grading signs (-1)^{[j]}."""
    gr = fam.grading
    c = fam.c
    data = data if data.backend == fam.backend else data.to_backend(fam.backend)
    z = as_scalar(z, fam.backend)
    u, v = data.u, data.v
    s = lambda j: -1 if gr[j] else 1
    return (s(1) * fam.weight(1, z) * _fj(gr[1], u, z, c)
            + s(2) * fam.weight(2, z) * _fj(gr[2], z, u, c) * _fj(gr[2], v, z, c)
            + s(3) * fam.weight(3, z) * _fj(gr[3], z, v, c))


@dataclass(frozen=True)
class BetheSolution:
    data: BetheData
    residual_norm: float
    converged: bool
    iterations: int

    def to_dict(self) -> dict:
        return {"u": [format_scalar(x) for x in self.data.u], "v": [format_scalar(x) for x in self.data.v],
                "residual": self.residual_norm, "converged": self.converged, "iterations": self.iterations}


@dataclass
class OnshellReport:
    ratio: float
    per_sample: list = field(default_factory=list)
    null_vector: bool = False
    tol: float = 1e-8

    @property
    def passed(self) -> bool:
        return self.ratio <= self.tol

    def to_dict(self) -> dict:
        return {"tau_check": self.ratio, "per_sample": self.per_sample, "null_vector": self.null_vector,
                "passed": self.passed}


def _residual_vector(fam, a: int, x: np.ndarray) -> np.ndarray:
    data = BetheData(tuple(complex(t) for t in x[:a]), tuple(complex(t) for t in x[a:]), fam.c)
    return np.array([complex(r) for r in bethe_residuals(fam, data)], dtype=np.complex128)


def _newton(fam, a: int, x0: np.ndarray, tol: float, max_iter: int = 200, step: float = 1e-6):
    """Undamped Newton with a central-difference Jacobian (the residuals are holomorphic)."""
    x = x0.astype(np.complex128)
    n = x.size
    for it in range(1, max_iter + 1):
        F = _residual_vector(fam, a, x)
        norm = float(np.linalg.norm(F))
        if norm <= tol:
            return x, norm, it - 1
        J = np.empty((n, n), dtype=np.complex128)
        for k in range(n):
            e = np.zeros(n, dtype=np.complex128)
            e[k] = step
            J[:, k] = (_residual_vector(fam, a, x + e) - _residual_vector(fam, a, x - e)) / (2 * step)
        try:
            dx = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            dx = np.linalg.lstsq(J, -F, rcond=None)[0]
        if not np.all(np.isfinite(dx)):
            break
        x = x + dx
        if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > 1e8:
            break  # ran off to infinity
        if it >= 60 and norm > 1e-3:
            break  # no quadratic phase in sight
    F = _residual_vector(fam, a, x)
    norm = float(np.linalg.norm(F))
    if norm <= tol:
        return x, norm, max_iter
    raise NoConvergence(f"Newton stalled at residual {norm:.3e}")


def _separated(fam, a: int, x: np.ndarray) -> bool:
    """Roots must be distinct from each other and from z̄; within ū or v̄ a gap of ±c would kill H."""
    pts = list(x) + [complex(z) for z in fam.model.z]
    cval = complex(fam.c)
    for i in range(x.size):
        for j in range(len(pts)):
            if i == j:
                continue
            d = pts[i] - pts[j]
            if abs(d) < SEPARATION:
                return False
            same_set = j < x.size and (i < a) == (j < a)
            if same_set and min(abs(d - cval), abs(d + cval)) < SEPARATION:
                return False
    return True


def _canonical(a: int, x: np.ndarray) -> np.ndarray:
    key = lambda t: (round(t.real, 6), round(t.imag, 6))
    return np.array(sorted(x[:a], key=key) + sorted(x[a:], key=key), dtype=np.complex128)


def solve_bethe(fam, a: int, b: int, attempts: int = 200, tol: float = 1e-12, seed: int = 0,
                max_iter: int = 200) -> list:
    """Deduplicated Newton roots of the Bethe equations from seeded random complex starts."""
    if fam.backend != FLOAT:
        raise ConfigError("Bethe roots are solved on the float backend")
    if a < 0 or b < 0 or a + b > MAX_EXCITATIONS:
        raise ConfigError(f"need 0 <= a+b <= {MAX_EXCITATIONS}, got a={a}, b={b}")
    rng = random.Random(seed)
    span = max([abs(complex(z)) for z in fam.model.z] + [0.0])
    # wide starts explore, tight ones (within a couple of |c| of the sites) land the small basins
    radii = (span + 5.0, span + 2.0 * abs(complex(fam.c)))
    found: list[tuple[np.ndarray, BetheSolution]] = []
    for k in range(attempts):
        radius = radii[k % 2]
        x0 = np.array([complex(rng.uniform(-radius, radius), rng.uniform(-radius, radius))
                       for _ in range(a + b)], dtype=np.complex128)
        try:
            x, norm, its = _newton(fam, a, x0, tol, max_iter)
        except (NoConvergence, PoleError, ZeroDivisionError, FloatingPointError):
            continue
        if not _separated(fam, a, x):
            continue
        key = _canonical(a, x)
        if any(np.max(np.abs(key - k), initial=0.0) < SEPARATION for k, _ in found):
            continue
        data = BetheData(tuple(complex(t) for t in x[:a]), tuple(complex(t) for t in x[a:]), fam.c)
        found.append((key, BetheSolution(data, norm, True, its)))
    return [s for _, s in found]


def verify_onshell(fam, sol, z_samples: Sequence, tol: float = 1e-8) -> OnshellReport:
    """max over z of ‖t(z)Φ − τ(z)Φ‖/‖Φ‖; a vanishing Φ is reported as a null vector and passes trivially."""
    data = sol.data if isinstance(sol, BetheSolution) else sol
    data = data if data.backend == fam.backend else data.to_backend(fam.backend)
    phi = bv_supertrace(fam, data)
    norm = phi.norm()
    null = norm == 0.0
    ratios = []
    for z in z_samples:
        res = fam.transfer(z) @ phi - phi * tau_eigenvalue(fam, z, data)
        ratios.append(0.0 if null else res.norm() / norm)
    return OnshellReport(max(ratios, default=0.0), ratios, null, tol)


def spectrum_coverage(fam, solutions: Sequence[BetheSolution], z, tol: float = 1e-6) -> dict:
    """Which transfer-matrix eigenvalues at ``z`` are reproduced by τ of the given solutions."""
    t = np.asarray(fam.transfer(z).entries, dtype=np.complex128)
    eig = np.linalg.eigvals(t)
    taus = [complex(tau_eigenvalue(fam, z, s.data)) for s in solutions]
    hit = [any(abs(e - tau) <= tol * max(1.0, abs(e)) for tau in taus) for e in eig]
    return {"eigenvalues": len(eig), "matched": int(sum(hit)), "taus": len(taus)}


def solutions_to_json(solutions: Sequence[BetheSolution], reports: Sequence[OnshellReport] = ()) -> str:
    rows = []
    for k, s in enumerate(solutions):
        row = s.to_dict()
        if k < len(reports):
            row["tau_check"] = reports[k].ratio
        rows.append(row)
    return json.dumps(rows, sort_keys=True)
