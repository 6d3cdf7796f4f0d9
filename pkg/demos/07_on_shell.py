"""Solve Bethe equations on a twisted chain and watch Φ become an eigenvector of t(z)."""

from gmpy2 import mpq

from superbethe.bethe import BetheData, bv_supertrace
from superbethe.lattice import ModelSpec, MonodromyFamily
from superbethe.onshell import bethe_residuals, solve_bethe, spectrum_coverage, tau_eigenvalue, verify_onshell
from superbethe.suites import Z_SAMPLES

chain = {"m": 2, "n": 1, "L": 1, "z": ["0"], "kappa": ["1", "2", "3"]}

# An exact root exists here: u = 1/2, v = 5/2
exact = MonodromyFamily(ModelSpec.from_dict(chain))
d = BetheData((mpq(1, 2),), (mpq(5, 2),), 1)
print("Bethe residuals at (1/2, 5/2):", bethe_residuals(exact, d))
phi, z = bv_supertrace(exact, d), mpq(3, 7)
print("t(z)Φ = τ(z)Φ exactly:", (exact.transfer(z) @ phi - phi * tau_eigenvalue(exact, z, d)).is_zero())

# Newton from random complex starts finds the same root numerically
fam = MonodromyFamily(ModelSpec.from_dict({**chain, "backend": "float"}))
for sol in solve_bethe(fam, 1, 1, seed=0):
    rep = verify_onshell(fam, sol, Z_SAMPLES)
    print("root u, v:", sol.data.u, sol.data.v, " relative eigen-residual:", f"{rep.ratio:.1e}")
    print("eigenvalues reached:", spectrum_coverage(fam, [sol], Z_SAMPLES[0]))
