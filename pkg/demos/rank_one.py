"""A single diagonal bump: eigenvalues, determinant and the l1 sum.

For ``b_0 = b`` real the only eigenvalue is ``sqrt(4 + b^2)``; an imaginary
bump ``b = 3i`` gives ``i sqrt(5)``.  Both are found as zeros of the
perturbation determinant and compared with a 500-site finite section.
"""
import math

from jacobi_lt import (
    DetContext,
    FunctionalSpec,
    PerturbationSpec,
    d_sequence,
    discrete_spectrum,
    lp_norm,
    lt_functional,
    perturbation_determinant,
    truncated_spectrum,
)

for b in (1.0, 3.0j, 0.5 + 2.0j):
    pert = PerturbationSpec.from_sites(b={0: b})
    det_zeros = discrete_spectrum(pert)
    section = truncated_spectrum(pert, size=500)
    print(f"b = {b}")
    for sp in det_zeros:
        print(f"  determinant zero  lambda = {sp.lam:.10f}  |z| = {abs(sp.z):.4f}  mult {sp.multiplicity}")
    for sp in section:
        print(f"  section eigenvalue lambda = {sp.lam:.10f}")

pert = PerturbationSpec.from_sites(b={0: 1.0})
g = perturbation_determinant(DetContext(pert), 3.0)
print(f"\ng(3) = {g.real:.10f}   (1 - 1/sqrt5 = {1 - 1 / math.sqrt(5):.10f})")

spec = FunctionalSpec("l1", 1.0, 0.5)
value = lt_functional(discrete_spectrum(pert), spec)
print(f"l1 sum at tau=0.5: {value:.8f}, ratio to ||d||_1: {value / lp_norm(d_sequence(pert), 1):.8f}")
