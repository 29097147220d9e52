"""Real symmetric perturbations: real spectrum and the half-line rewrite.

For ``a = c`` real and ``b`` real every eigenvalue is real and lies outside
``[-2, 2]``, and ``dist^p / |lambda^2 - 4|^(1/2)`` is at most half of
``|lambda -+ 2|^(p - 1/2)``.
"""
import math

from jacobi_lt import ExperimentConfig, FunctionalSpec, discrete_spectrum, generate_ensemble, lt_functional

p = 2.0
config = ExperimentConfig(
    seed=5, trials=6, support_width=4, magnitude=1.5, coefficient_model="selfadjoint-real", p_grid=[p], tau_grid=[0.5]
)
hs = FunctionalSpec("hs", p)
for i, pert in enumerate(generate_ensemble(config)):
    spectrum = discrete_spectrum(pert)
    lams = ", ".join(f"{sp.lam.real:+.6f}" for sp in spectrum) or "none"
    print(f"trial {i}: eigenvalues {lams}")
    if spectrum:
        lhs = sum(sp.multiplicity * sp.dist**p / math.sqrt(sp.disc) for sp in spectrum)
        print(f"    sum dist^p/sqrt|lam^2-4| = {lhs:.5f}  <=  hs/2 = {0.5 * lt_functional(spectrum, hs):.5f}")
