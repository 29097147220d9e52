"""Main-functional ratio along the rank-one family ``b_0 = t``.

The eigenvalue ``sqrt(4 + t^2)`` approaches the band edge as ``t -> 0`` and
the ratio ``sum / ||d||_2^2`` vanishes like ``t^2 / 32``.
"""
from jacobi_lt import FunctionalSpec, lt_functional
from jacobi_lt.checks import rank_one_point

spec = FunctionalSpec("main", 2.0, 0.5)
print(f"{'t':>10} {'lambda':>14} {'ratio':>14}")
for t in [2.0**k for k in range(-6, 4)] + [0.01]:
    sp = rank_one_point(t)
    ratio = lt_functional([sp], spec) / t**2
    print(f"{t:10.5f} {sp.lam.real:14.10f} {ratio:14.6e}")
print(f"\nt = 0.01 leading term t^2/32 = {0.01**2 / 32:.4e}")
