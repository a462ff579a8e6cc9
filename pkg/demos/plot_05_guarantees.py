"""
Checking the error guarantees
=============================

Monte-Carlo runs over random bounded-degree graphs, each reporting the
observed failure rate next to its bound.
"""

from quint.verify import run_suite

for r in run_suite(psi=16, rho=0.2, trials=1000, seed=5):
    print(r.line(), r.extra)
