"""
Reading structure back from sketches
====================================

Degrees, edge presence and common-neighbor counts are estimated from the
sketches alone and compared with exact counts.
"""

import numpy as np

from quint import compute_dimension, embed_graph, estimate_common_neighbors, estimate_degree, estimate_edge
from quint.graph import common_neighbors_exact, matrix_power_exact, max_degree
from quint.estimators import estimate_power_2t
from quint.synth import bounded_degree_graph
from quint.verify import component_graph

g = bounded_degree_graph(500, 16, seed=3, spread=True)
psi = max_degree(g)
d = compute_dimension(psi, rho=0.2)
es = embed_graph(g, d, seed=7)
print(f"psi={psi}, d={d}, storage={es.payload_bytes()} bytes")

###############################################################################
# Degrees: collisions hide neighbors, the estimator inverts the expected loss.
deg = g.degrees()
est = np.array([estimate_degree(es[u]) for u in range(g.n)])
print("degree MAE:", np.abs(est - deg).mean())

###############################################################################
# Edges are never missed; false alarms are rare when d is much larger than psi.
u, v = (int(x) for x in g.edges[0])
print("edge", (u, v), "->", estimate_edge(es[u], es[v], u, v, es.mapper))

###############################################################################
# Common neighbors for a few two-hop pairs.
for m in range(5):
    a, b = g.neighbors(m)[:2]
    e = estimate_common_neighbors(es[a], es[b])
    print(f"pair ({a},{b}): exact={common_neighbors_exact(g, a, b)} estimate={e.value:.2f}")

###############################################################################
# Squaring the estimate matrix approximates the fourth power of the adjacency
# matrix. Pairs in different components mostly keep their zeros.
small = component_graph(4, 8, 3, seed=1)
es_small = embed_graph(small, compute_dimension(3, 0.2), seed=1)
approx, exact = estimate_power_2t(es_small, 2), matrix_power_exact(small, 2)
print("true zeros kept:", np.mean(approx[exact == 0] == 0))
