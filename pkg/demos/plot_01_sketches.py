"""
Binary node sketches
====================

Each node's adjacency row is folded into ``d`` bits: neighbor ``k`` lands in
bucket ``pi(k)`` and the bucket bits are OR-ed together.
"""

import numpy as np

from quint import Graph, TableMapper, embed_graph, embed_node, merge_sketches
from quint.embedding import NodeMapper, apply_edge_update

###############################################################################
# A six-node graph, node 0 adjacent to 1, 3 and 4. With an explicit bucket
# table the sketch can be checked by hand: neighbors map to buckets 2, 1, 2.
table = TableMapper([0, 2, 1, 1, 2, 1], d=3)
g = Graph.from_edges(6, [(0, 1), (0, 3), (0, 4)])
es = embed_graph(g, mapper=table)
print("sketch of node 0:", es[0])

###############################################################################
# In practice the bucket map is a seeded hash, so only ``(seed, d)`` needs
# storing to rebuild it.
mapper = NodeMapper(seed=42, d=16)
print("buckets of nodes 0..9:", [mapper(k) for k in range(10)])

###############################################################################
# Sketches compose: the sketch of a union of neighbor sets is the OR of the
# parts, and adding an edge just sets two bits.
left, right = embed_node([1, 2, 3], mapper), embed_node([7, 8], mapper)
assert merge_sketches(left, right) == embed_node([1, 2, 3, 7, 8], mapper)

g = Graph.from_edges(10, [(0, 1), (1, 2)])
es = embed_graph(g, 16, seed=42)
apply_edge_update(es, 0, 9)
assert np.array_equal(es.words, embed_graph(g.with_edges([(0, 9)]), 16, seed=42).words)
print("edge update matches re-embedding")
