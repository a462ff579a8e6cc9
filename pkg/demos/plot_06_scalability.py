"""
Scaling
=======

Embedding cost is linear in the number of edges; per-edge time stays flat
as graphs grow.
"""

from quint.bench import edge_sweep, per_edge_time_ratio, sweep

rows = edge_sweep(20_000, [100_000, 400_000, 1_000_000], d=1000, seed=1)
for r in rows:
    print(f"edges={r['edges']:8d} time={r['seconds']:.3f}s  {r['us_per_edge']:.3f} us/edge")
print("per-edge time ratio:", round(per_edge_time_ratio(rows), 2))

for r in sweep([2000, 5000], [256, 1024], seed=1):
    print(r)
