"""Per-iteration flow cost of tree curvature against exact transport.

Tree curvature needs one cut-mass sweep per measure. Exact curvature
solves one transport problem per edge.
"""
from sobolev_ricci import bench, sbm

graphs = [sbm(n, 2, 0.15, 0.5, seed=0).graph for n in (100, 200, 400)]
print(f"{'nodes':>6} {'edges':>6} {'method':>8} {'median ms':>10} {'iqr ms':>8}")
for rec in bench(graphs, ("src-spt", "src-mst", "orc"), repeats=3):
    print(f"{rec.n:6d} {rec.m:6d} {rec.method:>8} {rec.median_ms:10.1f} {rec.iqr_ms:8.1f}")
