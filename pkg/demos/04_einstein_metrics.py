"""
Looking for Einstein lengths
============================

A weighted graph is Einstein when every edge curvature is the same multiple
of its length. Summing over edges pins that multiple to one over the total
length. Cycles are Einstein for any lengths, and on K4 or a star a Newton
search finds such lengths from a perturbed start. On the branched tree the
interior edges stay negatively curved, so no lengths work.
"""

import numpy as np

from ricci_foster import einstein_check, einstein_solve, gallery
from ricci_foster.errors import NoConvergence

cert = einstein_check(gallery.cycle([0.5, 1.0, 2.5, 1.0]))
print("cycle: einstein =", cert.is_einstein, "lambda =", cert.lambda_)

cert = einstein_check(gallery.house())
print("house: einstein =", cert.is_einstein, f"max residual {cert.max_residual:.4f}")

rng = np.random.default_rng(3)
k4 = gallery.complete(4)
start = k4.with_lengths(k4.lengths * rng.uniform(0.8, 1.2, k4.n_edges))
lengths, cert = einstein_solve(start)
print("K4 from", np.round(start.lengths, 3))
print("   to  ", np.round(list(lengths.values()), 6), f"residual {cert.max_residual:.1e}")

lengths, cert = einstein_solve(gallery.star(3, [1.0, 2.0, 3.0]))
print("star S3:", np.round(list(lengths.values()), 6), f"residual {cert.max_residual:.1e}")

try:
    einstein_solve(gallery.branched_tree(), max_iter=100)
except NoConvergence as exc:
    print(f"branched tree: no Einstein lengths, best residual {exc.certificate.max_residual:.4f}")
