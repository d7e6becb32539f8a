"""The power-weight example: how the weight constants and the R_1 lower
functional grow as eps shrinks, and the fitted log-log slopes.

Run: python demos/sharpness_sweep.py [L]
"""
import sys

from dyadicbench.analysis import sharpness_sweep
from dyadicbench.weights import ExponentSystem

L = int(sys.argv[1]) if len(sys.argv) > 1 else 12
exps = ExponentSystem((2.2, 2.2))
eps_list = [2.0**-k for k in range(3, 11)]
rows, fits = sharpness_sweep(exps, eps_list, L)

print(f"p1 = p2 = 2.2, p = {exps.p:.4f}, model depth L = {L}\n")
print(f"{'eps':>10} {'[w]_AP':>12} {'[sigma]_Ainf':>13} {'[v]_Ainf':>10} {'|f1||f2|':>10} {'R1 lower':>12}")
for r in rows:
    print(f"{r.eps:10.6f} {r.apbar:12.4f} {r.ainf_sigma1:13.4f} {r.ainf_v:10.4f} "
          f"{r.norm_f1 * r.norm_f2:10.4f} {r.r1_lower:12.4e}")

print("\nslopes in log(1/eps):")
for f in fits:
    print(f"  {f.quantity:13s} {f.slope:7.4f}  ({f.relation} {f.target:.4f})  "
          f"{'pass' if f.passed else 'FAIL'}")

# The A_P constant grows like (1/eps)^(mp-1) while the sigma constants stay
# bounded on the segment, so the mixed bound's weight factor grows more slowly
# than the pure A_P bound would predict.
