"""Per-level timing of the category axiom checks for SU(2)_k."""
import argparse
import time

from biunitary.fusion import build_su2_level, pentagon_residual, verify_axioms

p = argparse.ArgumentParser()
p.add_argument("--kmax", type=int, default=28)
p.add_argument("--exhaustive", action="store_true", help="also run the unhalved pentagon")
args = p.parse_args()

total = 0.0
print(f"{'k':>3} {'build':>7} {'axioms':>7} {'residual':>9} {'cumul':>7}")
for k in range(1, args.kmax + 1):
    t0 = time.perf_counter()
    cat = build_su2_level(k)
    t1 = time.perf_counter()
    res = verify_axioms(cat).max()
    t2 = time.perf_counter()
    total += t2 - t0
    line = f"{k:3d} {t1 - t0:7.2f} {t2 - t1:7.2f} {res:9.1e} {total:7.1f}"
    if args.exhaustive:
        t3 = time.perf_counter()
        line += f"  exhaustive {pentagon_residual(cat, exhaustive=True):.1e} in {time.perf_counter() - t3:.1f}s"
    print(line, flush=True)
