"""Parallel-transport deviation over an n x m grid, next to the dimension verdict."""
import argparse

from biunitary.cells import get_spec
from biunitary.errors import ResourceError
from biunitary.flatness import check_flatness, parallel_transport_check
from biunitary.induction import tower

p = argparse.ArgumentParser()
p.add_argument("specs", nargs="*", default=["A5", "D5", "E6", "E7"])
p.add_argument("--lam", type=int, default=1)
p.add_argument("--nmax", type=int, default=4)
p.add_argument("--m", type=int, default=6)
args = p.parse_args()

for name in args.specs:
    spec = get_spec(name)
    W = tower(name, spec.level, 1)[args.lam]
    devs = []
    for n in range(1, args.nmax + 1):
        try:
            devs.append(f"{parallel_transport_check(W, n, args.m):.1e}")
        except ResourceError:
            devs.append("bound")
    print(f"{name:4s} {check_flatness(spec, args.lam).verdict:8s} " + " ".join(devs))
