"""Flat-part and fusion-ring dimension tables for chosen specs."""
import argparse

from biunitary.cells import get_spec
from biunitary.flatness import check_flatness, commutative_partner
from biunitary.homs import flat_part_dims, ring_dims, theta_plus

p = argparse.ArgumentParser()
p.add_argument("specs", nargs="*", default=["D5", "D7", "E6", "E7"])
p.add_argument("--lam", type=int, default=1)
p.add_argument("--depth", type=int, default=5)
args = p.parse_args()

for name in args.specs:
    spec = get_spec(name)
    partner = commutative_partner(spec)
    print(f"{name}: theta={list(spec.theta)} theta+={list(theta_plus(spec))} partner={partner.name}")
    for odd in (False, True):
        tag = "odd " if odd else "even"
        print(f"  {tag} flat part   {flat_part_dims(spec, args.lam, args.depth, odd)}")
        print(f"  {tag} ring bound  {ring_dims(spec, args.lam, args.depth, odd)}")
        print(f"  {tag} theta+ ring {ring_dims(spec, args.lam, args.depth, odd, theta_plus(spec))}")
    v = check_flatness(spec, args.lam)
    print(f"  verdict {v.verdict}  certificate {v.certificate}")
