"""Time the set-operation and exhaustive dictionary algorithms.

Uses the study rule set plus random if-then rule sets of growing size.
"""

import argparse
import time

import numpy as np

from structsel.dictionary import derive_algorithm1, derive_algorithm2
from structsel.fixtures import study_rules
from structsel.rules import IfThen, RuleSet, Unit
from structsel.varsets import VarRegistry


def random_ruleset(n_vars, n_rules, rng):
    reg = VarRegistry(tuple(f"v{i}" for i in range(n_vars)))
    rules = []
    for r in range(n_rules):
        scope = rng.choice(n_vars, size=int(rng.integers(2, 5)), replace=False)
        a, b = scope[:1], scope[1:]
        ante = Unit(reg.varset([reg.names[i] for i in a]), frozenset([1]))
        cons = Unit.all_of(reg.varset([reg.names[i] for i in b]))
        rules.append((f"r{r}", IfThen(ante, cons)))
    return RuleSet(reg, tuple(rules), reg.varset())


def timed(fn, *a, **kw):
    t = time.perf_counter()
    out = fn(*a, **kw)
    return out, time.perf_counter() - t


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[10, 14, 18, 22])
    ap.add_argument("--rules", type=int, default=6)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    cases = [("study", study_rules())]
    cases += [(f"random p={p}", random_ruleset(p, args.rules, rng)) for p in args.sizes]
    print(f"{'case':14} {'members':>9} {'setops s':>9} {'exhaustive s':>13} agree")
    for name, rs in cases:
        d1, t1 = timed(derive_algorithm1, rs)
        d2, t2 = timed(derive_algorithm2, rs, workers=args.workers)
        print(f"{name:14} {len(d2):9d} {t1:9.3f} {t2:13.3f} {d1 == d2}")


if __name__ == "__main__":
    main()
