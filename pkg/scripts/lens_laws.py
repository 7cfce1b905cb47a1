"""Check both lens properties for each primitive and print a summary table."""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

import mpmath

from roundcheck.lens import check_lens_laws, compose, prim_lens, tensor


@dataclass
class LawConfig:
    samples: int = 10_000
    seed: int = 0
    tolerance: float = 1e-30


def lenses():
    for name in ("add", "sub", "mul", "div", "dmul"):
        yield prim_lens(name)
    # a two-term dot product assembled by hand
    yield compose(tensor(prim_lens("mul"), prim_lens("mul")), prim_lens("add"))


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--samples", type=int, default=LawConfig.samples)
    p.add_argument("--seed", type=int, default=LawConfig.seed)
    a = p.parse_args(argv)
    cfg = LawConfig(a.samples, a.seed)
    print("| lens | samples | property 1 failures | property 2 failures | max residual | exact |")
    print("|---|---|---|---|---|---|")
    ok = True
    for lens in lenses():
        r = check_lens_laws(lens, cfg.samples, cfg.seed, tolerance=cfg.tolerance)
        ok = ok and r.passed
        print(f"| {r.lens} | {r.samples} | {r.property1_failures} | {r.property2_failures} | "
              f"{mpmath.nstr(r.max_residual, 3)} | {'yes' if r.exact else 'no'} |")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
