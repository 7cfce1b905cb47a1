"""How close do sampled runs come to the inferred bounds?

For each size of a generated family, report the worst observed error divided by
the static bound.  NumFuzz families use forward validation; Bean families use
backward witnesses and report the worst ratio over all linear inputs.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from roundcheck.bench import GENERATORS
from roundcheck.grades import BEAN_CONFIG, NUMFUZZ_CONFIG
from roundcheck.interp import validate_forward
from roundcheck.lens import witness_sweep
from roundcheck.syntax import parse_bean, parse_numfuzz


@dataclass
class TightnessConfig:
    families: list[str] = field(default_factory=lambda: ["NfHorner", "NfSerialSum", "DotProd",
                                                         "Horner"])
    sizes: list[int] = field(default_factory=lambda: [2, 4, 8, 16, 32])
    samples: int = 200
    seed: int = 0


def ratio(family: str, n: int, cfg: TightnessConfig) -> float:
    text = GENERATORS[family](n)
    if family.startswith("Nf"):
        program = parse_numfuzz(text, NUMFUZZ_CONFIG)
        ratios = [validate_forward(program, d.name, cfg.samples, cfg.seed,
                                   (Fraction(1, 10), Fraction(1000))).max_ratio
                  for d in program.decls]
        return max(ratios)
    program = parse_bean(text)
    _, _, worst = witness_sweep(program, program.decls[-1].name, cfg.samples, cfg.seed,
                                BEAN_CONFIG, signed=False)
    return max(worst.values(), default=0.0)


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--family", action="append", choices=sorted(GENERATORS))
    p.add_argument("--sizes", type=int, nargs="+")
    p.add_argument("--samples", type=int, default=TightnessConfig.samples)
    p.add_argument("--seed", type=int, default=TightnessConfig.seed)
    a = p.parse_args(argv)
    cfg = TightnessConfig(samples=a.samples, seed=a.seed)
    if a.family:
        cfg.families = a.family
    if a.sizes:
        cfg.sizes = a.sizes
    print("| family | " + " | ".join(str(n) for n in cfg.sizes) + " |")
    print("|---|" + "---|" * len(cfg.sizes))
    for fam in cfg.families:
        cells = [f"{ratio(fam, n, cfg):.3f}" for n in cfg.sizes]
        print(f"| {fam} | " + " | ".join(cells) + " |")
    return 0


if __name__ == "__main__":
    sys.exit(main())
