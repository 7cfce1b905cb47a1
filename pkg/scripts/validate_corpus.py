"""Sampled soundness checks over the example corpus.

NumFuzz programs are run ideally and in floating point; the observed relative
precision must stay under the inferred grade.  Bean programs get a backward
witness per sample, which must reproduce the float result within its bounds.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path

from roundcheck.grades import BEAN_CONFIG
from roundcheck.interp import validate_program
from roundcheck.lens import LensError, witness_sweep
from roundcheck.syntax import parse_bean, parse_numfuzz

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


@dataclass
class ValidateConfig:
    samples: int = 1000
    seed: int = 0
    lo: float = 0.1
    hi: float = 1000.0
    bean: bool = True


def validate_nfz(cfg: ValidateConfig) -> list[dict]:
    rows = []
    box = (Fraction(str(cfg.lo)), Fraction(str(cfg.hi)))
    for path in sorted((CORPUS / "nfz").glob("*.nfz")):
        start = time.perf_counter()
        reports = validate_program(parse_numfuzz(path.read_text()), cfg.samples, cfg.seed, box)
        for r in reports:
            rows.append({"file": path.name, **r.to_json(),
                         "seconds": round(time.perf_counter() - start, 3)})
    return rows


def validate_bean(cfg: ValidateConfig) -> list[dict]:
    rows = []
    for path in sorted((CORPUS / "bean").glob("*.bean")):
        program = parse_bean(path.read_text())
        for d in program.decls:
            try:
                failures, residual, ratios = witness_sweep(
                    program, d.name, cfg.samples, cfg.seed, BEAN_CONFIG, (cfg.lo, cfg.hi),
                    signed=False)
            except LensError as exc:
                rows.append({"file": path.name, "decl": d.name, "skipped": str(exc)})
                continue
            rows.append({"file": path.name, "decl": d.name, "failures": failures,
                         "max_residual": float(residual), "max_ratio": ratios})
    return rows


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description="sampled soundness checks over the corpus")
    for name, default in asdict(ValidateConfig()).items():
        if isinstance(default, bool):
            p.add_argument(f"--no-{name}", dest=name, action="store_false")
        else:
            p.add_argument(f"--{name}", type=type(default), default=default)
    cfg = ValidateConfig(**vars(p.parse_args(argv)))
    doc = {"config": asdict(cfg), "nfz": validate_nfz(cfg)}
    if cfg.bean:
        doc["bean"] = validate_bean(cfg)
    print(json.dumps(doc, indent=2, default=str))
    bad = [r for r in doc["nfz"] if not r.get("passed", True)]
    bad += [r for r in doc.get("bean", []) if r.get("failures")]
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
