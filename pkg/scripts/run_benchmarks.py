"""Run the benchmark suites and write one markdown table per suite.

    python3 scripts/run_benchmarks.py --out results/
    python3 scripts/run_benchmarks.py --suite large --with-big-matrices
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path

from roundcheck import bench


@dataclass
class BenchConfig:
    suites: list[str] = field(default_factory=lambda: list(bench.SUITES))
    out: Path | None = None
    timing: bool = True
    big_matrices: bool = False  # MatrixMultiply 64 and 128 take minutes


def run(cfg: BenchConfig) -> int:
    status = 0
    for suite in cfg.suites:
        config = bench.suite_config(suite)
        results = bench.run_bench(suite, config=config)
        if suite == "large" and cfg.big_matrices:
            results += bench.run_bench(suite, sizes=[64, 128], families=["NfMatrixMultiply"],
                                       config=config)
        table = bench.emit_report(results, "markdown", cfg.timing, config)
        header = f"## {suite} ({config.describe()['mode']}, u = {config.describe()['u']})\n\n"
        if cfg.out:
            cfg.out.mkdir(parents=True, exist_ok=True)
            (cfg.out / f"bench_{suite}.md").write_text(header + table, encoding="utf-8")
        print(header + table)
        status |= bench.exit_code(results)
    return status


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--suite", action="append", choices=bench.SUITES)
    p.add_argument("--out", type=Path)
    p.add_argument("--no-timing", action="store_true")
    p.add_argument("--with-big-matrices", action="store_true")
    a = p.parse_args(argv)
    cfg = BenchConfig(out=a.out, timing=not a.no_timing, big_matrices=a.with_big_matrices)
    if a.suite:
        cfg.suites = a.suite
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
