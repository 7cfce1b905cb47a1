"""Benchmark generators and golden-table reproduction.

Every family is generated as a loop-free unrolled program.  Goldens are kept
as exact multiples k of a unit (u for NumFuzz, eps for Bean) next to the
three-significant-digit decimal the tables print; a row matches when the
inferred bound equals k*unit exactly.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .bean import check_bean_program
from .grades import (
    BEAN_CONFIG, BEAN_FZ_CONFIG, NUMFUZZ_CONFIG, Grade, RoundingConfig, config_from_env,
    multiple_of, rp_to_rel, sig_digits,
)
from .numfuzz import check_program
from .syntax import parse_bean, parse_numfuzz
from .syntax.terms import Op, Program, children

BEAN_FAMILIES = ("DotProd", "Horner", "PolyVal", "MatVecMul", "Sum")
NFZ_FAMILIES = ("NfHorner", "NfMatrixMultiply", "NfSerialSum", "NfPolyVal")
MAX_SIZE = 4096


class BenchError(ValueError):
    pass


@dataclass(frozen=True)
class BenchSpec:
    family: str
    size: int
    language: str  # "nfz" or "bean"
    config: RoundingConfig

    def __post_init__(self):
        if self.family not in BEAN_FAMILIES + NFZ_FAMILIES:
            raise BenchError(f"unknown benchmark family {self.family!r}")
        if not 1 <= self.size <= MAX_SIZE:
            raise BenchError(f"size must be between 1 and {MAX_SIZE}, got {self.size}")

    @property
    def label(self) -> str:
        return f"{self.family}{self.size}"


# ---------------------------------------------------------------- Bean generators


def _names(prefix: str, n: int) -> list[str]:
    return [f"{prefix}{i}" for i in range(n)]


def _unpack(vector: str, names: list[str], discrete: bool = False) -> str:
    kw = "dlet" if discrete else "let"
    if len(names) == 1:
        return f"{kw} {names[0]} = {vector} in"
    return f"{kw} ({', '.join(names)}) = {vector} in"


def _vec_type(kind: str, n: int) -> str:
    return kind if n == 1 else f"{kind}{n}"


def _left_fold(terms: list[str], prefix: str, lines: list[str]) -> str:
    """Emit let-bound adds ((t0 + t1) + t2) + ...; return the final variable."""
    acc = terms[0]
    for i, t in enumerate(terms[1:], 1):
        name = f"{prefix}{i}"
        lines.append(f"let {name} = add {acc} {t} in")
        acc = name
    return acc


def _finish(lines: list[str], result: str) -> str:
    """Indent the let-lines and end with result, folding a trailing ``let result = e in``."""
    prefix = f"let {result} = "
    if lines and lines[-1].startswith(prefix) and lines[-1].endswith(" in"):
        lines[-1] = lines[-1][len(prefix):-len(" in")]
    else:
        lines.append(result)
    return "\n".join("  " + ln for ln in lines) + "\n"


def gen_dotprod(n: int) -> str:
    """x . y with the backward error on x; y discrete."""
    xs, ys = _names("x", n), _names("y", n)
    lines = [_unpack("x", xs), _unpack("y", ys, discrete=True)]
    prods = []
    for i in range(n):
        lines.append(f"let p{i} = dmul y{i} x{i} in")
        prods.append(f"p{i}")
    acc = _left_fold(prods, "s", lines) if n > 1 else prods[0]
    header = f"DotProd{n} (x: {_vec_type('num', n)}) {{y: {_vec_type('dnum', n)}}} :=\n"
    return header + _finish(lines, acc)


def gen_sum(n: int) -> str:
    xs = _names("x", n)
    lines = [_unpack("x", xs)]
    acc = _left_fold(xs, "s", lines)
    header = f"Sum{n} (x: {_vec_type('num', n)}) :=\n"
    return header + _finish(lines, acc)


def gen_horner(n: int) -> str:
    """a0 + z(a1 + z(... + z aN)) with the backward error on the coefficients."""
    a = _names("a", n + 1)
    lines = [_unpack("a", a)]
    acc = f"a{n}"
    for i in range(n - 1, -1, -1):
        lines.append(f"let t{i} = dmul z {acc} in")
        lines.append(f"let h{i} = add a{i} t{i} in")
        acc = f"h{i}"
    header = f"Horner{n} (a: num{n + 1}) {{z: dnum}} :=\n"
    return header + _finish(lines, acc)


def gen_polyval(n: int) -> str:
    """sum a_i z^i, each monomial scaled by z one multiplication at a time."""
    a = _names("a", n + 1)
    lines = [_unpack("a", a)]
    terms = ["a0"]
    for i in range(1, n + 1):
        prev = f"a{i}"
        for j in range(1, i + 1):
            name = f"m{i}_{j}"
            lines.append(f"let {name} = dmul z {prev} in")
            prev = name
        terms.append(prev)
    acc = _left_fold(terms, "s", lines)
    header = f"PolyVal{n} (a: num{n + 1}) {{z: dnum}} :=\n"
    return header + _finish(lines, acc)


def gen_matvecmul(n: int) -> str:
    """M v for an n x n matrix M (backward error) and a discrete vector v."""
    rows = _names("m", n)
    vs = _names("v", n)
    lines = [_unpack("M", rows), _unpack("v", vs, discrete=True)]
    outs = []
    for i in range(n):
        entries = [f"m{i}_{j}" for j in range(n)]
        lines.append(_unpack(f"m{i}", entries))
        prods = []
        for j in range(n):
            lines.append(f"let p{i}_{j} = dmul v{j} m{i}_{j} in")
            prods.append(f"p{i}_{j}")
        outs.append(_left_fold(prods, f"r{i}_", lines) if n > 1 else prods[0])
    result = outs[0] if n == 1 else "(" + ", ".join(outs) + ")"
    mtype = "num" if n == 1 else f"num{n}x{n}"
    header = f"MatVecMul{n} (M: {mtype}) {{v: {_vec_type('dnum', n)}}} :=\n"
    return header + _finish(lines, result)


# ---------------------------------------------------------------- NumFuzz generators


def _nfz_params(names: list[str], ty: str = "num") -> str:
    return ", ".join(f"{n}: {ty}" for n in names)


def gen_nf_horner(n: int) -> str:
    """Horner's scheme with one fused multiply-add (exact mul, rounded add) per step."""
    a = _names("a", n + 1)
    lines = ["let [x1] = x;"]
    acc = f"a{n}"
    for i in range(n - 1, -1, -1):
        lines.append(f"let h{i} = addfp ⟨mul (x1, {acc}), a{i}⟩;")
        acc = f"h{i}"
    lines.append(f"ret {acc}")
    body = "\n".join("  " + ln for ln in lines)
    return f"function Horner{n} ({_nfz_params(a)}, x: ![{n}]num) {{\n{body}\n}}\n"


def gen_nf_serial_sum(n: int) -> str:
    xs = _names("x", n)
    lines = []
    acc = "x0"
    for i in range(1, n):
        lines.append(f"let s{i} = addfp ⟨{acc}, x{i}⟩;")
        acc = f"s{i}"
    lines.append(f"ret {acc}")
    body = "\n".join("  " + ln for ln in lines)
    return f"function SerialSum{n} ({_nfz_params(xs)}) {{\n{body}\n}}\n"


def gen_nf_matrix_multiply(n: int) -> str:
    """C = A B, one declaration per entry of C, row-major left-to-right accumulation."""
    a, b = _names("a", n), _names("b", n)
    out = []
    for i in range(n):
        for j in range(n):
            lines = [f"let p{k} = mulfp (a{k}, b{k});" for k in range(n)]
            acc = "p0"
            for k in range(1, n):
                lines.append(f"let s{k} = addfp ⟨{acc}, p{k}⟩;")
                acc = f"s{k}"
            lines.append(f"ret {acc}")
            body = "\n".join("  " + ln for ln in lines)
            out.append(f"function C{i}_{j} ({_nfz_params(a)}, {_nfz_params(b)}) {{\n{body}\n}}\n")
    return "\n".join(out)


def gen_nf_polyval(n: int) -> str:
    """sum a_i x^i, each monomial multiplied out with rounded products, then summed."""
    a = _names("a", n + 1)
    uses = n * (n + 1) // 2
    lines = ["let [x1] = x;"]
    terms = ["a0"]
    for i in range(1, n + 1):
        prev = f"a{i}"
        for j in range(1, i + 1):
            name = f"m{i}_{j}"
            lines.append(f"let {name} = mulfp (x1, {prev});")
            prev = name
        terms.append(prev)
    acc = terms[0]
    for i, t in enumerate(terms[1:], 1):
        lines.append(f"let s{i} = addfp ⟨{acc}, {t}⟩;")
        acc = f"s{i}"
    lines.append(f"ret {acc}")
    body = "\n".join("  " + ln for ln in lines)
    return f"function Poly{n} ({_nfz_params(a)}, x: ![{uses}]num) {{\n{body}\n}}\n"


GENERATORS: dict[str, Callable[[int], str]] = {
    "DotProd": gen_dotprod,
    "Horner": gen_horner,
    "PolyVal": gen_polyval,
    "MatVecMul": gen_matvecmul,
    "Sum": gen_sum,
    "NfHorner": gen_nf_horner,
    "NfMatrixMultiply": gen_nf_matrix_multiply,
    "NfSerialSum": gen_nf_serial_sum,
    "NfPolyVal": gen_nf_polyval,
}

# operation counts per family
OPS: dict[str, Callable[[int], int]] = {
    "DotProd": lambda n: 2 * n - 1,
    "Horner": lambda n: 2 * n,
    "PolyVal": lambda n: n * (n + 3) // 2,
    "MatVecMul": lambda n: n * (2 * n - 1),
    "Sum": lambda n: n - 1,
    "NfHorner": lambda n: 2 * n,
    "NfMatrixMultiply": lambda n: n * n * (2 * n - 1),
    "NfSerialSum": lambda n: n - 1,
    "NfPolyVal": lambda n: n * (n + 3) // 2,
}

# bound as a multiple of the unit (eps for Bean, u for NumFuzz)
BOUND_K: dict[str, Callable[[int], int]] = {
    "DotProd": lambda n: n,
    "Horner": lambda n: 2 * n,
    "PolyVal": lambda n: n + 1,
    "MatVecMul": lambda n: n,
    "Sum": lambda n: n - 1,
    "NfHorner": lambda n: n,
    "NfMatrixMultiply": lambda n: 2 * n - 1,
    "NfSerialSum": lambda n: n - 1,
    "NfPolyVal": lambda n: n * (n + 3) // 2,
}


def gen_benchmark(spec: BenchSpec) -> str:
    return GENERATORS[spec.family](spec.size)


def parse_benchmark(spec: BenchSpec, text: str | None = None) -> Program:
    text = text if text is not None else gen_benchmark(spec)
    if spec.language == "bean":
        return parse_bean(text)
    return parse_numfuzz(text, spec.config)


def count_ops(program: Program) -> int:
    """Arithmetic operations (primitive applications other than tests) in every declaration."""
    total = 0
    for d in program.decls:
        stack = [d.body]
        while stack:
            t = stack.pop()
            if isinstance(t, Op) and t.name != "is_pos":
                total += 1
            stack.extend(children(t))
    return total


# ---------------------------------------------------------------- goldens


@dataclass(frozen=True)
class Golden:
    family: str
    size: int
    k: int  # bound = k * unit
    ops: int  # operation count as printed
    decimal: str  # bound as printed


# suite -> rows.  std: Bean backward bounds; large: NumFuzz forward bounds;
# fz: forward bounds obtained from Bean backward bounds.
GOLDENS: dict[str, list[Golden]] = {
    "std": [
        Golden("DotProd", 20, 20, 39, "2.22e-15"),
        Golden("DotProd", 50, 50, 99, "5.55e-15"),
        Golden("DotProd", 100, 100, 199, "1.11e-14"),
        Golden("DotProd", 500, 500, 999, "5.55e-14"),
        Golden("Horner", 20, 40, 40, "4.44e-15"),
        Golden("Horner", 50, 100, 100, "1.11e-14"),
        Golden("Horner", 100, 200, 200, "2.22e-14"),
        Golden("Horner", 500, 1000, 1000, "1.11e-13"),
        Golden("PolyVal", 10, 11, 65, "1.22e-15"),
        Golden("PolyVal", 20, 21, 230, "2.33e-15"),
        Golden("PolyVal", 50, 51, 1325, "5.66e-15"),
        Golden("PolyVal", 100, 101, 5150, "1.12e-14"),
        Golden("MatVecMul", 5, 5, 45, "5.55e-16"),
        Golden("MatVecMul", 10, 10, 190, "1.11e-15"),
        Golden("MatVecMul", 20, 20, 780, "2.22e-15"),
        Golden("MatVecMul", 50, 50, 4950, "5.55e-15"),
        Golden("Sum", 50, 49, 49, "5.44e-15"),
        Golden("Sum", 100, 99, 100, "1.10e-14"),
        Golden("Sum", 500, 499, 499, "5.54e-14"),
        Golden("Sum", 1000, 999, 999, "1.11e-13"),
    ],
    "large": [
        Golden("NfHorner", 5, 5, 10, "1.11e-15"),
        Golden("NfHorner", 10, 10, 20, "2.22e-15"),
        Golden("NfHorner", 20, 20, 40, "4.44e-15"),
        Golden("NfHorner", 50, 50, 100, "1.11e-14"),
        Golden("NfMatrixMultiply", 4, 7, 112, "1.55e-15"),
        Golden("NfHorner", 75, 75, 150, "1.66e-14"),
        Golden("NfHorner", 100, 100, 200, "2.22e-14"),
        Golden("NfSerialSum", 1024, 1023, 1023, "2.27e-13"),
        Golden("NfPolyVal", 50, 1325, 1325, "2.94e-13"),
        Golden("NfMatrixMultiply", 16, 31, 7936, "6.88e-15"),
        Golden("NfMatrixMultiply", 64, 127, 520192, "2.82e-14"),
        Golden("NfMatrixMultiply", 128, 255, 4177920, "5.66e-14"),
    ],
    "fz": [
        Golden("Sum", 500, 499, 499, "1.11e-13"),
        Golden("DotProd", 500, 500, 999, "1.11e-13"),
        Golden("Horner", 500, 1000, 1000, "2.22e-13"),
        Golden("PolyVal", 100, 101, 5150, "2.24e-14"),
    ],
}

# sizes run when --sizes is not given
DEFAULT_SIZES: dict[str, dict[str, tuple[int, ...]]] = {
    "std": {
        "DotProd": (20, 50, 100, 500), "Horner": (20, 50, 100, 500),
        "PolyVal": (10, 20, 50, 100), "MatVecMul": (5, 10, 20, 50), "Sum": (50, 100, 500, 1000),
    },
    "large": {
        "NfHorner": (5, 10, 20, 50, 75, 100), "NfMatrixMultiply": (4, 16),
        "NfSerialSum": (1024,), "NfPolyVal": (50,),
    },
    "fz": {"Sum": (100, 500), "DotProd": (100, 500), "Horner": (100, 500), "PolyVal": (100,)},
}

SUITES = tuple(GOLDENS)


def suite_config(suite: str) -> RoundingConfig:
    base = {"std": BEAN_CONFIG, "large": NUMFUZZ_CONFIG, "fz": BEAN_FZ_CONFIG}[suite]
    return config_from_env(base)


def _unit(suite: str, config: RoundingConfig) -> tuple[Fraction, str]:
    return (config.u, "u") if suite == "large" else (config.eps, "eps")


def printed_forms(value: Fraction) -> set[str]:
    """Three-digit decimals a table could print for value: rounded or truncated."""
    rounded = sig_digits(value)
    mant, exp = rounded.split("e")
    forms = {rounded}
    # truncation differs from rounding only in the last digit
    scale = Fraction(10) ** int(exp)
    digits = int(mant.replace(".", ""))
    if Fraction(digits, 100) * scale > value:
        m = digits - 1
        forms.add(f"{m // 100}.{m % 100:02d}e{exp}")
    return forms


# ---------------------------------------------------------------- running


@dataclass
class BenchResult:
    suite: str
    family: str
    size: int
    language: str
    ops: int | None = None
    expected_ops: int | None = None
    bound: Grade | None = None  # max inferred bound (backward for Bean)
    reported: Fraction | None = None  # what the table compares: the bound, or its relative form
    expected: Fraction | None = None
    expected_k: int | None = None
    unit_name: str = "u"
    table_decimal: str | None = None
    golden_source: str = "table"
    seconds: float = 0.0
    error: str | None = None
    notes: list[str] = field(default_factory=list)
    unit: Fraction = Fraction(1)

    @property
    def label(self) -> str:
        return f"{self.family}{self.size}"

    @property
    def match(self) -> bool:
        return self.error is None and self.reported is not None and self.reported == self.expected

    @property
    def ops_match(self) -> bool:
        return self.ops is not None and self.ops == self.expected_ops

    @property
    def display_consistent(self) -> bool | None:
        if self.table_decimal is None or self.expected is None:
            return None
        return self.table_decimal in printed_forms(self.expected)

    def to_json(self, with_timing: bool = True) -> dict:
        out = {
            "suite": self.suite,
            "benchmark": self.label,
            "family": self.family,
            "size": self.size,
            "language": self.language,
            "ops": self.ops,
            "expected_ops": self.expected_ops,
        }
        if self.error is not None:
            out["error"] = self.error
        if self.bound is not None:
            out["bound"] = {
                "exact": str(self.bound),
                "multiple": multiple_of(self.bound, self.unit, self.unit_name),
                "decimal": sig_digits(self.bound.value),
            }
        if self.reported is not None:
            out["reported"] = {"exact": str(self.reported), "decimal": sig_digits(self.reported)}
        if self.expected is not None:
            out["expected"] = {
                "exact": str(self.expected),
                "k": self.expected_k,
                "unit": self.unit_name,
                "decimal": sig_digits(self.expected),
                "source": self.golden_source,
            }
            if self.table_decimal is not None:
                out["expected"]["table_decimal"] = self.table_decimal
                out["expected"]["display_consistent"] = self.display_consistent
        out["match"] = self.match
        out["ops_match"] = self.ops_match
        if self.notes:
            out["notes"] = list(self.notes)
        if with_timing:
            out["seconds"] = round(self.seconds, 4)
        return out


def _golden(suite: str, family: str, size: int) -> Golden | None:
    for g in GOLDENS[suite]:
        if g.family == family and g.size == size:
            return g
    return None


def run_entry(suite: str, family: str, size: int, config: RoundingConfig | None = None) -> BenchResult:
    """Generate, parse and check one benchmark; failures are recorded, not raised."""
    config = config or suite_config(suite)
    language = "nfz" if family.startswith("Nf") else "bean"
    unit, unit_name = _unit(suite, config)
    golden = _golden(suite, family, size)
    k = BOUND_K[family](size)
    res = BenchResult(suite, family, size, language, unit_name=unit_name)
    res.unit = unit
    res.expected_ops = OPS[family](size)
    res.expected_k = k
    bound_value = k * unit
    res.expected = rp_to_rel(bound_value) if suite == "fz" else bound_value
    if golden is not None:
        res.table_decimal = golden.decimal
        if golden.k != k:
            res.notes.append(f"table multiple {golden.k} differs from the family formula {k}")
            res.expected_k = golden.k
            bound_value = golden.k * unit
            res.expected = rp_to_rel(bound_value) if suite == "fz" else bound_value
        if golden.ops != res.expected_ops:
            res.notes.append(f"table prints {golden.ops} ops; the unrolled program has "
                             f"{res.expected_ops}")
    else:
        res.golden_source = "formula"
    start = time.perf_counter()
    try:
        spec = BenchSpec(family, size, language, config)
        program = parse_benchmark(spec)
        res.ops = count_ops(program)
        if language == "bean":
            report = check_bean_program(program, config)
            res.bound = report.decls[-1].max_bound
        else:
            report = check_program(program, config)
            bound = Grade(0)
            for d in report.decls:
                g = d.grade if d.grade is not None else Grade(infinite=True)
                bound = bound if g <= bound else g
            res.bound = bound
        if suite == "fz":
            res.reported = rp_to_rel(res.bound)
        else:
            res.reported = res.bound.value if res.bound.is_finite else None
    except Exception as exc:  # recorded per entry; the suite continues
        res.error = f"{type(exc).__name__}: {exc}"
    res.seconds = time.perf_counter() - start
    return res


def suite_entries(suite: str, sizes: list[int] | None = None,
                  families: list[str] | None = None) -> list[tuple[str, int]]:
    if suite not in GOLDENS:
        raise BenchError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    fams = DEFAULT_SIZES[suite]
    if families:
        unknown = [f for f in families if f not in fams]
        if unknown:
            raise BenchError(f"families {unknown} are not part of suite {suite!r}")
    out = []
    for fam, default in fams.items():
        if families and fam not in families:
            continue
        for n in (sizes if sizes else default):
            out.append((fam, n))
    return out


def run_bench(suite: str, sizes: list[int] | None = None, families: list[str] | None = None,
              config: RoundingConfig | None = None) -> list[BenchResult]:
    return [run_entry(suite, fam, n, config) for fam, n in suite_entries(suite, sizes, families)]


def emit_report(results: list[BenchResult], fmt: str = "json", with_timing: bool = True,
                config: RoundingConfig | None = None) -> str:
    if fmt == "json":
        doc = {"results": [r.to_json(with_timing) for r in results]}
        if config is not None:
            doc = {"config": config.describe(), **doc}
        doc["all_match"] = all(r.match for r in results)
        return json.dumps(doc, indent=2, ensure_ascii=False)
    if fmt == "markdown":
        head = "| benchmark | ops | bound | expected | table | match |"
        if with_timing:
            head += " time (s) |"
        rows = [head, "|" + "---|" * (head.count("|") - 1)]
        for r in results:
            bound = "error" if r.error else (
                sig_digits(r.reported) if r.reported is not None else "-")
            exp = f"{r.expected_k}{r.unit_name}" if r.expected_k is not None else "-"
            if r.suite == "fz":
                exp = f"rel({exp})"
            row = (f"| {r.label} | {r.ops if r.ops is not None else '-'} | {bound} | {exp} | "
                   f"{r.table_decimal or '-'} | {'✓' if r.match else '✗'} |")
            if with_timing:
                row += f" {r.seconds:.3f} |"
            rows.append(row)
        return "\n".join(rows) + "\n"
    raise BenchError(f"unknown report format {fmt!r}")


def exit_code(results: list[BenchResult]) -> int:
    return 0 if all(r.match for r in results) else 1
