"""Sensitivity and rounding-error inference for NumFuzz.

``infer`` works bottom-up: given the types of the variables in scope (a
skeleton) it returns the least sensitivities of the term in each variable and
the term's type, whose monadic grade M[q] is the forward rounding-error bound
in the RP metric.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from ._deep import deep
from .grades import (
    INF, ONE, ZERO, Grade, NUMFUZZ_CONFIG, RoundingConfig, display, grade_max, grade_min,
    sig_digits,
)
from .syntax.pretty import pretty_type
from .syntax.terms import (
    App, Box, Case, Const, Decl, Inl, Inr, Lam, Let, LetBang, LetMonad, LetPair, Op, Pair,
    Program, Proj, Ret, Rnd, Span, Term, UnitVal, Var, WithPair,
)
from .syntax.types import (
    Bang, Hole, HOLE, Lolli, Monad, NUM, Num, Sum, Tensor, Type, UNIT, Unit, With,
)


class TypeCheckError(Exception):
    def __init__(self, message: str, span: Span | None = None):
        self.message = message
        self.span = span
        where = f"{span[0]}:{span[1]}: " if span else ""
        super().__init__(where + message)


# ---------------------------------------------------------------- contexts


class NfContext:
    """Ordered map variable -> (type, sensitivity).  Immutable by convention."""

    __slots__ = ("entries",)

    def __init__(self, entries: dict[str, tuple[Type, Grade]] | None = None):
        self.entries = dict(entries or {})

    @classmethod
    def of(cls, **kw) -> "NfContext":
        return cls({k: (t, Grade.of(g)) for k, (t, g) in kw.items()})

    def grade(self, name: str) -> Grade:
        entry = self.entries.get(name)
        return entry[1] if entry else ZERO

    def without(self, *names: str) -> "NfContext":
        return NfContext({k: v for k, v in self.entries.items() if k not in names})

    def __contains__(self, name: str) -> bool:
        return name in self.entries

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def __eq__(self, other) -> bool:
        return isinstance(other, NfContext) and self.entries == other.entries

    def __repr__(self) -> str:
        body = ", ".join(f"{k}:{g} {pretty_type(t)}" for k, (t, g) in self.entries.items())
        return f"NfContext({body})"


def _merge(g1: NfContext, g2: NfContext, combine) -> NfContext:
    out = dict(g1.entries)
    for name, (t, g) in g2.entries.items():
        if name in out:
            t1, g0 = out[name]
            if t1 != t:
                raise TypeCheckError(
                    f"variable {name!r} used at types {pretty_type(t1)} and {pretty_type(t)}"
                )
            out[name] = (t1, combine(g0, g))
        else:
            out[name] = (t, g)
    return NfContext(out)


def ctx_sum(g1: NfContext, g2: NfContext) -> NfContext:
    if not g1.entries:
        return g2
    if not g2.entries:
        return g1
    return _merge(g1, g2, lambda a, b: a + b)


def ctx_scale(s: Grade, g: NfContext) -> NfContext:
    s = Grade.of(s)
    if s == ONE:
        return g
    return NfContext({k: (t, s * r) for k, (t, r) in g.entries.items()})


def ctx_max(g1: NfContext, g2: NfContext) -> NfContext:
    return _merge(g1, g2, grade_max)


def ctx_leq(g1: NfContext, g2: NfContext) -> bool:
    """g1 ⊑ g2: every binding of g1 appears in g2 with at least its grade."""
    for name, (t, g) in g1.entries.items():
        if g.is_zero:
            continue
        if name not in g2.entries:
            return False
        t2, g2v = g2.entries[name]
        if t2 != t or not g <= g2v:
            return False
    return True


# ---------------------------------------------------------------- subtyping


def _grade_text(g: Grade, digits: int = 3) -> str:
    return "inf" if g.infinite else sig_digits(g.value, digits)


def _grade_pair(a: Grade, b: Grade) -> str:
    """'a ≤ b' with enough digits that the two sides differ."""
    digits = 3
    while _grade_text(a, digits) == _grade_text(b, digits) and digits < 40:
        digits += 1
    return f"{_grade_text(a, digits)} ≤ {_grade_text(b, digits)}"


def subtype_failure(t1: Type, t2: Type) -> str | None:
    """None if t1 ⊑ t2, else a message naming the first failing pair."""
    if t1 == t2 or isinstance(t1, Hole):
        return None
    if isinstance(t1, (Tensor, With, Sum)) and type(t1) is type(t2):
        return subtype_failure(t1.left, t2.left) or subtype_failure(t1.right, t2.right)
    if isinstance(t1, Lolli) and isinstance(t2, Lolli):
        return subtype_failure(t2.dom, t1.dom) or subtype_failure(t1.cod, t2.cod)
    if isinstance(t1, Monad) and isinstance(t2, Monad):
        if not t1.grade <= t2.grade:
            return f"expected {_grade_pair(t1.grade, t2.grade)}"
        return subtype_failure(t1.inner, t2.inner)
    if isinstance(t1, Bang) and isinstance(t2, Bang):
        if not t2.grade <= t1.grade:
            return f"expected {_grade_pair(t2.grade, t1.grade)}"
        return subtype_failure(t1.inner, t2.inner)
    return f"expected {pretty_type(t2)}, found {pretty_type(t1)}"


def subtype(t1: Type, t2: Type) -> bool:
    return subtype_failure(t1, t2) is None


def _join(t1: Type, t2: Type, upper: bool) -> Type:
    if t1 == t2:
        return t1
    if isinstance(t1, Hole):
        return t2
    if isinstance(t2, Hole):
        return t1
    if type(t1) is not type(t2):
        raise TypeCheckError(
            f"types {pretty_type(t1)} and {pretty_type(t2)} have different shapes"
        )
    if isinstance(t1, (Tensor, With, Sum)):
        return type(t1)(_join(t1.left, t2.left, upper), _join(t1.right, t2.right, upper))
    if isinstance(t1, Lolli):
        return Lolli(_join(t1.dom, t2.dom, not upper), _join(t1.cod, t2.cod, upper))
    if isinstance(t1, Monad):
        g = grade_max(t1.grade, t2.grade) if upper else grade_min(t1.grade, t2.grade)
        return Monad(g, _join(t1.inner, t2.inner, upper))
    if isinstance(t1, Bang):
        g = grade_min(t1.grade, t2.grade) if upper else grade_max(t1.grade, t2.grade)
        return Bang(g, _join(t1.inner, t2.inner, upper))
    raise TypeCheckError(f"cannot join {pretty_type(t1)} and {pretty_type(t2)}")


def type_max(t1: Type, t2: Type) -> Type:
    return _join(t1, t2, True)


def type_min(t1: Type, t2: Type) -> Type:
    return _join(t1, t2, False)


# ---------------------------------------------------------------- primitives


def primitive_types(config: RoundingConfig) -> dict[str, Lolli]:
    q = config.rnd_grade
    add_in = With(NUM, NUM)
    mul_in = Tensor(NUM, NUM)
    sqrt_in = Bang(Grade(Fraction(1, 2)), NUM)
    return {
        "add": Lolli(add_in, NUM),
        "mul": Lolli(mul_in, NUM),
        "div": Lolli(mul_in, NUM),
        "sqrt": Lolli(sqrt_in, NUM),
        "addfp": Lolli(add_in, Monad(q, NUM)),
        "mulfp": Lolli(mul_in, Monad(q, NUM)),
        "divfp": Lolli(mul_in, Monad(q, NUM)),
        "sqrtfp": Lolli(sqrt_in, Monad(q, NUM)),
        "is_pos": Lolli(Bang(INF, NUM), Sum(UNIT, UNIT)),
    }


# ---------------------------------------------------------------- inference


@dataclass(frozen=True)
class TraceStep:
    rule: str
    span: Span | None
    grade: Grade | None = None  # the side-condition grade (s, t, ...) where a rule has one


@dataclass
class InferenceResult:
    context: NfContext
    type: Type
    trace: list[TraceStep] = field(default_factory=list)


class _Inferencer:
    def __init__(self, config: RoundingConfig, globals_: dict[str, Type], trace: bool):
        self.config = config
        self.globals = globals_
        self.prims = primitive_types(config)
        self.trace: list[TraceStep] | None = [] if trace else None

    def step(self, rule: str, t: Term, grade: Grade | None = None):
        if self.trace is not None:
            self.trace.append(TraceStep(rule, t.span, grade))

    def infer(self, sk: dict[str, Type], t: Term) -> tuple[NfContext, Type]:
        if isinstance(t, Var):
            self.step("Var", t)
            if t.name in sk:
                ty = sk[t.name]
                return NfContext({t.name: (ty, ONE)}), ty
            if t.name in self.globals:
                return NfContext(), self.globals[t.name]
            raise TypeCheckError(f"unbound variable {t.name!r}", t.span)
        if isinstance(t, Const):
            self.step("Const", t)
            return NfContext(), NUM
        if isinstance(t, UnitVal):
            self.step("Unit", t)
            return NfContext(), UNIT
        if isinstance(t, Pair):
            g1, a = self.infer(sk, t.left)
            g2, b = self.infer(sk, t.right)
            self.step("⊗I", t)
            return ctx_sum(g1, g2), Tensor(a, b)
        if isinstance(t, WithPair):
            g1, a = self.infer(sk, t.left)
            g2, b = self.infer(sk, t.right)
            self.step("&I", t)
            return ctx_max(g1, g2), With(a, b)
        if isinstance(t, Inl):
            g, a = self.infer(sk, t.body)
            self.step("+I", t)
            return g, Sum(a, HOLE)
        if isinstance(t, Inr):
            g, b = self.infer(sk, t.body)
            self.step("+I", t)
            return g, Sum(HOLE, b)
        if isinstance(t, Proj):
            g, ty = self.infer(sk, t.body)
            if not isinstance(ty, With):
                raise TypeCheckError(f"pi{t.index} expects a & pair, found {pretty_type(ty)}", t.span)
            self.step("&E", t)
            return g, ty.left if t.index == 1 else ty.right
        if isinstance(t, Lam):
            self.fresh(sk, t.param, t)
            g, body = self.infer({**sk, t.param: t.ptype}, t.body)
            s = g.grade(t.param)
            if not s <= ONE:
                raise TypeCheckError(
                    f"parameter {t.param!r} is used with sensitivity {s}; "
                    f"declare it as ![{s}]{pretty_type(t.ptype, self.config)}",
                    t.span,
                )
            self.step("⊸I", t, s)
            return g.without(t.param), Lolli(t.ptype, body)
        if isinstance(t, App):
            g1, fty = self.infer(sk, t.fn)
            if not isinstance(fty, Lolli):
                raise TypeCheckError(f"applying a non-function of type {pretty_type(fty)}", t.span)
            g2, aty = self.infer(sk, t.arg)
            g2 = self.coerce(g2, aty, fty.dom, t)
            self.step("⊸E", t)
            return ctx_sum(g1, g2), fty.cod
        if isinstance(t, Op):
            sig = self.prims.get(t.name)
            if sig is None:
                raise TypeCheckError(f"unknown primitive {t.name!r}", t.span)
            if len(t.args) != 1:
                raise TypeCheckError(f"{t.name} takes one (pair) argument", t.span)
            g, aty = self.infer(sk, t.args[0])
            g = self.coerce(g, aty, sig.dom, t)
            self.step("Op", t)
            return g, sig.cod
        if isinstance(t, Let):
            g1, a = self.infer(sk, t.bound)
            self.fresh(sk, t.name, t)
            g2, b = self.infer({**sk, t.name: a}, t.body)
            s = _promote(g2.grade(t.name))
            self.step("Let", t, s)
            return ctx_sum(ctx_scale(s, g1), g2.without(t.name)), b
        if isinstance(t, LetPair):
            g1, a = self.infer(sk, t.bound)
            if not isinstance(a, Tensor):
                raise TypeCheckError(f"let (x, y) expects a ⊗ pair, found {pretty_type(a)}", t.span)
            self.fresh(sk, t.left, t)
            self.fresh(sk, t.right, t)
            g2, b = self.infer({**sk, t.left: a.left, t.right: a.right}, t.body)
            s = grade_max(g2.grade(t.left), g2.grade(t.right))
            self.step("⊗E", t, s)
            return ctx_sum(g2.without(t.left, t.right), ctx_scale(s, g1)), b
        if isinstance(t, Case):
            g, sty = self.infer(sk, t.scrut)
            if not isinstance(sty, Sum):
                raise TypeCheckError(f"case expects a sum, found {pretty_type(sty)}", t.span)
            for name in (t.left_name, t.right_name):
                if name != "_":
                    self.fresh(sk, name, t)
            gl, rl = self.infer(_bind(sk, t.left_name, sty.left), t.left)
            gr, rr = self.infer(_bind(sk, t.right_name, sty.right), t.right)
            s = _promote(grade_max(gl.grade(t.left_name), gr.grade(t.right_name)))
            try:
                rty = type_max(rl, rr)
            except TypeCheckError as exc:
                raise TypeCheckError(f"case arms disagree: {exc.message}", t.span) from None
            self.step("+E", t, s)
            arms = ctx_max(gl.without(t.left_name), gr.without(t.right_name))
            return ctx_sum(ctx_scale(s, g), arms), rty
        if isinstance(t, Box):
            g, a = self.infer(sk, t.body)
            self.step("!I", t, t.grade)
            return ctx_scale(t.grade, g), Bang(t.grade, a)
        if isinstance(t, LetBang):
            g1, a = self.infer(sk, t.bound)
            if not isinstance(a, Bang):
                raise TypeCheckError(f"let [x] expects a !-type, found {pretty_type(a)}", t.span)
            self.fresh(sk, t.name, t)
            g2, b = self.infer({**sk, t.name: a.inner}, t.body)
            tt = g2.grade(t.name).divide(a.grade)
            self.step("!E", t, tt)
            return ctx_sum(ctx_scale(tt, g1), g2.without(t.name)), b
        if isinstance(t, Ret):
            g, a = self.infer(sk, t.body)
            self.step("Ret", t)
            return g, Monad(ZERO, a)
        if isinstance(t, Rnd):
            g, a = self.infer(sk, t.body)
            if not isinstance(a, Num):
                raise TypeCheckError(f"rnd expects num, found {pretty_type(a)}", t.span)
            self.step("Rnd", t, self.config.rnd_grade)
            return g, Monad(self.config.rnd_grade, NUM)
        if isinstance(t, LetMonad):
            g1, a = self.infer(sk, t.bound)
            if not isinstance(a, Monad):
                raise TypeCheckError(
                    f"monadic let expects an M-type, found {pretty_type(a)}", t.span
                )
            self.fresh(sk, t.name, t)
            g2, b = self.infer({**sk, t.name: a.inner}, t.body)
            if not isinstance(b, Monad):
                raise TypeCheckError(
                    f"body of a monadic let must have an M-type, found {pretty_type(b)}", t.span
                )
            s = g2.grade(t.name)
            self.step("MLet", t, s)
            grade = s * a.grade + b.grade
            return ctx_sum(ctx_scale(s, g1), g2.without(t.name)), Monad(grade, b.inner)
        raise TypeCheckError(f"{type(t).__name__} is not a NumFuzz term", t.span)

    def fresh(self, sk, name, t):
        if name in sk and name != "_":
            raise TypeCheckError(f"variable {name!r} shadows an enclosing binding", t.span)

    def coerce(self, g: NfContext, actual: Type, expected: Type, t: Term) -> NfContext:
        """Check an argument against a parameter type.

        A plain argument passed where ![s]σ is expected is boxed on the fly,
        which scales its context by s.
        """
        reason = subtype_failure(actual, expected)
        if reason is None:
            return g
        if isinstance(expected, Bang) and not isinstance(actual, Bang):
            if subtype_failure(actual, expected.inner) is None:
                self.step("!I", t, expected.grade)
                return ctx_scale(expected.grade, g)
        raise TypeCheckError(f"mismatched types: {reason}", t.span)


def _promote(s: Grade) -> Grade:
    return s if not s.is_zero else ONE


def _bind(sk, name, ty):
    return sk if name == "_" else {**sk, name: ty}


@deep
def infer(
    skeleton: dict[str, Type],
    term: Term,
    config: RoundingConfig = NUMFUZZ_CONFIG,
    globals_: dict[str, Type] | None = None,
    trace: bool = False,
) -> InferenceResult:
    inf = _Inferencer(config, globals_ or {}, trace)
    ctx, ty = inf.infer(dict(skeleton), term)
    return InferenceResult(ctx, ty, inf.trace or [])


def decl_term(d: Decl) -> Term:
    """The curried lambda a declaration stands for."""
    body = d.body
    for p in reversed(d.params):
        body = Lam(p.name, p.type, body, span=d.span)
    return body


# ---------------------------------------------------------------- programs


@dataclass
class DeclReport:
    name: str
    type: Type
    params: list[tuple[str, Type, Grade]]
    grade: Grade | None  # monadic grade of the result, if any
    trace: list[TraceStep] = field(default_factory=list)
    declared: Type | None = None
    skipped: str | None = None

    def to_json(self, config: RoundingConfig, with_trace: bool = False) -> dict:
        out = {
            "decl": self.name,
            "type": pretty_type(self.type, config),
            "sensitivities": {n: str(g) for n, _, g in self.params},
        }
        if self.grade is not None:
            out["grade"] = {
                "exact": str(self.grade),
                "decimal": "inf" if self.grade.infinite else sig_digits(self.grade.value),
                "display": display(self.grade, config.u, "u"),
            }
            if self.grade.is_finite and self.grade.value < 1:
                out["relative_error"] = sig_digits(self.grade.value / (1 - self.grade.value))
        if self.declared is not None:
            out["declared"] = pretty_type(self.declared, config)
        if with_trace:
            out["trace"] = [
                {"rule": s.rule, "span": list(s.span) if s.span else None,
                 **({"grade": str(s.grade)} if s.grade is not None else {})}
                for s in self.trace
            ]
        return out


def param_sensitivities(d: Decl, ty: Type) -> list[tuple[str, Type, Grade]]:
    """Each parameter's sensitivity, read off the curried type (! grades, else 1)."""
    out = []
    for p in d.params:
        assert isinstance(ty, Lolli)
        dom = ty.dom
        out.append((p.name, dom, dom.grade if isinstance(dom, Bang) else ONE))
        ty = ty.cod
    return out


def result_type(d: Decl, ty: Type) -> Type:
    for _ in d.params:
        ty = ty.cod
    return ty


@dataclass
class ProgramReport:
    decls: list[DeclReport]
    config: RoundingConfig

    def decl(self, name: str) -> DeclReport:
        for r in self.decls:
            if r.name == name:
                return r
        raise KeyError(name)

    def to_json(self, with_trace: bool = False) -> str:
        return json.dumps(
            {
                "language": "nfz",
                "config": self.config.describe(),
                "decls": [r.to_json(self.config, with_trace) for r in self.decls],
            },
            indent=2,
            ensure_ascii=False,
        )


@deep
def check_decl(
    d: Decl,
    config: RoundingConfig = NUMFUZZ_CONFIG,
    globals_: dict[str, Type] | None = None,
    declared: Type | None = None,
    trace: bool = False,
) -> DeclReport:
    res = infer({}, decl_term(d), config, globals_, trace)
    if len(res.context):
        stray = ", ".join(res.context)
        raise TypeCheckError(f"{d.name}: unbound variables {stray}", d.span)
    ty = res.type
    if declared is not None:
        reason = subtype_failure(ty, declared)
        if reason is not None:
            raise TypeCheckError(f"{d.name}: mismatched types: {reason}", d.span)
    out = result_type(d, ty)
    grade = out.grade if isinstance(out, Monad) else None
    return DeclReport(d.name, ty, param_sensitivities(d, ty), grade, res.trace, declared)


@deep
def check_program(
    program: Program, config: RoundingConfig = NUMFUZZ_CONFIG, trace: bool = False
) -> ProgramReport:
    """Check every declaration in order; signatures check or assume."""
    sigs = {s.name: s.type for s in program.signatures}
    defined = {d.name for d in program.decls}
    globals_: dict[str, Type] = {n: t for n, t in sigs.items() if n not in defined}
    reports = []
    for d in program.decls:
        r = check_decl(d, config, globals_, sigs.get(d.name), trace)
        globals_[d.name] = sigs.get(d.name, r.type)
        reports.append(r)
    return ProgramReport(reports, config)


def check(inferred: Type, declared: Type) -> None:
    """Raise unless inferred ⊑ declared."""
    reason = subtype_failure(inferred, declared)
    if reason is not None:
        raise TypeCheckError(f"mismatched types: {reason}")


# ---------------------------------------------------------------- trace replay


def replay_side_conditions(trace: list[TraceStep]) -> list[str]:
    """Side conditions each recorded rule must satisfy; returns violations."""
    bad = []
    for s in trace:
        if s.rule in ("Let", "+E") and (s.grade is None or s.grade.is_zero):
            bad.append(f"{s.rule} at {s.span}: scaling must be positive")
        if s.rule == "⊸I" and (s.grade is None or not s.grade <= ONE):
            bad.append(f"⊸I at {s.span}: parameter sensitivity above 1")
    return bad
