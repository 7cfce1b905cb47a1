"""Backward-error inference for Bean.

Judgments have a discrete context Φ (data that may be duplicated but absorbs
no backward error) and a linear context Γ whose grades are per-variable
backward-error bounds.  Linear variables are used at most once per control
path; pairing two terms that share one is a linearity error.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction

from ._deep import deep
from .grades import BEAN_CONFIG, Grade, RoundingConfig, ZERO, display, grade_max, sig_digits
from .syntax.pretty import pretty_bean_type
from .syntax.terms import (
    App, Case, Const, Decl, Disc, DLet, DLetPair, DVar, Inl, Inr, Let, LetPair, Op, Pair,
    Program, Span, Term, UnitVal, Var,
)
from .syntax.types import (
    DNUM, ERR, HOLE, NUM, UNIT, DNum, Num, Sum, Tensor, Type, is_discrete, unify,
)


class BeanTypeError(Exception):
    def __init__(self, message: str, span: Span | None = None):
        self.message = message
        self.span = span
        where = f"{span[0]}:{span[1]}: " if span else ""
        super().__init__(where + message)


class LinearityError(BeanTypeError):
    pass


# ---------------------------------------------------------------- contexts


class BeanContext:
    """Ordered linear context: variable -> (type, backward-error grade)."""

    __slots__ = ("entries",)

    def __init__(self, entries: dict[str, tuple[Type, Grade]] | None = None):
        self.entries = dict(entries or {})

    @classmethod
    def of(cls, **kw) -> "BeanContext":
        return cls({k: (t, Grade.of(g)) for k, (t, g) in kw.items()})

    def grade(self, name: str) -> Grade:
        entry = self.entries.get(name)
        return entry[1] if entry else ZERO

    def without(self, *names: str) -> "BeanContext":
        return BeanContext({k: v for k, v in self.entries.items() if k not in names})

    def __contains__(self, name):
        return name in self.entries

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def __eq__(self, other):
        return isinstance(other, BeanContext) and self.entries == other.entries

    def __repr__(self):
        body = ", ".join(f"{k}:{g} {pretty_bean_type(t)}" for k, (t, g) in self.entries.items())
        return f"BeanContext({body})"


def ctx_translate(q: Grade, g: BeanContext) -> BeanContext:
    q = Grade.of(q)
    if q.infinite:
        raise ValueError("Bean grades are finite")
    if q.is_zero:
        return g
    return BeanContext({k: (t, q + r) for k, (t, r) in g.entries.items()})


def ctx_max_bean(g1: BeanContext, g2: BeanContext) -> BeanContext:
    out = dict(g1.entries)
    for name, (t, g) in g2.entries.items():
        if name in out:
            t1, g0 = out[name]
            if t1 != t:
                raise BeanTypeError(
                    f"variable {name!r} has types {pretty_bean_type(t1)} and {pretty_bean_type(t)}"
                )
            out[name] = (t1, grade_max(g0, g))
        else:
            out[name] = (t, g)
    return BeanContext(out)


def ctx_disjoint_union(g1: BeanContext, g2: BeanContext, span=None) -> BeanContext:
    for name in g2.entries:
        if name in g1.entries:
            raise LinearityError(f"linear variable {_display_name(name)!r} is used more than once", span)
    out = dict(g1.entries)
    out.update(g2.entries)
    return BeanContext(out)


def _display_name(name: str) -> str:
    return name.split("#", 1)[0]


# ---------------------------------------------------------------- primitives


@dataclass(frozen=True)
class PrimSig:
    slots: tuple[str, ...]  # "linear" or "discrete", per argument
    grades: tuple[Fraction, ...]  # per slot, in units of eps
    result: Type


PRIMITIVES: dict[str, PrimSig] = {
    "add": PrimSig(("linear", "linear"), (Fraction(1), Fraction(1)), NUM),
    "sub": PrimSig(("linear", "linear"), (Fraction(1), Fraction(1)), NUM),
    "mul": PrimSig(("linear", "linear"), (Fraction(1, 2), Fraction(1, 2)), NUM),
    "div": PrimSig(("linear", "linear"), (Fraction(1, 2), Fraction(1, 2)), Sum(NUM, ERR)),
    "dmul": PrimSig(("discrete", "linear"), (Fraction(0), Fraction(1)), NUM),
}


# ---------------------------------------------------------------- inference


@dataclass(frozen=True)
class BeanStep:
    rule: str
    span: Span | None
    grade: Grade | None = None


@dataclass
class BeanResult:
    context: BeanContext
    type: Type
    trace: list[BeanStep] = field(default_factory=list)
    lint: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class _Annotated(Term):
    """Internal: an inlined argument checked against its parameter type."""

    body: Term
    expected: Type
    span: Span | None = field(default=None, compare=False, repr=False, kw_only=True)


class _BeanInferencer:
    def __init__(self, config: RoundingConfig, decls: dict[str, Decl], trace: bool):
        self.eps = config.eps
        self.decls = decls
        self.trace: list[BeanStep] | None = [] if trace else None
        self.lint: list[str] = []
        self.fresh = itertools.count(1)

    def step(self, rule, t, grade=None):
        if self.trace is not None:
            self.trace.append(BeanStep(rule, t.span, grade))

    def g(self, k: Fraction) -> Grade:
        return Grade(k * self.eps)

    def unused(self, name: str, t: Term):
        if not name.startswith("_"):
            where = f" at {t.span[0]}:{t.span[1]}" if t.span else ""
            self.lint.append(f"unused linear variable {_display_name(name)!r}{where}")

    def infer(self, phi: dict[str, Type], sk: dict[str, Type], t: Term) -> tuple[BeanContext, Type]:
        if isinstance(t, Var):
            self.step("Var", t)
            if t.name in sk:
                return BeanContext({t.name: (sk[t.name], ZERO)}), sk[t.name]
            if t.name in phi:
                return BeanContext(), phi[t.name]
            raise BeanTypeError(f"unbound variable {_display_name(t.name)!r}", t.span)
        if isinstance(t, DVar):
            self.step("DVar", t)
            if t.name in phi:
                return BeanContext(), phi[t.name]
            if t.name in sk:
                raise BeanTypeError(f"{_display_name(t.name)!r} is linear, not discrete", t.span)
            raise BeanTypeError(f"unbound variable {_display_name(t.name)!r}", t.span)
        if isinstance(t, Const):
            self.step("Const", t)
            return BeanContext(), DNUM
        if isinstance(t, UnitVal):
            self.step("Unit", t)
            return BeanContext(), UNIT
        if isinstance(t, Pair):
            g1, a = self.infer(phi, sk, t.left)
            g2, b = self.infer(phi, sk, t.right)
            self.step("⊗I", t)
            return ctx_disjoint_union(g1, g2, t.span), Tensor(a, b)
        if isinstance(t, Inl):
            g, a = self.infer(phi, sk, t.body)
            self.step("+IL", t)
            return g, Sum(a, HOLE)
        if isinstance(t, Inr):
            g, b = self.infer(phi, sk, t.body)
            self.step("+IR", t)
            return g, Sum(HOLE, b)
        if isinstance(t, Disc):
            g, a = self.infer(phi, sk, t.body)
            if not isinstance(a, Num):
                raise BeanTypeError(f"! expects num, found {pretty_bean_type(a)}", t.span)
            self.step("Disc", t)
            return g, DNUM
        if isinstance(t, Let):
            g1, a = self.infer(phi, sk, t.bound)
            self.fresh_check(phi, sk, t.name, t)
            g2, b = self.infer(phi, {**sk, t.name: a}, t.body)
            if t.name not in g2:
                self.unused(t.name, t)
            r = g2.grade(t.name)
            self.step("Let", t, r)
            return ctx_disjoint_union(ctx_translate(r, g1), g2.without(t.name), t.span), b
        if isinstance(t, LetPair):
            g1, a = self.infer(phi, sk, t.bound)
            if not isinstance(a, Tensor):
                raise BeanTypeError(f"let (x, y) expects a ⊗ pair, found {pretty_bean_type(a)}", t.span)
            self.fresh_check(phi, sk, t.left, t)
            self.fresh_check(phi, sk, t.right, t)
            g2, b = self.infer(phi, {**sk, t.left: a.left, t.right: a.right}, t.body)
            for n in (t.left, t.right):
                if n not in g2:
                    self.unused(n, t)
            r = grade_max(g2.grade(t.left), g2.grade(t.right))
            self.step("⊗Eσ", t, r)
            return (
                ctx_disjoint_union(ctx_translate(r, g1), g2.without(t.left, t.right), t.span),
                b,
            )
        if isinstance(t, DLet):
            g1, a = self.infer(phi, sk, t.bound)
            if not is_discrete(a):
                raise BeanTypeError(f"dlet expects a discrete value, found {pretty_bean_type(a)}", t.span)
            self.fresh_check(phi, sk, t.name, t)
            g2, b = self.infer({**phi, t.name: a}, sk, t.body)
            self.step("DLet", t)
            return ctx_disjoint_union(g1, g2, t.span), b
        if isinstance(t, DLetPair):
            g1, a = self.infer(phi, sk, t.bound)
            if not (isinstance(a, Tensor) and is_discrete(a)):
                raise BeanTypeError(
                    f"dlet (x, y) expects a discrete ⊗ pair, found {pretty_bean_type(a)}", t.span
                )
            self.fresh_check(phi, sk, t.left, t)
            self.fresh_check(phi, sk, t.right, t)
            g2, b = self.infer({**phi, t.left: a.left, t.right: a.right}, sk, t.body)
            self.step("⊗Eα", t)
            return ctx_disjoint_union(g1, g2, t.span), b
        if isinstance(t, Case):
            g, sty = self.infer(phi, sk, t.scrut)
            if not isinstance(sty, Sum):
                raise BeanTypeError(f"case expects a sum, found {pretty_bean_type(sty)}", t.span)
            self.fresh_check(phi, sk, t.left_name, t)
            self.fresh_check(phi, sk, t.right_name, t)
            gl, rl = self.infer(phi, {**sk, t.left_name: sty.left}, t.left)
            gr, rr = self.infer(phi, {**sk, t.right_name: sty.right}, t.right)
            rty = unify(rl, rr)
            if rty is None:
                raise BeanTypeError(
                    f"case arms have types {pretty_bean_type(rl)} and {pretty_bean_type(rr)}",
                    t.span,
                )
            q = grade_max(gl.grade(t.left_name), gr.grade(t.right_name))
            self.step("+E", t, q)
            arms = ctx_max_bean(gl.without(t.left_name), gr.without(t.right_name))
            return ctx_disjoint_union(ctx_translate(q, g), arms, t.span), rty
        if isinstance(t, Op):
            return self.prim(phi, sk, t)
        if isinstance(t, App):
            return self.call(phi, sk, t)
        if isinstance(t, _Annotated):
            g, a = self.infer(phi, sk, t.body)
            if unify(a, t.expected) != t.expected:
                raise BeanTypeError(
                    f"argument has type {pretty_bean_type(a)}, expected {pretty_bean_type(t.expected)}",
                    t.span,
                )
            return g, t.expected
        raise BeanTypeError(f"{type(t).__name__} is not a Bean term", t.span)

    def fresh_check(self, phi, sk, name, t):
        if name in phi or name in sk:
            raise BeanTypeError(f"variable {_display_name(name)!r} shadows an enclosing binding", t.span)

    def prim(self, phi, sk, t: Op) -> tuple[BeanContext, Type]:
        sig = PRIMITIVES.get(t.name)
        if sig is None:
            raise BeanTypeError(f"unknown primitive {t.name!r}", t.span)
        if len(t.args) != len(sig.slots):
            raise BeanTypeError(f"{t.name} takes {len(sig.slots)} arguments", t.span)
        ctx = BeanContext()
        for arg, slot, k in zip(t.args, sig.slots, sig.grades):
            g, a = self.infer(phi, sk, arg)
            if slot == "discrete":
                if not isinstance(a, DNum):
                    if isinstance(arg, Var) and arg.name in sk:
                        raise BeanTypeError(
                            f"{t.name} needs a discrete first argument; "
                            f"{_display_name(arg.name)!r} is linear",
                            arg.span or t.span,
                        )
                    raise BeanTypeError(
                        f"{t.name} needs a dnum first argument, found {pretty_bean_type(a)}",
                        arg.span or t.span,
                    )
            else:
                if not isinstance(a, Num):
                    what = (
                        f"discrete value {_display_name(arg.name)!r}"
                        if isinstance(arg, (Var, DVar)) and arg.name in phi
                        else f"a value of type {pretty_bean_type(a)}"
                    )
                    raise BeanTypeError(
                        f"{t.name} needs a linear num argument, found {what} "
                        f"(discrete data cannot absorb backward error)",
                        arg.span or t.span,
                    )
                g = ctx_translate(self.g(k), g)
            ctx = ctx_disjoint_union(ctx, g, t.span)
        self.step(t.name.capitalize(), t)
        return ctx, sig.result

    def call(self, phi, sk, t: App) -> tuple[BeanContext, Type]:
        args = []
        head = t
        while isinstance(head, App):
            args.append(head.arg)
            head = head.fn
        args.reverse()
        if not isinstance(head, Var) or head.name not in self.decls:
            raise BeanTypeError("only declared functions can be applied", t.span)
        decl = self.decls[head.name]
        if len(args) != len(decl.params):
            raise BeanTypeError(
                f"{decl.name} takes {len(decl.params)} arguments, given {len(args)}", t.span
            )
        k = next(self.fresh)
        mapping = {p.name: f"{p.name}#{k}" for p in decl.params}
        body = rename(decl.body, mapping, k)
        for p, a in reversed(list(zip(decl.params, args))):
            arg = _Annotated(a, p.type, span=a.span)
            if p.discrete:
                body = DLet(mapping[p.name], arg, body, span=t.span)
            else:
                body = Let(mapping[p.name], arg, body, span=t.span)
        self.step("Call", t)
        return self.infer(phi, sk, body)


def rename(t: Term, mapping: dict[str, str], k: int) -> Term:
    """Copy of t with every binder made unique by the suffix #k."""
    def fresh(name):
        return f"{name}#{k}"

    if isinstance(t, (Var, DVar)):
        return type(t)(mapping.get(t.name, t.name), span=t.span)
    if isinstance(t, (Let, DLet)):
        inner = {**mapping, t.name: fresh(t.name)}
        return type(t)(fresh(t.name), rename(t.bound, mapping, k), rename(t.body, inner, k), span=t.span)
    if isinstance(t, (LetPair, DLetPair)):
        inner = {**mapping, t.left: fresh(t.left), t.right: fresh(t.right)}
        return type(t)(
            fresh(t.left), fresh(t.right), rename(t.bound, mapping, k), rename(t.body, inner, k),
            span=t.span,
        )
    if isinstance(t, Case):
        return Case(
            rename(t.scrut, mapping, k),
            fresh(t.left_name), rename(t.left, {**mapping, t.left_name: fresh(t.left_name)}, k),
            fresh(t.right_name), rename(t.right, {**mapping, t.right_name: fresh(t.right_name)}, k),
            span=t.span,
        )
    if isinstance(t, Pair):
        return Pair(rename(t.left, mapping, k), rename(t.right, mapping, k), span=t.span)
    if isinstance(t, (Inl, Inr, Disc)):
        return type(t)(rename(t.body, mapping, k), span=t.span)
    if isinstance(t, Op):
        return Op(t.name, tuple(rename(a, mapping, k) for a in t.args), span=t.span)
    if isinstance(t, App):
        return App(rename(t.fn, mapping, k), rename(t.arg, mapping, k), span=t.span)
    return t


@deep
def infer_bean(
    phi: dict[str, Type],
    skeleton: dict[str, Type],
    term: Term,
    config: RoundingConfig = BEAN_CONFIG,
    decls: dict[str, Decl] | None = None,
    trace: bool = False,
) -> BeanResult:
    overlap = set(phi) & set(skeleton)
    if overlap:
        raise BeanTypeError(f"variables {sorted(overlap)} are both discrete and linear")
    inf = _BeanInferencer(config, decls or {}, trace)
    ctx, ty = inf.infer(dict(phi), dict(skeleton), term)
    return BeanResult(ctx, ty, inf.trace or [], inf.lint)


# ---------------------------------------------------------------- programs


@dataclass
class BeanDeclReport:
    name: str
    type: Type
    bounds: dict[str, Grade]  # linear params, declaration order
    discrete: list[str]
    context: BeanContext
    lint: list[str] = field(default_factory=list)
    trace: list[BeanStep] = field(default_factory=list)

    @property
    def max_bound(self) -> Grade:
        out = ZERO
        for g in self.bounds.values():
            out = grade_max(out, g)
        return out

    def to_json(self, config: RoundingConfig, with_trace: bool = False) -> dict:
        out = {
            "decl": self.name,
            "type": pretty_bean_type(self.type),
            "bounds": {
                n: {
                    "exact": str(g),
                    "eps": display(g, config.eps, "eps").split(" ")[0] if not g.is_zero else "0",
                    "decimal": sig_digits(g.value),
                }
                for n, g in self.bounds.items()
            },
            "discrete": {z: "0" for z in self.discrete},
        }
        if self.lint:
            out["lint"] = list(self.lint)
        if with_trace:
            out["trace"] = [
                {"rule": s.rule, "span": list(s.span) if s.span else None,
                 **({"grade": str(s.grade)} if s.grade is not None else {})}
                for s in self.trace
            ]
        return out


@dataclass
class BeanProgramReport:
    decls: list[BeanDeclReport]
    config: RoundingConfig

    def decl(self, name: str) -> BeanDeclReport:
        for r in self.decls:
            if r.name == name:
                return r
        raise KeyError(name)

    def to_json(self, with_trace: bool = False) -> str:
        return json.dumps(
            {
                "language": "bean",
                "config": self.config.describe(),
                "decls": [r.to_json(self.config, with_trace) for r in self.decls],
            },
            indent=2,
            ensure_ascii=False,
        )


@deep
def check_bean_decl(
    d: Decl,
    config: RoundingConfig = BEAN_CONFIG,
    decls: dict[str, Decl] | None = None,
    trace: bool = False,
) -> BeanDeclReport:
    phi = {p.name: p.type for p in d.params if p.discrete}
    for p in d.params:
        if p.discrete and not is_discrete(p.type):
            raise BeanTypeError(f"discrete parameter {p.name!r} must have a dnum type", d.span)
    sk = {p.name: p.type for p in d.params if not p.discrete}
    res = infer_bean(phi, sk, d.body, config, decls, trace)
    lint = list(res.lint)
    bounds = {}
    for p in d.params:
        if p.discrete:
            continue
        if p.name not in res.context:
            lint.append(f"unused linear parameter {p.name!r}")
        bounds[p.name] = res.context.grade(p.name)
    if has_hole_type(res.type):
        lint.append("result type has an undetermined summand")
    return BeanDeclReport(
        d.name, res.type, bounds, [p.name for p in d.params if p.discrete], res.context, lint,
        res.trace,
    )


def has_hole_type(t: Type) -> bool:
    from .syntax.types import has_hole

    return has_hole(t)


@deep
def check_bean_program(
    program: Program, config: RoundingConfig = BEAN_CONFIG, trace: bool = False
) -> BeanProgramReport:
    decls: dict[str, Decl] = {}
    reports = []
    for d in program.decls:
        reports.append(check_bean_decl(d, config, decls, trace))
        decls[d.name] = d
    return BeanProgramReport(reports, config)


# ---------------------------------------------------------------- completeness


@dataclass
class ProbeReport:
    passed: bool
    inferred: dict[str, Grade]
    declared: dict[str, Grade]
    failures: list[str]


def completeness_probe(
    program: Program,
    name: str,
    declared: dict[str, Grade],
    config: RoundingConfig = BEAN_CONFIG,
) -> ProbeReport:
    """Check that the inferred bounds of ``name`` sit below a hand-declared context."""
    decls = {}
    target = None
    for d in program.decls:
        if d.name == name:
            target = d
            break
        decls[d.name] = d
    if target is None:
        raise KeyError(name)
    report = check_bean_decl(target, config, decls)
    failures = []
    for var, g in report.bounds.items():
        if var not in declared:
            if not g.is_zero:
                failures.append(f"{var}: inferred {g} but no bound declared")
            continue
        if not g <= Grade.of(declared[var]):
            failures.append(
                f"{var}: inferred {display(g, config.eps, 'eps')} exceeds declared "
                f"{display(Grade.of(declared[var]), config.eps, 'eps')}"
            )
    return ProbeReport(not failures, report.bounds, dict(declared), failures)
