"""Backward error lenses and backward-error witnesses for Bean programs.

A lens (f, f~, b) pairs an ideal map f, its floating-point approximation f~
and a backward map b.  For every input x and target y at finite distance
from f~(x):

    d(x_i, b(x, y)_i) <= bound_i + d(f~(x), y)     (property 1, per input slot)
    f(b(x, y)) = y                                (property 2)

Lenses here act on flat tuples of values.  ``witness`` runs the backward map
of a whole Bean declaration: it returns inputs x~ with ideal(x~) = fp(x),
together with the relative precision spent on each parameter.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable

import mpmath

from . import numeric as nm
from ._deep import deep
from .bean import PRIMITIVES, check_bean_decl, rename
from .grades import BEAN_CONFIG, Grade, RoundingConfig, display
from .interp import (
    ERR_V, IDEAL, InlV, InrV, PairV, UNIT_V, _BeanEval, bean_decls_before, bean_prim, fp,
    unwind_call,
)
from .rounding import round_dir
from .rp import INF as RP_INF, rp_distance, rp_leq
from .syntax.terms import (
    App, Case, Const, Decl, Disc, DLet, DLetPair, DVar, Inl, Inr, Let, LetPair, Op, Pair,
    Program, Term, UnitVal, Var,
)
from .syntax.types import DNum, Num, Sum, Tensor, Type, Unit


class LensError(Exception):
    pass


# ---------------------------------------------------------------- distances


def value_rp(a, b) -> mpmath.mpf:
    """Bean distance: RP on numbers, componentwise max on pairs, inf across injections."""
    if isinstance(a, PairV):
        return max(value_rp(a.left, b.left), value_rp(a.right, b.right))
    if isinstance(a, InlV) and isinstance(b, InlV):
        return value_rp(a.value, b.value)
    if isinstance(a, InrV) and isinstance(b, InrV):
        return value_rp(a.value, b.value)
    if isinstance(a, (InlV, InrV)) or isinstance(b, (InlV, InrV)):
        return RP_INF
    if a is UNIT_V or a is ERR_V:
        return mpmath.mpf(0)
    return rp_distance(a, b)


def tuple_rp(xs: tuple, ys: tuple) -> mpmath.mpf:
    return max((value_rp(a, b) for a, b in zip(xs, ys)), default=mpmath.mpf(0))


def residual(a, b) -> mpmath.mpf:
    """Largest relative difference between two values of the same shape (0 when equal)."""
    if isinstance(a, PairV):
        return max(residual(a.left, b.left), residual(a.right, b.right))
    if isinstance(a, (InlV, InrV)):
        if type(a) is not type(b):
            return RP_INF
        return residual(a.value, b.value)
    if a is UNIT_V or a is ERR_V:
        return mpmath.mpf(0) if a is b else RP_INF
    if nm.is_exact(a) and nm.is_exact(b) and Fraction(a) == Fraction(b):
        return mpmath.mpf(0)
    if b == 0:
        return mpmath.mpf(0) if a == 0 else RP_INF
    with mpmath.workprec(nm.WORK_PREC):
        return abs(nm.to_mpf(a) - nm.to_mpf(b)) / abs(nm.to_mpf(b))


# ---------------------------------------------------------------- lenses


@dataclass(frozen=True)
class Lens:
    name: str
    forward: Callable[[tuple], tuple]
    approx: Callable[[tuple], tuple]
    backward: Callable[[tuple, tuple], tuple]
    bounds: tuple[Fraction, ...]  # per input slot
    outputs: int
    discrete: tuple[bool, ...] = ()

    @property
    def arity(self) -> int:
        return len(self.bounds)


def _scale_back(xs: tuple, ideal, target) -> tuple:
    """Scale every input by target/ideal: the backward map of add and sub."""
    if ideal == 0:
        return xs
    k = nm.div(target, ideal)
    return tuple(nm.mul(k, x) for x in xs)


def _mul_back(x1, x2, target):
    prod = nm.mul(x1, x2)
    if prod == 0:
        return x1, x2
    k = nm.exact_sqrt(nm.div(target, prod))
    return nm.mul(x1, k), nm.mul(x2, k)


def _div_back(x1, x2, target):
    if not isinstance(target, InlV) or x2 == 0:
        return x1, x2
    q = nm.div(x1, x2)
    if q == 0:
        return x1, x2
    k = nm.exact_sqrt(nm.div(target.value, q))
    return nm.mul(x1, k), nm.div(x2, k)


def prim_backward(name: str, args: tuple, target) -> tuple:
    """Inputs that the ideal primitive sends exactly to ``target``."""
    x1, x2 = args
    if name == "add":
        return _scale_back(args, nm.add(x1, x2), target)
    if name == "sub":
        return _scale_back(args, nm.sub(x1, x2), target)
    if name == "mul":
        return _mul_back(x1, x2, target)
    if name == "div":
        return _div_back(x1, x2, target)
    if name == "dmul":
        if x1 == 0:
            return args
        return x1, nm.div(target, x1)
    raise LensError(f"no backward map for {name!r}")


def prim_lens(name: str, config: RoundingConfig = BEAN_CONFIG) -> Lens:
    sig = PRIMITIVES[name]
    mode = fp(config)
    return Lens(
        name,
        forward=lambda xs: (bean_prim(name, xs[0], xs[1], IDEAL),),
        approx=lambda xs: (bean_prim(name, xs[0], xs[1], mode),),
        backward=lambda xs, ys: prim_backward(name, xs, ys[0]),
        bounds=tuple(k * config.eps for k in sig.grades),
        outputs=1,
        discrete=tuple(s == "discrete" for s in sig.slots),
    )


def identity(n: int = 1) -> Lens:
    return Lens(
        f"id{n}", lambda xs: xs, lambda xs: xs, lambda xs, ys: ys,
        bounds=(Fraction(0),) * n, outputs=n, discrete=(False,) * n,
    )


def compose(first: Lens, second: Lens) -> Lens:
    """first ; second."""
    if first.outputs != second.arity:
        raise LensError(f"cannot compose {first.name} ({first.outputs} outputs) "
                        f"with {second.name} ({second.arity} inputs)")
    slack = max(second.bounds, default=Fraction(0))
    return Lens(
        f"{first.name};{second.name}",
        forward=lambda xs: second.forward(first.forward(xs)),
        approx=lambda xs: second.approx(first.approx(xs)),
        backward=lambda xs, zs: first.backward(xs, second.backward(first.approx(xs), zs)),
        bounds=tuple(b + slack for b in first.bounds),
        outputs=second.outputs,
        discrete=first.discrete,
    )


def tensor(left: Lens, right: Lens) -> Lens:
    n, m = left.arity, left.outputs
    return Lens(
        f"({left.name}⊗{right.name})",
        forward=lambda xs: left.forward(xs[:n]) + right.forward(xs[n:]),
        approx=lambda xs: left.approx(xs[:n]) + right.approx(xs[n:]),
        backward=lambda xs, ys: left.backward(xs[:n], ys[:m]) + right.backward(xs[n:], ys[m:]),
        bounds=left.bounds + right.bounds,
        outputs=left.outputs + right.outputs,
        discrete=left.discrete + right.discrete,
    )


# ---------------------------------------------------------------- lens laws


@dataclass
class LawReport:
    lens: str
    samples: int
    property1_failures: int
    property2_failures: int
    max_residual: mpmath.mpf
    exact: bool  # every property-2 check held with exact rational equality
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.property1_failures == 0 and self.property2_failures == 0


def _random_input(rng: random.Random, lo: float, hi: float, config: RoundingConfig, signed: bool):
    x = Fraction(math.exp(rng.uniform(math.log(lo), math.log(hi))))
    x = round_dir(x, config)
    return -x if signed and rng.random() < 0.5 else x


def _perturb(rng: random.Random, y, config: RoundingConfig):
    """y * (1 + d) with |d| <= eps/2, kept exact."""
    if isinstance(y, InlV):
        return InlV(_perturb(rng, y.value, config))
    if not nm.is_exact(y):
        return y
    d = Fraction(rng.randint(-2**30, 2**30), 2**31) * config.eps
    return Fraction(y) * (1 + d)


def check_lens_laws(
    lens: Lens,
    samples: int = 10_000,
    seed: int = 0,
    config: RoundingConfig = BEAN_CONFIG,
    box: tuple[float, float] = (0.1, 1000.0),
    tolerance: float = 1e-30,
    signed: bool = True,
) -> LawReport:
    """Sample x and a target y near f~(x); check both lens properties.

    Half of the targets are f~(x) itself, the rest are perturbed by a relative
    amount below eps/2.  Property 2 must hold exactly when the backward map stays
    rational and within ``tolerance`` (relative) when it takes square roots.
    """
    rng = random.Random(seed)
    p1 = p2 = 0
    worst = mpmath.mpf(0)
    exact = True
    for i in range(samples):
        xs = tuple(_random_input(rng, *box, config, signed) for _ in range(lens.arity))
        ys = lens.approx(xs)
        if i % 2:
            ys = tuple(_perturb(rng, y, config) for y in ys)
        dist = tuple_rp(lens.approx(xs), ys)
        if dist == RP_INF:
            continue
        xt = lens.backward(xs, ys)
        for x, t, b, disc in zip(xs, xt, lens.bounds, lens.discrete or (False,) * lens.arity):
            if disc:
                if t != x:
                    p1 += 1
                continue
            with mpmath.workprec(320):
                if not rp_leq(value_rp(x, t), Grade(b) + Grade(nm.to_fraction(dist) if dist else 0)):
                    p1 += 1
        got = lens.forward(xt)
        for g, y in zip(got, ys):
            r = residual(g, y)
            worst = max(worst, r)
            if r != 0:
                exact = False
            if r > tolerance:
                p2 += 1
    return LawReport(lens.name, samples, p1, p2, worst, exact, tolerance)


# ---------------------------------------------------------------- program witnesses


def inline_calls(t: Term, decls: dict[str, Decl], counter: list[int] | None = None) -> Term:
    """Replace every call to a declaration by its renamed body."""
    counter = counter if counter is not None else [0]
    if isinstance(t, App):
        head, args = unwind_call(t)
        d = decls.get(head)
        if d is None:
            raise LensError(f"unknown function {head!r}")
        counter[0] += 1
        k = counter[0]
        mapping = {p.name: f"{p.name}#{k}" for p in d.params}
        body = inline_calls(rename(d.body, mapping, k), decls, counter)
        for p, a in reversed(list(zip(d.params, args))):
            a = inline_calls(a, decls, counter)
            body = (DLet if p.discrete else Let)(mapping[p.name], a, body, span=t.span)
        return body
    if isinstance(t, (Let, DLet)):
        return type(t)(t.name, inline_calls(t.bound, decls, counter),
                       inline_calls(t.body, decls, counter), span=t.span)
    if isinstance(t, (LetPair, DLetPair)):
        return type(t)(t.left, t.right, inline_calls(t.bound, decls, counter),
                       inline_calls(t.body, decls, counter), span=t.span)
    if isinstance(t, Case):
        return Case(inline_calls(t.scrut, decls, counter),
                    t.left_name, inline_calls(t.left, decls, counter),
                    t.right_name, inline_calls(t.right, decls, counter), span=t.span)
    if isinstance(t, Pair):
        return Pair(inline_calls(t.left, decls, counter), inline_calls(t.right, decls, counter),
                    span=t.span)
    if isinstance(t, (Inl, Inr, Disc)):
        return type(t)(inline_calls(t.body, decls, counter), span=t.span)
    if isinstance(t, Op):
        return Op(t.name, tuple(inline_calls(a, decls, counter) for a in t.args), span=t.span)
    return t


class _Backward:
    """Backward pass over an inlined Bean term.

    ``back(t, env, target)`` returns new values for the linear variables of t
    such that the ideal semantics of t at those values is ``target``; env holds
    the floating-point values of everything in scope.
    """

    def __init__(self, config: RoundingConfig):
        self.approx_eval = _BeanEval(fp(config), {})

    def approx(self, t: Term, env: dict):
        return self.approx_eval.eval(t, env)

    def back(self, t: Term, env: dict, target) -> dict:
        if isinstance(t, Var):
            return {t.name: target}
        if isinstance(t, (DVar, Const, UnitVal)):
            return {}
        if isinstance(t, Disc):
            return self.back(t.body, env, target)
        if isinstance(t, Pair):
            return {**self.back(t.left, env, target.left), **self.back(t.right, env, target.right)}
        if isinstance(t, (Inl, Inr)):
            return self.back(t.body, env, target.value)
        if isinstance(t, Let):
            v = self.approx(t.bound, env)
            upd = self.back(t.body, {**env, t.name: v}, target)
            return {**upd, **self.back(t.bound, env, upd.pop(t.name, v))}
        if isinstance(t, LetPair):
            v = self.approx(t.bound, env)
            upd = self.back(t.body, {**env, t.left: v.left, t.right: v.right}, target)
            goal = PairV(upd.pop(t.left, v.left), upd.pop(t.right, v.right))
            return {**upd, **self.back(t.bound, env, goal)}
        if isinstance(t, DLet):
            v = self.approx(t.bound, env)
            upd = self.back(t.body, {**env, t.name: v}, target)
            upd.pop(t.name, None)
            return {**upd, **self.back(t.bound, env, v)}
        if isinstance(t, DLetPair):
            v = self.approx(t.bound, env)
            upd = self.back(t.body, {**env, t.left: v.left, t.right: v.right}, target)
            upd.pop(t.left, None)
            upd.pop(t.right, None)
            return {**upd, **self.back(t.bound, env, v)}
        if isinstance(t, Case):
            v = self.approx(t.scrut, env)
            if isinstance(v, InlV):
                name, arm, wrap = t.left_name, t.left, InlV
            else:
                name, arm, wrap = t.right_name, t.right, InrV
            upd = self.back(arm, {**env, name: v.value}, target)
            return {**upd, **self.back(t.scrut, env, wrap(upd.pop(name, v.value)))}
        if isinstance(t, Op):
            args = tuple(self.approx(a, env) for a in t.args)
            goals = prim_backward(t.name, args, target)
            out: dict = {}
            for a, g in zip(t.args, goals):
                out.update(self.back(a, env, g))
            return out
        raise LensError(f"no backward map for {type(t).__name__}")


@dataclass
class WitnessReport:
    decl: str
    inputs: dict[str, Any]
    witness: dict[str, Any]
    fp_result: Any
    ideal_at_witness: Any
    residual: mpmath.mpf
    slot_rp: dict[str, mpmath.mpf]
    bounds: dict[str, Grade]
    discrete: list[str]
    eps: Fraction
    tolerance: float = 1e-30

    @property
    def property2(self) -> bool:
        return self.residual <= self.tolerance

    @property
    def within_bounds(self) -> bool:
        return all(rp_leq(self.slot_rp[n], self.bounds[n]) for n in self.bounds)

    @property
    def passed(self) -> bool:
        return self.property2 and self.within_bounds

    def to_json(self) -> dict:
        return {
            "decl": self.decl,
            "fp_result": to_jsonable(self.fp_result),
            "ideal_at_witness": to_jsonable(self.ideal_at_witness),
            "residual": mpmath.nstr(self.residual, 6),
            "witness": {n: to_jsonable(v) for n, v in self.witness.items()},
            "params": {
                n: {
                    "rp": mpmath.nstr(self.slot_rp[n], 6),
                    "bound": display(self.bounds[n], self.eps, "eps"),
                    "ok": rp_leq(self.slot_rp[n], self.bounds[n]),
                }
                for n in self.bounds
            },
            "discrete_unchanged": self.discrete,
            "passed": self.passed,
        }


def to_jsonable(v):
    if isinstance(v, PairV):
        return [to_jsonable(v.left), to_jsonable(v.right)]
    if isinstance(v, InlV):
        return {"inl": to_jsonable(v.value)}
    if isinstance(v, InrV):
        return {"inr": to_jsonable(v.value)}
    if v is UNIT_V:
        return "()"
    if v is ERR_V:
        return "err"
    if nm.is_exact(v):
        f = Fraction(v)
        return str(f) if f.denominator != 1 else str(f.numerator)
    return mpmath.nstr(v, 40)


def value_of_type(ty: Type, data, config: RoundingConfig):
    """Build a value from JSON-ish data: numbers, or nested lists for tensors."""
    if isinstance(ty, (Num, DNum)):
        if isinstance(data, (list, dict)):
            raise LensError(f"expected a number, got {data!r}")
        x = Fraction(data) if isinstance(data, (int, float)) else Fraction(str(data))
        return round_dir(x, config)
    if isinstance(ty, Unit):
        return UNIT_V
    if isinstance(ty, Tensor):
        if not isinstance(data, list) or len(data) < 2:
            raise LensError(f"expected a list for a tensor input, got {data!r}")
        if len(data) == 2:
            return PairV(value_of_type(ty.left, data[0], config),
                         value_of_type(ty.right, data[1], config))
        # flat list for a right-nested tensor
        return PairV(value_of_type(ty.left, data[0], config),
                     value_of_type(ty.right, data[1:], config))
    if isinstance(ty, Sum):
        if isinstance(data, dict) and "inl" in data:
            return InlV(value_of_type(ty.left, data["inl"], config))
        if isinstance(data, dict) and "inr" in data:
            return InrV(value_of_type(ty.right, data["inr"], config))
    raise LensError(f"cannot build an input of type {ty!r} from {data!r}")


@deep
def witness(
    program: Program,
    name: str,
    inputs: dict[str, Any],
    config: RoundingConfig = BEAN_CONFIG,
) -> WitnessReport:
    """Backward-error witness for one run of ``name`` on ``inputs`` (already values)."""
    d = program.decl(name)
    decls = bean_decls_before(program, name)
    report = check_bean_decl(d, config, decls)
    body = inline_calls(d.body, decls)
    missing = [p.name for p in d.params if p.name not in inputs]
    if missing:
        raise LensError(f"missing inputs for {', '.join(missing)}")
    env = {p.name: inputs[p.name] for p in d.params}
    fp_eval = _BeanEval(fp(config), {})
    result = fp_eval.eval(body, env)
    upd = _Backward(config).back(body, env, result)
    wit = {p.name: (inputs[p.name] if p.discrete else upd.get(p.name, inputs[p.name]))
           for p in d.params}
    ideal = _BeanEval(IDEAL, {}).eval(body, wit)
    slot_rp = {p.name: value_rp(inputs[p.name], wit[p.name]) for p in d.params if not p.discrete}
    return WitnessReport(
        name, dict(inputs), wit, result, ideal, residual(ideal, result), slot_rp,
        dict(report.bounds), [p.name for p in d.params if p.discrete], config.eps,
    )


def witness_from_json(program: Program, name: str, data: dict, config: RoundingConfig = BEAN_CONFIG):
    d = program.decl(name)
    inputs = {p.name: value_of_type(p.type, data[p.name], config) for p in d.params if p.name in data}
    return witness(program, name, inputs, config)


def random_inputs(d: Decl, rng: random.Random, config: RoundingConfig = BEAN_CONFIG,
                  box: tuple[float, float] = (0.1, 1000.0), signed: bool = True) -> dict:
    def build(ty):
        if isinstance(ty, (Num, DNum)):
            return _random_input(rng, *box, config, signed)
        if isinstance(ty, Tensor):
            return PairV(build(ty.left), build(ty.right))
        if isinstance(ty, Unit):
            return UNIT_V
        raise LensError(f"cannot sample inputs of type {ty!r}")

    return {p.name: build(p.type) for p in d.params}


def witness_sweep(program: Program, name: str, samples: int = 1000, seed: int = 0,
                  config: RoundingConfig = BEAN_CONFIG, box=(0.1, 1000.0), signed: bool = True):
    """Witnesses on random inputs; returns (failures, worst residual, worst rp/bound per param)."""
    rng = random.Random(seed)
    d = program.decl(name)
    failures = 0
    worst_res = mpmath.mpf(0)
    worst = {}
    for _ in range(samples):
        rep = witness(program, name, random_inputs(d, rng, config, box, signed), config)
        failures += not rep.passed
        worst_res = max(worst_res, rep.residual)
        for n, r in rep.slot_rp.items():
            b = rep.bounds[n]
            ratio = float(r / nm.to_mpf(b.value)) if not b.is_zero else (0.0 if r == 0 else float("inf"))
            worst[n] = max(worst.get(n, 0.0), ratio)
    return failures, worst_res, worst
