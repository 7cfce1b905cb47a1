"""Ideal and floating-point evaluation of NumFuzz and Bean programs.

In the ideal semantics ``rnd`` is the identity and primitives are exact.  In
the floating-point semantics ``rnd`` rounds with the active RoundingConfig and
each rounded primitive (addfp, ..., Bean's add/sub/mul/div/dmul) computes the
exact result and rounds it once.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import mpmath

from . import numeric as nm
from ._deep import deep
from .grades import NUMFUZZ_CONFIG, Grade, RoundingConfig, sig_digits
from .numfuzz import check_program, decl_term, result_type
from .rounding import round_dir, round_sqrt
from .rp import rp_distance, rp_leq, rp_ratio, INF as RP_INF
from .syntax.terms import (
    App, Box, Case, Const, Decl, Disc, DLet, DLetPair, DVar, Inl, Inr, Lam, Let, LetBang,
    LetMonad, LetPair, Op, Pair, Program, Proj, Ret, Rnd, Term, UnitVal, Var, WithPair,
)
from .syntax.types import Bang, Err, Lolli, Monad, Num, DNum, Sum, Tensor, Type, Unit, With


class EvalError(Exception):
    pass


# ---------------------------------------------------------------- values


@dataclass(frozen=True)
class UnitV:
    pass


UNIT_V = UnitV()


@dataclass(frozen=True)
class ErrV:
    """Bean's err: the result of dividing by zero."""


ERR_V = ErrV()


@dataclass(frozen=True)
class PairV:
    left: Any
    right: Any
    additive: bool = False  # ⟨,⟩ rather than (,)


@dataclass(frozen=True)
class InlV:
    value: Any


@dataclass(frozen=True)
class InrV:
    value: Any


@dataclass(frozen=True)
class RetV:
    value: Any


@dataclass(frozen=True)
class Closure:
    param: str
    body: Term
    env: dict = field(compare=False, hash=False)


@dataclass(frozen=True)
class EvalMode:
    """Ideal when ``config`` is None, else floating point under ``config``."""

    config: RoundingConfig | None = None

    @property
    def ideal(self) -> bool:
        return self.config is None

    def round(self, x):
        return x if self.config is None else round_dir(x, self.config)


IDEAL = EvalMode()


def fp(config: RoundingConfig) -> EvalMode:
    return EvalMode(config)


# ---------------------------------------------------------------- NumFuzz


class _NfzEval:
    def __init__(self, mode: EvalMode, globals_: dict[str, Any]):
        self.mode = mode
        self.globals = globals_

    def eval(self, t: Term, env: dict) -> Any:
        if isinstance(t, Var):
            if t.name in env:
                return env[t.name]
            if t.name in self.globals:
                return self.globals[t.name]
            raise EvalError(f"unbound variable {t.name!r}")
        if isinstance(t, Const):
            return t.value
        if isinstance(t, UnitVal):
            return UNIT_V
        if isinstance(t, Pair):
            return PairV(self.eval(t.left, env), self.eval(t.right, env))
        if isinstance(t, WithPair):
            return PairV(self.eval(t.left, env), self.eval(t.right, env), additive=True)
        if isinstance(t, Inl):
            return InlV(self.eval(t.body, env))
        if isinstance(t, Inr):
            return InrV(self.eval(t.body, env))
        if isinstance(t, Proj):
            v = self.eval(t.body, env)
            return v.left if t.index == 1 else v.right
        if isinstance(t, Lam):
            return Closure(t.param, t.body, env)
        if isinstance(t, App):
            f = self.eval(t.fn, env)
            a = self.eval(t.arg, env)
            return self.apply(f, a)
        if isinstance(t, Box):
            return self.eval(t.body, env)
        if isinstance(t, (Let, LetBang)):
            v = self.eval(t.bound, env)
            return self.eval(t.body, {**env, t.name: v})
        if isinstance(t, LetPair):
            v = self.eval(t.bound, env)
            return self.eval(t.body, {**env, t.left: v.left, t.right: v.right})
        if isinstance(t, LetMonad):
            v = self.eval(t.bound, env)
            if not isinstance(v, RetV):
                raise EvalError("monadic let on a non-monadic value")
            return self.eval(t.body, {**env, t.name: v.value})
        if isinstance(t, Ret):
            return RetV(self.eval(t.body, env))
        if isinstance(t, Rnd):
            return RetV(self.mode.round(self.eval(t.body, env)))
        if isinstance(t, Case):
            v = self.eval(t.scrut, env)
            if isinstance(v, InlV):
                return self.eval(t.left, _bind(env, t.left_name, v.value))
            return self.eval(t.right, _bind(env, t.right_name, v.value))
        if isinstance(t, Op):
            return self.prim(t.name, self.eval(t.args[0], env))
        raise EvalError(f"cannot evaluate {type(t).__name__}")

    def apply(self, f, a):
        if not isinstance(f, Closure):
            raise EvalError("applying a non-function")
        return self.eval(f.body, {**f.env, f.param: a})

    def prim(self, name: str, v):
        base = name[:-2] if name.endswith("fp") else name
        if base == "is_pos":
            return InlV(UNIT_V) if v > 0 else InrV(UNIT_V)
        if base == "sqrt":
            if v < 0:
                raise EvalError("square root of a negative number")
            if name == "sqrtfp" and not self.mode.ideal:
                return RetV(round_sqrt(v, self.mode.config))
            r = nm.exact_sqrt(v)
            return RetV(r) if name == "sqrtfp" else r
        x, y = v.left, v.right
        if base == "add":
            r = nm.add(x, y)
        elif base == "mul":
            r = nm.mul(x, y)
        elif base == "div":
            if y == 0:
                raise EvalError("division by zero")
            r = nm.div(x, y)
        else:
            raise EvalError(f"unknown primitive {name!r}")
        if name.endswith("fp"):
            return RetV(self.mode.round(r))
        return r


def _bind(env, name, v):
    return env if name == "_" else {**env, name: v}


def nfz_globals(program: Program, mode: EvalMode) -> dict[str, Any]:
    """Values for every declaration, functions curried over their parameters."""
    out: dict[str, Any] = {}
    ev = _NfzEval(mode, out)
    for d in program.decls:
        out[d.name] = ev.eval(decl_term(d), {})
    return out


@deep
def eval_nfz(t: Term, env: dict, mode: EvalMode = IDEAL, program: Program | None = None):
    globals_ = nfz_globals(program, mode) if program is not None else {}
    return _NfzEval(mode, globals_).eval(t, dict(env))


@deep
def call_nfz(program: Program, name: str, args: list, mode: EvalMode = IDEAL):
    globals_ = nfz_globals(program, mode)
    ev = _NfzEval(mode, globals_)
    v = globals_[name]
    for a in args:
        v = ev.apply(v, a)
    return v


# ---------------------------------------------------------------- Bean


class _BeanEval:
    def __init__(self, mode: EvalMode, decls: dict[str, Decl]):
        self.mode = mode
        self.decls = decls

    def eval(self, t: Term, env: dict) -> Any:
        if isinstance(t, (Var, DVar)):
            try:
                return env[t.name]
            except KeyError:
                raise EvalError(f"unbound variable {t.name!r}") from None
        if isinstance(t, Const):
            return t.value
        if isinstance(t, UnitVal):
            return UNIT_V
        if isinstance(t, Pair):
            return PairV(self.eval(t.left, env), self.eval(t.right, env))
        if isinstance(t, Inl):
            return InlV(self.eval(t.body, env))
        if isinstance(t, Inr):
            return InrV(self.eval(t.body, env))
        if isinstance(t, Disc):
            return self.eval(t.body, env)
        if isinstance(t, (Let, DLet)):
            v = self.eval(t.bound, env)
            return self.eval(t.body, {**env, t.name: v})
        if isinstance(t, (LetPair, DLetPair)):
            v = self.eval(t.bound, env)
            return self.eval(t.body, {**env, t.left: v.left, t.right: v.right})
        if isinstance(t, Case):
            v = self.eval(t.scrut, env)
            if isinstance(v, InlV):
                return self.eval(t.left, {**env, t.left_name: v.value})
            return self.eval(t.right, {**env, t.right_name: v.value})
        if isinstance(t, Op):
            a, b = (self.eval(x, env) for x in t.args)
            return bean_prim(t.name, a, b, self.mode)
        if isinstance(t, App):
            head, args = unwind_call(t)
            d = self.decls[head]
            vals = [self.eval(a, env) for a in args]
            return self.eval(d.body, {p.name: v for p, v in zip(d.params, vals)})
        raise EvalError(f"cannot evaluate {type(t).__name__}")


def unwind_call(t: App) -> tuple[str, list[Term]]:
    args = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fn
    if not isinstance(t, Var):
        raise EvalError("only declared functions can be applied")
    return t.name, list(reversed(args))


def bean_prim(name: str, a, b, mode: EvalMode):
    """Exact result, rounded once in floating-point mode; div by zero gives inr err."""
    if name == "add":
        return mode.round(nm.add(a, b))
    if name == "sub":
        return mode.round(nm.sub(a, b))
    if name in ("mul", "dmul"):
        return mode.round(nm.mul(a, b))
    if name == "div":
        if b == 0:
            return InrV(ERR_V)
        return InlV(mode.round(nm.div(a, b)))
    raise EvalError(f"unknown primitive {name!r}")


@deep
def eval_bean(t: Term, env: dict, mode: EvalMode = IDEAL, decls: dict[str, Decl] | None = None):
    return _BeanEval(mode, decls or {}).eval(t, dict(env))


def bean_decls_before(program: Program, name: str) -> dict[str, Decl]:
    out = {}
    for d in program.decls:
        if d.name == name:
            break
        out[d.name] = d
    return out


@deep
def call_bean(program: Program, name: str, args: dict, mode: EvalMode = IDEAL):
    d = program.decl(name)
    return _BeanEval(mode, {x.name: x for x in program.decls}).eval(d.body, dict(args))


# ---------------------------------------------------------------- metrics


def value_distance(ty: Type, a, b):
    """Distance between two values of type ty (RP on numbers)."""
    if isinstance(ty, Monad):
        return value_distance(ty.inner, a.value if isinstance(a, RetV) else a,
                              b.value if isinstance(b, RetV) else b)
    if isinstance(ty, Bang):
        return value_distance(ty.inner, a, b)
    if isinstance(ty, (Num, DNum)):
        return rp_distance(a, b)
    if isinstance(ty, (Unit, Err)):
        return mpmath.mpf(0)
    if isinstance(ty, Tensor):
        with mpmath.workprec(320):
            return value_distance(ty.left, a.left, b.left) + value_distance(ty.right, a.right, b.right)
    if isinstance(ty, With):
        return max(value_distance(ty.left, a.left, b.left), value_distance(ty.right, a.right, b.right))
    if isinstance(ty, Sum):
        if isinstance(a, InlV) and isinstance(b, InlV):
            return value_distance(ty.left, a.value, b.value)
        if isinstance(a, InrV) and isinstance(b, InrV):
            return value_distance(ty.right, a.value, b.value)
        return RP_INF
    raise EvalError(f"no metric for type {ty!r}")


# ---------------------------------------------------------------- forward validation


@dataclass
class ValidationReport:
    decl: str
    bound: Grade | None
    samples: int
    violations: int
    max_observed: mpmath.mpf
    max_ratio: float
    seed: int
    box: tuple[Fraction, Fraction]
    skipped: str | None = None
    first_violation: dict | None = None

    @property
    def passed(self) -> bool:
        return self.skipped is not None or self.violations == 0

    def to_json(self) -> dict:
        out = {
            "decl": self.decl,
            "seed": self.seed,
            "box": [str(self.box[0]), str(self.box[1])],
            "samples": self.samples,
        }
        if self.skipped:
            out["skipped"] = self.skipped
            return out
        out.update({
            "bound": str(self.bound),
            "bound_decimal": sig_digits(self.bound.value) if self.bound.is_finite else "inf",
            "violations": self.violations,
            "max_observed": mpmath.nstr(self.max_observed, 6),
            "max_ratio": round(self.max_ratio, 6),
        })
        if self.first_violation:
            out["first_violation"] = self.first_violation
        return out


class InputSampler:
    """Uniform-in-log positive inputs drawn from a box, rounded into the format."""

    def __init__(self, rng: random.Random, box: tuple[Fraction, Fraction], config: RoundingConfig):
        lo, hi = box
        if not 0 < lo <= hi:
            raise ValueError("the sample box must be positive, lo <= hi")
        self.rng = rng
        self.lo, self.hi = math.log(lo), math.log(hi)
        self.config = config

    def real(self) -> Fraction:
        """A random positive rational in the box (not necessarily representable)."""
        x = Fraction(math.exp(self.rng.uniform(self.lo, self.hi)))
        jitter = Fraction(self.rng.getrandbits(64) | 1, 2**64)
        return x * (1 + jitter * Fraction(1, 2**40))

    def number(self) -> Fraction:
        return round_dir(Fraction(math.exp(self.rng.uniform(self.lo, self.hi))), self.config)

    def pair(self, ty: Type) -> tuple[Any, Any]:
        """(ideal input, fp input) for a parameter of type ty."""
        if isinstance(ty, Num):
            x = self.number()
            return x, x
        if isinstance(ty, Unit):
            return UNIT_V, UNIT_V
        if isinstance(ty, Bang):
            return self.pair(ty.inner)
        if isinstance(ty, Monad):
            if not isinstance(ty.inner, Num):
                raise _Skip(f"cannot sample monadic input of type {ty!r}")
            x = self.real()
            r = round_dir(x, self.config)
            if rp_leq(rp_distance(x, r), ty.grade):
                return RetV(x), RetV(r)
            return RetV(x), RetV(x)
        if isinstance(ty, (Tensor, With)):
            a_id, a_fp = self.pair(ty.left)
            b_id, b_fp = self.pair(ty.right)
            additive = isinstance(ty, With)
            return PairV(a_id, b_id, additive), PairV(a_fp, b_fp, additive)
        if isinstance(ty, Sum):
            v_id, v_fp = self.pair(ty.left)
            return InlV(v_id), InlV(v_fp)
        raise _Skip(f"cannot sample inputs of type {ty!r}")


class _Skip(Exception):
    pass


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, RetV):
        return _jsonable(v.value)
    if isinstance(v, PairV):
        return [_jsonable(v.left), _jsonable(v.right)]
    if isinstance(v, (InlV, InrV)):
        return {type(v).__name__[:3].lower(): _jsonable(v.value)}
    if isinstance(v, mpmath.mpf):
        return mpmath.nstr(v, 30)
    return str(v)


@deep
def validate_forward(
    program: Program,
    name: str,
    samples: int = 1000,
    seed: int = 0,
    box: tuple[Fraction, Fraction] = (Fraction(1, 10), Fraction(1000)),
    config: RoundingConfig = NUMFUZZ_CONFIG,
    bound: Grade | None = None,
) -> ValidationReport:
    """Run ``name`` under both semantics on sampled inputs and compare with its grade."""
    report = check_program(program, config)
    decl_report = report.decl(name)
    d = program.decl(name)
    out_ty = result_type(d, decl_report.type)
    box = (Fraction(box[0]), Fraction(box[1]))
    empty = ValidationReport(name, bound, 0, 0, mpmath.mpf(0), 0.0, seed, box)
    if not isinstance(out_ty, Monad):
        empty.skipped = "result is not monadic"
        return empty
    bound = bound if bound is not None else out_ty.grade
    empty.bound = bound
    ptypes = [p.type for p in d.params]
    if any(isinstance(_strip(t), Lolli) for t in ptypes):
        empty.skipped = "function-typed parameters"
        return empty
    rng = random.Random(seed)
    sampler = InputSampler(rng, box, config)
    ideal_globals = nfz_globals(program, IDEAL)
    fp_mode = fp(config)
    fp_globals = nfz_globals(program, fp_mode)
    ev_id, ev_fp = _NfzEval(IDEAL, ideal_globals), _NfzEval(fp_mode, fp_globals)
    violations, worst, worst_ratio, first = 0, mpmath.mpf(0), 0.0, None
    try:
        for _ in range(samples):
            pairs = [sampler.pair(t) for t in ptypes]
            v_id, v_fp = ideal_globals[name], fp_globals[name]
            for a_id, a_fp in pairs:
                v_id = ev_id.apply(v_id, a_id)
                v_fp = ev_fp.apply(v_fp, a_fp)
            dist = value_distance(out_ty, v_id, v_fp)
            if dist > worst:
                worst = dist
            worst_ratio = max(worst_ratio, rp_ratio(dist, bound))
            if not rp_leq(dist, bound):
                violations += 1
                if first is None:
                    first = {
                        "inputs": [_jsonable(a) for a, _ in pairs],
                        "fp_inputs": [_jsonable(b) for _, b in pairs],
                        "ideal": _jsonable(v_id),
                        "fp": _jsonable(v_fp),
                        "rp": mpmath.nstr(dist, 10),
                    }
    except _Skip as exc:
        empty.skipped = str(exc)
        return empty
    return ValidationReport(name, bound, samples, violations, worst, worst_ratio, seed, box,
                            None, first)


def _strip(t: Type) -> Type:
    while isinstance(t, (Bang, Monad)):
        t = t.inner
    return t


def validate_program(program: Program, samples: int = 1000, seed: int = 0, box=None,
                     config: RoundingConfig = NUMFUZZ_CONFIG) -> list[ValidationReport]:
    box = box or (Fraction(1, 10), Fraction(1000))
    return [validate_forward(program, d.name, samples, seed, box, config) for d in program.decls]
