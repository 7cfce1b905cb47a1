"""Type trees for both languages.

NumFuzz uses Unit, Num, Tensor, With, Sum, Lolli, Bang and Monad.  Bean uses
Unit, Num, DNum, Tensor, Sum and Err.  ``Hole`` stands for a summand that a
Bean injection leaves open until a case merge pins it down.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..grades import Grade


class Type:
    __slots__ = ()


@dataclass(frozen=True)
class Unit(Type):
    pass


@dataclass(frozen=True)
class Num(Type):
    pass


@dataclass(frozen=True)
class DNum(Type):
    pass


@dataclass(frozen=True)
class Err(Type):
    pass


@dataclass(frozen=True)
class Hole(Type):
    pass


@dataclass(frozen=True)
class Tensor(Type):
    left: Type
    right: Type


@dataclass(frozen=True)
class With(Type):
    left: Type
    right: Type


@dataclass(frozen=True)
class Sum(Type):
    left: Type
    right: Type


@dataclass(frozen=True)
class Lolli(Type):
    dom: Type
    cod: Type


@dataclass(frozen=True)
class Bang(Type):
    grade: Grade
    inner: Type


@dataclass(frozen=True)
class Monad(Type):
    grade: Grade
    inner: Type


UNIT, NUM, DNUM, ERR, HOLE = Unit(), Num(), DNum(), Err(), Hole()


def tensor_of(items: list[Type]) -> Type:
    """Right-nested tensor a ⊗ (b ⊗ (c ...))."""
    if not items:
        return UNIT
    out = items[-1]
    for t in reversed(items[:-1]):
        out = Tensor(t, out)
    return out


def vector(n: int, elem: Type = NUM) -> Type:
    return tensor_of([elem] * n)


def matrix(rows: int, cols: int, elem: Type = NUM) -> Type:
    return tensor_of([vector(cols, elem)] * rows)


def is_discrete(t: Type) -> bool:
    """dnum and tensors of discrete types (plus unit, which carries no data)."""
    if isinstance(t, (DNum, Unit)):
        return True
    if isinstance(t, Tensor):
        return is_discrete(t.left) and is_discrete(t.right)
    return False


def has_hole(t: Type) -> bool:
    if isinstance(t, Hole):
        return True
    if isinstance(t, (Tensor, With, Sum)):
        return has_hole(t.left) or has_hole(t.right)
    return False


def unify(a: Type, b: Type) -> Type | None:
    """Fill holes of either side from the other; None if the shapes disagree."""
    if isinstance(a, Hole):
        return b
    if isinstance(b, Hole):
        return a
    if type(a) is not type(b):
        return None
    if isinstance(a, (Tensor, Sum, With)):
        left = unify(a.left, b.left)
        right = unify(a.right, b.right)
        if left is None or right is None:
            return None
        return type(a)(left, right)
    return a if a == b else None


def leaf_count(t: Type) -> int:
    if isinstance(t, Tensor):
        return leaf_count(t.left) + leaf_count(t.right)
    return 1
