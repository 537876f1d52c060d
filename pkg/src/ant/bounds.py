"""Finite integer domains standing in for universal quantification."""
from __future__ import annotations

import os
from dataclasses import dataclass, field

DEFAULT_LO = -8
DEFAULT_HI = 8


def _env_range() -> tuple[int, int]:
    raw = os.environ.get("ANT_BOUND")
    if not raw:
        return DEFAULT_LO, DEFAULT_HI
    try:
        lo, hi = (int(x) for x in raw.split(":"))
    except ValueError:
        raise ValueError(f"ANT_BOUND must look like lo:hi, got {raw!r}") from None
    if lo > hi:
        raise ValueError(f"ANT_BOUND range is empty: {raw!r}")
    return lo, hi


@dataclass(frozen=True)
class BoundedDomain:
    lo: int = DEFAULT_LO
    hi: int = DEFAULT_HI
    extra: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("lo must not exceed hi")
        object.__setattr__(self, "extra", frozenset(self.extra))

    @property
    def values(self) -> tuple[int, ...]:
        v = self.__dict__.get("_values")
        if v is None:
            v = tuple(sorted(set(range(self.lo, self.hi + 1)) | self.extra))
            object.__setattr__(self, "_values", v)
        return v

    def __iter__(self):
        return iter(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def __contains__(self, n: int) -> bool:
        return n in self.values

    def with_base(self, lo: int, hi: int) -> "BoundedDomain":
        return BoundedDomain(lo, hi, self.extra)

    def with_points(self, values) -> "BoundedDomain":
        """This domain plus each integer in values, its negation and their neighbours."""
        new: set = set()
        for n in values:
            if isinstance(n, int) and not isinstance(n, bool):
                new |= _neighbourhood(n)
        new -= set(self.values)
        if not new:
            return self
        return BoundedDomain(self.lo, self.hi, self.extra | new)

    @classmethod
    def for_program(cls, program, lo: int | None = None, hi: int | None = None) -> "BoundedDomain":
        """Base range (ANT_BOUND or default) plus every class-level literal, its negation,
        and their neighbours."""
        elo, ehi = _env_range()
        lo = elo if lo is None else lo
        hi = ehi if hi is None else hi
        extra = set()
        for n in program_literals(program):
            extra |= _neighbourhood(n)
        return cls(lo, hi, frozenset(extra))


def _neighbourhood(n: int) -> set[int]:
    return {m + d for m in (n, -n) for d in (-1, 0, 1)}


def program_literals(program) -> set[int]:
    from .syntax import BinOp, Call, Cast, Let, Update, Val

    out: set[int] = set()

    def walk(e):
        if isinstance(e, Val):
            if isinstance(e.value, int):
                out.add(e.value)
        elif isinstance(e, BinOp):
            walk(e.left)
            walk(e.right)
        elif isinstance(e, Update):
            walk(e.value)
        elif isinstance(e, Call):
            walk(e.arg)
        elif isinstance(e, Let):
            walk(e.init)
            walk(e.body)
        elif isinstance(e, Cast):
            walk(e.expr)

    for c in program.classes:
        for f in c.fields:
            for inv in f.invs:
                walk(inv.lhs)
                walk(inv.rhs)
        for m in c.methods:
            for pre in m.pre:
                walk(pre.lhs)
                walk(pre.rhs)
            walk(m.body)
    return out
