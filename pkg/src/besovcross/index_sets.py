"""Dyadic blocks, step hyperbolic crosses, layers and budgeted block selection.

Block ``s`` is the frequency set ``{lam : eta(s_j) 2**(s_j-1) <= |lam_j| < 2**s_j}``.
Its Lebesgue measure is the integer ``prod_j 2**max(1, s_j)``, so all budget
arithmetic here is exact (ints and :class:`fractions.Fraction`).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import comb, prod
from typing import Iterable, Mapping

MultiIndex = tuple


def eta(t: float) -> int:
    if t < 0:
        raise ValueError(f"eta is defined for t >= 0, got {t}")
    return 0 if t == 0 else 1


def block_measure(s) -> int:
    if any(v < 0 for v in s):
        raise ValueError(f"multi-index must be nonnegative, got {tuple(s)}")
    return prod(2 ** max(1, int(v)) for v in s)


def block_band(s) -> list:
    """Per-axis ``(low, high)`` bounds of ``|lam_j|`` for block ``s``, half-open."""
    return [(eta(v) * 2.0 ** (v - 1), 2.0**v) for v in s]


@dataclass(frozen=True)
class IndexSet:
    """Finite set of multi-indices of a common dimension ``d``."""

    d: int
    members: frozenset = frozenset()

    def __post_init__(self):
        mem = frozenset(tuple(int(v) for v in s) for s in self.members)
        for s in mem:
            if len(s) != self.d or any(v < 0 for v in s):
                raise ValueError(f"bad multi-index {s} for dimension {self.d}")
        object.__setattr__(self, "members", mem)

    @property
    def total_measure(self) -> int:
        return sum(block_measure(s) for s in self.members)

    def sorted(self) -> list:
        return sorted(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, s) -> bool:
        return tuple(s) in self.members

    def __iter__(self):
        return iter(self.sorted())

    def __or__(self, other: "IndexSet") -> "IndexSet":
        if other.d != self.d:
            raise ValueError("dimension mismatch")
        return IndexSet(self.d, self.members | other.members)

    def max_level(self) -> int:
        return max((max(s) for s in self.members), default=0)

    def to_json(self) -> dict:
        return {"d": self.d, "members": [list(s) for s in self.sorted()],
                "measure": self.total_measure}

    @classmethod
    def from_json(cls, obj) -> "IndexSet":
        if isinstance(obj, str):
            obj = json.loads(obj)
        out = cls(int(obj["d"]), frozenset(tuple(s) for s in obj["members"]))
        if "measure" in obj and int(obj["measure"]) != out.total_measure:
            raise ValueError(f"recorded measure {obj['measure']} != recomputed {out.total_measure}")
        return out


def _gamma(gamma, d):
    if gamma is None:
        gamma = (1.0,) * d
    gamma = tuple(float(g) for g in gamma)
    if d is not None and len(gamma) != d:
        raise ValueError(f"direction vector has length {len(gamma)}, expected {d}")
    if any(g < 1 for g in gamma):
        raise ValueError(f"direction vector must be >= 1 componentwise, got {gamma}")
    return gamma


def hyperbolic_cross(n: int, gamma=None, d: int | None = None) -> IndexSet:
    """All ``s >= 0`` with ``(s, gamma) <= n``."""
    if n < 0:
        raise ValueError(f"level must be >= 0, got {n}")
    gamma = _gamma(gamma, d)
    d = len(gamma)
    tol = 1e-9
    out = []

    def rec(prefix, budget):
        j = len(prefix)
        if j == d:
            out.append(tuple(prefix))
            return
        v = 0
        while v * gamma[j] <= budget + tol:
            rec(prefix + [v], budget - v * gamma[j])
            v += 1

    rec([], float(n))
    return IndexSet(d, frozenset(out))


def cross_measure(n: int, gamma=None, d: int | None = None) -> int:
    return hyperbolic_cross(n, gamma, d).total_measure


def layer(n: int, d: int, nu: int | None = None) -> IndexSet:
    """All ``s >= 0`` with ``s_1 + ... + s_nu = n`` and zeros on axes past ``nu``."""
    if n < 0:
        raise ValueError(f"level must be >= 0, got {n}")
    nu = d if nu is None else nu
    if not 1 <= nu <= d:
        raise ValueError(f"nu must lie in [1, {d}], got {nu}")
    out = []

    def rec(prefix, rest):
        if len(prefix) == nu - 1:
            out.append(tuple(prefix) + (rest,) + (0,) * (d - nu))
            return
        for v in range(rest + 1):
            rec(prefix + [v], rest - v)

    rec([], n)
    mem = frozenset(out)
    assert len(mem) == comb(n + nu - 1, nu - 1)
    return IndexSet(d, mem)


def budget_fraction(M) -> Fraction:
    """Exact rational budget; floats convert without rounding."""
    return Fraction(M)


def greedy_select(block_scores: Mapping, M, d: int | None = None) -> IndexSet:
    """Blocks in decreasing score-per-measure order while the budget holds.

    Selection stops at the first block that would overflow ``M``, so the
    result is a prefix of the ranking and grows monotonically with ``M``.
    Ties are broken by lexicographic multi-index; zero scores are never taken.
    """
    M = budget_fraction(M)
    if M <= 0:
        raise ValueError(f"budget must be positive, got {M}")
    items = [(tuple(s), float(v)) for s, v in block_scores.items()]
    if d is None:
        if not items:
            raise ValueError("dimension required for an empty pool")
        d = len(items[0][0])
    ranked = sorted((it for it in items if it[1] > 0),
                    key=lambda it: (-it[1] / block_measure(it[0]), it[0]))
    chosen, used = [], 0
    for s, _ in ranked:
        m = block_measure(s)
        if used + m > M:
            break
        chosen.append(s)
        used += m
    return IndexSet(d, frozenset(chosen))


def index_sets_disjoint(sets: Iterable[IndexSet]) -> bool:
    seen = set()
    for st in sets:
        if seen & st.members:
            return False
        seen |= st.members
    return True
