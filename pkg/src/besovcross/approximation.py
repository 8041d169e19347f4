"""Spectral partial sums over unions of dyadic blocks and their errors.

``partial_sum(f, L)`` keeps the spectrum of ``f`` on the union of the sharp
blocks in ``L``.  Two error functionals are provided: truncation to the step
hyperbolic cross of level ``n`` and the best error over block unions of
measure at most ``M`` (estimated by two constructive strategies).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .decomposition import apply_sharp_block, sharp_content, sharp_mask
from .index_sets import (IndexSet, budget_fraction, cross_measure, greedy_select,
                         hyperbolic_cross)
from .sampling import SampledField, Spectrum, filtered, lp_norm

STRATEGIES = ("cross", "greedy", "best")


@dataclass(frozen=True, eq=False)
class ApproximationResult:
    approximant: SampledField
    index_set: IndexSet
    error_q: float
    q: float
    strategy: str
    budget: Fraction
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "budget": str(self.budget),
            "q": "inf" if math.isinf(self.q) else self.q,
            "error": self.error_q,
            "index_set": self.index_set.to_json(),
            "details": self.details,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _check_set(f: SampledField, blocks: IndexSet) -> None:
    if blocks.d != f.grid.d:
        raise ValueError(f"index set dimension {blocks.d} != field dimension {f.grid.d}")
    for s in blocks.members:
        f.grid.check_level(s)


def partial_sum(f: SampledField, blocks: IndexSet) -> SampledField:
    _check_set(f, blocks)
    return filtered(f, sharp_mask(f.grid, blocks.members))


def truncation_residual(f: SampledField, blocks: IndexSet) -> SampledField:
    """``f - partial_sum(f, blocks)`` taken directly on the spectrum side."""
    _check_set(f, blocks)
    return filtered(f, 1.0 - sharp_mask(f.grid, blocks.members))


def _approx(f: SampledField, blocks: IndexSet, q: float):
    mask = sharp_mask(f.grid, blocks.members)
    residual = filtered(f, 1.0 - mask)
    spec = f.spectrum
    approx = SampledField(f.grid, f.values - residual.values,
                          Spectrum(f.grid, spec.coefficients * mask, real=spec.real))
    return approx, lp_norm(residual, q)


def error_hyperbolic(f: SampledField, n: int, gamma=None, q: float = math.inf) -> float:
    """``||f - S_{Q_n}(f)||_q`` for the step hyperbolic cross of level ``n``."""
    cross = hyperbolic_cross(n, gamma, f.grid.d)
    return lp_norm(truncation_residual(f, cross), q)


def approximate_hyperbolic(f: SampledField, n: int, gamma=None, q: float = math.inf) -> ApproximationResult:
    """Truncation to the step hyperbolic cross of level ``n`` as a full result."""
    cross = hyperbolic_cross(n, gamma, f.grid.d)
    _check_set(f, cross)
    approx, err = _approx(f, cross, q)
    return ApproximationResult(approx, cross, err, q, "cross", Fraction(cross.total_measure),
                               {"cross_level": n})


def largest_cross_level(f_grid, M, gamma=None) -> int | None:
    """Largest ``n`` (within the grid's level cap) with ``mes Q_n <= M``, else ``None``."""
    M = budget_fraction(M)
    best = None
    for n in range(f_grid.level_cap + 1):
        if cross_measure(n, gamma, f_grid.d) <= M:
            best = n
        else:
            break
    return best


def block_scores(f: SampledField, q: float) -> dict:
    """Per-block error contributions used to rank blocks.

    ``q = 2`` gives exact squared contributions ``||delta_s f||_2**2``; other
    ``q`` use ``||delta_s f||_q``.
    """
    content = sharp_content(f)
    if q == 2:
        w = f.grid.dlam**f.grid.d
        return {s: e * w for s, e in content.items()}
    return {s: lp_norm(apply_sharp_block(f, s), q) for s in sorted(content)}


def error_budgeted(f: SampledField, M, q: float = math.inf, strategy: str = "best",
                   gamma=None, scores: dict | None = None) -> ApproximationResult:
    """Spectral approximation of ``f`` with block measure at most ``M``.

    ``cross`` takes the largest step hyperbolic cross that fits, ``greedy``
    ranks blocks by contribution per unit measure, ``best`` keeps the smaller
    error of the two (the cross wins ties).
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"strategy must be one of {STRATEGIES}, got {strategy!r}")
    M = budget_fraction(M)
    if M <= 0:
        raise ValueError(f"budget must be positive, got {M}")
    d = f.grid.d
    details = {}
    cands = []
    if strategy in ("cross", "best"):
        n = largest_cross_level(f.grid, M, gamma)
        blocks = IndexSet(d) if n is None else hyperbolic_cross(n, gamma, d)
        approx, err = _approx(f, blocks, q)
        details["cross_level"] = n
        details["cross_error"] = err
        cands.append(("cross", blocks, approx, err))
    if strategy in ("greedy", "best"):
        if scores is None:
            scores = block_scores(f, q)
        blocks = greedy_select(scores, M, d) if scores else IndexSet(d)
        approx, err = _approx(f, blocks, q)
        details["greedy_error"] = err
        cands.append(("greedy", blocks, approx, err))
    name, blocks, approx, err = min(cands, key=lambda c: c[3])
    details["chosen"] = name
    return ApproximationResult(approx, blocks, err, q, strategy, M, details)

