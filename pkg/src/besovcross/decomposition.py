"""Dyadic block analysis of sampled fields and mixed-smoothness Besov norms.

Smooth blocks ``A_s(f)`` multiply the spectrum by the tensor block multiplier
``prod_j (k_{s_j} - k_{s_j-1})``; sharp blocks ``delta_s(f)`` multiply it by
the indicator of the dyadic block ``s``.  Frequency bins are assigned to sharp
blocks by :func:`besovcross.sampling.axis_levels`, which makes the sharp
blocks an exact partition of the lattice below Nyquist.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .kernels import axis_block_weight, trapezoid_weight
from .reports import RateReport
from .sampling import (GridSpec, NyquistError, SampledField, Spectrum, axis_levels, filtered,
                       lp_norm, outer)

# blocks whose relative spectral amplitude is below this are treated as empty
NEGLIGIBLE = 1e-13
# relative spectral amplitude allowed beyond the level cap in norm sums
TAIL_TOLERANCE = 1e-6


@dataclass(frozen=True)
class SmoothnessVector:
    """Ordered smoothness ``0 < r_1 = ... = r_nu < r_{nu+1} <= ... <= r_d``."""

    r: tuple

    def __post_init__(self):
        r = tuple(float(v) for v in self.r)
        if not r:
            raise ValueError("smoothness vector is empty")
        if any(not v > 0 or not math.isfinite(v) for v in r):
            raise ValueError(f"smoothness must be positive and finite, got {r}")
        if any(b < a for a, b in zip(r, r[1:])):
            raise ValueError(f"smoothness must be nondecreasing, got {r}")
        object.__setattr__(self, "r", r)

    @classmethod
    def of(cls, value, d: int) -> "SmoothnessVector":
        """Scalar ``value`` is replicated over ``d`` axes; a sequence must have length ``d``."""
        if np.ndim(value) == 0:
            return cls((float(value),) * d)
        value = tuple(value)
        if len(value) == 1:
            return cls(value * d)
        if len(value) != d:
            raise ValueError(f"smoothness vector has length {len(value)}, dimension is {d}")
        return cls(value)

    @property
    def d(self) -> int:
        return len(self.r)

    @property
    def r1(self) -> float:
        return self.r[0]

    @property
    def gamma(self) -> tuple:
        return tuple(v / self.r[0] for v in self.r)

    @property
    def nu(self) -> int:
        return sum(1 for g in self.gamma if g == 1.0)

    @property
    def gamma_prime(self) -> tuple:
        # any value strictly between 1 and gamma_j works past nu; the midpoint is used
        g = self.gamma
        return tuple(v if j < self.nu else 0.5 * (1.0 + v) for j, v in enumerate(g))


@dataclass(frozen=True)
class BesovParams:
    p: float
    theta: float
    r: SmoothnessVector

    def __post_init__(self):
        if not self.p >= 1:
            raise ValueError(f"p must be >= 1 or inf, got {self.p}")
        if not self.theta >= 1:
            raise ValueError(f"theta must be >= 1 or inf, got {self.theta}")
        if not isinstance(self.r, SmoothnessVector):
            object.__setattr__(self, "r", SmoothnessVector(tuple(self.r)))


@functools.lru_cache(maxsize=256)
def _axis_block_factor(grid: GridSpec, s: int) -> np.ndarray:
    w = axis_block_weight(s, grid.axis_frequencies())
    w.flags.writeable = False
    return w


def block_weights(grid: GridSpec, s) -> np.ndarray:
    """Block multiplier sampled on the frequency lattice."""
    return outer([_axis_block_factor(grid, int(v)) for v in s])


def sharp_mask(grid: GridSpec, blocks) -> np.ndarray:
    """Indicator (as floats) of the union of sharp blocks on the lattice."""
    cap = grid.level_cap + 2
    table = np.zeros((cap,) * grid.d, dtype=bool)
    for s in blocks:
        if len(s) != grid.d:
            raise ValueError(f"block {s} has wrong dimension for d={grid.d}")
        grid.check_level(s)
        table[tuple(s)] = True
    lev = axis_levels(grid)
    idx = np.ix_(*([lev] * grid.d))
    return table[idx].astype(float)


def _dim_check(f: SampledField, s) -> tuple:
    s = tuple(int(v) for v in s)
    if len(s) != f.grid.d:
        raise ValueError(f"multi-index {s} does not match field dimension {f.grid.d}")
    if any(v < 0 for v in s):
        raise ValueError(f"multi-index must be nonnegative, got {s}")
    return s


def apply_block(f: SampledField, s) -> SampledField:
    s = _dim_check(f, s)
    f.grid.check_level(s)
    return filtered(f, block_weights(f.grid, s))


def apply_sharp_block(f: SampledField, s) -> SampledField:
    s = _dim_check(f, s)
    return filtered(f, sharp_mask(f.grid, [s]))


def _levels(S, d: int) -> tuple:
    if np.ndim(S) == 0:
        return (int(S),) * d
    S = tuple(int(v) for v in S)
    if len(S) != d:
        raise ValueError(f"level cap has length {len(S)}, dimension is {d}")
    return S


def telescoped_weights(grid: GridSpec, S) -> np.ndarray:
    """``prod_j k_{S_j}(lam_j)``, the sum of all block multipliers with ``s <= S``."""
    lam = grid.axis_frequencies()
    return outer([trapezoid_weight(v, lam) for v in _levels(S, grid.d)])


def reconstruct(f: SampledField, S) -> SampledField:
    """Sum of ``A_s(f)`` over ``s <= S``, done as one telescoped multiplier."""
    S = _levels(S, f.grid.d)
    f.grid.check_level(S)
    return filtered(f, telescoped_weights(f.grid, S))


def reconstruction_residual(f: SampledField, S) -> SampledField:
    """``f - reconstruct(f, S)`` computed on the spectrum side."""
    S = _levels(S, f.grid.d)
    f.grid.check_level(S)
    return filtered(f, 1.0 - telescoped_weights(f.grid, S))


def level_energy(spec: Spectrum) -> np.ndarray:
    """Spectral energy ``sum |F|**2`` in each sharp-level cell, indexed by level tuple."""
    g = spec.grid
    cap = g.level_cap + 2
    lev = axis_levels(g)
    labels = np.zeros(g.shape, dtype=np.int64)
    for ax in range(g.d):
        shape = [1] * g.d
        shape[ax] = g.N
        labels = labels * cap + lev.reshape(shape)
    e = np.bincount(labels.ravel(), weights=np.abs(spec.coefficients.ravel()) ** 2,
                    minlength=cap**g.d)
    return e.reshape((cap,) * g.d)


def sharp_content(f: SampledField) -> dict:
    """Sharp blocks (within the level cap) carrying non-negligible energy, with that energy."""
    e = level_energy(f.spectrum)
    total = e.sum()
    if total == 0:
        return {}
    cap = f.grid.level_cap
    out = {}
    for s in zip(*np.nonzero(e > NEGLIGIBLE**2 * total)):
        s = tuple(int(v) for v in s)
        if max(s) <= cap:
            out[s] = float(e[s])
    return out


def smooth_blocks_with_content(f: SampledField) -> list:
    """Smooth blocks ``s`` (``s <= level cap``) whose multiplier meets non-negligible energy."""
    cells = sharp_content(f)
    cap = f.grid.level_cap
    cand = set()
    for c in cells:
        # a_s lives on sharp levels s-1 and s of each axis
        for shift in product((0, 1), repeat=len(c)):
            s = tuple(v + u for v, u in zip(c, shift))
            if max(s) <= cap:
                cand.add(s)
    return sorted(cand)


def tail_fraction(f: SampledField) -> float:
    """Relative spectral amplitude not captured by blocks up to the level cap."""
    spec = f.spectrum
    c = spec.coefficients
    tot = np.vdot(c, c).real
    if tot == 0:
        return 0.0
    rest = c * (1.0 - telescoped_weights(f.grid, f.grid.level_cap))
    return float(math.sqrt(np.vdot(rest, rest).real / tot))


def block_norms(f: SampledField, p: float, blocks=None) -> dict:
    """``{s: ||A_s(f)||_p}`` over ``blocks`` (default: every block with content)."""
    if blocks is None:
        blocks = smooth_blocks_with_content(f)
    out = {}
    for s in blocks:
        out[tuple(s)] = lp_norm(apply_block(f, s), p)
    return out


def besov_from_block_norms(norms: dict, params: BesovParams) -> float:
    """Weighted ``l_theta`` sum of block norms; summation order is lexicographic in ``s``."""
    r = params.r.r
    terms = []
    for s in sorted(norms):
        if len(s) != len(r):
            raise ValueError(f"block {s} does not match smoothness dimension {len(r)}")
        terms.append(2.0 ** sum(a * b for a, b in zip(s, r)) * norms[s])
    if not terms:
        return 0.0
    t = np.array(terms)
    if math.isinf(params.theta):
        return float(t.max())
    m = t.max()
    if m == 0:
        return 0.0
    return float(m * np.sum((t / m) ** params.theta) ** (1.0 / params.theta))


def besov_norm(f: SampledField, params: BesovParams) -> float:
    """Decomposition norm ``(sum_s 2**((s,r) theta) ||A_s f||_p**theta)**(1/theta)``.

    Raises
    ------
    NyquistError
        When more than ``TAIL_TOLERANCE`` of the spectrum lies past the level cap.
    """
    if params.r.d != f.grid.d:
        raise ValueError(f"smoothness dimension {params.r.d} != field dimension {f.grid.d}")
    tail = tail_fraction(f)
    if tail > TAIL_TOLERANCE:
        raise NyquistError(
            f"{tail:.3g} of the spectrum lies beyond level cap {f.grid.level_cap}; "
            "refine the grid so the field is resolved by the block sum")
    return besov_from_block_norms(block_norms(f, params.p), params)


def check_norm_equivalence(f: SampledField, p: float, levels, spread_bound: float = 10.0) -> RateReport:
    """Ratios ``||delta_s f||_p / ||A_s f||_p`` over blocks with every ``s_j`` in ``levels``."""
    if not 1 < p < math.inf:
        raise ValueError(f"norm equivalence needs 1 < p < inf, got {p}")
    levels = sorted(set(int(v) for v in levels))
    peak = np.abs(f.spectrum.coefficients).max()
    xs, ratios, rows, skipped = [], [], [], 0
    for s in product(levels, repeat=f.grid.d):
        a = lp_norm(apply_block(f, s), p)
        b = lp_norm(apply_sharp_block(f, s), p)
        floor = NEGLIGIBLE * (peak if peak > 0 else 1.0)
        if a <= floor or b <= floor:
            skipped += 1
            continue
        xs.append(sum(s))
        ratios.append(b / a)
        rows.append({"s": list(s), "sharp": b, "smooth": a, "ratio": b / a})
    return RateReport.build(f"norm equivalence p={p}", xs, ratios if ratios else [], ratios,
                            predicted_slope=None, tolerance=None, spread_bound=spread_bound,
                            rows=rows, notes={"skipped": skipped, "blocks": len(ratios)})


@dataclass(frozen=True)
class NikolskyResult:
    passed: bool
    slack: float
    lhs: float
    rhs: float


class BandViolation(ValueError):
    """Field has spectral content outside the declared band."""


def check_nikolsky(g: SampledField, band, p: float, q: float) -> NikolskyResult:
    """Test ``||g||_q <= 2**d (prod band_j)**(1/p - 1/q) ||g||_p``.

    ``slack`` is ``lhs / rhs``; the check passes when it is at most 1.
    """
    if not 1 <= p <= q:
        raise ValueError(f"need 1 <= p <= q, got p={p}, q={q}")
    d = g.grid.d
    band = tuple(float(b) for b in np.broadcast_to(np.asarray(band, dtype=float), (d,)))
    if any(b < 0 for b in band):
        raise ValueError(f"band must be nonnegative, got {band}")
    c = g.spectrum.coefficients
    lam = np.abs(g.grid.axis_frequencies())
    inside = outer([(lam <= b).astype(float) for b in band])
    tot = np.vdot(c, c).real
    out = c * (1.0 - inside)
    if tot > 0 and math.sqrt(np.vdot(out, out).real / tot) > 1e-8:
        raise BandViolation(f"field has spectral content outside band {band}")
    expo = (0.0 if math.isinf(p) else 1.0 / p) - (0.0 if math.isinf(q) else 1.0 / q)
    vol = math.prod(band)
    factor = 1.0 if expo == 0 else vol**expo
    lhs = lp_norm(g, q)
    rhs = 2.0**d * factor * lp_norm(g, p)
    if rhs == 0:
        return NikolskyResult(lhs == 0, 0.0 if lhs == 0 else math.inf, lhs, rhs)
    return NikolskyResult(lhs <= rhs, lhs / rhs, lhs, rhs)


def block_table(f: SampledField, p: float) -> list:
    """Rows ``(s, ||A_s f||_p, ||delta_s f||_p)`` for every block with content."""
    rows = []
    for s in smooth_blocks_with_content(f):
        a = lp_norm(apply_block(f, s), p)
        b = lp_norm(apply_sharp_block(f, s), p)
        rows.append((s, a, b))
    return rows

