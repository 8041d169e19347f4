"""Scaling-law experiments on block kernels and extremal layer families.

Every sweep row is computed on its own grid: ``N`` samples per axis over the
largest box (up to ``L_max``) whose Nyquist band still resolves the row's
blocks.  Rows are independent jobs; results are gathered in order of ``n`` so
reports are reproducible bit for bit.
"""

from __future__ import annotations

import functools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np

from .approximation import error_budgeted, error_hyperbolic
from .decomposition import (BesovParams, SmoothnessVector, apply_sharp_block, besov_from_block_norms,
                            block_norms, check_nikolsky, check_norm_equivalence,
                            reconstruction_residual, sharp_content)
from .extremal import block_kernel_field, layer_field
from .index_sets import cross_measure, layer
from .reports import RateReport, fit_loglog
from .sampling import (GridSpec, NyquistError, SampledField, band_limited_noise, grid_for_level,
                       lp_norm, make_grid, sample_function)

__all__ = [
    "fit_loglog", "sweep_grid", "kernel_norms", "block_kernel_norm", "verify_lemma",
    "ReconstructionReport", "verify_reconstruction", "gaussian_field", "verify_parseval", "verify_nikolsky",
    "verify_equiv", "LayerProfile", "layer_profile", "rate_theorem1", "rate_theorem2",
    "rate_theoremV", "theta_independence", "StabilityReport", "stability_check",
]

SLOPE_TOLERANCE = 0.15
SPREAD_BOUND = 2.5
STABILITY_BOUND = 0.02
KERNEL_BOX = 32.0
SWEEP_BOX = 16.0
DEFAULT_N = {1: 2**18, 2: 2048, 3: 128}


def _workers(workers):
    return workers if workers else min(4, os.cpu_count() or 1)


def _ordered_map(fn, items, workers=None):
    items = list(items)
    w = _workers(workers)
    if w == 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=w) as pool:
        return list(pool.map(fn, items))


def sweep_grid(d: int, level: int, N: int | None = None, L_max: float = SWEEP_BOX) -> GridSpec:
    """Grid with ``N`` samples per axis whose level cap is at least ``level``.

    The box is the largest power-of-two half-width up to ``L_max`` that keeps
    ``2**level`` under Nyquist.  Boxes narrower than ``1/2`` would leave the
    unit block without interior bins and are rejected.
    """
    N = DEFAULT_N[d] if N is None else N
    L = min(L_max, N / 2.0 ** (level + 2))
    if L < 0.5:
        raise NyquistError(
            f"level {level} needs at least {2 ** (level + 1)} samples per axis, got N={N}")
    return make_grid(d, L, N)


# ---------------------------------------------------------------- kernels

def kernel_norms(levels, p: float, L: float = KERNEL_BOX) -> dict:
    """``{s: ||A_s||_p}`` for one-dimensional block kernels on a common grid."""
    levels = sorted(set(int(s) for s in levels))
    grid = grid_for_level(1, L, max(levels))
    return {s: lp_norm(block_kernel_field((s,), grid), p) for s in levels}


def block_kernel_norm(s, p: float, table: dict) -> float:
    """Norm of the tensor kernel ``A_s`` from per-axis norms.

    On a tensor grid both the rectangle rule and the grid maximum factor over
    axes, so the product is exact rather than an approximation.
    """
    return math.prod(table[int(v)] for v in s)


def _lemma_blocks(d, levels):
    out = []
    for k in levels:
        out.extend(s for s in product(range(k + 1), repeat=d) if sum(s) == k)
    return out


def verify_lemma(which: int, d: int = 1, p: float = math.inf, levels=None, N: int | None = None,
                 L: float | None = None) -> RateReport:
    """Check the growth laws of block kernels and layer sums.

    ``which=1``: ``||A_s||_inf`` against ``2**|s|_1`` (slope 1).
    ``which=2``: ``||A_s||_p`` against ``2**(|s|_1 (1 - 1/p))``.
    ``which=3``: ``||sum_{|s|_1 = n+1} A_s||_inf`` against ``2**n n**(d-1)``.
    """
    if which in (1, 2):
        if which == 1:
            p = math.inf
        if not p >= 1:
            raise ValueError(f"p must be >= 1, got {p}")
        expo = 1.0 if math.isinf(p) else 1.0 - 1.0 / p
        if levels is None:
            levels = range(2, 13) if d == 1 else range(2, 11)
        levels = sorted(set(int(k) for k in levels))
        blocks = _lemma_blocks(d, levels)
        table = kernel_norms(range(max(levels) + 1), p, KERNEL_BOX if L is None else L)
        xs, vals, comp, rows = [], [], [], []
        for s in blocks:
            v = block_kernel_norm(s, p, table)
            k = sum(s)
            xs.append(k)
            vals.append(v)
            comp.append(v / 2.0 ** (k * expo))
            rows.append({"s": list(s), "n": k, "error": v, "compensated": comp[-1],
                         "predicted": 2.0 ** (k * expo)})
        if which == 1:
            tol, bound = (0.05 if d == 1 else 0.07), None
        else:
            tol, bound = 0.05, 1.5
        label = f"lemma {which} d={d}" + ("" if which == 1 else f" p={_pstr(p)}")
        return RateReport.build(label, xs, vals, comp, predicted_slope=expo, tolerance=tol,
                                spread_bound=bound, rows=rows, notes={"box": KERNEL_BOX if L is None else L})
    if which == 3:
        if d < 2:
            raise ValueError("the layer-sum law needs d >= 2")
        levels = range(3, 10) if levels is None else levels
        levels = sorted(set(int(k) for k in levels))
        if levels[0] < 1:
            raise ValueError("layer-sum levels must be >= 1")

        def row(n):
            grid = sweep_grid(d, n + 1, N, SWEEP_BOX if L is None else L)
            sup = lp_norm(layer_field(n + 1, grid), math.inf)
            pred = 2.0**n * n ** (d - 1)
            return {"n": n, "error": sup, "compensated": sup / pred, "predicted": pred,
                    "L": grid.L, "N": grid.N}

        rows = _ordered_map(row, levels)
        return RateReport.build(f"lemma 3 d={d}", [r["n"] for r in rows], [r["error"] for r in rows],
                                [r["compensated"] for r in rows], spread_bound=2.0, rows=rows)
    raise ValueError(f"which must be 1, 2 or 3, got {which!r}")


def _pstr(p):
    return "inf" if math.isinf(p) else f"{p:g}"


# ---------------------------------------------------------------- checks

@dataclass
class ReconstructionReport:
    levels: list
    residuals: list
    monotone: bool
    final: float
    tolerance: float
    verdict: bool

    def summary(self) -> str:
        state = "PASS" if self.verdict else "FAIL"
        return (f"[{state}] reconstruction: final relative residual {self.final:.3e} "
                f"(bound {self.tolerance:g}), monotone {self.monotone}")


def verify_reconstruction(f: SampledField, levels=None, tolerance: float = 1e-6) -> ReconstructionReport:
    """Relative sup residual of the telescoped reconstruction for each level cap ``S``.

    Monotonicity is judged up to a round-off floor of ``1e-13`` relative.
    """
    levels = range(f.grid.level_cap + 1) if levels is None else levels
    levels = sorted(set(int(S) for S in levels))
    scale = lp_norm(f, math.inf)
    if scale == 0:
        return ReconstructionReport(levels, [0.0] * len(levels), True, 0.0, tolerance, True)
    res = [lp_norm(reconstruction_residual(f, S), math.inf) / scale for S in levels]
    mono = all(b <= a + 1e-13 for a, b in zip(res, res[1:]))
    return ReconstructionReport(levels, res, mono, res[-1], tolerance, mono and res[-1] <= tolerance)


def gaussian_field(grid: GridSpec, sigma: float = 1.0) -> SampledField:
    """``exp(-|x|**2 / (2 sigma**2))`` sampled on the grid."""
    return sample_function(grid, lambda *x: np.exp(-sum(v * v for v in x) / (2.0 * sigma**2)))


def verify_parseval(d: int, count: int = 20, seed: int = 0, N: int | None = None,
                    tolerance: float = 1e-8) -> dict:
    """Sum of squared sharp-block norms against the full ``L_2`` norm on random fields."""
    N = (1024 if d == 1 else 128) if N is None else N
    grid = make_grid(d, 4.0, N)
    rng = np.random.default_rng(seed)
    errs = []
    for _ in range(count):
        band = rng.uniform(1.0, 0.9 * grid.nyquist, size=d)
        f = band_limited_noise(grid, band, rng)
        parts = sum(lp_norm(apply_sharp_block(f, s), 2) ** 2 for s in sorted(sharp_content(f)))
        whole = lp_norm(f, 2) ** 2
        errs.append(abs(parts - whole) / whole)
    worst = max(errs)
    return {"d": d, "count": count, "worst": worst, "tolerance": tolerance,
            "verdict": worst <= tolerance}


NIKOLSKY_PAIRS = ((1.0, math.inf), (1.0, 2.0), (2.0, math.inf))


def verify_nikolsky(d: int, pairs=NIKOLSKY_PAIRS, count: int = 100, seed: int = 0,
                    N: int | None = None) -> dict:
    """Different-metric inequality with constant ``2**d`` on random band-limited fields.

    Bands are integer half-widths ``nu_j`` drawn per field.
    """
    N = (512 if d == 1 else 64) if N is None else N
    grid = make_grid(d, 4.0, N)
    rng = np.random.default_rng(seed)
    top = max(1, int(grid.nyquist) // 2)
    out = {}
    for p, q in pairs:
        worst, fails = 0.0, 0
        for _ in range(count):
            band = rng.integers(1, top + 1, size=d).astype(float)
            g = band_limited_noise(grid, band, rng)
            res = check_nikolsky(g, band, p, q)
            worst = max(worst, res.slack)
            fails += not res.passed
        out[f"{_pstr(p)},{_pstr(q)}"] = {"worst_slack": worst, "failures": fails}
    return {"d": d, "count": count, "pairs": out,
            "verdict": all(v["failures"] == 0 for v in out.values())}


def verify_equiv(p: float = 2.0, levels=range(1, 11), sigma: float = 2.0**-12,
                 spread_bound: float = 10.0) -> RateReport:
    """Sharp versus smooth block norms of a narrow Gaussian in one dimension.

    The width keeps the spectrum within a factor ``e**-2`` of flat across all
    tested levels; a spectrum collapsing inside the range would make the
    smooth block (which reaches one octave lower) dominate the sharp one.
    """
    levels = list(levels)
    top = max(max(levels) + 1, math.ceil(math.log2(2.0 / sigma)))
    grid = grid_for_level(1, 1.0, top)
    return check_norm_equivalence(gaussian_field(grid, sigma), p, levels, spread_bound)


# ---------------------------------------------------------------- sweeps

@dataclass(frozen=True)
class LayerProfile:
    """Class-independent measurements of the un-normalized layer sum at level ``n``.

    Normalization onto any class ball is division by a Besov norm, so one
    profile serves every ``theta`` and every ``r`` sharing ``nu`` and ``gamma``.
    """

    n: int
    grid: GridSpec
    block_l1: dict
    sup: float
    budget: Fraction
    budgeted_error: float
    cross_error: float
    chosen: str
    cross_level: int | None
    hyperbolic_level: int
    hyperbolic_measure: int
    hyperbolic_error: float

    def besov(self, params: BesovParams) -> float:
        return besov_from_block_norms(self.block_l1, params)


@functools.lru_cache(maxsize=64)
def layer_profile(n: int, grid: GridSpec, nu: int | None = None, gamma=None) -> LayerProfile:
    """Measure the layer sum over ``|s|_1 = n`` (first ``nu`` axes).

    The budget is ``M = mes(layer) / 4`` and the hyperbolic error is taken at
    the cross one level below the layer.
    """
    if n < 1:
        raise ValueError(f"layer level must be >= 1, got {n}")
    d = grid.d
    f = layer_field(n, grid, nu)
    norms = block_norms(f, 1.0)
    M = Fraction(layer(n, d, nu).total_measure, 4)
    res = error_budgeted(f, M, math.inf, "best", gamma)
    hyp = error_hyperbolic(f, n - 1, gamma)
    return LayerProfile(
        n=n, grid=grid, block_l1=norms, sup=lp_norm(f, math.inf), budget=M,
        budgeted_error=res.error_q, cross_error=res.details["cross_error"],
        chosen=res.details["chosen"], cross_level=res.details["cross_level"],
        hyperbolic_level=n - 1, hyperbolic_measure=cross_measure(n - 1, gamma, d),
        hyperbolic_error=hyp)


def _profiles(levels, d, N, L_max, nu, gamma, workers):
    def job(n):
        return layer_profile(n, sweep_grid(d, n + 1, N, L_max), nu, gamma)
    return _ordered_map(job, levels, workers)


def _check_r(r, d) -> SmoothnessVector:
    r = r if isinstance(r, SmoothnessVector) else SmoothnessVector.of(r, d)
    if r.d != d:
        raise ValueError(f"smoothness dimension {r.d} != {d}")
    if not r.r1 > 1:
        raise ValueError(f"rates need r_1 > 1, got {r.r1}")
    return r


def _levels(n_min, n_max):
    if n_min < 1 or n_max < n_min:
        raise ValueError(f"need 1 <= n_min <= n_max, got [{n_min}, {n_max}]")
    return list(range(n_min, n_max + 1))


def _log_exponent(theta):
    return 1.0 if math.isinf(theta) else 1.0 - 1.0 / theta


def _budget_law(M, r1, nu, theta):
    lm = math.log2(M)
    lg = lm ** (nu - 1)
    return (lg / M) ** (r1 - 1) * lg ** _log_exponent(theta)


def _budget_rows(profiles, params, nu):
    rows = []
    for pr in profiles:
        b = pr.besov(params)
        err = pr.budgeted_error / b
        M = float(pr.budget)
        pred = _budget_law(M, params.r.r1, nu, params.theta)
        rows.append({"n": pr.n, "M": str(pr.budget), "error": err, "compensated": err / pred,
                     "predicted": pred, "log2_M": math.log2(M), "besov": b,
                     "cross_error": pr.cross_error / b, "hyperbolic": pr.hyperbolic_error / b,
                     "chosen": pr.chosen, "L": pr.grid.L, "N": pr.grid.N})
    return rows


def rate_theorem1(r: float, theta: float, n_min: int = 4, n_max: int = 12, N: int | None = None,
                  L_max: float = SWEEP_BOX, workers: int | None = None) -> RateReport:
    """Budgeted error of the single-block witness against ``M**-(r-1)`` in one dimension.

    Row ``n`` uses the normalized level-``n`` block and the budget
    ``M = 2**max(1, n) / 4``, which brackets the block between consecutive
    layer measures.
    """
    rv = _check_r(r, 1)
    levels = _levels(n_min, n_max)
    params = BesovParams(1.0, theta, rv)
    rows = _budget_rows(_profiles(levels, 1, N, L_max, None, None, workers), params, 1)
    return RateReport.build(
        f"extremal-family rate, budgeted, d=1 r={rv.r1:g} theta={_pstr(theta)}",
        [row["log2_M"] for row in rows], [row["error"] for row in rows],
        [row["compensated"] for row in rows], predicted_slope=-(rv.r1 - 1),
        tolerance=SLOPE_TOLERANCE, spread_bound=SPREAD_BOUND, rows=rows,
        notes={"x": "log2 M", "levels": levels})


def theta_independence(r: float, thetas=(1.0, 2.0, math.inf), bound: float = 0.1, **kw) -> dict:
    """Fitted budgeted slopes for several ``theta``; they must agree within ``bound``."""
    reports = {_pstr(t): rate_theorem1(r, t, **kw) for t in thetas}
    slopes = {k: v.slope for k, v in reports.items()}
    gap = max(slopes.values()) - min(slopes.values())
    return {"slopes": slopes, "gap": gap, "bound": bound, "verdict": gap <= bound,
            "reports": reports}


def rate_theorem2(r, theta: float, d: int = 2, n_min: int = 4, n_max: int = 9, N: int | None = None,
                  L_max: float = SWEEP_BOX, workers: int | None = None) -> RateReport:
    """Budgeted error of the normalized layer family against
    ``(M**-1 log**(nu-1) M)**(r_1-1) (log**(nu-1) M)**(1-1/theta)``.
    """
    if d < 2:
        raise ValueError("use rate_theorem1 in one dimension")
    rv = _check_r(r, d)
    levels = _levels(n_min, n_max)
    params = BesovParams(1.0, theta, rv)
    profiles = _profiles(levels, d, N, L_max, rv.nu, rv.gamma, workers)
    rows = _budget_rows(profiles, params, rv.nu)
    xs = [row["log2_M"] for row in rows]
    pred_slope = fit_loglog(zip(xs, [row["predicted"] for row in rows]))[0] if len(rows) >= 3 else None
    return RateReport.build(
        f"extremal-family rate, budgeted, d={d} r={','.join(f'{v:g}' for v in rv.r)} "
        f"theta={_pstr(theta)}",
        xs, [row["error"] for row in rows], [row["compensated"] for row in rows],
        predicted_slope=pred_slope, spread_bound=SPREAD_BOUND, rows=rows,
        notes={"x": "log2 M", "levels": levels, "nu": rv.nu})


def rate_theoremV(r, theta: float, d: int, n_min: int = 4, n_max: int | None = None,
                  N: int | None = None, L_max: float = SWEEP_BOX, workers: int | None = None,
                  q: float = math.inf) -> RateReport:
    """Hyperbolic-cross error of the normalized witness family against
    ``2**(-n (r_1-1)) n**((nu-1)(1-1/theta))``.

    Row ``n`` truncates the level-``n`` layer witness to the cross of level
    ``n - 1``.  In one dimension the fitted slope is also checked.
    """
    if not math.isinf(q):
        raise ValueError("only the uniform norm (q = inf) is supported")
    rv = _check_r(r, d)
    n_max = (12 if d == 1 else 9) if n_max is None else n_max
    levels = _levels(n_min, n_max)
    params = BesovParams(1.0, theta, rv)
    profiles = _profiles(levels, d, N, L_max, rv.nu, rv.gamma, workers)
    e = (rv.nu - 1) * _log_exponent(theta)
    rows = []
    for pr in profiles:
        b = pr.besov(params)
        err = pr.hyperbolic_error / b
        pred = 2.0 ** (-pr.n * (rv.r1 - 1)) * pr.n**e
        rows.append({"n": pr.n, "M": str(pr.hyperbolic_measure), "error": err,
                     "compensated": err / pred, "predicted": pred, "besov": b,
                     "cross_level": pr.hyperbolic_level, "L": pr.grid.L, "N": pr.grid.N})
    xs = [row["n"] for row in rows]
    if d == 1:
        pred_slope, tol = -(rv.r1 - 1), SLOPE_TOLERANCE
    else:
        pred_slope = fit_loglog(zip(xs, [row["predicted"] for row in rows]))[0] if len(rows) >= 3 else None
        tol = None
    return RateReport.build(
        f"extremal-family rate, hyperbolic, d={d} r={','.join(f'{v:g}' for v in rv.r)} "
        f"theta={_pstr(theta)}",
        xs, [row["error"] for row in rows], [row["compensated"] for row in rows],
        predicted_slope=pred_slope, tolerance=tol, spread_bound=SPREAD_BOUND, rows=rows,
        notes={"x": "n", "levels": levels, "nu": rv.nu})


@dataclass
class StabilityReport:
    rows: list = field(default_factory=list)
    bound: float = STABILITY_BOUND
    worst: float = 0.0
    verdict: bool = True

    def summary(self) -> str:
        state = "PASS" if self.verdict else "FAIL"
        return f"[{state}] discretization stability: worst relative change {self.worst:.3e} (bound {self.bound})"


def stability_check(r, thetas, d: int, levels, N: int | None = None, L_max: float = SWEEP_BOX,
                    nu: int | None = None) -> StabilityReport:
    """Double ``N`` on each row's box and compare normalized errors."""
    rv = _check_r(r, d)
    nu = rv.nu if nu is None else nu
    rep = StabilityReport()
    for n in sorted(set(levels)):
        base = sweep_grid(d, n + 1, N, L_max)
        coarse = layer_profile(n, base, nu, rv.gamma)
        fine = layer_profile(n, base.refined(2), nu, rv.gamma)
        for theta in thetas:
            params = BesovParams(1.0, theta, rv)
            bc, bf = coarse.besov(params), fine.besov(params)
            for kind in ("budgeted_error", "hyperbolic_error"):
                a = getattr(coarse, kind) / bc
                b = getattr(fine, kind) / bf
                rel = abs(b - a) / abs(a)
                rep.rows.append({"n": n, "theta": _pstr(theta), "kind": kind, "coarse": a,
                                 "fine": b, "relative": rel})
                rep.worst = max(rep.worst, rel)
    rep.verdict = rep.worst <= rep.bound
    return rep
