"""Lower-bound witness functions and their normalization onto the unit ball.

All kernels here are built by spectral synthesis: the block multiplier is
sampled on the frequency lattice and transformed back.  The resulting samples
are those of the ``2L``-periodization of the closed-form kernel, which is
exactly band-limited on the grid (so sharp truncations act exactly) and
agrees with :func:`besovcross.kernels.block_kernel_value` up to the aliased
tail, of order ``1 / (2**s L)`` per axis.
"""

from __future__ import annotations

import math

import numpy as np

from .decomposition import BesovParams, SmoothnessVector, besov_norm, block_weights
from .index_sets import layer
from .kernels import block_kernel_value
from .sampling import GridSpec, SampledField, from_spectrum, sample_function


def block_kernel_field(s, grid: GridSpec, method: str = "spectral") -> SampledField:
    """Block kernel ``A_s`` on the grid, synthesized (default) or sampled in closed form."""
    s = tuple(int(v) for v in s)
    if len(s) != grid.d:
        raise ValueError(f"multi-index {s} does not match grid dimension {grid.d}")
    grid.check_level(s)
    if method == "spectral":
        return from_spectrum(grid, block_weights(grid, s), real=True)
    if method == "closed":
        return sample_function(grid, lambda *x: block_kernel_value(s, np.stack(np.broadcast_arrays(*x), -1)))
    raise ValueError(f"unknown method {method!r}")


def layer_field(n: int, grid: GridSpec, nu: int | None = None) -> SampledField:
    """Un-normalized ``sum_{s in Theta(n)} A_s`` (layer over the first ``nu`` axes)."""
    blocks = layer(n, grid.d, nu)
    coeffs = np.zeros(grid.shape)
    for s in blocks:
        grid.check_level(s)
        coeffs += block_weights(grid, s)
    return from_spectrum(grid, coeffs, real=True)


def normalize_to_class(f: SampledField, params: BesovParams) -> SampledField:
    """``f / besov_norm(f, params)``, a point on the unit sphere of the class."""
    norm = besov_norm(f, params)
    if not norm > 0:
        raise ValueError("cannot normalize a field with zero class norm")
    return f.scaled(1.0 / norm)


def extremal_f1(n: int, r: float, grid: GridSpec, theta: float = 1.0,
                normalize: bool = True) -> SampledField:
    """Single level-``n`` block ``2**(-n r) A_n`` in one dimension."""
    if grid.d != 1:
        raise ValueError("the single-block witness is one-dimensional")
    r = SmoothnessVector.of(r, 1)
    f = block_kernel_field((n,), grid).scaled(2.0 ** (-n * r.r1))
    return normalize_to_class(f, BesovParams(1.0, theta, r)) if normalize else f


def _layer_witness(n, r, grid, theta, normalize):
    if grid.d < 2:
        raise ValueError("layer witnesses need d >= 2; use extremal_f1 in one dimension")
    r = r if isinstance(r, SmoothnessVector) else SmoothnessVector.of(r, grid.d)
    if r.d != grid.d:
        raise ValueError(f"smoothness dimension {r.d} != grid dimension {grid.d}")
    log_factor = 1.0 if (n == 0 or math.isinf(theta)) else n ** (-(grid.d - 1) / theta)
    f = layer_field(n, grid, r.nu).scaled(2.0 ** (-n * r.r1) * log_factor)
    return normalize_to_class(f, BesovParams(1.0, theta, r)) if normalize else f


def extremal_f2(n: int, r, theta: float, grid: GridSpec, normalize: bool = True) -> SampledField:
    """Layer sum ``2**(-n r_1) n**(-(d-1)/theta) sum_{Theta(n)} A_s`` for finite ``theta``."""
    if math.isinf(theta):
        raise ValueError("theta must be finite for f2; use extremal_f3 for theta = inf")
    return _layer_witness(n, r, grid, theta, normalize)


def extremal_f3(n: int, r, grid: GridSpec, normalize: bool = True) -> SampledField:
    """Layer sum ``2**(-n r_1) sum_{Theta(n)} A_s``, normalized in the sup-form norm."""
    return _layer_witness(n, r, grid, math.inf, normalize)
