"""Trapezoid spectral multipliers and their time-domain kernels.

Level ``m >= 1`` multiplier::

    k_m(lam) = 1                   |lam| < 2**(m-1)
             = 2 (1 - |lam|/2**m)  2**(m-1) <= |lam| <= 2**m
             = 0                   |lam| > 2**m

and ``k_0(lam) = (1 - |lam|)_+``.  Level -1 is identically zero.

With the transform convention ``K(t) = int k(lam) exp(-2 pi i lam t) dlam``
the triangle ``(1 - |lam|/a)_+`` maps to ``a sinc(a t)**2`` (normalized sinc),
and every trapezoid is a difference of two triangles::

    k_m = 2 tri(2**m) - tri(2**(m-1)),  m >= 1

so ``K_m(t) = 2**(m+1) sinc(2**m t)**2 - 2**(m-1) sinc(2**(m-1) t)**2``.
"""

from __future__ import annotations

import numpy as np

# below this |u| (u = pi * a * t) sinc^2 is taken from its Taylor series
_SERIES_THRESHOLD = 1e-6


def trapezoid_weight(m: int, lam) -> np.ndarray:
    """Evaluate the level-``m`` trapezoid multiplier at frequencies ``lam``.

    Parameters
    ----------
    m : int
        Dyadic level, ``m >= -1``; level -1 returns zeros.
    lam : array_like
        Real frequencies.

    Returns
    -------
    ndarray
        Values in [0, 1], same shape as ``lam``.
    """
    if m < -1:
        raise ValueError(f"level must be >= -1, got {m}")
    a = np.abs(np.asarray(lam, dtype=float))
    if m == -1:
        return np.zeros_like(a)
    if m == 0:
        return np.clip(1.0 - a, 0.0, None)
    top = float(2**m)
    return np.clip(2.0 * (1.0 - a / top), 0.0, 1.0)


def axis_block_weight(s: int, lam) -> np.ndarray:
    """One-axis factor ``k_s - k_{s-1}`` of a block multiplier."""
    return trapezoid_weight(s, lam) - trapezoid_weight(s - 1, lam)


def block_multiplier_weight(s, lam) -> np.ndarray:
    """Tensor-product block multiplier ``prod_j (k_{s_j} - k_{s_j-1})(lam_j)``.

    ``lam`` has trailing axis of length ``len(s)``; a flat sequence is one point.
    """
    s = tuple(int(v) for v in s)
    if any(v < 0 for v in s):
        raise ValueError(f"multi-index must be nonnegative, got {s}")
    lam = np.asarray(lam, dtype=float)
    if lam.ndim == 0:
        lam = lam.reshape(1)
    if lam.shape[-1] != len(s):
        raise ValueError(f"frequency dimension {lam.shape[-1]} != index dimension {len(s)}")
    out = np.ones(lam.shape[:-1])
    for j, sj in enumerate(s):
        out = out * axis_block_weight(sj, lam[..., j])
    return out


def _sinc_sq(a: float, t: np.ndarray) -> np.ndarray:
    # sinc(a t)^2 with the removable singularity handled by series
    u = np.pi * a * t
    small = np.abs(u) < _SERIES_THRESHOLD
    safe = np.where(small, 1.0, u)
    out = (np.sin(safe) / safe) ** 2
    u2 = u * u
    return np.where(small, 1.0 - u2 / 3.0 + 2.0 * u2 * u2 / 45.0, out)


def kernel_time_value(m: int, t) -> np.ndarray:
    """Inverse transform ``K_m(t)`` of the level-``m`` trapezoid, in closed form."""
    if m < -1:
        raise ValueError(f"level must be >= -1, got {m}")
    t = np.asarray(t, dtype=float)
    if m == -1:
        return np.zeros_like(t)
    if m == 0:
        return _sinc_sq(1.0, t)
    hi = float(2**m)
    lo = float(2 ** (m - 1))
    return 2.0 * hi * _sinc_sq(hi, t) - lo * _sinc_sq(lo, t)


def axis_block_kernel(s: int, t) -> np.ndarray:
    """One-axis block kernel ``K_s(t) - K_{s-1}(t)``."""
    return kernel_time_value(s, t) - kernel_time_value(s - 1, t)


def block_kernel_value(s, x) -> np.ndarray:
    """Tensor-product block kernel ``prod_j (K_{s_j} - K_{s_j-1})(x_j)``."""
    s = tuple(int(v) for v in s)
    if any(v < 0 for v in s):
        raise ValueError(f"multi-index must be nonnegative, got {s}")
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x.reshape(1)
    if x.shape[-1] != len(s):
        raise ValueError(f"point dimension {x.shape[-1]} != index dimension {len(s)}")
    out = np.ones(x.shape[:-1])
    for j, sj in enumerate(s):
        out = out * axis_block_kernel(sj, x[..., j])
    return out


def kernel_peak(s) -> float:
    """Exact value of the block kernel at the origin, where it attains its maximum."""
    out = 1.0
    for sj in s:
        # K_m(0) = 3 * 2**(m-1) for m >= 1, K_0(0) = 1
        hi = 1.0 if sj == 0 else 3.0 * 2.0 ** (sj - 1)
        lo = 0.0 if sj == 0 else (1.0 if sj == 1 else 3.0 * 2.0 ** (sj - 2))
        out *= hi - lo
    return out
