"""Uniform-grid sampling of functions on a truncated box of R^d.

A :class:`GridSpec` fixes the box ``[-L, L)^d`` with ``N`` samples per axis.
Fields are sampled at ``x_k = -L + k h`` (the origin is the sample ``k = N/2``),
and spectra live on ``lam_m = m * dlam``, ``m = -N/2, ..., N/2 - 1`` in natural
(negative-to-positive) order.  The continuous pair

    F(lam) = int f(x) exp(-2 pi i lam x) dx,   f(x) = int F(lam) exp(2 pi i lam x) dlam

is discretized by rectangle sums scaled by ``h**d`` and ``dlam**d``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.fft as sfft


class NyquistError(ValueError):
    """A dyadic band does not fit under the grid's Nyquist frequency."""


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid on ``[-L, L)^d`` with ``N`` samples per axis."""

    d: int
    L: float
    N: int

    def __post_init__(self):
        if not isinstance(self.d, (int, np.integer)) or not 1 <= self.d <= 3:
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.d!r}")
        if not self.L > 0 or not np.isfinite(self.L):
            raise ValueError(f"box half-width must be positive, got {self.L!r}")
        n = int(self.N)
        if n != self.N or n < 16 or n & (n - 1):
            raise ValueError(f"samples per axis must be a power of two >= 16, got {self.N!r}")
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "L", float(self.L))
        object.__setattr__(self, "N", n)

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.N

    @property
    def dlam(self) -> float:
        return 1.0 / (2.0 * self.L)

    @property
    def nyquist(self) -> float:
        return self.N / (4.0 * self.L)

    @property
    def level_cap(self) -> int:
        """Largest dyadic level ``s`` with ``2**s <= nyquist``."""
        return int(np.floor(np.log2(self.nyquist) + 1e-12))

    @property
    def shape(self) -> tuple:
        return (self.N,) * self.d

    def axis_points(self) -> np.ndarray:
        return -self.L + self.h * np.arange(self.N)

    def axis_frequencies(self) -> np.ndarray:
        return self.dlam * np.arange(-self.N // 2, self.N // 2)

    def refined(self, factor: int = 2) -> "GridSpec":
        """Same box, ``factor`` times more samples per axis."""
        return GridSpec(self.d, self.L, self.N * factor)

    def check_level(self, s) -> None:
        """Raise :class:`NyquistError` unless every ``2**s_j`` fits under Nyquist."""
        top = max(s) if len(s) else 0
        if top > self.level_cap:
            raise NyquistError(
                f"block {tuple(s)} needs band 2**{top} but Nyquist is {self.nyquist:g} "
                f"(level cap {self.level_cap}); increase N or decrease L"
            )


def make_grid(d: int, L: float, N: int) -> GridSpec:
    return GridSpec(d, L, N)


def grid_for_level(d: int, L: float, level: int, oversample: int = 1) -> GridSpec:
    """Smallest power-of-two grid whose level cap is at least ``level``."""
    need = oversample * 2.0**level * 4.0 * L
    N = 16
    while N < need - 1e-9:
        N *= 2
    return GridSpec(d, L, N)


@functools.lru_cache(maxsize=32)
def axis_levels(grid: GridSpec) -> np.ndarray:
    """Sharp dyadic level of each frequency bin along one axis.

    Bin ``lam`` has level 0 when ``|lam| < 1`` and level ``s >= 1`` when
    ``2**(s-1) <= |lam| < 2**s``.  The lower edge belongs to the block.
    """
    a = np.abs(grid.axis_frequencies())
    _, exp = np.frexp(a)
    lev = np.where(a < 1.0, 0, exp).astype(np.int64)
    lev.flags.writeable = False
    return lev


def outer(factors) -> np.ndarray:
    """Tensor product of 1-D arrays, first factor along axis 0."""
    out = np.asarray(factors[0])
    for f in factors[1:]:
        out = np.multiply.outer(out, f)
    return out


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Transform coefficients on the frequency lattice, natural order."""

    grid: GridSpec
    coefficients: np.ndarray
    real: bool = False

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex)
        if c.shape != self.grid.shape:
            raise ValueError(f"coefficient shape {c.shape} != grid shape {self.grid.shape}")
        object.__setattr__(self, "coefficients", c)


@dataclass(frozen=True, eq=False)
class SampledField:
    """Samples of a function on a :class:`GridSpec`, row-major by axis."""

    grid: GridSpec
    values: np.ndarray
    _spectrum: Spectrum | None = field(default=None, repr=False)

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.shape != self.grid.shape:
            raise ValueError(f"value shape {v.shape} != grid shape {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        v = v.astype(float if np.isrealobj(v) else complex, copy=False)
        object.__setattr__(self, "values", v)

    @property
    def real(self) -> bool:
        return np.isrealobj(self.values)

    @property
    def spectrum(self) -> Spectrum:
        if self._spectrum is None:
            object.__setattr__(self, "_spectrum", forward_transform(self))
        return self._spectrum

    def __add__(self, other: "SampledField") -> "SampledField":
        _same_grid(self.grid, other.grid)
        return SampledField(self.grid, self.values + other.values)

    def __sub__(self, other: "SampledField") -> "SampledField":
        _same_grid(self.grid, other.grid)
        return SampledField(self.grid, self.values - other.values)

    def scaled(self, c) -> "SampledField":
        spec = None
        if self._spectrum is not None:
            spec = Spectrum(self.grid, c * self._spectrum.coefficients,
                            self._spectrum.real and np.isrealobj(c))
        return SampledField(self.grid, c * self.values, spec)


def _same_grid(a: GridSpec, b: GridSpec) -> None:
    if a != b:
        raise ValueError(f"grid mismatch: {a} vs {b}")


def zeros(grid: GridSpec) -> SampledField:
    return SampledField(grid, np.zeros(grid.shape))


def sample_function(grid: GridSpec, func) -> SampledField:
    """Evaluate ``func(*coords)`` on the grid mesh (coords broadcast, ij indexing)."""
    axes = np.meshgrid(*([grid.axis_points()] * grid.d), indexing="ij", sparse=True)
    vals = np.broadcast_to(np.asarray(func(*axes)), grid.shape)
    return SampledField(grid, np.array(vals))


def forward_transform(f: SampledField) -> Spectrum:
    g = f.grid
    c = sfft.fftshift(sfft.fftn(sfft.ifftshift(f.values)))
    return Spectrum(g, c * g.h**g.d, real=f.real)


def inverse_transform(spec: Spectrum) -> SampledField:
    """Field with the given spectrum; real output when the spectrum is tagged real."""
    g = spec.grid
    scale = (g.N * g.dlam) ** g.d
    c = spec.coefficients
    if spec.real:
        # natural order -> standard order on leading axes, half spectrum on the last
        std = sfft.ifftshift(c, axes=tuple(range(g.d - 1))) if g.d > 1 else c
        half = std[..., g.N // 2:]
        half = np.concatenate([half, std[..., :1]], axis=-1)
        vals = sfft.irfftn(half, s=g.shape) * scale
    else:
        vals = sfft.ifftn(sfft.ifftshift(c)) * scale
    vals = sfft.fftshift(vals)
    return SampledField(g, vals, spec)


def filtered(f: SampledField, weights: np.ndarray) -> SampledField:
    """Multiply the spectrum of ``f`` by real ``weights`` and transform back."""
    spec = f.spectrum
    out = Spectrum(f.grid, spec.coefficients * weights, real=spec.real)
    return inverse_transform(out)


def from_spectrum(grid: GridSpec, coefficients: np.ndarray, real: bool = True) -> SampledField:
    return inverse_transform(Spectrum(grid, coefficients, real=real))


def lp_norm(f: SampledField, p: float) -> float:
    """Rectangle-rule ``L_p`` norm over the box; ``p = inf`` is the grid maximum."""
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p!r}")
    a = np.abs(f.values)
    if np.isinf(p):
        return float(a.max())
    w = f.grid.h**f.grid.d
    if p == 1:
        return float(a.sum() * w)
    if p == 2:
        return float(np.sqrt(np.vdot(a, a).real * w))
    m = a.max()
    if m == 0:
        return 0.0
    return float(m * ((a / m) ** p).sum() ** (1.0 / p) * w ** (1.0 / p))


def spectral_l2(spec: Spectrum) -> float:
    """``(dlam**d sum |F|**2)**(1/2)``, the Parseval counterpart of ``lp_norm(f, 2)``."""
    c = spec.coefficients
    return float(np.sqrt(np.vdot(c, c).real * spec.grid.dlam**spec.grid.d))


def band_limited_noise(grid: GridSpec, band, rng: np.random.Generator,
                       real: bool = True) -> SampledField:
    """Random field whose spectrum is supported in ``prod_j [-band_j, band_j]``.

    The Nyquist bin is always left empty.
    """
    band = np.broadcast_to(np.asarray(band, dtype=float), (grid.d,))
    lam = np.abs(grid.axis_frequencies())
    masks = [(lam <= b) & (lam < grid.nyquist) for b in band]
    mask = outer([m.astype(float) for m in masks])
    c = (rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)) * mask
    if real:
        # Hermitian part: F(lam) + conj(F(-lam)); reversal maps m -> -m except at -N/2
        flip = c
        for ax in range(grid.d):
            flip = np.roll(np.flip(flip, axis=ax), 1, axis=ax)
        c = 0.5 * (c + np.conj(flip))
    return from_spectrum(grid, c, real=real)


def dump_field(fh, f: SampledField) -> None:
    """Write ``d N L kind`` then one sample per line (two numbers when complex)."""
    g = f.grid
    kind = "real" if f.real else "complex"
    flat = f.values.reshape(-1)
    fh.write(f"{g.d} {g.N} {g.L!r} {kind}\n")
    if f.real:
        fh.writelines(f"{v!r}\n" for v in flat.tolist())
    else:
        fh.writelines(f"{v.real!r} {v.imag!r}\n" for v in flat.tolist())


def write_field(path, f: SampledField) -> None:
    with open(path, "w") as fh:
        dump_field(fh, f)


def read_field(path) -> SampledField:
    text = Path(path).read_text().split("\n", 1)
    head = text[0].split()
    if len(head) != 4 or head[3] not in ("real", "complex"):
        raise ValueError(f"{path}: bad header {text[0]!r}, expected 'd N L kind'")
    d, N, L, kind = int(head[0]), int(head[1]), float(head[2]), head[3]
    grid = GridSpec(d, L, N)
    data = np.array((text[1] if len(text) > 1 else "").split(), dtype=float)
    per = 1 if kind == "real" else 2
    if data.size != per * N**d:
        raise ValueError(f"{path}: expected {per * N**d} numbers, found {data.size}")
    if kind == "complex":
        data = data[0::2] + 1j * data[1::2]
    return SampledField(grid, data.reshape(grid.shape))
