"""Periodic spatial grids, space-time fields and their binary + JSON sidecar format."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import ConfigurationError


@dataclass(frozen=True)
class GridSpec:
    """Torus [-L, L)^d sampled with M points per axis; x_j = -L + j h."""

    d: int
    L: float
    M: int

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ConfigurationError("grid dimension must be 1, 2 or 3")
        if self.M < 16 or self.M & (self.M - 1):
            raise ConfigurationError("M must be a power of two and at least 16")
        if not self.L > 0:
            raise ConfigurationError("half-extent L must be positive")

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        d, L, M = text.split(",")
        return cls(int(d), float(L), int(M))

    @property
    def h(self) -> float:
        return 2 * self.L / self.M

    @property
    def cell_volume(self) -> float:
        return self.h**self.d

    @property
    def shape(self) -> tuple:
        return (self.M,) * self.d

    @cached_property
    def axis(self) -> np.ndarray:
        return -self.L + self.h * np.arange(self.M)

    @cached_property
    def freq_axis(self) -> np.ndarray:
        # unshifted FFT order; spacing pi / L
        return 2 * np.pi * np.fft.fftfreq(self.M, d=self.h)

    def points(self) -> np.ndarray:
        """(M,)*d + (d,) array of grid coordinates (shared, do not modify)."""
        return self._points

    @cached_property
    def _points(self):
        return np.stack(np.meshgrid(*([self.axis] * self.d), indexing="ij"), axis=-1)

    def frequencies(self) -> np.ndarray:
        """(M,)*d + (d,) array of frequencies in FFT order (shared, do not modify)."""
        return self._freqs

    @cached_property
    def _freqs(self):
        return np.stack(np.meshgrid(*([self.freq_axis] * self.d), indexing="ij"), axis=-1)

    @property
    def nyquist(self) -> float:
        return np.pi / self.h

    def fft(self, values: np.ndarray) -> np.ndarray:
        """sum u(x) e^{-i xi x}, phase-corrected to x_0 = -L; multiply by cell_volume for the continuous transform."""
        axes = tuple(range(-self.d, 0))
        return np.fft.fftn(values, axes=axes) * self._phase()

    def ifft(self, spectrum: np.ndarray) -> np.ndarray:
        axes = tuple(range(-self.d, 0))
        return np.fft.ifftn(spectrum / self._phase(), axes=axes)

    @cached_property
    def _phase_cache(self):
        k = self.freq_axis
        p1 = np.exp(1j * k * self.L)  # e^{-i xi x_0}
        out = p1
        for _ in range(self.d - 1):
            out = np.multiply.outer(out, p1)
        return out

    def _phase(self):
        return self._phase_cache

    def multiplier_to_kernel(self, mult: np.ndarray) -> np.ndarray:
        """Inverse continuous Fourier transform of a multiplier sampled in FFT order."""
        return self.ifft(mult) / self.cell_volume

    def meta(self) -> dict:
        return {"d": self.d, "L": self.L, "M": self.M}


@dataclass
class SpaceTimeField:
    """Values on the uniform time mesh t_k = k T / K (k = 0..K) times a GridSpec."""

    grid: GridSpec
    T: float
    values: np.ndarray  # shape (K+1,) + grid.shape
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.shape[1:] != self.grid.shape or self.values.shape[0] < 2:
            raise ConfigurationError(
                f"field shape {self.values.shape} does not match K+1 levels over grid {self.grid.shape}"
            )
        if not self.T > 0:
            raise ConfigurationError("T must be positive")
        if not np.all(np.isfinite(self.values)):
            raise ConfigurationError("field values must be finite")

    @property
    def K(self) -> int:
        return self.values.shape[0] - 1

    @property
    def dt(self) -> float:
        return self.T / self.K

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.K + 1)

    @classmethod
    def from_function(cls, grid: GridSpec, T: float, K: int, fn) -> "SpaceTimeField":
        """fn(t, x) with x of shape grid.shape + (d,)."""
        x = grid.points()
        t = np.linspace(0.0, T, K + 1)
        return cls(grid, T, np.stack([np.asarray(fn(tk, x)) * np.ones(grid.shape) for tk in t]))

    @classmethod
    def zeros(cls, grid: GridSpec, T: float, K: int) -> "SpaceTimeField":
        return cls(grid, T, np.zeros((K + 1,) + grid.shape))

    def with_values(self, values) -> "SpaceTimeField":
        return SpaceTimeField(self.grid, self.T, values)

    def __add__(self, other):
        return self.with_values(self.values + other.values)

    def __sub__(self, other):
        return self.with_values(self.values - other.values)

    def __rmul__(self, c):
        return self.with_values(c * self.values)

    __mul__ = __rmul__


# -- binary + sidecar I/O -------------------------------------------------------------

def save_array(path, values: np.ndarray, meta: dict) -> None:
    """Row-major float64 dump (complex stored as interleaved re/im) plus ``<path>.json``."""
    path = Path(path)
    values = np.ascontiguousarray(values)
    is_complex = np.iscomplexobj(values)
    raw = values.astype(np.complex128).view(np.float64) if is_complex else values.astype(np.float64)
    raw.tofile(path)
    side = dict(meta, shape=list(values.shape), dtype="complex128" if is_complex else "float64", order="C")
    path.with_suffix(path.suffix + ".json").write_text(json.dumps(side, indent=2, sort_keys=True))


def load_array(path) -> tuple[np.ndarray, dict]:
    path = Path(path)
    meta = json.loads(path.with_suffix(path.suffix + ".json").read_text())
    raw = np.fromfile(path, dtype=np.float64)
    shape = tuple(meta["shape"])
    if meta.get("dtype") == "complex128":
        return raw.view(np.complex128).reshape(shape), meta
    return raw.reshape(shape), meta


def save_field(path, field: SpaceTimeField, **extra) -> None:
    save_array(path, field.values, dict(extra, grid=field.grid.meta(), T=field.T, K=field.K))


def load_field(path) -> SpaceTimeField:
    values, meta = load_array(path)
    g = meta["grid"]
    return SpaceTimeField(GridSpec(g["d"], g["L"], g["M"]), meta["T"], values)
