"""Radial initial data with closed-form Fourier transforms and moments.

Every catalog datum is a finite Gaussian mixture in physical space,

    u(x) = Σ_i c_i exp(-a_i |x|²),

so its transform (no 2π in the forward direction) is

    û(r) = Σ_i w_i exp(-r² / (4 a_i)),     w_i = c_i (π / a_i)^{n/2}.

Moments are computed once from the components. ``l1``/``l11`` are exact
when all components share a sign and certified upper bounds otherwise.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma

from .errors import DegenerateDatum, InvalidParameter, UndefinedRatio

__all__ = [
    "RadialSpectralDatum",
    "DataPair",
    "gaussian_datum",
    "zero_mean_datum",
    "zero_datum",
    "moment_bound_ratio",
    "sphere_area",
    "parse_data_key",
    "CATALOG_KEYS",
]

CATALOG_KEYS = ("gaussian:A,a", "zeromean:a,b")


def sphere_area(n: int) -> float:
    """ω_n, the surface area of the unit sphere in R^n."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def _check_dim(n):
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidParameter(f"dimension must be an integer >= 1, got {n!r}")
    return int(n)


@dataclass(frozen=True)
class RadialSpectralDatum:
    """Radial datum described by its Gaussian components.

    ``weights`` are the Fourier-side amplitudes ``w_i = û``-contribution at
    r = 0 and ``widths`` the physical-space exponents ``a_i``.
    """

    weights: tuple[float, ...]
    widths: tuple[float, ...]
    dim: int
    p1: float = field(init=False)
    l1: float = field(init=False)
    l11: float = field(init=False)
    l2: float = field(init=False)
    exact_l1: bool = field(init=False)

    def __post_init__(self):
        dim = _check_dim(self.dim)
        if len(self.weights) != len(self.widths):
            raise InvalidParameter("weights and widths differ in length")
        if any(not a > 0 for a in self.widths):
            raise InvalidParameter("Gaussian widths must be positive")
        w = np.array(self.weights, dtype=float)
        a = np.array(self.widths, dtype=float)
        c = w * (a / math.pi) ** (dim / 2.0)  # physical amplitudes

        l1_parts = np.abs(w)
        om = sphere_area(dim)
        first_moment = np.abs(c) * om * gamma((dim + 1) / 2.0) / (2.0 * a ** ((dim + 1) / 2.0))
        if len(w):
            # ‖u‖² = Σ_ij c_i c_j (π/(a_i + a_j))^{n/2}
            l2sq = float(np.sum(np.outer(c, c) * (math.pi / np.add.outer(a, a)) ** (dim / 2.0)))
        else:
            l2sq = 0.0
        nonzero = c[c != 0]
        same_sign = bool(np.all(nonzero > 0) or np.all(nonzero < 0))
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "p1", math.fsum(float(x) for x in w))
        object.__setattr__(self, "l1", float(np.sum(l1_parts)))
        object.__setattr__(self, "l11", float(np.sum(l1_parts) + np.sum(first_moment)))
        object.__setattr__(self, "l2", math.sqrt(max(l2sq, 0.0)))
        object.__setattr__(self, "exact_l1", same_sign)

    def hat(self, r):
        """Radial Fourier transform û(r).

        Near r = 0 this is ``P1 + Σ w_i expm1(-r²/4a_i)`` so a zero-mean mixture
        keeps full relative precision. Once every exponent exceeds 1/2 the plain
        sum ``Σ w_i e^{-r²/4a_i}`` is used, since the first form cancels there.
        """
        r = np.asarray(r, dtype=float)
        q = r * r / 4.0
        small = np.full_like(r, self.p1)
        large = np.zeros_like(r)
        for w, a in zip(self.weights, self.widths):
            small = small + w * np.expm1(-q / a)
            large = large + w * np.exp(-q / a)
        near = q < 0.5 * max(self.widths, default=1.0)
        out = np.where(near, small, large)
        return out[()] if out.ndim == 0 else out

    def decay_radius(self, eps: float = 1e-16) -> float:
        """Radius beyond which ``|û(r)|² < eps · (Σ|w_i|)²``."""
        if not self.widths:
            return 0.0
        return max(math.sqrt(4.0 * a * math.log(1.0 / eps) / 2.0) for a in self.widths)

    def __add__(self, other: "RadialSpectralDatum") -> "RadialSpectralDatum":
        if not isinstance(other, RadialSpectralDatum):
            return NotImplemented
        if other.dim != self.dim:
            raise InvalidParameter("cannot add data of different dimension")
        return RadialSpectralDatum(self.weights + other.weights, self.widths + other.widths, self.dim)

    def __mul__(self, alpha: float) -> "RadialSpectralDatum":
        alpha = float(alpha)
        return RadialSpectralDatum(tuple(alpha * w for w in self.weights), self.widths, self.dim)

    __rmul__ = __mul__


@dataclass(frozen=True)
class DataPair:
    u0: RadialSpectralDatum
    u1: RadialSpectralDatum

    def __post_init__(self):
        if self.u0.dim != self.u1.dim:
            raise InvalidParameter(f"u0 has dim {self.u0.dim} but u1 has dim {self.u1.dim}")

    @property
    def dim(self) -> int:
        return self.u0.dim

    @property
    def p1(self) -> float:
        return self.u1.p1

    def scaled(self, alpha: float) -> "DataPair":
        return DataPair(self.u0 * alpha, self.u1 * alpha)


def gaussian_datum(amplitude: float, a: float, dim: int) -> RadialSpectralDatum:
    """``u(x) = A exp(-a|x|²)``, so ``û(r) = A (π/a)^{n/2} exp(-r²/(4a))``."""
    if not a > 0:
        raise InvalidParameter(f"Gaussian width must be positive, got {a!r}")
    dim = _check_dim(dim)
    if amplitude == 0:
        return zero_datum(dim)
    w = amplitude * (math.pi / a) ** (dim / 2.0)
    return RadialSpectralDatum((w,), (float(a),), dim)


def zero_datum(dim: int) -> RadialSpectralDatum:
    return RadialSpectralDatum((), (), _check_dim(dim))


def zero_mean_datum(a: float, b: float, dim: int) -> RadialSpectralDatum:
    """Difference of two unit-mass Gaussians; ``û(r) = e^{-r²/4a} - e^{-r²/4b}``."""
    if not (a > 0 and b > 0):
        raise InvalidParameter("Gaussian widths must be positive")
    if a == b:
        raise DegenerateDatum("zero-mean datum with a == b is identically zero")
    return RadialSpectralDatum((1.0, -1.0), (float(a), float(b)), _check_dim(dim))


def moment_bound_ratio(datum: RadialSpectralDatum, r_grid) -> float:
    """Empirical constant M in ``|û(r) - P1| <= M ‖u‖_{1,1} r`` over a grid."""
    if datum.l11 == 0:
        raise UndefinedRatio("moment bound ratio is undefined for l11 = 0")
    r = np.asarray(r_grid, dtype=float)
    r = r[r > 0]
    if r.size == 0:
        raise InvalidParameter("r_grid must contain positive radii")
    return float(np.max(np.abs(datum.hat(r) - datum.p1) / (r * datum.l11)))


_KEY = re.compile(r"^\s*(gaussian|zeromean)\s*:\s*([^,\s]+)\s*,\s*([^,\s]+)\s*$")


def parse_data_key(key: str, dim: int) -> RadialSpectralDatum:
    """Build a catalog datum from ``"gaussian:A,a"`` or ``"zeromean:a,b"``."""
    m = _KEY.match(key)
    if not m:
        raise InvalidParameter(f"unknown data key {key!r}; catalog: {', '.join(CATALOG_KEYS)}")
    kind, x, y = m.group(1), m.group(2), m.group(3)
    try:
        x, y = float(x), float(y)
    except ValueError:
        raise InvalidParameter(f"non-numeric parameters in data key {key!r}") from None
    if kind == "gaussian":
        return gaussian_datum(x, y, dim)
    return zero_mean_datum(x, y, dim)
