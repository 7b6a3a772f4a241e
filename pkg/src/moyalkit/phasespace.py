"""Wavefunctions on a periodic grid and their phase-space images.

Conventions (hbar kept explicit)::

    F(x, p) = 1/(2 pi hbar) sum_tau psi*(x - tau/2) psi(x + tau/2) e^{-i p tau/hbar} dtau

with ``tau`` restricted to even multiples of ``dx`` so both arguments land on
grid nodes.  Momentum nodes are ``p_k = (k - n/2) pi hbar / L``; the
momentum window therefore reaches half the usual grid Nyquist.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np

from . import _kernels
from ._transforms import p_to_tau, symbol_to_kernel, tau_to_p

__all__ = [
    "GridSpec", "WaveFunction", "PhaseSpaceField", "CharacteristicField",
    "DensityMatrixField", "NumericalConsistencyError", "DomainWarning",
    "GridMismatchError", "NotPureStateError",
    "wigner", "cross_wigner", "characteristic_function", "char_to_distribution",
    "marginals", "expectation", "negativity", "purity", "purity_check",
    "recover_wavefunction", "density_matrix", "density_from_wigner",
    "field_from_function", "field_from_symbol",
]

EDGE_TOL = 1e-12
AMPLITUDE_MASK = 1e-8


class NumericalConsistencyError(RuntimeError):
    """A quantity that must be real/normalised came out otherwise."""


class GridMismatchError(ValueError):
    pass


class NotPureStateError(ValueError):
    pass


class DomainWarning(UserWarning):
    """The state does not decay inside the box."""


# ---------------------------------------------------------------------------
# Grid and containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    n: int = 256
    length: float = 20.0
    hbar: float = 1.0

    def __post_init__(self):
        n = self.n
        if not isinstance(n, (int, np.integer)) or n < 16 or n & (n - 1):
            raise ValueError(f"n must be a power of two >= 16, got {n!r}")
        if not (self.length > 0 and np.isfinite(self.length)):
            raise ValueError("length must be positive and finite")
        if not (self.hbar > 0 and np.isfinite(self.hbar)):
            raise ValueError("hbar must be positive and finite")
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "length", float(self.length))
        object.__setattr__(self, "hbar", float(self.hbar))

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def dp(self) -> float:
        return np.pi * self.hbar / self.length

    @cached_property
    def x(self) -> np.ndarray:
        return -0.5 * self.length + self.dx * np.arange(self.n)

    @cached_property
    def p(self) -> np.ndarray:
        return (np.arange(self.n) - self.n // 2) * self.dp

    @cached_property
    def tau(self) -> np.ndarray:
        return 2.0 * self.dx * (np.arange(self.n) - self.n // 2)

    @cached_property
    def theta(self) -> np.ndarray:
        """x-conjugate wavenumbers in FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx)

    @cached_property
    def theta_centered(self) -> np.ndarray:
        return 2.0 * np.pi * (np.arange(self.n) - self.n // 2) / self.length

    @cached_property
    def q(self) -> np.ndarray:
        """Full-band momenta of the position grid, FFT order (for wavefunctions)."""
        return self.hbar * self.theta

    def mesh(self):
        return np.meshgrid(self.x, self.p, indexing="ij")

    def as_dict(self) -> dict:
        return {"n": self.n, "L": self.length, "hbar": self.hbar}


def _same_grid(*grids):
    g0 = grids[0]
    for g in grids[1:]:
        if g != g0:
            raise GridMismatchError(f"grid mismatch: {g0} vs {g}")
    return g0


@dataclass(frozen=True)
class WaveFunction:
    grid: GridSpec
    values: np.ndarray
    time: float = 0.0
    label: str = ""

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} samples, got shape {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def normalized(cls, grid, values, time=0.0, label=""):
        v = np.asarray(values, dtype=complex)
        nrm = np.sqrt(np.sum(np.abs(v) ** 2) * grid.dx)
        if nrm == 0 or not np.isfinite(nrm):
            raise ValueError("cannot normalise a zero or non-finite wavefunction")
        return cls(grid, v / nrm, time, label)

    def norm(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2) * self.grid.dx)

    def inner(self, other: "WaveFunction") -> complex:
        """<self|other>."""
        _same_grid(self.grid, other.grid)
        return complex(np.vdot(self.values, other.values) * self.grid.dx)

    def check_decay(self, stacklevel=3) -> bool:
        v = np.abs(self.values)
        edge = max(v[0], v[-1])
        if edge > EDGE_TOL:
            warnings.warn(f"state amplitude {edge:.2e} at the box edge; domain may be too small",
                          DomainWarning, stacklevel=stacklevel)
            return False
        return True


@dataclass(frozen=True)
class PhaseSpaceField:
    """Samples on the (x_j, p_k) product grid.

    ``symbol`` optionally carries the exact polynomial this field samples;
    the star product uses it to avoid differentiating truncated polynomials.
    """

    grid: GridSpec
    values: np.ndarray
    time: float = 0.0
    symbol: Optional[object] = field(default=None, compare=False)
    label: str = ""

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.shape != (self.grid.n, self.grid.n):
            raise ValueError(f"expected {self.grid.n}x{self.grid.n} samples, got {v.shape}")
        if not np.iscomplexobj(v):
            v = v.astype(float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def _wrap(self, values, symbol=None):
        return PhaseSpaceField(self.grid, values, self.time, symbol)

    def __add__(self, other):
        if isinstance(other, PhaseSpaceField):
            _same_grid(self.grid, other.grid)
            sym = self.symbol + other.symbol if (self.symbol is not None and other.symbol is not None) else None
            return self._wrap(self.values + other.values, sym)
        return self._wrap(self.values + other)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1.0) * other

    def __rsub__(self, other):
        return (-1.0) * self + other

    def __mul__(self, c):
        if isinstance(c, PhaseSpaceField):
            raise TypeError("use star_numeric or .values for field products")
        sym = None
        if self.symbol is not None and isinstance(c, (int, float)) and float(c).is_integer():
            sym = self.symbol * int(c)
        return self._wrap(self.values * c, sym)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1

    def real(self) -> "PhaseSpaceField":
        return self._wrap(np.real(self.values), None)

    def mass(self) -> complex:
        g = self.grid
        return complex(np.sum(self.values) * g.dx * g.dp)

    def norm2(self) -> float:
        return float(np.linalg.norm(self.values))


@dataclass(frozen=True)
class CharacteristicField:
    """``M[m, l]`` sampled at ``(tau_m, theta_l)``, both centred."""

    grid: GridSpec
    values: np.ndarray

    @property
    def tau(self):
        return self.grid.tau

    @property
    def theta(self):
        return self.grid.theta_centered

    def at_origin(self) -> complex:
        h = self.grid.n // 2
        return complex(self.values[h, h])


@dataclass(frozen=True)
class DensityMatrixField:
    grid: GridSpec
    values: np.ndarray

    def trace(self) -> complex:
        return complex(np.trace(self.values) * self.grid.dx)

    def hermiticity_error(self) -> float:
        return float(np.abs(self.values - self.values.conj().T).max())


# ---------------------------------------------------------------------------
# Constructors of sampled fields
# ---------------------------------------------------------------------------

def field_from_function(grid: GridSpec, fn, time=0.0) -> PhaseSpaceField:
    X, P = grid.mesh()
    return PhaseSpaceField(grid, fn(X, P), time)


def field_from_symbol(grid: GridSpec, sym, time=0.0) -> PhaseSpaceField:
    """Sample an exact polynomial symbol with numeric hbar from the grid."""
    X, P = grid.mesh()
    vals = sym.evaluate(X, P, grid.hbar)
    if np.abs(vals.imag).max(initial=0.0) == 0.0:
        vals = vals.real
    return PhaseSpaceField(grid, vals, time, symbol=sym)


# ---------------------------------------------------------------------------
# Wigner-type transforms
# ---------------------------------------------------------------------------

def cross_wigner(psi: WaveFunction, phi: WaveFunction) -> PhaseSpaceField:
    """``1/(2 pi hbar) sum phi*(x - tau/2) psi(x + tau/2) e^{-ip tau/hbar} dtau``."""
    grid = _same_grid(psi.grid, phi.grid)
    R = _kernels.pair_to_mixed(psi.values, phi.values)
    return PhaseSpaceField(grid, tau_to_p(grid, R), psi.time)


def wigner(psi: WaveFunction) -> PhaseSpaceField:
    psi.check_decay(stacklevel=3)
    F = cross_wigner(psi, psi).values
    scale = max(np.abs(F.real).max(), 1e-300)
    resid = np.abs(F.imag).max() / scale
    if resid > 1e-8:
        raise NumericalConsistencyError(f"Wigner field has imaginary residue {resid:.2e}")
    return PhaseSpaceField(psi.grid, F.real.copy(), psi.time, label=psi.label)


def _theta_phase(grid):
    # E[l, j] = exp(i theta_l x_j)
    return np.exp(1j * np.outer(grid.theta_centered, grid.x))


def characteristic_function(psi: WaveFunction) -> CharacteristicField:
    """``M(tau, theta) = sum_j psi*(x_j - tau/2) e^{i theta x_j} psi(x_j + tau/2) dx``."""
    grid = psi.grid
    R = _kernels.pair_to_mixed(psi.values, psi.values)  # R[j, m]
    M = grid.dx * (_theta_phase(grid) @ R)  # [l, m]
    return CharacteristicField(grid, M.T.copy())


def char_to_distribution(M: CharacteristicField) -> PhaseSpaceField:
    """Inverse of :func:`characteristic_function` followed by the tau -> p transform.

    Carries the combined ``1/(2 pi)^2`` (with hbar restored) of the double
    Fourier integral: ``1/(2 pi)`` over theta here, ``1/(2 pi hbar)`` over tau.
    """
    grid = M.grid
    # sum_l M e^{-i theta_l x_j} dtheta / (2 pi), dtheta = 2 pi / L
    R = (_theta_phase(grid).conj().T @ M.values.T) / grid.length
    F = tau_to_p(grid, R)
    if np.abs(F.imag).max() <= 1e-8 * max(np.abs(F.real).max(), 1e-300):
        F = F.real.copy()
    return PhaseSpaceField(grid, F)


def marginals(F: PhaseSpaceField):
    """(position density, momentum density) of a real field."""
    vals = np.real(F.values)
    g = F.grid
    return vals.sum(axis=1) * g.dp, vals.sum(axis=0) * g.dx


def expectation(F: PhaseSpaceField, a) -> complex:
    """``sum a F dx dp``; ``a`` may be a field, an exact symbol or a scalar."""
    g = F.grid
    if isinstance(a, PhaseSpaceField):
        _same_grid(g, a.grid)
        av = a.values
    elif hasattr(a, "evaluate"):
        X, P = g.mesh()
        av = a.evaluate(X, P, g.hbar)
    else:
        av = a
    return complex(np.sum(av * F.values) * g.dx * g.dp)


def negativity(F: PhaseSpaceField):
    """(min value, (x, p) of the minimum, negative mass)."""
    vals = np.real(F.values)
    g = F.grid
    j, k = np.unravel_index(np.argmin(vals), vals.shape)
    neg_mass = float(np.minimum(vals, 0.0).sum() * g.dx * g.dp)
    return float(vals[j, k]), (float(g.x[j]), float(g.p[k])), neg_mass


def purity(F: PhaseSpaceField) -> float:
    """``2 pi hbar sum F^2 dx dp``; 1 for a pure state."""
    g = F.grid
    return float(2.0 * np.pi * g.hbar * np.sum(np.real(F.values) ** 2) * g.dx * g.dp)


def _require_normalized(F: PhaseSpaceField, tol=1e-8):
    mass = F.mass()
    if abs(mass - 1.0) > tol:
        raise ValueError(f"field is not normalised (mass {mass.real:.6g})")


def purity_check(F: PhaseSpaceField) -> float:
    """Relative L2 residual of ``(2 pi hbar) F * F - F`` (star product)."""
    from .weyltransform import star_numeric

    _require_normalized(F)
    FF = star_numeric(F, F, route="spectral").values
    lhs = 2.0 * np.pi * F.grid.hbar * FF
    return float(np.linalg.norm(lhs - F.values) / np.linalg.norm(F.values))


# ---------------------------------------------------------------------------
# Density matrices and recovery
# ---------------------------------------------------------------------------

def density_matrix(psi: WaveFunction) -> DensityMatrixField:
    v = psi.values
    return DensityMatrixField(psi.grid, np.outer(v, v.conj()))


def density_from_wigner(F: PhaseSpaceField) -> DensityMatrixField:
    """``rho(x', x'') = sum_p F(p, (x'+x'')/2) e^{ip(x'-x'')/hbar} dp``."""
    g = F.grid
    rho = symbol_to_kernel(g, 2.0 * np.pi * g.hbar * np.asarray(F.values, dtype=complex))
    return DensityMatrixField(g, rho)


def recover_wavefunction(F: PhaseSpaceField, mask: float = AMPLITUDE_MASK,
                         purity_tol: float = 1e-4) -> WaveFunction:
    """Rebuild ``g`` (up to a global phase) from a pure-state Wigner field.

    Amplitude comes off the diagonal of the two-point function; phase is
    integrated from the near-diagonal increments ``arg rho(j', j)`` between
    consecutive unmasked nodes, which steps over nodes of the state.
    """
    resid = purity_check(F)
    if resid > purity_tol:
        raise NotPureStateError(f"field is not a pure state (idempotency residual {resid:.2e})")
    g = F.grid
    rho = density_from_wigner(F).values
    amp = np.sqrt(np.clip(np.real(np.diag(rho)), 0.0, None))
    ok = amp > mask * amp.max()
    idx = np.flatnonzero(ok)
    phase = np.zeros(g.n)
    for prev, nxt in zip(idx[:-1], idx[1:]):
        phase[nxt] = phase[prev] + np.angle(rho[nxt, prev])
    # carry the phase across masked stretches so the values stay continuous
    last = phase[idx[0]]
    for j in range(g.n):
        if ok[j]:
            last = phase[j]
        else:
            phase[j] = last
    vals = amp * np.exp(1j * phase)
    j0 = int(np.argmax(amp))
    vals = vals * np.exp(-1j * phase[j0])
    return WaveFunction.normalized(g, vals, F.time)


def mixed_representation(F: PhaseSpaceField) -> np.ndarray:
    """``R[j, m] = rho(x_{j+m}, x_{j-m})`` from a Wigner-normalised field."""
    return p_to_tau(F.grid, F.values)
