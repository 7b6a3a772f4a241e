"""Operator kernels, Weyl symbols, the grid star product and displacements.

Symbol convention: ``a(x, p) = sum_tau A(x + tau/2, x - tau/2) e^{-ip tau/hbar} dtau``
with no ``1/(2 pi hbar)``, so the symbol of a pure-state projector is
``2 pi hbar F``.  Kernels act as ``(A psi)(x') = sum_x'' A(x', x'') psi(x'') dx``.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb, factorial, isfinite

from scipy.special import erfc

import numpy as np

from . import _kernels
from ._transforms import (kernel_to_symbol, mixed_kernel_to_symbol, momentum_derivative,
                          spectral_derivative, symbol_to_kernel, symbol_to_mixed_kernel)
from .phasespace import GridSpec, PhaseSpaceField, WaveFunction, _same_grid

__all__ = [
    "OperatorKernel", "DisplacementLabel", "weyl_symbol", "weyl_quantize",
    "apply_kernel", "star_numeric", "symplectic_form", "compose_displacements",
    "exchange_phase", "displacement_kernel", "apply_displacement",
    "displacement_expectations", "momentum_cutoff", "operator_kernel",
    "trace_pairing",
]


@dataclass(frozen=True)
class OperatorKernel:
    grid: GridSpec
    values: np.ndarray
    hermitian: bool = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        n = self.grid.n
        if v.shape != (n, n):
            raise ValueError(f"expected {n}x{n} kernel, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("kernel has non-finite entries")
        if self.hermitian:
            asym = np.abs(v - v.conj().T).max()
            if asym > 1e-10 * max(np.abs(v).max(), 1.0):
                raise ValueError(f"kernel flagged Hermitian but asymmetry is {asym:.2e}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __matmul__(self, other: "OperatorKernel") -> "OperatorKernel":
        """Operator composition; the intermediate sum carries one ``dx``."""
        g = _same_grid(self.grid, other.grid)
        return OperatorKernel(g, self.values @ other.values * g.dx)

    def adjoint(self) -> "OperatorKernel":
        return OperatorKernel(self.grid, self.values.conj().T)

    def matrix(self) -> np.ndarray:
        """Plain matrix acting on sample vectors (kernel times dx)."""
        return self.values * self.grid.dx

    @classmethod
    def from_matrix(cls, grid, mat, hermitian=False):
        return cls(grid, np.asarray(mat) / grid.dx, hermitian)

    @classmethod
    def identity(cls, grid):
        return cls(grid, np.eye(grid.n) / grid.dx, True)


@dataclass(frozen=True)
class DisplacementLabel:
    alpha: float
    beta: float

    def __post_init__(self):
        if not (isfinite(float(self.alpha)) and isfinite(float(self.beta))):
            raise ValueError("displacement labels must be finite")

    def __add__(self, other):
        return DisplacementLabel(self.alpha + other.alpha, self.beta + other.beta)


# ---------------------------------------------------------------------------
# Symbol <-> kernel
# ---------------------------------------------------------------------------

def weyl_symbol(A: OperatorKernel) -> PhaseSpaceField:
    vals = kernel_to_symbol(A.grid, A.values)
    if A.hermitian:
        vals = vals.real.copy()
    return PhaseSpaceField(A.grid, vals)


def weyl_quantize(a: PhaseSpaceField) -> OperatorKernel:
    vals = symbol_to_kernel(a.grid, np.asarray(a.values, dtype=complex))
    herm = not np.iscomplexobj(a.values)
    if herm:
        vals = 0.5 * (vals + vals.conj().T)
    return OperatorKernel(a.grid, vals, hermitian=herm)


def apply_kernel(A: OperatorKernel, psi: WaveFunction) -> WaveFunction:
    g = _same_grid(A.grid, psi.grid)
    return WaveFunction(g, A.values @ psi.values * g.dx, psi.time)


def trace_pairing(A: OperatorKernel, B: OperatorKernel):
    """(trace(A B), (1/2 pi hbar) sum a b dx dp): the two sides of the pairing identity."""
    g = _same_grid(A.grid, B.grid)
    tr = np.sum(A.values * B.values.T) * g.dx ** 2
    a = kernel_to_symbol(g, A.values)
    b = kernel_to_symbol(g, B.values)
    ph = np.sum(a * b) * g.dx * g.dp / (2.0 * np.pi * g.hbar)
    return complex(tr), complex(ph)


# ---------------------------------------------------------------------------
# Star product on the grid
# ---------------------------------------------------------------------------

def _spectral_star(a, b, grid):
    A = symbol_to_mixed_kernel(grid, a)
    B = symbol_to_mixed_kernel(grid, b)
    C = 2.0 * grid.dx * _kernels.twisted_sum(A, B)
    return mixed_kernel_to_symbol(grid, C)


def _kernel_star(a, b, grid):
    Ka = symbol_to_kernel(grid, np.asarray(a, dtype=complex))
    Kb = symbol_to_kernel(grid, np.asarray(b, dtype=complex))
    return kernel_to_symbol(grid, Ka @ Kb * grid.dx)


class _Derivs:
    """Mixed partials d_x^i d_p^j of one factor, from its symbol or spectrally."""

    def __init__(self, field: PhaseSpaceField):
        self.field = field
        self.grid = field.grid
        self.sym = field.symbol
        self._cache = {}
        if self.sym is not None:
            self._X, self._P = self.grid.mesh()

    def order(self):
        return self.sym.phase_degree() if self.sym is not None else None

    def __call__(self, i, j):
        key = (i, j)
        if key not in self._cache:
            if self.sym is not None:
                d = self.sym.diff("x", i).diff("p", j)
                val = d.evaluate(self._X, self._P, self.grid.hbar)
            else:
                val = np.asarray(self.field.values, dtype=complex)
                if i:
                    val = spectral_derivative(self.grid, val, i, axis=0)
                if j:
                    val = momentum_derivative(self.grid, val, j)
            self._cache[key] = val
        return self._cache[key]


def _series_star(a: PhaseSpaceField, b: PhaseSpaceField, max_order=None):
    grid = a.grid
    da, db = _Derivs(a), _Derivs(b)
    orders = [o for o in (da.order(), db.order()) if o is not None]
    if max_order is None:
        if not orders:
            raise ValueError("series route needs at least one polynomial factor or max_order")
        max_order = min(orders)
    hb = grid.hbar
    out = np.zeros((grid.n, grid.n), dtype=complex)
    for n in range(max_order + 1):
        coeff = (0.5j * hb) ** n / factorial(n)
        for r in range(n + 1):
            out += coeff * comb(n, r) * (-1) ** r * da(n - r, r) * db(r, n - r)
    return out


def star_numeric(a: PhaseSpaceField, b: PhaseSpaceField, route: str = "auto",
                 max_order=None) -> PhaseSpaceField:
    """Grid star product ``a * b``.

    Routes:

    * ``spectral``: twisted sum over the mixed (x, tau) representation; exact
      for fields localised in the window (Wigner functions and the like).
    * ``kernel``: compose the Weyl-quantised kernels and read the symbol back.
    * ``series``: the bidifferential series; derivatives of polynomial factors
      come from their exact symbols, other factors are differentiated spectrally.

    ``auto`` uses ``series`` whenever a factor carries a polynomial symbol,
    since polynomials do not decay and cannot be windowed.
    """
    if not (isinstance(a, PhaseSpaceField) and isinstance(b, PhaseSpaceField)):
        raise TypeError("star_numeric takes two PhaseSpaceField factors")
    grid = _same_grid(a.grid, b.grid)
    if route == "auto":
        route = "series" if (a.symbol is not None or b.symbol is not None) else "spectral"
    if route == "spectral":
        vals = _spectral_star(a.values, b.values, grid)
    elif route == "kernel":
        vals = _kernel_star(a.values, b.values, grid)
    elif route == "series":
        vals = _series_star(a, b, max_order)
    else:
        raise ValueError(f"unknown star route {route!r}")
    sym = None
    if a.symbol is not None and b.symbol is not None:
        from .symcalc import star as exact_star
        sym = exact_star(a.symbol, b.symbol)
    return PhaseSpaceField(grid, vals, a.time, symbol=sym)


# ---------------------------------------------------------------------------
# Displacements
# ---------------------------------------------------------------------------

def symplectic_form(s1: DisplacementLabel, s2: DisplacementLabel) -> float:
    """``sigma(s1, s2) = alpha1 beta2 - alpha2 beta1``."""
    return s1.alpha * s2.beta - s2.alpha * s1.beta


def compose_displacements(s1: DisplacementLabel, s2: DisplacementLabel, hbar: float = 1.0):
    """``S(s1) S(s2) = phase * S(s1 + s2)`` for ``S(a, b) = exp(i(a p + b x))``.

    Returns ``(phase, s1 + s2)`` with ``phase = exp(i hbar sigma / 2)``.
    """
    sigma = symplectic_form(s1, s2)
    return complex(np.exp(0.5j * hbar * float(sigma))), s1 + s2


def exchange_phase(s1: DisplacementLabel, s2: DisplacementLabel, hbar: float = 1.0) -> complex:
    """``S(s1) S(s2) = exchange_phase * S(s2) S(s1)``."""
    return complex(np.exp(1j * hbar * float(symplectic_form(s1, s2))))


def _shift_values(grid, values, a):
    # f(x + a) by a Fourier phase; unitary for any real a
    phase = np.exp(1j * grid.theta * a)
    return np.fft.ifft(np.fft.fft(values, axis=0) * phase.reshape((-1,) + (1,) * (np.ndim(values) - 1)),
                       axis=0)


def apply_displacement(s: DisplacementLabel, psi: WaveFunction) -> WaveFunction:
    """``(S psi)(x) = exp(i beta (x + hbar alpha/2)) psi(x + hbar alpha)``."""
    g = psi.grid
    shifted = _shift_values(g, psi.values, g.hbar * s.alpha)
    vals = np.exp(1j * s.beta * (g.x + 0.5 * g.hbar * s.alpha)) * shifted
    return WaveFunction(g, vals, psi.time)


def displacement_kernel(s: DisplacementLabel, grid: GridSpec) -> OperatorKernel:
    """Kernel of ``S(alpha, beta)`` with the shift done spectrally (any real alpha)."""
    shift = _shift_values(grid, np.eye(grid.n, dtype=complex), grid.hbar * s.alpha)
    mult = np.exp(1j * s.beta * (grid.x + 0.5 * grid.hbar * s.alpha))
    return OperatorKernel.from_matrix(grid, mult[:, None] * shift)


def displacement_expectations(psi: WaveFunction) -> np.ndarray:
    """``<psi| S(tau_m/hbar, theta_l) |psi>`` on the characteristic-function lattice, [m, l]."""
    g = psi.grid
    n = g.n
    E = np.exp(1j * np.outer(g.x, g.theta_centered))  # [j, l]
    out = np.empty((n, n), dtype=complex)
    for m, tau in enumerate(g.tau):
        moved = _shift_values(g, psi.values, tau)
        weight = np.conj(psi.values) * moved  # psi*(x) psi(x + tau)
        out[m] = (weight @ E) * np.exp(0.5j * g.theta_centered * tau) * g.dx
    return out


# ---------------------------------------------------------------------------
# Standard operators as band-limited kernels
# ---------------------------------------------------------------------------

def momentum_cutoff(grid: GridSpec, flat=0.25, edge=0.45) -> np.ndarray:
    """Smooth window chi(q) on the full-band momenta (FFT order).

    chi ~ 1 for |q| <= flat*q_max and ~ 0 beyond edge*q_max, q_max = pi hbar/dx.
    The erfc ramp width balances the flatness error inside the pass band
    against the spatial spread of the window's kernel (it must fit in L/2).
    """
    qmax = np.pi * grid.hbar / grid.dx
    gap = edge - flat
    width = min(np.sqrt(4.0 * gap / (grid.n * np.pi)), gap / 4.0)
    z = (np.abs(grid.q) / qmax - 0.5 * (flat + edge)) / width
    return 0.5 * erfc(z)


def _fourier_multiplier(grid, m):
    # periodic (circulant) matrix of the Fourier multiplier m(q)
    n = grid.n
    Fm = np.fft.fft(np.eye(n), axis=0)
    return np.fft.ifft(m[:, None] * Fm, axis=0)


def _local_multiplier(grid, m):
    """Toeplitz matrix of a smooth multiplier, separations beyond L/2 dropped.

    A circulant matrix couples x' and x'' across the periodic seam; the
    non-periodic two-point picture would see those as long-range entries.
    """
    n = grid.n
    f = np.fft.ifft(m)
    d = np.arange(n)[:, None] - np.arange(n)[None, :]
    return np.where(np.abs(d) < n // 2, f[d % n], 0.0)


def operator_kernel(name: str, grid: GridSpec, potential=None, mass=1.0, cutoff=True) -> OperatorKernel:
    """Kernels of ``x``, ``p``, ``x2``, ``p2``, ``xp``, ``px`` or ``H``.

    ``potential`` is a callable V(x) for ``H``.  With ``cutoff`` the operator
    is sandwiched as chi(p) A chi(p), each p-dependence folded into a smooth,
    local Toeplitz factor, so the kernel fits the symbol window.  Without it
    the momentum operators are plain periodic spectral matrices.
    """
    X = np.diag(grid.x).astype(complex)
    q = grid.q.astype(complex)
    chi = momentum_cutoff(grid) if cutoff else np.ones(grid.n)
    T = (lambda m: _local_multiplier(grid, m)) if cutoff else (lambda m: _fourier_multiplier(grid, m))
    if name == "x":
        M = T(chi) @ X @ T(chi)
    elif name == "x2":
        M = T(chi) @ X @ X @ T(chi)
    elif name == "p":
        M = T(chi * q * chi)
    elif name == "p2":
        M = T(chi * q ** 2 * chi)
    elif name == "xp":
        M = T(chi) @ X @ T(q * chi)
    elif name == "px":
        M = T(chi * q) @ X @ T(chi)
    elif name == "H":
        if potential is None:
            raise ValueError("H needs a potential")
        Vd = np.diag(np.asarray(potential(grid.x), dtype=complex))
        M = T(chi * q ** 2 / (2.0 * mass) * chi) + T(chi) @ Vd @ T(chi)
    else:
        raise ValueError(f"unknown operator {name!r}")
    herm = name not in ("xp", "px")
    if herm:
        M = 0.5 * (M + M.conj().T)
    return OperatorKernel.from_matrix(grid, M, hermitian=herm)
