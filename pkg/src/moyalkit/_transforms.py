"""Grid transforms shared by the phase-space, operator and dynamics layers.

Mixed representation ``R[j, m]`` holds a two-point function at nodes
``(x_{j+m}, x_{j-m})``, i.e. centre ``x_j`` and separation ``tau = 2 m dx``.
Columns are stored with ``m`` shifted by ``n/2``; the ``(-1)^index`` factors
recentre both ``m`` and the momentum index for a plain FFT.  This requires
``n/2`` to be even, which every accepted grid satisfies.
"""
import numpy as np

from . import _kernels


def _alternating(n):
    return 1.0 - 2.0 * (np.arange(n) % 2)


def inside_mask(grid):
    """True where both nodes ``j + m`` and ``j - m`` lie inside the box."""
    return _kernels._mid_index(grid.n)[2]


def tau_to_p(grid, R):
    """Mixed -> Wigner-normalised field: ``(1/2 pi hbar) sum_tau R e^{-i p tau/hbar} dtau``."""
    sg = _alternating(grid.n)
    return (2.0 * grid.dx / (2.0 * np.pi * grid.hbar)) * sg * np.fft.fft(sg * R, axis=1)


def p_to_tau(grid, F):
    """Exact inverse of :func:`tau_to_p` (``sum_p F e^{i p tau/hbar} dp``)."""
    sg = _alternating(grid.n)
    return (2.0 * np.pi * grid.hbar / (2.0 * grid.dx)) * sg * np.fft.ifft(sg * F, axis=1)


def kernel_to_symbol(grid, K):
    # symbol carries no 1/(2 pi hbar): a = 2 pi hbar * (Wigner map of K)
    R = _kernels.kernel_to_mixed(K)
    return 2.0 * np.pi * grid.hbar * tau_to_p(grid, R)


def half_node_shift(grid, a):
    """Band-limited interpolation of ``a`` (along x) to ``x_j + dx/2``."""
    n = grid.n
    phase = np.exp(0.5j * grid.theta * grid.dx)
    phase[n // 2] = 0.0  # Nyquist mode has no unambiguous half shift
    return np.fft.ifft(np.fft.fft(a, axis=0) * phase[:, None], axis=0)


def symbol_to_kernel(grid, a):
    """Weyl quantisation ``A(x', x'') = (1/2 pi hbar) sum_p a(p, (x'+x'')/2) e^{ip(x'-x'')/hbar} dp``.

    Even-parity node pairs come straight from the inverse transform; odd pairs
    need the symbol at half-integer midpoints and a half-integer separation.
    """
    n = grid.n
    scale = 1.0 / (2.0 * np.pi * grid.hbar)
    R_even = scale * p_to_tau(grid, a)
    kk = np.arange(n) - n // 2
    a_half = half_node_shift(grid, np.asarray(a, dtype=complex))
    R_odd = scale * p_to_tau(grid, a_half * np.exp(1j * np.pi * kk / n)[None, :])
    return _kernels.mixed_to_kernel(R_even, R_odd)


def symbol_to_mixed_kernel(grid, a):
    """Even-pair kernel entries only, in mixed layout."""
    return p_to_tau(grid, a) / (2.0 * np.pi * grid.hbar)


def mixed_kernel_to_symbol(grid, R):
    return 2.0 * np.pi * grid.hbar * tau_to_p(grid, R)


def spectral_derivative(grid, f, order=1, axis=0):
    """d^order f / dx^order along ``axis`` (x) with the Nyquist mode dropped for odd orders."""
    k = 1j * grid.theta
    if order % 2:
        k = k.copy()
        k[grid.n // 2] = 0.0
    shape = [1] * np.ndim(f)
    shape[axis] = grid.n
    mult = (k ** order).reshape(shape)
    out = np.fft.ifft(np.fft.fft(f, axis=axis) * mult, axis=axis)
    return out if np.iscomplexobj(f) else out.real


def momentum_derivative(grid, F, order=1):
    """d^order F / dp^order along the momentum axis, spectrally via the tau side.

    Multiplying the mixed representation by ``(-i tau/hbar)^order`` is exact
    for fields whose tau-profile decays inside the window.
    """
    n = grid.n
    tau = 2.0 * grid.dx * (np.arange(n) - n // 2)
    R = p_to_tau(grid, F)
    mult = (-1j * tau / grid.hbar) ** order
    if order % 2:
        mult[0] = 0.0  # the m = -n/2 column has no partner at +n/2
    R = np.where(inside_mask(grid), R * mult[None, :], 0.0)
    out = tau_to_p(grid, R)
    return out if np.iscomplexobj(F) else out.real
