"""Test-state generator and its small descriptor language.

Descriptors are Python-expression-shaped strings, parsed with :mod:`ast`
and evaluated against a whitelist::

    "gaussian(x0=1, p0=0.5, sigma=1)"
    "ho(n=2, m=1, omega=1)"
    "cat(x0=1.5, sigma=1)"
    "0.6*ho(n=0) + 0.8j*ho(n=1)"

Every result is renormalised on the grid.
"""
from __future__ import annotations

import ast

import numpy as np

from .phasespace import GridSpec, WaveFunction

__all__ = ["DescriptorError", "gaussian", "ho_eigenstate", "ho_energy", "cat",
           "superpose", "state_factory", "parse_descriptor"]


class DescriptorError(ValueError):
    pass


def gaussian_values(grid: GridSpec, x0=0.0, p0=0.0, sigma=1.0):
    x = grid.x
    return (np.pi * sigma ** 2) ** -0.25 * np.exp(
        -((x - x0) ** 2) / (2.0 * sigma ** 2) + 1j * p0 * (x - x0) / grid.hbar)


def gaussian(grid: GridSpec, x0=0.0, p0=0.0, sigma=1.0) -> WaveFunction:
    if sigma <= 0:
        raise DescriptorError("sigma must be positive")
    return WaveFunction.normalized(grid, gaussian_values(grid, x0, p0, sigma),
                                   label=f"gaussian(x0={x0},p0={p0},sigma={sigma})")


def hermite_functions(xi, nmax):
    """Normalised Hermite functions h_0..h_nmax at ``xi`` by the three-term recurrence."""
    xi = np.asarray(xi, dtype=float)
    out = np.empty((nmax + 1,) + xi.shape)
    out[0] = np.pi ** -0.25 * np.exp(-0.5 * xi ** 2)
    if nmax >= 1:
        out[1] = np.sqrt(2.0) * xi * out[0]
    for k in range(2, nmax + 1):
        out[k] = np.sqrt(2.0 / k) * xi * out[k - 1] - np.sqrt((k - 1) / k) * out[k - 2]
    return out


def ho_values(grid: GridSpec, n=0, m=1.0, omega=1.0):
    scale = np.sqrt(m * omega / grid.hbar)
    return np.sqrt(scale) * hermite_functions(scale * grid.x, n)[n]


def ho_eigenstate(grid: GridSpec, n=0, m=1.0, omega=1.0) -> WaveFunction:
    if int(n) != n or n < 0:
        raise DescriptorError("ho level n must be a non-negative integer")
    if m <= 0 or omega <= 0:
        raise DescriptorError("mass and omega must be positive")
    return WaveFunction.normalized(grid, ho_values(grid, int(n), m, omega).astype(complex),
                                   label=f"ho(n={int(n)},m={m},omega={omega})")


def ho_energy(n, hbar=1.0, omega=1.0):
    return hbar * omega * (n + 0.5)


def cat(grid: GridSpec, x0=1.5, p0=0.0, sigma=1.0, phase=0.0) -> WaveFunction:
    """Two Gaussians at +-x0 (momenta +-p0) with relative phase ``phase``."""
    v = gaussian_values(grid, x0, p0, sigma) + np.exp(1j * phase) * gaussian_values(grid, -x0, -p0, sigma)
    return WaveFunction.normalized(grid, v, label=f"cat(x0={x0},p0={p0},sigma={sigma},phase={phase})")


def superpose(states, weights) -> WaveFunction:
    states = list(states)
    if not states:
        raise DescriptorError("empty superposition")
    grid = states[0].grid
    v = sum(complex(w) * s.values for w, s in zip(weights, states))
    return WaveFunction.normalized(grid, v)


_BUILDERS = {
    "gaussian": (gaussian_values, {"x0", "p0", "sigma"}),
    "ho": (ho_values, {"n", "m", "omega"}),
    "cat": (None, {"x0", "p0", "sigma", "phase"}),
}


def _number(node):
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)) \
            and not isinstance(node.value, bool):
        return node.value
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _number(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp) and isinstance(node.op, (ast.Add, ast.Sub, ast.Mult, ast.Div)):
        a, b = _number(node.left), _number(node.right)
        if isinstance(node.op, ast.Add):
            return a + b
        if isinstance(node.op, ast.Sub):
            return a - b
        if isinstance(node.op, ast.Mult):
            return a * b
        return a / b
    raise DescriptorError(f"expected a number at column {getattr(node, 'col_offset', 0) + 1}")


def _raw_state(grid, call):
    name = call.func.id if isinstance(call.func, ast.Name) else None
    if name not in _BUILDERS:
        raise DescriptorError(f"unknown state {name!r}; expected one of {sorted(_BUILDERS)}")
    if call.args:
        raise DescriptorError(f"{name}() takes keyword arguments only")
    allowed = _BUILDERS[name][1]
    kw = {}
    for k in call.keywords:
        if k.arg not in allowed:
            raise DescriptorError(f"{name}() has no parameter {k.arg!r}")
        v = _number(k.value)
        if isinstance(v, complex):
            raise DescriptorError(f"{name}({k.arg}=...) must be real")
        kw[k.arg] = v
    if name == "gaussian":
        return gaussian(grid, **kw).values
    if name == "ho":
        n = kw.get("n", 0)
        return ho_eigenstate(grid, n, kw.get("m", 1.0), kw.get("omega", 1.0)).values
    return cat(grid, **kw).values


def _eval_state(grid, node):
    if isinstance(node, ast.Call):
        return _raw_state(grid, node)
    if isinstance(node, ast.BinOp) and isinstance(node.op, (ast.Add, ast.Sub)):
        a, b = _eval_state(grid, node.left), _eval_state(grid, node.right)
        return a + b if isinstance(node.op, ast.Add) else a - b
    if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Mult):
        try:
            return _number(node.left) * _eval_state(grid, node.right)
        except DescriptorError:
            return _number(node.right) * _eval_state(grid, node.left)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
        return -_eval_state(grid, node.operand)
    raise DescriptorError(f"unexpected syntax at column {getattr(node, 'col_offset', 0) + 1}")


def parse_descriptor(text: str):
    try:
        return ast.parse(text.strip(), mode="eval").body
    except SyntaxError as exc:
        raise DescriptorError(f"malformed state descriptor {text!r}: {exc.msg}") from None


def state_factory(descriptor: str, grid: GridSpec) -> WaveFunction:
    """Build a normalised state from a descriptor string."""
    if not isinstance(descriptor, str) or not descriptor.strip():
        raise DescriptorError("empty state descriptor")
    values = _eval_state(grid, parse_descriptor(descriptor))
    if not np.any(values):
        raise DescriptorError("descriptor produced the zero vector")
    return WaveFunction.normalized(grid, values, label=descriptor.strip())
