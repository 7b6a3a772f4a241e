from fractions import Fraction

import numpy as np
import pytest

from moyalkit import symcalc as sc
from moyalkit.phasespace import PhaseSpaceField, field_from_symbol, wigner
from moyalkit.states import cat, gaussian, ho_eigenstate
from moyalkit.weyltransform import (DisplacementLabel, OperatorKernel, apply_displacement, apply_kernel,
                                    compose_displacements, displacement_kernel, exchange_phase,
                                    operator_kernel, star_numeric, symplectic_form, trace_pairing,
                                    weyl_quantize, weyl_symbol)


def interior(grid, fx=0.25, fp=0.4):
    X, P = grid.mesh()
    return (np.abs(X) < fx * grid.length) & (np.abs(P) < fp * np.abs(grid.p).max())


def test_quantize_density(grid):
    psi = cat(grid, 1.5, phase=0.7)
    K = weyl_quantize(2 * np.pi * grid.hbar * wigner(psi))
    assert np.abs(K.values - np.outer(psi.values, psi.values.conj())).max() < 1e-12
    assert K.hermitian


def test_symbol_round_trip(grid):
    a = wigner(gaussian(grid, 1.0)) * 3.0 + wigner(gaussian(grid, -1.0, 0.5))
    assert np.abs(weyl_symbol(weyl_quantize(a)).values - a.values).max() < 1e-12


def test_apply_kernel_and_product(grid):
    psi, phi = gaussian(grid, 1.0), gaussian(grid, -0.5, 1.0)
    A = weyl_quantize(wigner(psi))
    B = weyl_quantize(wigner(phi))
    v = apply_kernel(A @ B, psi).values
    w = apply_kernel(A, apply_kernel(B, psi)).values
    assert np.abs(v - w).max() < 1e-12
    assert np.allclose((A @ OperatorKernel.identity(grid)).values, A.values)
    assert np.allclose(A.adjoint().values, A.values.conj().T)


def test_trace_pairing(grid):
    A = weyl_quantize(wigner(gaussian(grid, 1.0)))
    B = weyl_quantize(wigner(ho_eigenstate(grid, 1)))
    tr, ph = trace_pairing(A, B)
    assert abs(tr - ph) < 1e-12


@pytest.mark.parametrize("route", ["spectral", "kernel"])
def test_star_of_wigner_pair_is_overlap_field(grid, route):
    psi = gaussian(grid, 0.5, 0.5, 1.0)
    F = wigner(psi)
    G = star_numeric(F, F, route=route) * (2 * np.pi * grid.hbar)
    assert np.linalg.norm(G.values - F.values) / np.linalg.norm(F.values) < 1e-10


def test_series_route_matches_exact_product(grid):
    a = sc.evaluate("x^2*p + p^3")
    b = sc.evaluate("x*p^2 - x^3")
    num = star_numeric(field_from_symbol(grid, a), field_from_symbol(grid, b), route="series").values
    X, P = grid.mesh()
    ref = sc.star(a, b).evaluate(X, P, grid.hbar)
    sel = interior(grid, 0.4, 0.4)
    assert np.abs(num - ref)[sel].max() / np.abs(ref[sel]).max() < 1e-8


def test_star_routes_reject_bad_input(grid):
    F = wigner(gaussian(grid))
    with pytest.raises(TypeError):
        star_numeric(F, F.values)
    with pytest.raises(ValueError):
        star_numeric(F, F, route="bogus")


def test_displacement_example_phase():
    phase, label = compose_displacements(DisplacementLabel(1, 0), DisplacementLabel(0, 1))
    assert np.isclose(phase, np.exp(0.5j)) and label == DisplacementLabel(1, 1)
    assert np.isclose(exchange_phase(DisplacementLabel(1, 0), DisplacementLabel(0, 1)), np.exp(1j))


def test_symplectic_form_is_exact_on_rationals():
    a = DisplacementLabel(Fraction(1, 3), Fraction(2, 5))
    b = DisplacementLabel(Fraction(-3, 7), Fraction(1, 2))
    assert symplectic_form(a, b) == Fraction(1, 6) + Fraction(6, 35)
    assert symplectic_form(a, a) == 0


def test_displacement_rejects_non_finite():
    with pytest.raises(ValueError):
        DisplacementLabel(float("nan"), 0)


def test_displacement_on_grid(grid):
    psi = gaussian(grid, 0.2, 0.1, 1.0)
    s1, s2 = DisplacementLabel(0.7, -0.3), DisplacementLabel(-0.4, 1.1)
    phase, s12 = compose_displacements(s1, s2, grid.hbar)
    lhs = apply_displacement(s1, apply_displacement(s2, psi)).values
    assert np.abs(lhs - phase * apply_displacement(s12, psi).values).max() < 1e-12
    K = displacement_kernel(s1, grid).matrix()
    assert np.abs(K.conj().T @ K - np.eye(grid.n)).max() < 1e-12


def test_displacement_moves_the_wigner_field(grid):
    psi = gaussian(grid, 0.0, 0.0, 1.0)
    moved = apply_displacement(DisplacementLabel(-1.0, 0.5), psi)  # x -> x - hbar alpha, p -> p + beta
    F = wigner(moved)
    X, P = grid.mesh()
    assert abs(np.sum(X * F.values) * grid.dx * grid.dp - 1.0) < 1e-10
    assert abs(np.sum(P * F.values) * grid.dx * grid.dp - 0.5) < 1e-10


@pytest.mark.parametrize("name, sym", [("x", "x"), ("p", "p"), ("x2", "x^2"), ("p2", "p^2"),
                                       ("xp", "x*p + (1/2)*i*hbar"), ("px", "x*p - (1/2)*i*hbar")])
def test_operator_kernel_symbols(grid, name, sym):
    a = weyl_symbol(operator_kernel(name, grid)).values
    X, P = grid.mesh()
    ref = sc.evaluate(sym).evaluate(X, P, grid.hbar)
    sel = interior(grid)
    assert np.abs(a - ref)[sel].max() / np.abs(ref[sel]).max() < 1e-6


def test_operator_kernel_errors(grid):
    with pytest.raises(ValueError):
        operator_kernel("H", grid)
    with pytest.raises(ValueError):
        operator_kernel("spin", grid)


def test_kernel_validation(grid):
    with pytest.raises(ValueError):
        OperatorKernel(grid, np.zeros((3, 3)))
    with pytest.raises(ValueError):
        OperatorKernel(grid, np.triu(np.ones((grid.n, grid.n))), hermitian=True)
