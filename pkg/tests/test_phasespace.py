import warnings

import numpy as np
import pytest

from moyalkit.phasespace import (DomainWarning, GridMismatchError, GridSpec, NotPureStateError,
                                 NumericalConsistencyError, PhaseSpaceField, WaveFunction,
                                 char_to_distribution, characteristic_function, cross_wigner,
                                 density_from_wigner, density_matrix, expectation, marginals,
                                 negativity, purity, purity_check, recover_wavefunction, wigner)
from moyalkit.states import cat, gaussian, ho_eigenstate, superpose


def test_grid_layout(grid):
    assert grid.x[0] == -10.0 and grid.dx == 20.0 / 256
    assert grid.p[grid.n // 2] == 0.0
    assert np.isclose(grid.dp, np.pi / 20.0)
    assert np.isclose(grid.tau[1] - grid.tau[0], 2 * grid.dx)
    assert grid.as_dict() == {"n": 256, "L": 20.0, "hbar": 1.0}


@pytest.mark.parametrize("kw", [dict(n=100, length=20, hbar=1), dict(n=256, length=-1, hbar=1),
                                dict(n=256, length=20, hbar=0)])
def test_grid_rejects_bad_input(kw):
    with pytest.raises(ValueError):
        GridSpec(kw["n"], kw["length"], kw["hbar"])


def test_wigner_origin_values(grid):
    h = grid.n // 2
    assert abs(wigner(ho_eigenstate(grid, 0)).values[h, h] - 1 / np.pi) < 1e-12
    assert abs(wigner(ho_eigenstate(grid, 1)).values[h, h] + 1 / np.pi) < 1e-12


def test_wigner_is_real_and_bounded(grid):
    F = wigner(cat(grid, 2.0))
    assert F.values.dtype == float
    assert np.abs(F.values).max() <= 1 / (np.pi * grid.hbar) + 1e-12


def test_gaussian_wigner_closed_form(grid):
    x0, p0, s = 0.7, -0.4, 1.1
    F = wigner(gaussian(grid, x0, p0, 1.1))
    X, P = grid.mesh()
    want = np.exp(-(X - x0) ** 2 / s ** 2 - s ** 2 * (P - p0) ** 2) / np.pi
    assert np.abs(F.values - want).max() < 1e-12


def test_hbar_scaling():
    g = GridSpec(256, 20.0, 0.5)
    F = wigner(ho_eigenstate(g, 0))
    assert abs(F.values[128, 128] - 1 / (np.pi * 0.5)) < 1e-10
    assert abs(F.mass() - 1) < 1e-12


def test_marginals(grid):
    psi = superpose([ho_eigenstate(grid, 0), ho_eigenstate(grid, 2)], [0.6, 0.8j])
    mx, mp = marginals(wigner(psi))
    assert np.abs(mx - np.abs(psi.values) ** 2).max() < 1e-12
    assert abs(mp.sum() * grid.dp - 1) < 1e-12


def test_cross_wigner_hermitian_pair(grid):
    a, b = gaussian(grid, 1.0), gaussian(grid, -1.0, 0.5)
    assert np.allclose(cross_wigner(a, b).values, cross_wigner(b, a).values.conj(), atol=1e-15)


def test_expectation_of_symbols_and_scalars(grid):
    from moyalkit.symcalc import P, X
    F = wigner(gaussian(grid, 1.0, -0.5, 1.0))
    assert abs(expectation(F, X) - 1.0) < 1e-12
    assert abs(expectation(F, P) + 0.5) < 1e-12
    assert abs(expectation(F, 2.0) - 2.0) < 1e-12


def test_purity_and_idempotency(grid):
    F = wigner(cat(grid, 1.5))
    assert abs(purity(F) - 1) < 1e-12
    assert purity_check(F) < 1e-10
    mixed = 0.5 * (wigner(ho_eigenstate(grid, 0)) + wigner(ho_eigenstate(grid, 1)))
    assert abs(purity(mixed) - 0.5) < 1e-12
    with pytest.raises(ValueError):
        purity_check(F * 2.0)


def test_negativity_locates_minimum(grid):
    vmin, at, neg_mass = negativity(wigner(ho_eigenstate(grid, 1)))
    assert vmin < 0 and at == (0.0, 0.0) and neg_mass < 0
    assert negativity(wigner(gaussian(grid)))[0] >= -1e-10


def test_characteristic_pair(grid):
    psi = gaussian(grid, 0.5, 0.5, 0.9)
    M = characteristic_function(psi)
    assert abs(M.at_origin() - 1) < 1e-12
    assert np.abs(char_to_distribution(M).values - wigner(psi).values).max() < 1e-12


def test_density_matrix_routes(grid):
    psi = cat(grid, 1.5, phase=0.3)
    rho = density_from_wigner(wigner(psi))
    assert np.abs(rho.values - density_matrix(psi).values).max() < 1e-12
    assert abs(rho.trace() - 1) < 1e-12 and rho.hermiticity_error() < 1e-14


@pytest.mark.parametrize("n", [0, 1, 4])
def test_recover_wavefunction(grid, n):
    psi = ho_eigenstate(grid, n)
    back = recover_wavefunction(wigner(psi))
    assert 1 - abs(back.inner(psi)) < 1e-10


def test_recover_rejects_mixed_state(grid):
    mixed = 0.5 * (wigner(ho_eigenstate(grid, 0)) + wigner(ho_eigenstate(grid, 1)))
    with pytest.raises(NotPureStateError):
        recover_wavefunction(mixed)


def test_grid_mismatch_is_rejected(grid):
    other = GridSpec(128, 20.0, 1.0)
    with pytest.raises(GridMismatchError):
        cross_wigner(gaussian(grid), gaussian(other))
    with pytest.raises(GridMismatchError):
        wigner(gaussian(grid)) + wigner(gaussian(other))


def test_field_products_need_star(grid):
    F = wigner(gaussian(grid))
    with pytest.raises(TypeError):
        F * F


def test_wavefunction_shape_and_normalisation(grid):
    with pytest.raises(ValueError):
        WaveFunction(grid, np.ones(10))
    with pytest.raises(ValueError):
        WaveFunction.normalized(grid, np.zeros(grid.n))


def test_decay_warning(grid):
    with pytest.warns(DomainWarning):
        wigner(gaussian(grid, 0.0, 0.0, 4.0))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        wigner(gaussian(grid))


def test_imaginary_residue_is_reported(grid, monkeypatch):
    import moyalkit.phasespace as ps
    real_cross = ps.cross_wigner
    monkeypatch.setattr(ps, "cross_wigner", lambda a, b: PhaseSpaceField(
        grid, real_cross(a, b).values + 1e-3j))
    with pytest.raises(NumericalConsistencyError):
        ps.wigner(gaussian(grid))
