import numpy as np
import pytest

from moyalkit.states import DescriptorError, cat, hermite_functions, ho_eigenstate, state_factory


def test_hermite_functions_orthonormal():
    x = np.linspace(-15, 15, 3001)
    h = hermite_functions(x, 8)
    gram = h @ h.T * (x[1] - x[0])
    assert np.abs(gram - np.eye(9)).max() < 1e-10


def test_descriptors_build_normalised_states(grid):
    for d in ("gaussian(x0=1, p0=0.5, sigma=1)", "ho(n=3)", "cat(x0=1.5, sigma=1)",
              "0.6*ho(n=0) + 0.8j*ho(n=3)", "-ho(n=1)", "ho(n=0) - ho(n=2)*2"):
        assert abs(state_factory(d, grid).norm() - 1) < 1e-12


def test_superposition_weights(grid):
    psi = state_factory("0.6*ho(n=0) + 0.8j*ho(n=3)", grid)
    assert abs(ho_eigenstate(grid, 3).inner(psi) - 0.8j) < 1e-12


def test_cat_symmetry(grid):
    v = cat(grid, 2.0).values
    assert np.allclose(v[1:], v[1:][::-1])


@pytest.mark.parametrize("bad", ["", "ho(n=", "ho(2)", "ho(n=1.5)", "ho(k=1)", "squeezed(r=1)",
                                 "gaussian(sigma=0)", "ho(n=0) - ho(n=0)", "__import__('os')",
                                 "gaussian(x0=1j)"])
def test_bad_descriptors(grid, bad):
    with pytest.raises(DescriptorError):
        state_factory(bad, grid)
