import numpy as np
import pytest

from moyalkit.dynamics import (EvolutionConfig, HamiltonianSpec, IncompatibleSchemeError,
                               NotEigenstateError, baker_bracket_field, classical_liouville_evolve,
                               conserved_quantities, cross_energy_check, eigen_residual,
                               hamiltonian_star, moyal_evolve, moyal_rhs, poisson_rhs, polar_decompose,
                               quantum_potential, qhj_residual, relative_l2, schrodinger_evolve)
from moyalkit.phasespace import WaveFunction, wigner
from moyalkit.states import cat, gaussian, ho_eigenstate, ho_energy

H0 = HamiltonianSpec.harmonic()
QUARTIC = HamiltonianSpec.polynomial([0, 0, 0, 0, "1/4"])


def test_config_validation():
    with pytest.raises(ValueError):
        EvolutionConfig(dt=0)
    with pytest.raises(ValueError):
        EvolutionConfig(steps=0)
    with pytest.raises(ValueError):
        EvolutionConfig(scheme="euler")
    cfg = EvolutionConfig.for_time(1.0, 3e-3)
    assert np.isclose(cfg.total_time, 1.0)


def test_hamiltonian_validation():
    from moyalkit import symcalc as sc
    with pytest.raises(ValueError):
        HamiltonianSpec(0.0)
    with pytest.raises(ValueError):
        HamiltonianSpec(1.0, sc.evaluate("x*p"))
    with pytest.raises(ValueError):
        HamiltonianSpec(1.0, np.array([1.0, np.nan]))
    assert H0.describe() == {"mass": 1.0, "potential": "(1/2)*x^2"}


def test_record_every(grid):
    tr = schrodinger_evolve(gaussian(grid), H0, EvolutionConfig(1e-2, 10, record_every=5))
    assert np.allclose(tr.times, [0, 0.05, 0.1])
    assert len(schrodinger_evolve(gaussian(grid), H0, EvolutionConfig(1e-2, 10)).frames) == 2


def test_oracle_eigenstate_phase(grid):
    psi = ho_eigenstate(grid, 2)
    out = schrodinger_evolve(psi, H0, EvolutionConfig(1e-3, 500)).final
    # Strang splitting carries an O(dt^2) phase error
    assert abs(psi.inner(out) - np.exp(-1j * 2.5 * 0.5)) < 1e-7


@pytest.mark.filterwarnings("ignore::moyalkit.phasespace.DomainWarning")
def test_short_intertwining(grid):
    psi = cat(grid, 1.5)
    cfg = EvolutionConfig(1e-3, 200)
    a = moyal_evolve(wigner(psi), QUARTIC, cfg).final
    b = wigner(schrodinger_evolve(psi, QUARTIC, cfg).final)
    assert relative_l2(a, b) < 1e-7


def test_quadratic_flows_coincide(grid):
    F0 = wigner(cat(grid, 1.5))
    cfg = EvolutionConfig(1e-2, 50)
    assert relative_l2(moyal_evolve(F0, H0, cfg).final, classical_liouville_evolve(F0, H0, cfg).final) < 1e-12


def test_tabulated_potential_matches_polynomial(grid):
    table = HamiltonianSpec(1.0, QUARTIC.V(grid.x))
    F0 = wigner(gaussian(grid, 1.0, 0.5))
    cfg = EvolutionConfig(1e-3, 100)
    assert relative_l2(moyal_evolve(F0, table, cfg).final, moyal_evolve(F0, QUARTIC, cfg).final) < 1e-6
    with pytest.raises(IncompatibleSchemeError):
        moyal_evolve(F0, table, EvolutionConfig(1e-3, 2, scheme="rk4-series"))


def test_rhs_routes_agree(grid):
    F = wigner(gaussian(grid, 1.0, 0.5))
    assert relative_l2(moyal_rhs(F, QUARTIC, "series"), moyal_rhs(F, QUARTIC, "mixed")) < 1e-12
    assert relative_l2(moyal_rhs(F, H0), poisson_rhs(F, H0)) < 1e-10


def test_hamiltonian_star_sides(grid):
    F = wigner(ho_eigenstate(grid, 1))
    left = hamiltonian_star(H0, F, "left").values
    right = hamiltonian_star(H0, F, "right").values
    assert np.abs(left - right).max() < 1e-12
    assert np.linalg.norm(baker_bracket_field(H0, F).values - 1.5 * F.values) < 1e-10


def test_eigen_residual_and_cross_energy(grid):
    E, res = eigen_residual(ho_eigenstate(grid, 3), H0)
    assert abs(E - ho_energy(3)) < 1e-12 and res < 1e-10
    with pytest.raises(NotEigenstateError):
        cross_energy_check(gaussian(grid, 1.0), ho_eigenstate(grid, 0), 0.5, 0.5, H0)


def test_conserved_quantities(grid):
    F0 = wigner(gaussian(grid, 1.0, 0.5))
    a = conserved_quantities(F0, QUARTIC)
    b = conserved_quantities(moyal_evolve(F0, QUARTIC, EvolutionConfig(1e-3, 100)).final, QUARTIC)
    assert all(abs(a[k] - b[k]) < 1e-7 for k in a)


def test_polar_and_quantum_potential(grid):
    psi = ho_eigenstate(grid, 0)
    pol = polar_decompose(psi)
    Q = quantum_potential(pol.amplitude, 1.0, grid)
    keep = pol.amplitude > 1e-4 * pol.amplitude.max()
    assert np.abs(Q - (1 - grid.x ** 2) / 2)[keep].max() < 1e-8
    n1 = polar_decompose(ho_eigenstate(grid, 1))
    assert n1.mask[grid.n // 2] and np.isnan(n1.phase[grid.n // 2])


def stationary(psi, E, dt=1e-3):
    return [WaveFunction(psi.grid, psi.values * np.exp(-1j * E * k * dt), k * dt) for k in range(3)]


def test_qhj_stationary_and_sign(grid):
    series = stationary(ho_eigenstate(grid, 0), 0.5)
    assert np.nanmax(np.abs(qhj_residual(series, H0)[0])) < 1e-8
    assert np.nanmax(np.abs(qhj_residual(series, H0, sign=-1.0)[0])) > 0.1


def test_qhj_env_flag_flips_sign(grid, monkeypatch):
    monkeypatch.setenv("MOYALKIT_FLIP_Q_SIGN", "1")
    series = stationary(ho_eigenstate(grid, 0), 0.5)
    assert np.nanmax(np.abs(qhj_residual(series, H0)[0])) > 0.1


def test_qhj_needs_three_snapshots(grid):
    with pytest.raises(ValueError):
        qhj_residual(stationary(ho_eigenstate(grid, 0), 0.5)[:2], H0)


def test_unnormalised_initial_field_is_rejected(grid):
    with pytest.raises(ValueError):
        moyal_evolve(wigner(gaussian(grid)) * 2.0, H0, EvolutionConfig(1e-3, 1))
