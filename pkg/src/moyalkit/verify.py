"""Invariant suites behind ``moyalkit verify``.

Every check is deterministic (fixed seeds, fixed grids) and returns a
:class:`CheckResult`.  Checks tagged with an acceptance number are the ones
``tests/test_acceptance.py`` reports on.
"""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from . import _kernels
from . import symcalc as sc
from .dynamics import (EvolutionConfig, HamiltonianSpec, baker_bracket_field, baker_energy_field,
                       classical_liouville_evolve, conserved_quantities, cross_energy_check,
                       moyal_evolve, moyal_rhs, polar_decompose, quantum_potential,
                       qhj_residual, relative_l2, schrodinger_evolve)
from .phasespace import (GridSpec, PhaseSpaceField, WaveFunction, char_to_distribution,
                         characteristic_function, cross_wigner, density_from_wigner,
                         density_matrix, expectation, field_from_symbol, marginals,
                         negativity, purity, purity_check, recover_wavefunction, wigner)
from .states import cat, gaussian, ho_eigenstate, ho_energy, state_factory, superpose
from .weyltransform import (DisplacementLabel, apply_displacement, compose_displacements,
                            displacement_expectations, displacement_kernel, exchange_phase,
                            operator_kernel, star_numeric, symplectic_form, trace_pairing,
                            weyl_quantize, weyl_symbol)

SUITES = ("algebra", "transform", "dynamics")


@dataclass
class CheckResult:
    name: str
    suite: str
    criterion: Optional[int]
    ok: bool
    value: object
    tolerance: object
    detail: str = ""
    seconds: float = 0.0


@dataclass
class _Check:
    name: str
    suite: str
    criterion: Optional[int]
    fn: Callable


REGISTRY: list = []


def check(suite, criterion=None):
    def deco(fn):
        REGISTRY.append(_Check(fn.__name__, suite, criterion, fn))
        return fn
    return deco


def _result(ok, value, tol, detail=""):
    return bool(ok), value, tol, detail


# ---------------------------------------------------------------------------
# shared inputs
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def default_grid(n=256, length=20.0, hbar=1.0):
    return GridSpec(n, length, hbar)


CORPUS = (
    "ho(n=0)", "ho(n=1)", "ho(n=2)", "ho(n=3)", "ho(n=4)", "ho(n=5)",
    "gaussian(x0=1, p0=0.5, sigma=1)", "gaussian(x0=-2, p0=1, sigma=0.7)",
    "gaussian(x0=0, p0=-2, sigma=1.3)", "cat(x0=1.5, sigma=1)",
    "cat(x0=2, p0=0.5, sigma=0.8, phase=1.5707963267948966)",
    "0.6*ho(n=0) + 0.8j*ho(n=3)",
)


@lru_cache(maxsize=None)
def corpus():
    g = default_grid()
    return tuple((d, state_factory(d, g)) for d in CORPUS)


@lru_cache(maxsize=None)
def corpus_wigner():
    return tuple((d, psi, wigner(psi)) for d, psi in corpus())


def harmonic():
    return HamiltonianSpec.harmonic()


def quartic():
    return HamiltonianSpec.polynomial([0, 0, 0, 0, Fraction(1, 4)])


def double_well():
    return HamiltonianSpec.polynomial([0, 0, -1, 0, Fraction(1, 4)])


def _rel(a, b, floor=1.0):
    return abs(a - b) / max(abs(b), floor)


# ---------------------------------------------------------------------------
# algebra suite
# ---------------------------------------------------------------------------

@check("algebra", 1)
def canonical_commutator():
    val = sc.evaluate("star(x, p) - star(p, x)")
    return _result(val == sc.I * sc.HBAR, sc.format_symbol(val), "exact i*hbar")


@check("algebra", 2)
def classical_limits():
    rng = np.random.default_rng(2)
    bad = 0
    for _ in range(100):
        a = sc.random_symbol(rng, 4, 4)
        b = sc.random_symbol(rng, 4, 4)
        if sc.truncate_order(sc.moyal_bracket(a, b), 0) != sc.poisson_bracket(a, b):
            bad += 1
        if sc.truncate_order(sc.baker_bracket(a, b), 0) != a * b:
            bad += 1
    return _result(bad == 0, f"{bad} failures / 200 identities", "exact")


@check("algebra", 3)
def star_associativity_exact():
    rng = np.random.default_rng(3)
    bad = 0
    for _ in range(50):
        a, b, c = (sc.random_symbol(rng, 4, 3, with_hbar=True) for _ in range(3))
        if sc.star(sc.star(a, b), c) != sc.star(a, sc.star(b, c)):
            bad += 1
    return _result(bad == 0, f"{bad} failures / 50 triples", "exact")


@check("algebra")
def worked_examples():
    cases = {
        "star(x, p)": "x*p + (1/2)*i*hbar",
        "mb(x, p)": "1",
        "mb(x^3, p^3)": "9*x^2*p^2 - (3/2)*hbar^2",
        "bb(x, p)": "x*p",
        "bb(x^2, p^2)": "x^2*p^2 - (1/2)*hbar^2",
        "pb(x^3, p^3)": "9*x^2*p^2",
        "truncate(mb(x^3, p^3), 1)": "9*x^2*p^2",
        "truncate(i*hbar, 0)": "0",
        "x*p - p*x": "0",
        "3/2": "3/2",
    }
    wrong = [e for e, want in cases.items() if sc.format_symbol(sc.evaluate(e)) != want]
    return _result(not wrong, wrong or "all match", "exact strings")


@check("algebra")
def quadratic_brackets_are_classical():
    rng = np.random.default_rng(5)
    bad = sum(sc.moyal_bracket(a, b) != sc.poisson_bracket(a, b)
              for a, b in ((sc.random_symbol(rng, 2, 4), sc.random_symbol(rng, 2, 4)) for _ in range(50)))
    return _result(bad == 0, f"{bad} failures / 50", "exact")


@check("algebra")
def bracket_derivation_property():
    rng = np.random.default_rng(6)
    bad = 0
    for _ in range(20):
        a, b, c = (sc.random_symbol(rng, 3, 3) for _ in range(3))
        lhs = sc.moyal_bracket(a, sc.star(b, c))
        rhs = sc.star(sc.moyal_bracket(a, b), c) + sc.star(b, sc.moyal_bracket(a, c))
        bad += lhs != rhs
    return _result(bad == 0, f"{bad} failures / 20", "exact")


@check("algebra")
def jordan_identity():
    rng = np.random.default_rng(7)
    bad = 0
    for _ in range(10):
        a, b = sc.random_symbol(rng, 3, 3), sc.random_symbol(rng, 3, 3)
        aa = sc.baker_bracket(a, a)
        bad += sc.baker_bracket(sc.baker_bracket(a, b), aa) != sc.baker_bracket(a, sc.baker_bracket(b, aa))
    return _result(bad == 0, f"{bad} failures / 10", "exact")


@check("algebra")
def format_round_trip():
    rng = np.random.default_rng(8)
    bad = 0
    for _ in range(100):
        a = sc.random_symbol(rng, 4, 5, with_hbar=True)
        bad += sc.evaluate(sc.format_symbol(a)) != a
    return _result(bad == 0, f"{bad} failures / 100", "exact")


@check("algebra", 15)
def displacement_phases_closed_form():
    F = Fraction
    s1, s2 = DisplacementLabel(1, 0), DisplacementLabel(0, 1)
    phase, lab = compose_displacements(s1, s2)
    ok = abs(phase - np.exp(0.5j)) < 1e-15 and (lab.alpha, lab.beta) == (1, 1)
    ok &= abs(exchange_phase(s1, s2) - np.exp(1j * symplectic_form(s1, s2))) < 1e-15
    ok &= compose_displacements(s1, DisplacementLabel(0, 0))[0] == 1
    # exact: bilinearity, antisymmetry and the phase cocycle, in rationals
    rng = np.random.default_rng(15)
    labels = [DisplacementLabel(F(int(rng.integers(-9, 10)), int(rng.integers(1, 7))),
                                F(int(rng.integers(-9, 10)), int(rng.integers(1, 7)))) for _ in range(30)]
    for a, b, c in zip(labels[:10], labels[10:20], labels[20:]):
        ok &= symplectic_form(a, b) == -symplectic_form(b, a)
        ok &= symplectic_form(a + b, c) == symplectic_form(a, c) + symplectic_form(b, c)
        ok &= symplectic_form(a, b) + symplectic_form(a + b, c) == symplectic_form(b, c) + symplectic_form(a, b + c)
    return _result(ok, f"S(1,0)S(0,1) phase {phase:.15f}", "exact")


# ---------------------------------------------------------------------------
# transform suite
# ---------------------------------------------------------------------------

@check("transform", 4)
def wigner_closed_forms():
    g = default_grid()
    h = g.n // 2
    f0 = wigner(ho_eigenstate(g, 0)).values[h, h]
    f1 = wigner(ho_eigenstate(g, 1)).values[h, h]
    err = max(abs(f0 - 1 / np.pi), abs(f1 + 1 / np.pi))
    return _result(err <= 1e-6, err, 1e-6, f"F0(0,0)={f0:.12f}, F1(0,0)={f1:.12f}")


@check("transform", 5)
def marginals_and_mass():
    g = default_grid()
    worst_x = worst_p = worst_m = 0.0
    for _, psi, F in corpus_wigner():
        mx, mp = marginals(F)
        worst_x = max(worst_x, np.abs(mx - np.abs(psi.values) ** 2).max())
        # oracle momentum density at the window momenta by direct quadrature
        phit = np.exp(-1j * np.outer(g.p, g.x) / g.hbar) @ psi.values * g.dx / np.sqrt(2 * np.pi * g.hbar)
        worst_p = max(worst_p, np.abs(mp - np.abs(phit) ** 2).max())
        worst_m = max(worst_m, abs(F.mass() - 1))
    worst = max(worst_x, worst_p, worst_m)
    return _result(worst <= 1e-8, worst, 1e-8,
                   f"x-marginal {worst_x:.1e}, p-marginal {worst_p:.1e}, mass {worst_m:.1e}")


def _oracle_expectations(psi: WaveFunction, H: HamiltonianSpec):
    g = psi.grid
    v = psi.values
    pv = np.fft.ifft(g.q * np.fft.fft(v))
    p2v = np.fft.ifft(g.q ** 2 * np.fft.fft(v))
    ip = lambda w: np.vdot(v, w) * g.dx
    return {"x": ip(g.x * v), "p": ip(pv), "x2": ip(g.x ** 2 * v), "p2": ip(p2v),
            "H": ip(H.apply(v, g))}


@check("transform", 6)
def expectation_equivalence():
    H = harmonic()
    symbols = {"x": sc.X, "p": sc.P, "x2": sc.X * sc.X, "p2": sc.P * sc.P, "H": H.symbol()}
    worst = 0.0
    for _, psi, F in corpus_wigner():
        oracle = _oracle_expectations(psi, H)
        for k, sym in symbols.items():
            worst = max(worst, _rel(expectation(F, sym), oracle[k]))
    return _result(worst <= 1e-6, worst, 1e-6, "relative, floor 1 for zero means")


@check("transform")
def operator_symbols_band_limited():
    g = default_grid(512)
    X, P = g.mesh()
    sel = (np.abs(X) < 0.25 * g.length) & (np.abs(P) < 0.4 * np.pi * g.hbar / (2 * g.dx))
    want = {"x": X, "p": P, "p2": P ** 2, "x2": X ** 2, "xp": X * P + 0.5j * g.hbar}
    worst = 0.0
    for name, target in want.items():
        a = weyl_symbol(operator_kernel(name, g)).values
        worst = max(worst, np.abs(a - target)[sel].max() / np.abs(target[sel]).max())
    return _result(worst <= 1e-8, worst, 1e-8, "interior, |p| < 0.4 window")


@check("transform")
def expectation_via_operator_kernels():
    g = default_grid()
    H = harmonic()
    worst = 0.0
    kernels = {k: weyl_symbol(operator_kernel(k, g)) for k in ("x", "p", "x2", "p2")}
    kernels["H"] = weyl_symbol(operator_kernel("H", g, potential=H.V))
    for _, psi, F in corpus_wigner():
        oracle = _oracle_expectations(psi, H)
        for k, a in kernels.items():
            worst = max(worst, _rel(expectation(F, a), oracle[k]))
    return _result(worst <= 1e-6, worst, 1e-6)


@check("transform", 7)
def density_operator_symbol():
    worst = 0.0
    for _, psi, F in corpus_wigner():
        K = weyl_quantize(2 * np.pi * F.grid.hbar * F)
        worst = max(worst, np.abs(K.values - np.outer(psi.values, psi.values.conj())).max())
    return _result(worst <= 1e-8, worst, 1e-8)


@check("transform", 8)
def corrected_idempotency():
    worst = max(purity_check(F) for _, _, F in corpus_wigner())
    g = default_grid()
    mixed = 0.5 * (wigner(ho_eigenstate(g, 0)) + wigner(ho_eigenstate(g, 1)))
    pur = purity(mixed)
    resid_mixed = purity_check(mixed)
    ok = worst <= 1e-6 and abs(pur - 0.5) <= 1e-6 and resid_mixed > 0.1
    return _result(ok, {"pure_worst": worst, "mixed_purity": pur, "mixed_residual": resid_mixed},
                   {"pure": 1e-6, "mixed_purity": "0.5 +- 1e-6"})


@check("transform", 9)
def wavefunction_recovery():
    worst = 0.0
    for _, psi, F in corpus_wigner():
        g = recover_wavefunction(F)
        worst = max(worst, 1 - abs(g.inner(psi)))
    return _result(worst <= 1e-5, worst, 1e-5, "1 - fidelity")


@check("transform")
def characteristic_pair():
    worst_pair = worst_origin = worst_gauss = 0.0
    for _, psi, F in corpus_wigner():
        M = characteristic_function(psi)
        worst_pair = max(worst_pair, np.abs(char_to_distribution(M).values - F.values).max())
        worst_origin = max(worst_origin, abs(M.at_origin() - 1))
    g = default_grid()
    M = characteristic_function(ho_eigenstate(g, 0))
    T, Th = np.meshgrid(M.tau, M.theta, indexing="ij")
    sel = (np.abs(T) < 8) & (np.abs(Th) < 8)
    worst_gauss = np.abs(M.values - np.exp(-(T ** 2 + Th ** 2) / 4))[sel].max()
    worst = max(worst_pair, worst_origin, worst_gauss)
    return _result(worst <= 1e-10, worst, 1e-10)


@check("transform")
def density_routes_agree():
    worst = 0.0
    for _, psi, F in corpus_wigner():
        rho1 = density_matrix(psi)
        rho2 = density_from_wigner(F)
        worst = max(worst, np.abs(rho1.values - rho2.values).max(),
                    rho2.hermiticity_error(), abs(rho2.trace() - 1))
    return _result(worst <= 1e-8, worst, 1e-8)


@check("transform")
def negativity_examples():
    g = default_grid()
    m0 = negativity(wigner(ho_eigenstate(g, 0)))
    m1 = negativity(wigner(ho_eigenstate(g, 1)))
    mc = negativity(wigner(cat(g, 2.5, sigma=1.0)))
    ok = m0[0] >= -1e-10 and abs(m1[0] + 1 / np.pi) < 1e-6 and m1[1] == (0.0, 0.0)
    ok &= mc[0] < 0 and abs(mc[1][0]) < 0.5 and mc[2] < 0
    return _result(ok, {"ho0": m0[0], "ho1": m1[0], "cat": mc[0]}, "signs")


@check("transform")
def quantize_round_trip():
    g = default_grid()
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(5):
        st = [gaussian(g, *rng.uniform([-2, -2, 0.6], [2, 2, 1.0])) for _ in range(2)]
        a = PhaseSpaceField(g, rng.normal() * wigner(st[0]).values
                            + rng.normal() * cross_wigner(st[0], st[1]).values)
        back = weyl_symbol(weyl_quantize(a)).values
        worst = max(worst, np.abs(back - a.values).max())
    return _result(worst <= 1e-8, worst, 1e-8)


@check("transform")
def trace_pairing_identity():
    g = default_grid()
    rng = np.random.default_rng(12)
    worst = 0.0
    for _ in range(5):
        st = [gaussian(g, *rng.uniform([-2, -2, 0.6], [2, 2, 1.0])) for _ in range(4)]
        A = weyl_quantize(wigner(st[0]) * 3.0 - wigner(st[1]))
        B = weyl_quantize(wigner(st[2]) + wigner(st[3]) * 0.5)
        tr, ph = trace_pairing(A, B)
        worst = max(worst, _rel(tr, ph, 1e-12))
    return _result(worst <= 1e-6, worst, 1e-6)


@check("transform")
def star_routes_agree():
    g = default_grid()
    F1 = wigner(gaussian(g, 1.0, 0.5, 1.0))
    F2 = wigner(cat(g, 1.5))
    s = star_numeric(F1, F2, route="spectral").values
    k = star_numeric(F1, F2, route="kernel").values
    err = np.linalg.norm(s - k) / np.linalg.norm(k)
    return _result(err <= 1e-6, err, 1e-6, f"backend {_kernels.backend_name()}")


@check("transform")
def star_associativity_numeric():
    g = default_grid()
    F1 = wigner(gaussian(g, 0.5, 0.0, 1.0))
    F2 = wigner(gaussian(g, -0.5, 0.5, 1.2))
    F3 = wigner(gaussian(g, 0.0, -0.5, 0.9))
    left = star_numeric(star_numeric(F1, F2), F3).values
    right = star_numeric(F1, star_numeric(F2, F3)).values
    err = np.linalg.norm(left - right) / np.linalg.norm(right)
    return _result(err <= 1e-6, err, 1e-6)


@check("transform")
def symbolic_numeric_star_agree():
    g = default_grid()
    X, P = g.mesh()
    interior = (np.abs(X) <= 0.4 * g.length) & (np.abs(P) <= 0.4 * np.abs(g.p).max())
    rng = np.random.default_rng(13)
    worst = 0.0
    for _ in range(10):
        a, b = sc.random_symbol(rng, 4, 4), sc.random_symbol(rng, 4, 4)
        fa = field_from_symbol(g, a)
        fb = field_from_symbol(g, b)
        num = star_numeric(fa, fb).values
        ref = sc.star(a, b).evaluate(X, P, g.hbar)
        worst = max(worst, np.abs(num - ref)[interior].max() / np.abs(ref[interior]).max())
    xf, pf = field_from_symbol(g, sc.X), field_from_symbol(g, sc.P)
    comm = (star_numeric(xf, pf) - star_numeric(pf, xf)).values
    worst = max(worst, np.abs(comm - 1j * g.hbar)[interior].max())
    one = PhaseSpaceField(g, np.ones((g.n, g.n)), symbol=sc.ONE)
    F = wigner(gaussian(g))
    worst = max(worst, np.abs(star_numeric(F, one).values - F.values).max())
    return _result(worst <= 1e-6, worst, 1e-6, "interior 80%")


@check("transform", 15)
def displacement_grid_realisation():
    g = default_grid()
    psi = gaussian(g, 0.3, 0.2, 1.0)
    rng = np.random.default_rng(14)
    worst = 0.0
    pairs = [(DisplacementLabel(1, 0), DisplacementLabel(0, 1))]
    pairs += [(DisplacementLabel(*rng.uniform(-1.5, 1.5, 2)), DisplacementLabel(*rng.uniform(-1.5, 1.5, 2)))
              for _ in range(4)]
    for s1, s2 in pairs:
        phase, s12 = compose_displacements(s1, s2, g.hbar)
        lhs = apply_displacement(s1, apply_displacement(s2, psi)).values
        rhs = phase * apply_displacement(s12, psi).values
        worst = max(worst, np.abs(lhs - rhs).max())
        swapped = apply_displacement(s2, apply_displacement(s1, psi)).values
        worst = max(worst, np.abs(lhs - exchange_phase(s1, s2, g.hbar) * swapped).max())
        K1, K2 = displacement_kernel(s1, g), displacement_kernel(s2, g)
        worst = max(worst, np.abs((K1 @ K2).values @ psi.values * g.dx - rhs).max())
        U = K1.matrix()
        worst = max(worst, np.abs(U.conj().T @ U - np.eye(g.n)).max())
    # periodic shifts wrap for |tau| >= L/2, where the zero-padded M does not
    M = characteristic_function(psi).values
    near = np.abs(g.tau) < 0.5 * g.length
    worst = max(worst, np.abs(displacement_expectations(psi) - M)[near].max())
    return _result(worst <= 1e-8, worst, 1e-8)


# ---------------------------------------------------------------------------
# dynamics suite
# ---------------------------------------------------------------------------

def _intertwining_case(H, desc, T=2.0, dt=1e-3):
    g = default_grid()
    psi = state_factory(desc, g)
    cfg = EvolutionConfig.for_time(T, dt)
    F_T = moyal_evolve(wigner(psi), H, cfg).final
    W_T = wigner(schrodinger_evolve(psi, H, cfg).final)
    return relative_l2(F_T, W_T)


@check("dynamics", 10)
def intertwining():
    errs = {}
    for hname, H in (("harmonic", harmonic()), ("quartic", quartic()), ("double-well", double_well())):
        for desc in ("gaussian(x0=1, p0=0.5, sigma=1)", "cat(x0=1.5, sigma=1)"):
            errs[f"{hname}/{desc}"] = _intertwining_case(H, desc)
    worst = max(errs.values())
    return _result(worst <= 1e-6, worst, 1e-6, "; ".join(f"{k}: {v:.1e}" for k, v in errs.items()))


@check("dynamics", 11)
def harmonic_period_and_centroid():
    g = default_grid()
    H = harmonic()
    F0 = wigner(cat(g, 1.5))
    period = relative_l2(moyal_evolve(F0, H, EvolutionConfig.for_time(2 * np.pi, 2 * np.pi / 6000)).final, F0)
    x0, p0 = 1.0, 0.5
    psi = gaussian(g, x0, p0, 1.0)
    cfg = EvolutionConfig.for_time(2.0, 5e-4, record_every=400)
    worst_c = 0.0
    X, P = g.mesh()
    for F in moyal_evolve(wigner(psi), H, cfg).frames:
        t = F.time
        xc = np.sum(X * F.values) * g.dx * g.dp
        pc = np.sum(P * F.values) * g.dx * g.dp
        worst_c = max(worst_c, abs(xc - (x0 * np.cos(t) + p0 * np.sin(t))),
                      abs(pc - (p0 * np.cos(t) - x0 * np.sin(t))))
    cfg = EvolutionConfig.for_time(2 * np.pi, 5e-4, record_every=1000)
    for w in schrodinger_evolve(psi, H, cfg).frames:
        xc = np.sum(g.x * np.abs(w.values) ** 2) * g.dx
        worst_c = max(worst_c, abs(xc - (x0 * np.cos(w.time) + p0 * np.sin(w.time))))
    ok = period <= 1e-6 and worst_c <= 1e-6
    return _result(ok, {"period": period, "centroid": worst_c}, 1e-6)


@check("dynamics")
def eigenstate_stationary_per_period():
    g = default_grid()
    F0 = wigner(ho_eigenstate(g, 2))
    err = relative_l2(moyal_evolve(F0, harmonic(), EvolutionConfig.for_time(2 * np.pi, 2 * np.pi / 4096)).final, F0)
    return _result(err <= 1e-8, err, 1e-8)


def phase_space_gaussian(grid, x0=1.5, p0=0.0, var=0.5):
    """Fixed phase-space Gaussian, pure at hbar = 2 var and mixed below."""
    X, P = grid.mesh()
    vals = np.exp(-((X - x0) ** 2 + (P - p0) ** 2) / (2 * var)) / (2 * np.pi * var)
    F = PhaseSpaceField(grid, vals)
    return F * (1.0 / F.mass().real)


HBAR_LADDER = ((1.0, 256), (0.5, 256), (0.25, 512))


def quantum_classical_gap(hbar, n, T=2.0, dt=2e-3):
    g = GridSpec(n, 20.0, hbar)
    F0 = phase_space_gaussian(g)
    cfg = EvolutionConfig.for_time(T, dt)
    H = quartic()
    return relative_l2(moyal_evolve(F0, H, cfg).final, classical_liouville_evolve(F0, H, cfg).final)


@check("dynamics", 12)
def hbar_gap_trend():
    gaps = [quantum_classical_gap(h, n) for h, n in HBAR_LADDER]
    ok = gaps[0] > 0.05 and all(a > b for a, b in zip(gaps, gaps[1:]))
    return _result(ok, {f"hbar={h}": v for (h, _), v in zip(HBAR_LADDER, gaps)}, "> 0.05, decreasing")


@check("dynamics")
def quartic_cat_gap_and_quadratic_identity():
    g = default_grid()
    cfg = EvolutionConfig.for_time(2.0, 1e-3)
    F0 = wigner(cat(g, 1.5))
    gap = relative_l2(classical_liouville_evolve(F0, quartic(), cfg).final, moyal_evolve(F0, quartic(), cfg).final)
    H = harmonic()
    same_phase = np.array_equal(H.potential_difference(g), H.first_order_difference(g)) or \
        np.abs(H.potential_difference(g) - H.first_order_difference(g)).max() < 1e-12
    quad = relative_l2(classical_liouville_evolve(F0, H, cfg).final, moyal_evolve(F0, H, cfg).final)
    free = HamiltonianSpec.polynomial([0])
    free_err = relative_l2(classical_liouville_evolve(F0, free, cfg).final, moyal_evolve(F0, free, cfg).final)
    ok = gap > 0.05 and same_phase and quad <= 1e-10 and free_err <= 1e-10
    return _result(ok, {"quartic_gap": gap, "harmonic": quad, "free": free_err}, "gap > 0.05, identity 1e-10")


@check("dynamics", 13)
def eigen_energy_laws():
    g = default_grid()
    H = harmonic()
    worst = 0.0
    for n in range(6):
        F = wigner(ho_eigenstate(g, n))
        for route in ("series", "kernel"):
            bb = baker_bracket_field(H, F, route).values
            worst = max(worst, np.linalg.norm(bb - ho_energy(n) * F.values) / np.linalg.norm(F.values))
    F = wigner(ho_eigenstate(g, 0))
    # integrating the bracket gives the mean energy
    mean_E = (baker_bracket_field(H, F).mass()).real
    worst = max(worst, abs(mean_E - 0.5))
    for (a, b) in ((0, 1), (0, 2), (1, 3)):
        r = cross_energy_check(ho_eigenstate(g, a), ho_eigenstate(g, b), ho_energy(a), ho_energy(b), H)
        worst = max(worst, r)
    # time-dependent superposition: both sides from oracle snapshots
    psi = superpose([ho_eigenstate(g, 0), ho_eigenstate(g, 1)], [1, 1])
    frames = schrodinger_evolve(psi, H, EvolutionConfig(1e-3, 2, record_every=1)).frames
    lhs, rhs = baker_energy_field(frames, H)
    two_sided = np.abs(lhs.values - rhs.values).max() / np.abs(lhs.values).max()
    ok = worst <= 1e-6 and two_sided <= 1e-6
    return _result(ok, {"eigen": worst, "two_sided": two_sided}, 1e-6)


def _stationary_series(psi, E, dt=1e-3, count=3):
    # closed-form evolution of an eigenstate
    g = psi.grid
    return [WaveFunction(g, psi.values * np.exp(-1j * E * k * dt / g.hbar), k * dt) for k in range(count)]


@check("dynamics", 14)
def quantum_hamilton_jacobi():
    g = default_grid()
    H = harmonic()
    psi0 = ho_eigenstate(g, 0)
    gs = max(np.nanmax(np.abs(r)) for r in qhj_residual(_stationary_series(psi0, 0.5), H))
    R = polar_decompose(psi0).amplitude
    Q = quantum_potential(R, 1.0, g)
    keep = R >= 1e-4 * R.max()
    q_closed = np.nanmax(np.abs(Q - (1 - g.x ** 2) / 2)[keep])
    oracle = schrodinger_evolve(psi0, H, EvolutionConfig(1e-4, 4, record_every=1)).frames
    gs_oracle = max(np.nanmax(np.abs(r)) for r in qhj_residual(oracle, H))
    coh = schrodinger_evolve(gaussian(g, 1.0, 0.5, 1.0), H,
                             EvolutionConfig.for_time(2 * np.pi, 1e-3, record_every=1)).frames
    coh_res = max(np.nanmax(np.abs(r)) for r in qhj_residual(coh, H))
    wrong = max(np.nanmax(np.abs(r)) for r in qhj_residual(_stationary_series(psi0, 0.5), H, sign=-1.0))
    n1 = polar_decompose(ho_eigenstate(g, 1))
    node_masked = bool(n1.mask[g.n // 2]) and np.isnan(quantum_potential(n1.amplitude, 1.0, g)[g.n // 2])
    ok = max(gs, q_closed, gs_oracle) <= 1e-6 and coh_res <= 1e-4 and wrong > 0.1 and node_masked
    return _result(ok, {"ground": gs, "ground_oracle": gs_oracle, "Q_closed_form": q_closed,
                        "coherent": coh_res, "wrong_sign": wrong, "node_masked": node_masked},
                   {"ground": 1e-6, "coherent": 1e-4, "wrong_sign": "> 0.1"})


@check("dynamics")
def conservation_along_flow():
    g = default_grid()
    H = quartic()
    F0 = wigner(gaussian(g, 1.0, 0.5, 1.0))
    a = conserved_quantities(F0, H)
    b = conserved_quantities(moyal_evolve(F0, H, EvolutionConfig(1e-3, 1000)).final, H)
    worst = max(_rel(b[k], a[k]) for k in a)
    return _result(worst <= 1e-6, worst, 1e-6, str(b))


@check("dynamics")
def left_right_structure():
    g = default_grid()
    H = quartic()
    F = wigner(gaussian(g, 1.0, 0.5, 1.0))
    h = H.field(g)
    left = star_numeric(h, F).values
    right = star_numeric(F, h).values
    rhs = moyal_rhs(F, H, "mixed").values
    e1 = np.linalg.norm(left - right - 1j * g.hbar * rhs) / np.linalg.norm(g.hbar * rhs)
    bb = baker_bracket_field(H, F, "kernel").values
    e2 = np.linalg.norm(left + right - 2 * bb) / np.linalg.norm(bb)
    worst = max(e1, e2)
    return _result(worst <= 1e-6, worst, 1e-6)


@check("dynamics")
def generator_consistency():
    g = default_grid()
    H = quartic()
    F0 = wigner(gaussian(g, 1.0, 0.5, 1.0))
    errs = []
    for dt in (1e-3, 5e-4):
        fr = moyal_evolve(F0, H, EvolutionConfig(dt, 2, record_every=1)).frames
        fd = (fr[2].values - fr[0].values) / (2 * dt)
        r = moyal_rhs(fr[1], H).values
        errs.append(np.linalg.norm(fd - r) / np.linalg.norm(r))
    order = np.log2(errs[0] / errs[1])
    eig = np.abs(moyal_rhs(wigner(ho_eigenstate(g, 3)), harmonic()).values).max()
    series_vs_mixed = relative_l2(moyal_rhs(F0, H, "series"), moyal_rhs(F0, H, "mixed"))
    ok = 1.8 < order < 2.2 and errs[0] < 1e-3 and eig <= 1e-7 and series_vs_mixed <= 1e-8
    return _result(ok, {"fd_errors": errs, "order": order, "eigen_rhs": eig,
                        "series_vs_mixed": series_vs_mixed}, "O(dt^2)")


@check("dynamics")
def rk4_series_matches_split_step():
    g = default_grid()
    H = quartic()
    psi = gaussian(g, 1.0, 0.5, 1.0)
    a = moyal_evolve(wigner(psi), H, EvolutionConfig(2e-4, 250, scheme="rk4-series")).final
    b = wigner(schrodinger_evolve(psi, H, EvolutionConfig(2e-4, 250)).final)
    err = relative_l2(a, b)
    return _result(err <= 1e-6, err, 1e-6)


@check("dynamics")
def oracle_reference_cases():
    g = default_grid()
    H = harmonic()
    psi0 = ho_eigenstate(g, 0)
    tr = schrodinger_evolve(psi0, H, EvolutionConfig(1e-3, 1000, record_every=250))
    stat = max(abs(1 - abs(w.inner(psi0))) for w in tr.frames)
    norm = max(abs(n - 1) for n in tr.log["norm"])
    sigma, T = 1.0, 1.5
    free = schrodinger_evolve(gaussian(g, 0, 0, sigma), HamiltonianSpec.polynomial([0]),
                              EvolutionConfig.for_time(T, 1e-3)).final
    width2 = np.sum(g.x ** 2 * np.abs(free.values) ** 2) * g.dx
    want = 0.5 * (sigma ** 2 + (g.hbar * T) ** 2 / sigma ** 2)
    free_err = abs(width2 - want) / want
    ok = stat <= 1e-8 and norm <= 1e-10 and free_err <= 1e-8
    return _result(ok, {"stationarity": stat, "norm": norm, "free_width": free_err}, "1e-8")


# ---------------------------------------------------------------------------
# runner
# ---------------------------------------------------------------------------

def select(suite: str = "all", only: Optional[str] = None, criterion: Optional[int] = None):
    if suite != "all" and suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}")
    out = []
    for c in REGISTRY:
        if suite != "all" and c.suite != suite:
            continue
        if only and only not in c.name:
            continue
        if criterion is not None and c.criterion != criterion:
            continue
        out.append(c)
    return out


def run_check(c: _Check) -> CheckResult:
    t0 = time.perf_counter()
    try:
        ok, value, tol, detail = c.fn()
    except Exception as exc:  # a crashing check is a failing check
        ok, value, tol, detail = False, None, None, f"{type(exc).__name__}: {exc}"
    return CheckResult(c.name, c.suite, c.criterion, ok, _plain(value), _plain(tol), detail,
                       round(time.perf_counter() - t0, 3))


def _plain(v):
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    if isinstance(v, complex):
        return abs(v)
    return v


def _run_suite(suite, only):
    return [run_check(c) for c in select(suite, only)]


def run(suite: str = "all", only: Optional[str] = None, progress=None, jobs: int = 1) -> dict:
    """Run the selected checks; with ``jobs > 1`` and ``suite="all"`` suites run in parallel."""
    t0 = time.perf_counter()
    results = []
    if jobs > 1 and suite == "all":
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=min(jobs, len(SUITES))) as pool:
            futures = [pool.submit(_run_suite, s, only) for s in SUITES]
            for fut in futures:
                for r in fut.result():
                    results.append(r)
                    if progress:
                        progress(r)
    else:
        for c in select(suite, only):
            r = run_check(c)
            results.append(r)
            if progress:
                progress(r)
    return {
        "suite": suite,
        "backend": _kernels.backend_name(),
        "passed": all(r.ok for r in results) and bool(results),
        "count": len(results),
        "failures": [r.name for r in results if not r.ok],
        "seconds": round(time.perf_counter() - t0, 3),
        "checks": [asdict(r) for r in results],
    }
