import cmath
import math

import numpy as np
import pytest

from nlslab.catalog import (APERIODIC, DEGENERATE, ExactSolution, SolutionKind, Transform, default_grid,
                            eval_exact, eval_log_breather, evaluate, exact_period, list_catalog,
                            parse_solution_id, pde_residual, period_phase, solve_r_alpha)
from nlslab.errors import NearSingularError, OrbitEscaped, ParameterError
from nlslab.functionals import mass
from nlslab.grid import Grid1D

from oracles import r_alpha_period

R_STAR = 1 / math.sqrt(2)

PERIODIC_IDS = ["satsuma-yajima", "kuznetsov-ma:a=1", "kuznetsov-ma:a=0.8", "standing-wave:omega=1.5,p=3",
                "gausson:omega=1", "log-breather:alpha_r=0.8,alpha_i=0"]
ALL_IDS = PERIODIC_IDS + ["peregrine", "akhmediev:a=0.25", "standing-wave:omega=1,p=4"]


def test_origin_values():
    sy = ExactSolution(SolutionKind.SATSUMA_YAJIMA)
    assert evaluate(sy, 0.0, [0.0])[0] == pytest.approx(2 * math.sqrt(2), abs=1e-14)
    per = ExactSolution(SolutionKind.PEREGRINE)
    assert evaluate(per, 0.0, [0.0])[0] == pytest.approx(-3.0, abs=1e-14)
    sw = ExactSolution(SolutionKind.STANDING_WAVE, omega=1.0, p=2.0)
    assert evaluate(sw, 0.0, [0.0])[0] == pytest.approx(math.sqrt(2), abs=1e-14)


@pytest.mark.parametrize("sid,period", [
    ("satsuma-yajima", math.pi / 4),
    ("kuznetsov-ma:a=1", math.pi / math.sqrt(2)),
    ("standing-wave:omega=2", math.pi),
    ("gausson:omega=0.5", 4 * math.pi),
    ("peregrine", APERIODIC),
    ("akhmediev:a=0.3", APERIODIC),
])
def test_exact_period(sid, period):
    assert exact_period(parse_solution_id(sid)) == period


@pytest.mark.parametrize("kind,a", [(SolutionKind.KUZNETSOV_MA, 0.5), (SolutionKind.KUZNETSOV_MA, 0.2),
                                    (SolutionKind.AKHMEDIEV, 0.5), (SolutionKind.AKHMEDIEV, 0.0)])
def test_breather_parameter_domains(kind, a):
    with pytest.raises(ParameterError):
        ExactSolution(kind, a=a)


@pytest.mark.parametrize("text", ["nope", "kuznetsov-ma:b=2", "kuznetsov-ma:a", "standing-wave:omega=x", "KM!"])
def test_parse_solution_id_errors(text):
    with pytest.raises(ParameterError):
        parse_solution_id(text)


def test_parse_solution_id_round_trip():
    for sid in ALL_IDS:
        sol = parse_solution_id(sid)
        assert parse_solution_id(sol.id) == sol


def test_near_singular_guard():
    # for admissible parameters no catalog denominator vanishes, so exercise the guard itself
    from nlslab.catalog import _guard

    _guard(np.array([1.0, -1e-13]), "test")
    with pytest.raises(NearSingularError, match="near-singular"):
        _guard(np.array([1.0, 5e-15]), "test")


def test_km_denominator_margin():
    # alpha cosh(beta x) >= alpha > sqrt2 beta, so the tightest point is x = 0, t = 0
    km = ExactSolution(SolutionKind.KUZNETSOV_MA, a=0.51)
    assert np.all(np.isfinite(evaluate(km, 0.0, np.linspace(-1, 1, 201))))


@pytest.mark.parametrize("sid", ALL_IDS)
def test_pde_residual(sid):
    sol = parse_solution_id(sid)
    grid = default_grid(sol)
    for t in (0.0, 0.37):
        assert pde_residual(sol, t, grid) < 1e-6


@pytest.mark.parametrize("tr", [Transform(shift=1.5), Transform(phase=0.7), Transform(scale=2.0),
                                Transform(shift=-0.5, phase=2.0, scale=0.75)])
@pytest.mark.parametrize("sid", ["satsuma-yajima", "standing-wave:omega=1,p=3"])
def test_symmetry_closure(sid, tr):
    sol = parse_solution_id(sid)
    assert pde_residual(sol, 0.2, Grid1D(20.0, 4096), transform=tr) < 1e-6


def test_translation_is_the_only_stokes_symmetry():
    km = parse_solution_id("kuznetsov-ma")
    g = default_grid(km)
    assert pde_residual(km, 0.1, g, transform=Transform(shift=2.0)) < 1e-6
    with pytest.raises(ParameterError):
        eval_exact(km, 0.0, g, Transform(scale=2.0))


@pytest.mark.parametrize("sid", PERIODIC_IDS)
def test_periodicity_up_to_phase(sid):
    sol = parse_solution_id(sid)
    grid = Grid1D(20.0, 512) if sol.kind is not SolutionKind.KUZNETSOV_MA else Grid1D(40.0, 1024)
    T = exact_period(sol)
    theta = period_phase(sol)
    u0 = eval_exact(sol, 0.3, grid).values
    u1 = eval_exact(sol, 0.3 + T, grid).values
    assert np.abs(u1 - cmath.exp(1j * theta) * u0).max() < 1e-10 * max(1.0, np.abs(u0).max())


@pytest.mark.parametrize("sid", ["kuznetsov-ma:a=1", "kuznetsov-ma:a=2"])
def test_stokes_boundary(sid):
    sol = parse_solution_id(sid)
    g = Grid1D(25.0, 2048)
    for t in (0.0, 0.4, 1.3):
        u = eval_exact(sol, t, g)
        assert abs(u.values[0] - cmath.exp(1j * t)) < 1e-6


def test_r_alpha_equilibrium_is_degenerate():
    orbit = solve_r_alpha(R_STAR)
    assert orbit.period == DEGENERATE


@pytest.mark.parametrize("r0", [R_STAR + 0.1, R_STAR - 0.2, 1.2])
def test_r_alpha_period_matches_energy_quadrature(r0):
    orbit = solve_r_alpha(r0)
    assert orbit.period == pytest.approx(r_alpha_period(r0), rel=1e-6)
    r, v, _ = orbit.state(orbit.period)
    assert abs(r - r0) + abs(v) < 1e-8
    assert np.all(orbit.r > 0)


@pytest.mark.parametrize("alpha", [0.8 - 0.3j, 2.0 - 1.0j])
def test_r_alpha_other_branch_escapes(alpha):
    with pytest.raises(OrbitEscaped) as info:
        solve_r_alpha(alpha, epsilon_branch=-1)
    assert info.value.t_escape >= 0


def test_r_alpha_state_outside_span():
    orbit = solve_r_alpha(0.9, t_max=5.0)
    with pytest.raises(ParameterError):
        orbit.state(6.0)


def test_log_breather_initial_modulus():
    ar = 0.8
    orbit = solve_r_alpha(ar)
    g = Grid1D(20.0, 1024)
    u = eval_log_breather(orbit, 0.0, g)
    np.testing.assert_allclose(np.abs(u.values), math.exp(0.5) * np.exp(-g.x**2 / (4 * ar**2)), atol=1e-14)


def test_log_breather_mass_constant():
    sol = parse_solution_id("log-breather:alpha_r=0.8,alpha_i=0.2")
    g = Grid1D(20.0, 1024)
    T = exact_period(sol)
    m = [mass(eval_exact(sol, t, g)) for t in np.linspace(0, T, 7)]
    assert max(abs(x - m[0]) for x in m) / m[0] < 1e-8


def test_list_catalog_contents():
    text = list_catalog()
    lines = {ln.split()[0]: ln for ln in text.splitlines()[1:] if ln.strip()}
    assert "pi/4" in lines["satsuma-yajima"]
    assert "a > 1/2" in lines["kuznetsov-ma"]
    assert APERIODIC in lines["peregrine"]
