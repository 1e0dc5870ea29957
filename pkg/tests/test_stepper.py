import numpy as np
import pytest
import scipy.sparse as sp

from lasertherm.assembly import MaterialProperties, SystemMatrices, assemble, source_load
from lasertherm.boundary import BoundaryLoad, BoundarySpec, Convection, HeatSink
from lasertherm.mesh import FACE_SET_NAMES, build_grid
from lasertherm.stepper import (
    CrankNicolson,
    SolverError,
    SolverSettings,
    init_state,
    solve_linear,
    step,
)

MAT = MaterialProperties(c_v=4.3, kappa=0.0062, mu_a=31.0, h=0.022, T_inf=24.0)


def sinks(value=0.0):
    return {n: value for n in FACE_SET_NAMES}


def test_scalar_crank_nicolson():
    # hand evaluation on a 1x1 system: d1 = (1 - dt/2) / (1 + dt/2)
    M = sp.csr_matrix([[1.0]])
    K = sp.csr_matrix([[1.0]])
    system = SystemMatrices(M, K, M, np.array([0]), np.array([], int), np.array([]), MAT)
    settings = SolverSettings(dt=0.1)
    s0 = init_state(system, 1.0, np.zeros(1), settings)
    assert s0.v[0] == -1.0
    s1 = step(s0, system, np.zeros(1), settings)
    assert s1.d[0] == pytest.approx(0.95 / 1.05, rel=1e-15)
    assert s1.d[0] == pytest.approx(0.904762, abs=1e-6)
    assert abs(s1.d[0] - np.exp(-0.1)) < 1e-4
    assert s1.t == pytest.approx(0.1)
    assert s1.step_index == 1


def test_init_equilibrium():
    m = build_grid((3, 3, 3), (1, 1, 1))
    system = assemble(m, MAT)
    spec = BoundarySpec({n: Convection(0.022, 24.0, "natural") for n in FACE_SET_NAMES})
    F0 = BoundaryLoad(m, spec)(np.full(m.n_nodes, 24.0))
    s = init_state(system, 24.0, F0)
    np.testing.assert_array_equal(F0, 0.0)
    np.testing.assert_allclose(s.v, 0.0, atol=1e-12)


def test_init_uniform_with_load():
    m = build_grid((2, 2, 2), (1, 1, 1))
    system = assemble(m, MAT)
    F0 = np.random.default_rng(0).uniform(0, 1, m.n_nodes)
    s = init_state(system, 30.0, F0)
    expected = np.linalg.solve(system.M.toarray(), F0)
    np.testing.assert_allclose(s.v, expected, rtol=1e-10)


def test_init_overwrites_prescribed():
    m = build_grid((2, 2, 2), (1, 1, 1))
    system = assemble(m, MAT, {"bottom": 15.0})
    s = init_state(system, 30.0, np.zeros(m.n_nodes))
    assert np.all(s.d[system.prescribed_nodes] == 15.0)
    assert np.all(s.v[system.prescribed_nodes] == 0.0)
    assert np.all(s.d[system.free_nodes] == 30.0)


def test_uniform_field_stays_put_without_flux():
    m = build_grid((3, 2, 2), (1, 1, 1))
    system = assemble(m, MAT)
    cn = CrankNicolson(system, SolverSettings(dt=0.5))
    s = cn.init_state(37.0, np.zeros(m.n_nodes))
    for _ in range(20):
        s = cn.step(s, np.zeros(m.n_nodes))
    np.testing.assert_allclose(s.d, 37.0, rtol=1e-13)


def test_steady_state_is_fixed_point():
    m = build_grid((3, 3, 3), (1, 1, 1))
    system = assemble(m, MAT, {"bottom": 20.0, "top": 40.0})
    # steady linear profile between the two sinks
    d = 20.0 + 20.0 * (1.0 - m.nodes[:, 2])
    F = np.zeros(m.n_nodes)
    cn = CrankNicolson(system, SolverSettings(dt=1.0))
    s = cn.init_state(d, F)
    np.testing.assert_allclose(s.v, 0.0, atol=1e-12)
    for _ in range(5):
        s = cn.step(s, F)
    np.testing.assert_allclose(s.d, d, rtol=1e-12)


@pytest.mark.parametrize("dt", [0.1, 1.0, 10.0, 100.0])
def test_smooth_decay_max_norm_nonincreasing(dt):
    m = build_grid((6, 6, 6), (1, 1, 1))
    system = assemble(m, MAT, sinks())
    x, y, z = m.nodes.T
    cn = CrankNicolson(system, SolverSettings(dt=dt))
    s = cn.init_state(np.sin(np.pi * x) * np.sin(np.pi * y) * np.sin(np.pi * z), np.zeros(m.n_nodes))
    prev = np.abs(s.d).max()
    for _ in range(100):
        s = cn.step(s, np.zeros(m.n_nodes))
        cur = np.abs(s.d).max()
        assert cur <= prev
        prev = cur


@pytest.mark.parametrize("dt", [0.01, 1.0, 100.0])
def test_energy_norm_nonincreasing_rough_data(dt):
    m = build_grid((5, 5, 5), (1, 1, 1))
    system = assemble(m, MAT, sinks())
    u0 = np.random.default_rng(1).uniform(-1, 1, m.n_nodes)
    cn = CrankNicolson(system, SolverSettings(dt=dt))
    s = cn.init_state(u0, np.zeros(m.n_nodes))
    energy = s.d @ (system.M @ s.d)
    for _ in range(50):
        s = cn.step(s, np.zeros(m.n_nodes))
        e = s.d @ (system.M @ s.d)
        assert e <= energy * (1 + 1e-12)
        energy = e


def test_energy_balance_with_sink_and_convection():
    m = build_grid((4, 3, 3), (0.6, 0.4, 0.3))
    spec = BoundarySpec(
        {**{n: Convection(0.022, 24.0, "constant") for n in FACE_SET_NAMES}, "bottom": HeatSink(20.0)}
    )
    system = assemble(m, MAT, spec.dirichlet())
    loader = BoundaryLoad(m, spec)
    rng = np.random.default_rng(2)
    f_src = rng.uniform(0, 5, m.n_nodes)
    settings = SolverSettings(dt=0.2)
    cn = CrankNicolson(system, settings)
    f, p = system.free_nodes, system.prescribed_nodes

    def load(d):
        return source_load(system, f_src) + loader(d)

    d0 = np.full(m.n_nodes, 30.0)
    F_prev = load(d0)
    s = cn.init_state(d0, F_prev)
    for _ in range(30):
        F_next = load(s.d)
        nxt = cn.step(s, F_next)
        dE = np.sum(system.M[f] @ (nxt.d - s.d))
        load_in = 0.5 * settings.dt * (F_prev[f].sum() + F_next[f].sum())
        # K has zero column sums, so heat leaving free nodes is picked up on prescribed rows
        to_sink = 0.5 * settings.dt * np.sum(system.K[p] @ (nxt.d + s.d))
        assert dE == pytest.approx(load_in + to_sink, rel=1e-8, abs=1e-12)
        s, F_prev = nxt, F_next


def test_direct_solver_deterministic():
    m = build_grid((4, 4, 4), (1, 1, 1))
    system = assemble(m, MAT, {"bottom": 24.0})
    F = source_load(system, np.random.default_rng(3).uniform(0, 10, m.n_nodes))

    def trajectory():
        cn = CrankNicolson(system, SolverSettings(dt=0.05, method="direct"))
        s = cn.init_state(24.0, F)
        out = []
        for _ in range(10):
            s = cn.step(s, F)
            out.append(s.d.copy())
        return np.array(out)

    assert np.array_equal(trajectory(), trajectory())


def test_cg_matches_direct():
    m = build_grid((4, 4, 4), (1, 1, 1))
    system = assemble(m, MAT, {"bottom": 24.0})
    F = source_load(system, np.random.default_rng(4).uniform(0, 10, m.n_nodes))
    results = {}
    for method in ("direct", "cg"):
        cn = CrankNicolson(system, SolverSettings(dt=0.05, method=method, tolerance=1e-12))
        s = cn.init_state(24.0, F)
        for _ in range(10):
            s = cn.step(s, F)
        results[method] = s.d
    np.testing.assert_allclose(results["cg"], results["direct"], rtol=1e-9)


def test_solve_linear_identity_and_zero():
    A = sp.identity(5, format="csr")
    b = np.arange(5.0)
    for method in ("direct", "cg"):
        s = SolverSettings(method=method)
        np.testing.assert_allclose(solve_linear(A, b, s), b)
        np.testing.assert_array_equal(solve_linear(A, np.zeros(5), s), 0.0)


@pytest.mark.parametrize("method", ["direct", "cg"])
def test_solve_linear_random_spd(method):
    rng = np.random.default_rng(5)
    B = rng.normal(size=(50, 50))
    A = B @ B.T + 50 * np.eye(50)
    b = rng.normal(size=50)
    x = solve_linear(sp.csr_matrix(A), b, SolverSettings(method=method, tolerance=1e-12))
    np.testing.assert_allclose(x, np.linalg.solve(A, b), rtol=1e-9)
    assert np.linalg.norm(A @ x - b) / np.linalg.norm(b) <= 1e-11


def test_cg_non_convergence_reported():
    rng = np.random.default_rng(6)
    B = rng.normal(size=(60, 60))
    A = sp.csr_matrix(B @ B.T + 1e-3 * np.eye(60))
    with pytest.raises(SolverError, match="iterations"):
        solve_linear(A, rng.normal(size=60), SolverSettings(method="cg", max_iterations=2, tolerance=1e-14))


def test_settings_validation():
    with pytest.raises(ValueError):
        SolverSettings(dt=0.0)
    with pytest.raises(ValueError):
        SolverSettings(tolerance=-1)
    with pytest.raises(ValueError):
        SolverSettings(method="gmres")
    assert SolverSettings().resolved_method(10) == "direct"
    assert SolverSettings().resolved_method(2_000_000) == "cg"
