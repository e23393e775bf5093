from dataclasses import replace

import numpy as np
import pytest

from diracstar import (
    BesselKernel,
    BoundaryPolicy,
    EndMode,
    InstabilityError,
    SimParams,
    SpinorField,
    VertexMode,
    build_initial_field,
    build_star_graph,
    density_profile,
    energy,
    gaussian_spinor,
    run,
    step,
    total_norm,
)
from diracstar.config import ExperimentConfig

from .conftest import CANONICAL_ALPHAS
from .oracles import gaussian


def line_graph(length=20.0, dx=0.0125):
    return build_star_graph([(1.0, length, dx), (1.0, length, dx)])


def dirichlet_policy(graph, mode=VertexMode.KIRCHHOFF):
    return BoundaryPolicy(mode, (EndMode.DIRICHLET,) * graph.n_bonds)


def canonical_graph():
    return build_star_graph([(a, 20.0, 0.0125) for a in CANONICAL_ALPHAS])


# ---------------------------------------------------------------- initial data


def test_gaussian_peak_value_on_grid_node():
    g = canonical_graph()
    phi, chi = gaussian_spinor(-5.0, 0.9, g.bonds[0])
    x = g.bonds[0].node_coordinates()
    j = np.argmin(np.abs(x + 5.0))
    assert x[j] == pytest.approx(-5.0, abs=1e-12)
    assert phi[j].real == pytest.approx(
        (2 * np.pi * 0.81) ** -0.25, rel=1e-14
    )
    assert np.argmax(np.abs(phi)) == j


@pytest.mark.parametrize("x0, sigma", [(-3.0, 0.5), (-12.5, 2.0)])
def test_gaussian_value_at_centre(x0, sigma):
    g = canonical_graph()
    phi, _ = gaussian_spinor(x0, sigma, g.bonds[0])
    assert np.max(np.abs(phi)) == pytest.approx(
        (2 * np.pi * sigma**2) ** -0.25, rel=1e-6
    )


def test_gaussian_rejects_bad_arguments():
    g = canonical_graph()
    with pytest.raises(ValueError, match="sigma"):
        gaussian_spinor(-5.0, 0.0, g.bonds[0])
    with pytest.raises(ValueError, match="outside"):
        gaussian_spinor(5.0, 0.9, g.bonds[0])  # bond 1 covers [-20, 0]
    with pytest.raises(ValueError, match="outside"):
        gaussian_spinor(-5.0, 0.9, g.bonds[1])


def test_gaussian_continuum_norm_is_two():
    # each component integrates to 1, so |phi|^2 + |chi|^2 integrates to 2
    g = build_star_graph([(1.0, 40.0, 0.002), (1.0, 40.0, 0.002)])
    params = SimParams(mass=0.0, dt=0.001, dx=0.002, n_steps=1)
    policy = dirichlet_policy(g)
    field = build_initial_field(
        g, params, policy, x0=-20.0, sigma=0.9, normalize=False
    )
    assert total_norm(field, params) == pytest.approx(2.0, abs=1e-6)


def test_normalization_flag():
    g = canonical_graph()
    params = SimParams(mass=0.01, dt=0.01, dx=0.0125, n_steps=1)
    field = build_initial_field(
        g, params, dirichlet_policy(g, VertexMode.WEIGHTED),
        x0=-5.0, sigma=0.9, normalize=True,
    )
    assert total_norm(field, params) == pytest.approx(1.0, rel=1e-12)


# ------------------------------------------------------------------- stepping


def test_zero_field_stays_zero():
    g = canonical_graph()
    params = SimParams(mass=0.01, dt=0.01, dx=0.0125, n_steps=1)
    policy = dirichlet_policy(g)
    field = SpinorField.zeros(g.bonds)
    out = step(field, g, params, policy)
    assert all(np.all(p == 0) for p in out.phi)
    assert all(np.all(c == 0) for c in out.chi)
    assert out.time_level == 1


def random_field(graph, rng, amplitude=1.0):
    field = SpinorField.zeros(graph.bonds)
    for p in field.phi:
        p[:] = amplitude * (
            rng.standard_normal(p.shape) + 1j * rng.standard_normal(p.shape)
        )
    for c in field.chi:
        c[:] = amplitude * (
            rng.standard_normal(c.shape) + 1j * rng.standard_normal(c.shape)
        )
    field.initial_max = field.max_abs()
    return field


def combine(graph, a, f1, b, f2):
    out = SpinorField.zeros(graph.bonds)
    for i in range(len(out.phi)):
        out.phi[i] = a * f1.phi[i] + b * f2.phi[i]
        out.chi[i] = a * f1.chi[i] + b * f2.chi[i]
    out.initial_max = out.max_abs()
    return out


@pytest.mark.parametrize("mode", [VertexMode.KIRCHHOFF, VertexMode.WEIGHTED])
def test_step_is_linear(mode):
    g = build_star_graph([(a, 2.0, 0.05) for a in CANONICAL_ALPHAS])
    params = SimParams(mass=0.2, dt=0.04, dx=0.05, n_steps=1)
    rng = np.random.default_rng(21)
    f1 = random_field(g, rng)
    f2 = random_field(g, rng)
    a, b = 0.6 - 0.3j, -1.1 + 0.7j
    lhs = step(combine(g, a, f1, b, f2), g, params, dirichlet_policy(g, mode))
    s1 = step(f1, g, params, dirichlet_policy(g, mode))
    s2 = step(f2, g, params, dirichlet_policy(g, mode))
    rhs = combine(g, a, s1, b, s2)
    for i in range(g.n_bonds):
        np.testing.assert_allclose(lhs.phi[i], rhs.phi[i], rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(lhs.chi[i], rhs.chi[i], rtol=1e-12, atol=1e-12)


def test_massless_transport_on_line():
    # (1,1) Gaussian is a pure right-mover: density translates by +t
    g = line_graph()
    params = SimParams(mass=0.0, dt=0.01, dx=0.0125, n_steps=300)
    policy = dirichlet_policy(g)
    field = build_initial_field(g, params, policy, x0=-5.0, sigma=0.9,
                                normalize=False)
    for _ in range(300):
        field = step(field, g, params, policy)
    x1, d1 = density_profile(field, 1, params)
    expected = 2.0 * gaussian(x1, -2.0, 0.9) ** 2
    assert np.max(np.abs(d1 - expected)) < 1e-2


def test_one_step_energy_exact():
    g = canonical_graph()
    params = SimParams(mass=0.01, dt=0.01, dx=0.0125, n_steps=1)
    policy = dirichlet_policy(g, VertexMode.WEIGHTED)
    field = build_initial_field(g, params, policy, x0=-5.0, sigma=0.9)
    e0 = energy(field, params)
    field = step(field, g, params, policy)
    assert energy(field, params) == pytest.approx(e0, rel=1e-14)


@pytest.mark.parametrize("mode", [VertexMode.KIRCHHOFF, VertexMode.WEIGHTED])
def test_energy_exactly_conserved_closed_system(mode):
    g = build_star_graph([(a, 5.0, 0.025) for a in CANONICAL_ALPHAS])
    params = SimParams(mass=0.05, dt=0.02, dx=0.025, n_steps=250)
    policy = dirichlet_policy(g, mode)
    field = build_initial_field(g, params, policy, x0=-2.5, sigma=0.4)
    e0 = energy(field, params)
    worst = 0.0
    for _ in range(250):
        field = step(field, g, params, policy)
        worst = max(worst, abs(energy(field, params) - e0))
    assert worst <= 1e-12 * abs(e0)


def test_norm_drift_small_closed_system():
    g = build_star_graph([(a, 5.0, 0.025) for a in CANONICAL_ALPHAS])
    params = SimParams(mass=0.05, dt=0.02, dx=0.025, n_steps=1000)
    policy = dirichlet_policy(g, VertexMode.WEIGHTED)
    field = build_initial_field(g, params, policy, x0=-2.5, sigma=0.4)
    n0 = total_norm(field, params)
    worst = 0.0
    for _ in range(1000):
        field = step(field, g, params, policy)
        worst = max(worst, abs(total_norm(field, params) - n0))
    assert worst < 1e-3 * n0


def test_vertex_invisible_on_unit_line():
    # two unit-weight bonds step exactly like one uniform line
    dx, dt, mass = 0.05, 0.04, 0.3
    g = line_graph(length=2.0, dx=dx)
    params = SimParams(mass=mass, dt=dt, dx=dx, n_steps=1)
    rng = np.random.default_rng(3)
    field = random_field(g, rng)
    c = g.bonds[0].cells

    # assemble the equivalent single line [-2, 2]
    line_phi = np.concatenate([field.phi[0], field.phi[1][1:]])
    line_phi[c] = 0.5 * (field.phi[0][-1] + field.phi[1][0])
    line_chi = np.concatenate([field.chi[0], field.chi[1]])
    stepped = step(field, g, params, dirichlet_policy(g))

    lam, cp, cm = dt / dx, 1 + 0.5j * mass * dt, 1 - 0.5j * mass * dt
    ref_phi = line_phi.copy()
    ref_phi[1:-1] = (cm * line_phi[1:-1] - lam * (line_chi[1:] - line_chi[:-1])) / cp
    ref_phi[0] = ref_phi[-1] = 0.0  # Dirichlet walls of the joined line
    ref_chi = (cp * line_chi - lam * (ref_phi[1:] - ref_phi[:-1])) / cm

    np.testing.assert_allclose(stepped.phi[0], ref_phi[: c + 1], rtol=1e-14, atol=1e-14)
    np.testing.assert_allclose(stepped.phi[1], ref_phi[c:], rtol=1e-14, atol=1e-14)
    np.testing.assert_allclose(stepped.chi[0], ref_chi[:c], rtol=1e-14, atol=1e-14)
    np.testing.assert_allclose(stepped.chi[1], ref_chi[c:], rtol=1e-14, atol=1e-14)


def test_cfl_violation_triggers_overflow_guard():
    g = line_graph(length=2.0, dx=0.05)
    params = SimParams(mass=0.0, dt=0.055, dx=0.05, n_steps=5000)  # dt/dx = 1.1
    policy = dirichlet_policy(g)
    rng = np.random.default_rng(5)
    field = random_field(g, rng, amplitude=1e-3)
    with pytest.raises(InstabilityError):
        for _ in range(5000):
            field = step(field, g, params, policy)


def test_sim_params_validation():
    SimParams(mass=0.01, dt=0.01, dx=0.0125, n_steps=10).validate()
    with pytest.raises(ValueError, match="CFL"):
        SimParams(mass=0.01, dt=0.025, dx=0.0125, n_steps=10).validate()
    with pytest.raises(ValueError, match="mass"):
        SimParams(mass=-1.0, dt=0.01, dx=0.0125, n_steps=10).validate()


def test_transparent_vertex_rejects_full_graph_field():
    g = canonical_graph()
    params = SimParams(mass=0.01, dt=0.01, dx=0.0125, n_steps=4)
    policy = BoundaryPolicy(
        VertexMode.TRANSPARENT,
        (EndMode.DIRICHLET,) * 3,
        kernel=BesselKernel.build(0.01, 0.01, 4),
    )
    field = SpinorField.zeros(g.bonds)
    with pytest.raises(ValueError, match="bond-1-only"):
        step(field, g, params, policy)


def test_policy_cannot_be_shared_between_fields():
    g = line_graph(length=2.0, dx=0.05)
    params = SimParams(mass=0.0, dt=0.04, dx=0.05, n_steps=4)
    policy = BoundaryPolicy(
        VertexMode.KIRCHHOFF,
        (EndMode.TRANSPARENT, EndMode.TRANSPARENT),
        kernel=BesselKernel.build(0.0, 0.04, 4),
    )
    f1 = build_initial_field(g, params, policy, x0=-1.0, sigma=0.2)
    f1 = step(f1, g, params, policy)
    fresh = build_initial_field(g, params, policy, x0=-1.0, sigma=0.2)
    with pytest.raises(ValueError, match="shared"):
        step(fresh, g, params, policy)


# ------------------------------------------------------------------ run loop


def zero_steps_config():
    return ExperimentConfig(
        alphas=CANONICAL_ALPHAS,
        lengths=(20.0,) * 3,
        dx=0.0125,
        mass=0.01,
        dt=0.01,
        n_steps=0,
        x0=-5.0,
        sigma=0.9,
    )


def test_run_zero_steps_yields_initial_record_only():
    result = run(zero_steps_config())
    assert len(result.records) == 1
    rec = result.records[0]
    assert rec.t == 0.0
    assert rec.reflection == pytest.approx(1.0, abs=1e-9)
    assert rec.total_norm == pytest.approx(1.0, rel=1e-12)


def test_run_sampling_and_snapshots(canonical_run, canonical_config):
    records = canonical_run.records
    assert len(records) == 101  # every 10 steps of 1000, plus t = 0
    assert records[0].t == 0.0
    assert records[-1].t == pytest.approx(10.0)
    times = {s.time for s in canonical_run.snapshots}
    assert times == set(canonical_config.snapshot_times)
    # one snapshot per bond per requested time
    assert len(canonical_run.snapshots) == 3 * len(canonical_config.snapshot_times)


def test_run_rejects_cfl_violation():
    bad = replace(zero_steps_config(), n_steps=100, dt=0.025)
    with pytest.raises(ValueError, match="CFL"):
        run(bad)
