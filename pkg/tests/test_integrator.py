import math

import numpy as np
import pytest

from symrkn.cscoeff import build_order2, build_order4
from symrkn.errors import (
    DegenerateFitError,
    InvalidGridError,
    StageDivergenceError,
)
from symrkn.integrator import (
    StageStructure,
    StepConfig,
    _advance,
    fit_loglog_slope,
    global_error_study,
    integrate,
    linear_drift_slope,
    reference_state,
    reference_tableau,
    reversibility_test,
    solve_stages,
    step,
)
from symrkn.problems import harmonic_oscillator, kepler_2d, perturbed_pendulum
from symrkn.quadrature import gauss_rule, lobatto_rule
from symrkn.tableau import RknTableau, discretize, named_tableau

CFG = StepConfig(h=0.16)

FIVE = ("rkn-iiia", "rkn-iiib", "diagsymp", "rkn-a", "rkn-b")


def _control() -> RknTableau:
    return RknTableau(
        1, np.array([0.0]), np.array([[0.0]]), np.array([1.0]), np.array([1.0]),
        "control",
    )


def test_zero_force_is_linear_drift():
    f = lambda t, q: 0.0 * q
    for name in ("rkn-iiib", "diagsymp"):
        tab = named_tableau(name)
        Q = solve_stages(tab, f, 0.0, 1.5, -0.25, CFG)
        np.testing.assert_allclose(Q, 1.5 + CFG.h * tab.c * (-0.25), atol=1e-16)
        q1, p1 = step(tab, f, 0.0, 1.5, -0.25, CFG)
        assert q1 == pytest.approx(1.5 + CFG.h * (-0.25), abs=1e-16)
        assert p1 == pytest.approx(-0.25, abs=1e-16)


def test_constant_force_is_exact():
    a = -0.8
    f = lambda t, q: a + 0.0 * q
    h = 0.3
    cfg = StepConfig(h=h)
    for name in FIVE:
        q1, p1 = step(named_tableau(name), f, 0.0, 0.2, 0.5, cfg)
        assert q1 == pytest.approx(0.2 + h * 0.5 + a * h * h / 2, abs=1e-15)
        assert p1 == pytest.approx(0.5 + a * h, abs=1e-15)


def test_polynomial_time_forcing_is_exact():
    # q'' = t and q'' = t^2 are integrated without truncation error by any
    # tableau whose weights integrate cubics exactly
    h, t0, q0, p0 = 0.3, 0.5, 0.7, -0.4
    cfg = StepConfig(h=h)
    tabs = [named_tableau(n) for n in FIVE]
    tabs.append(discretize(build_order4(0.2, 0.1, -0.3), gauss_rule(2)))
    for tab in tabs:
        q1, p1 = step(tab, lambda t, q: t + 0.0 * q, t0, q0, p0, cfg)
        assert q1 == pytest.approx(
            q0 + h * p0 + t0 * h**2 / 2 + h**3 / 6, abs=1e-14
        )
        assert p1 == pytest.approx(p0 + t0 * h + h**2 / 2, abs=1e-14)
        q1, p1 = step(tab, lambda t, q: t * t + 0.0 * q, t0, q0, p0, cfg)
        exact_q = q0 + h * p0 + t0**2 * h**2 / 2 + t0 * h**3 / 3 + h**4 / 12
        exact_p = p0 + t0**2 * h + t0 * h**2 + h**3 / 3
        assert q1 == pytest.approx(exact_q, abs=1e-14)
        assert p1 == pytest.approx(exact_p, abs=1e-14)


def test_stage_residual_invariant():
    prob = perturbed_pendulum()
    for name in FIVE:
        tab = named_tableau(name)
        Q = solve_stages(tab, prob.force, prob.t0, prob.q0, prob.p0, CFG)
        F = np.array(
            [prob.force(prob.t0 + tab.c[i] * CFG.h, Q[i]) for i in range(tab.s)]
        )
        rhs = prob.q0 + CFG.h * tab.c * prob.p0 + CFG.h**2 * (tab.a_bar @ F)
        assert np.abs(Q - rhs).max() < 10 * CFG.stage_tol, name


def test_forward_backward_composition_returns():
    # symmetric methods invert exactly under h -> -h
    prob = perturbed_pendulum()
    h = 0.1
    for name, sequential in (("rkn-iiia", False), ("rkn-iiib", False), ("diagsymp", True)):
        tab = named_tableau(name)
        q1, p1 = _advance(tab, prob.force, 0.0, prob.q0, prob.p0, h, 1e-14, 100, sequential)
        q2, p2 = _advance(tab, prob.force, h, q1, p1, -h, 1e-14, 100, sequential)
        assert abs(q2 - prob.q0) < 100 * 1e-14
        assert abs(p2 - prob.p0) < 100 * 1e-14


def test_scalar_and_array_paths_agree():
    pend = perturbed_pendulum()
    f_arr = lambda t, q: np.array([pend.force(t, float(q[0]))])
    for name in FIVE:
        tab = named_tableau(name)
        q_s, p_s = step(tab, pend.force, 0.0, 0.0, 2.5, CFG)
        q_a, p_a = step(
            tab, f_arr, 0.0, np.array([0.0]), np.array([2.5]), CFG
        )
        assert abs(q_s - q_a[0]) < 1e-15, name
        assert abs(p_s - p_a[0]) < 1e-15, name


def test_structure_selection():
    prob = perturbed_pendulum()
    seq_cfg = StepConfig(h=0.16, structure=StageStructure.SEQUENTIAL_LOWER_TRIANGULAR)
    with pytest.raises(ValueError):
        step(named_tableau("rkn-iiib"), prob.force, 0.0, 0.0, 2.5, seq_cfg)
    # on a triangular tableau the sweep and fixed-point answers coincide
    tab = named_tableau("diagsymp")
    full_cfg = StepConfig(h=0.16, structure=StageStructure.FULL_IMPLICIT)
    q1, p1 = step(tab, prob.force, 0.0, 0.0, 2.5, seq_cfg)
    q2, p2 = step(tab, prob.force, 0.0, 0.0, 2.5, full_cfg)
    assert abs(q1 - q2) < 1e-12 and abs(p1 - p2) < 1e-12
    q3, p3 = step(tab, prob.force, 0.0, 0.0, 2.5, CFG)  # auto picks the sweep
    assert q3 == q1 and p3 == p1


def test_zero_span_trajectory():
    prob = perturbed_pendulum()
    traj = integrate(named_tableau("diagsymp"), prob, 0.0, CFG)
    assert traj.times.shape == (1,)
    assert traj.q.shape == (1, 1) and traj.p.shape == (1, 1)
    np.testing.assert_allclose(traj.energy_error, [0.0], atol=0.0)
    assert not traj.diverged


def test_grid_validation():
    prob = perturbed_pendulum()
    with pytest.raises(InvalidGridError):
        integrate(named_tableau("diagsymp"), prob, 0.35, StepConfig(h=0.1))
    with pytest.raises(InvalidGridError):
        integrate(named_tableau("diagsymp"), prob, -1.0, StepConfig(h=0.1))
    with pytest.raises(ValueError):
        integrate(named_tableau("diagsymp"), prob, 1.6, CFG, sample_every=0)


def test_sampling_pattern_keeps_endpoints():
    prob = perturbed_pendulum()
    traj = integrate(named_tableau("diagsymp"), prob, 1.6, CFG, sample_every=3)
    np.testing.assert_allclose(traj.times, [0.0, 0.48, 0.96, 1.44, 1.6], atol=1e-12)
    traj = integrate(named_tableau("diagsymp"), prob, 1.6, CFG, sample_every=100)
    np.testing.assert_allclose(traj.times, [0.0, 1.6], atol=1e-12)


def test_divergence_yields_partial_trajectory():
    prob = perturbed_pendulum()
    traj = integrate(named_tableau("rkn-iiib"), prob, 20.0, StepConfig(h=10.0))
    assert traj.diverged
    assert traj.failure_step == 1
    assert traj.times.shape == (1,)
    assert traj.energy_error.shape == (1,)
    # starved iteration budget fails the same way
    traj = integrate(
        named_tableau("rkn-iiib"), prob, 1.6, StepConfig(h=0.16, max_iters=1)
    )
    assert traj.diverged and traj.failure_step == 1


def test_solver_error_carries_context():
    prob = perturbed_pendulum()
    with pytest.raises(StageDivergenceError) as info:
        step(named_tableau("rkn-iiib"), prob.force, 0.0, 0.0, 2.5, StepConfig(h=10.0))
    assert info.value.residual is not None


def test_sixth_order_accuracy_on_harmonic():
    prob = harmonic_oscillator()
    traj = integrate(reference_tableau(), prob, 10.0, StepConfig(h=0.1))
    assert abs(float(traj.q[-1, 0]) - math.cos(10.0)) < 1e-8
    assert abs(float(traj.p[-1, 0]) + math.sin(10.0)) < 1e-8


def test_second_order_member_converges_at_order_two():
    tab = discretize(build_order2(1 / 6), gauss_rule(1))
    study = global_error_study(
        tab, harmonic_oscillator(), 2.0, [0.2, 0.1, 0.05, 0.025]
    )
    assert study.reference == "exact"
    assert 1.8 < study.slope < 2.2


def test_error_study_sorting_and_reference_labels():
    prob = perturbed_pendulum()
    study = global_error_study(
        named_tableau("rkn-iiib"), prob, 10.0, [0.05, 0.2, 0.1]
    )
    np.testing.assert_allclose(study.h, [0.2, 0.1, 0.05], atol=0.0)
    assert np.all(np.diff(study.error) < 0)
    assert study.reference == "order6-gauss3"
    assert 3.7 < study.slope < 4.3
    assert study.rows()[0][0] == 0.2

    pinned = global_error_study(
        named_tableau("rkn-iiib"), prob, 10.0, [0.2, 0.1],
        reference=(19.794750977098701, 2.245311627198823),
    )
    assert pinned.reference == "supplied"
    assert pinned.error[0] == pytest.approx(study.error[0], rel=1e-6)


def test_error_study_needs_two_steps():
    with pytest.raises(DegenerateFitError):
        global_error_study(
            named_tableau("rkn-iiib"), perturbed_pendulum(), 10.0, [0.1, 0.1]
        )


def test_divergence_propagates_from_study():
    with pytest.raises(StageDivergenceError):
        global_error_study(
            named_tableau("rkn-iiib"), perturbed_pendulum(), 20.0, [10.0, 5.0]
        )


def test_slope_fits():
    hs = [0.4, 0.2, 0.1]
    assert fit_loglog_slope(hs, [h**3 for h in hs]) == pytest.approx(3.0, abs=1e-12)
    # zero rows are dropped, not logged
    assert fit_loglog_slope([0.4, 0.2, 0.1], [0.0, 0.04, 0.01]) == pytest.approx(
        2.0, abs=1e-12
    )
    with pytest.raises(DegenerateFitError):
        fit_loglog_slope([0.1, 0.1], [1e-3, 1e-3])
    with pytest.raises(DegenerateFitError):
        fit_loglog_slope([0.2, 0.1], [0.0, 0.0])

    t = np.arange(10.0)
    v = 2.5 - 3e-4 * t
    assert linear_drift_slope(t, v) == pytest.approx(-3e-4, abs=1e-12)
    with pytest.raises(DegenerateFitError):
        linear_drift_slope([1.0, 1.0], [0.0, 1.0])


def test_reversibility_of_symmetric_methods():
    prob = perturbed_pendulum()
    for name in ("rkn-iiib", "diagsymp"):
        assert reversibility_test(named_tableau(name), prob, 0.16) < 1e-10
    assert reversibility_test(_control(), prob, 0.16) > 1e-4


def test_reference_state_paths():
    harm = harmonic_oscillator()
    q, p = reference_state(harm, 10.0, 0.01)
    assert q == pytest.approx(math.cos(10.0), abs=1e-15)
    assert p == pytest.approx(-math.sin(10.0), abs=1e-15)
    pend = perturbed_pendulum()
    qa, pa = reference_state(pend, 1.6, 0.0123)
    qb, pb = reference_state(pend, 1.6, 0.004)
    assert isinstance(qa, float)
    assert qa == pytest.approx(qb, abs=1e-10)
    assert pa == pytest.approx(pb, abs=1e-10)
    q0, p0 = reference_state(pend, 0.0, 0.01)
    assert (q0, p0) == (pend.q0, pend.p0)


def test_step_config_validation():
    with pytest.raises(ValueError):
        StepConfig(h=0.0)
    with pytest.raises(ValueError):
        StepConfig(h=-0.1)
    with pytest.raises(ValueError):
        StepConfig(h=math.inf)
    with pytest.raises(ValueError):
        StepConfig(h=0.1, stage_tol=0.0)
    with pytest.raises(ValueError):
        StepConfig(h=0.1, max_iters=0)


def test_array_problem_round_trip():
    prob = kepler_2d()
    traj = integrate(named_tableau("rkn-iiia"), prob, 2.0, StepConfig(h=0.02))
    assert traj.q.shape == (101, 2)
    Q = solve_stages(
        named_tableau("rkn-iiia"), prob.force, 0.0, prob.q0, prob.p0,
        StepConfig(h=0.02),
    )
    assert Q.shape == (3, 2)
