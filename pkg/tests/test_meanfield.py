import numpy as np
import pytest

from potts_infer import (
    beta_critical,
    h_value,
    inestimability_line,
    maximize_h,
    tangent_hessian_negdef,
)

M_TARGET = np.array([0.2, 0.5, 0.3])


def test_h_value_uniform_entropy():
    assert h_value(0.0, np.zeros(2), np.full(3, 1 / 3)) == pytest.approx(
        np.log(3), rel=1e-14)


def test_h_value_at_softmax_point_is_log_partition():
    field = np.array([np.log(2.0 / 3), np.log(5.0 / 3)])
    val = h_value(0.0, field, M_TARGET)
    assert val == pytest.approx(np.log(10.0 / 3), rel=1e-13)


def test_h_value_symmetric_under_joint_permutation():
    rng = np.random.default_rng(0)
    t = rng.dirichlet(np.ones(4))
    field = rng.uniform(-1, 1, 3)
    full = np.append(field, 0.0)
    base = h_value(0.7, field, t)
    for _ in range(5):
        perm = rng.permutation(4)
        # permuted field pinned back to the B_q = 0 convention
        shifted = full[perm] - full[perm][-1]
        val = h_value(0.7, shifted[:-1], t[perm])
        offset = full[perm][-1]  # subtracting a constant shifts H linearly
        assert val + offset == pytest.approx(base, rel=1e-12)


def test_h_value_boundary_handles_zero_entries():
    assert np.isfinite(h_value(1.0, np.zeros(2), np.array([1.0, 0.0, 0.0])))


def test_maximize_h_zero_beta_closed_form():
    field = np.array([np.log(2.0 / 3), np.log(5.0 / 3)])
    sol = maximize_h(0.0, field, 3)
    assert np.allclose(sol.maximizer, M_TARGET, atol=1e-10)
    assert sol.unique


def test_uniform_point_is_fixed_at_zero_field():
    for beta in (0.5, 1.0, 2.0, 4.0):
        sol = maximize_h(beta, np.zeros(2), 3)
        t = np.full(3, 1 / 3)
        logits = beta * t
        assert np.allclose(np.exp(logits) / np.exp(logits).sum(), t)
        assert sol.value >= h_value(beta, np.zeros(2), t) - 1e-12


def test_supercritical_symmetry_breaking():
    sol = maximize_h(3.0, np.zeros(2), 3)
    uniform = np.full(3, 1 / 3)
    assert np.abs(sol.maximizer - uniform).max() > 0.1
    assert sol.value > h_value(3.0, np.zeros(2), uniform) + 1e-6
    assert not sol.unique
    assert len(sol.all_optima) == 3  # one well per color


def test_fixed_point_stationarity_system():
    rng = np.random.default_rng(1)
    for _ in range(20):
        q = int(rng.integers(2, 5))
        beta = float(rng.uniform(0.0, 3.5))
        field = rng.uniform(-1, 1, q - 1)
        sol = maximize_h(beta, field, q)
        m = sol.maximizer
        full = np.append(field, 0.0)
        lhs = beta * (m[:-1] - m[-1]) + full[:-1]
        rhs = np.log(m[:-1] / m[-1])
        assert np.abs(lhs - rhs).max() < 1e-8


def test_subcritical_starts_all_coincide():
    rng = np.random.default_rng(2)
    for beta in (0.2, 0.6, 1.0):
        field = rng.uniform(-1, 1, 2)
        sol = maximize_h(beta, field, 3)
        assert sol.unique
        for opt in sol.all_optima:
            assert np.abs(opt - sol.maximizer).max() < 1e-9


def test_maximize_h_dominates_random_probes():
    rng = np.random.default_rng(3)
    beta, field = 1.5, np.array([0.3, -0.4])
    sol = maximize_h(beta, field, 3)
    probes = rng.dirichlet(np.ones(3), size=10_000)
    vals = np.array([h_value(beta, field, t) for t in probes])
    assert sol.value >= vals.max() - 1e-9


def test_tangent_hessian_sign_cases():
    rng = np.random.default_rng(4)
    for _ in range(10):
        m = rng.dirichlet(np.ones(3))
        assert tangent_hessian_negdef(0.8, m)
    q = 4
    uniform = np.full(q, 1 / q)
    assert not tangent_hessian_negdef(float(q), uniform)
    assert tangent_hessian_negdef(0.5 * q, uniform)


def test_critical_temperature_values():
    assert beta_critical(2) == 2.0
    assert beta_critical(3) == pytest.approx(4 * np.log(2), abs=1e-12)
    assert beta_critical(4) == pytest.approx(3 * np.log(3), abs=1e-12)
    with pytest.raises(ValueError):
        beta_critical(1)


def test_line_formula_and_special_points():
    b0 = inestimability_line(M_TARGET, 0.0)
    assert np.allclose(b0, [np.log(2.0 / 3), np.log(5.0 / 3)], atol=1e-12)
    assert np.allclose(b0, [-0.405465, 0.510826], atol=1e-6)
    for beta in (0.0, 0.7, 1.9):
        assert np.allclose(inestimability_line(np.full(3, 1 / 3), beta), 0.0,
                           atol=1e-15)
    beta = 1.3
    b = inestimability_line(M_TARGET, beta)
    expect = np.log(M_TARGET[:-1] / M_TARGET[-1]) \
        + beta * (M_TARGET[-1] - M_TARGET[:-1])
    assert np.allclose(b, expect, atol=1e-14)


def test_line_round_trip_recovers_target():
    for beta in np.arange(0.0, 1.0001, 0.05):
        b = inestimability_line(M_TARGET, float(beta))
        sol = maximize_h(float(beta), b, 3)
        assert np.abs(sol.maximizer - M_TARGET).max() < 1e-8
        assert sol.unique


def test_line_round_trip_above_one_when_unique():
    for beta in (1.2, 1.6, 2.0):
        b = inestimability_line(M_TARGET, beta)
        sol = maximize_h(beta, b, 3)
        if sol.unique:
            assert np.abs(sol.maximizer - M_TARGET).max() < 1e-7


def test_solution_serializes_to_plain_types():
    d = maximize_h(0.5, np.zeros(2), 3).to_dict()
    assert isinstance(d["maximizer"], list)
    assert isinstance(d["unique"], bool)
