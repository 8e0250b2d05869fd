"""Capacity calculus: published fixtures, algebraic identities, fuzz suites.

The epsilon estimator is cross-checked by numerically integrating the
setpoint-rate model it is the closed form of (quadrature oracle).
"""

import math
from dataclasses import replace

import numpy as np
import pytest
from scipy.integrate import quad

from chargecoord.capacity import (
    CapacityInputs,
    check_feasibility,
    delta_available,
    delta_e_m,
    delta_t_critical,
    discharge_rate,
    e_m_upper,
    epsilon_estimate,
    k_c_heuristic,
    k_ch_min,
    max_recharges,
    sweep,
    t_end,
    t_start_of_epsilon,
)
from chargecoord.params import EnergyParams, WorldParams

TABLE = EnergyParams(k_e=0.005, k_v=0.015, k_ch=0.2, e_max=14.8, e_lb=12.0, delta=0.2)
LOW_KV = EnergyParams(k_e=0.005, k_v=0.0045, k_ch=0.2, e_max=14.8, e_lb=12.0, delta=0.2)


def inputs(n=5, v_tilde=0.15, delta_t=35.0, epsilon=0.24, energy=TABLE, **kw):
    base = dict(n=n, v_tilde=v_tilde, delta_t=delta_t, energy=energy, r0=9.0, k_c=0.15, epsilon=epsilon)
    base.update(kw)
    return CapacityInputs(**base)


class TestCriticalSeparation:
    def test_base_scenario(self):
        assert delta_t_critical(inputs()) == pytest.approx(36.39, abs=0.05)

    def test_wind_five_robots(self):
        assert delta_t_critical(inputs(v_tilde=0.2, epsilon=0.28)) == pytest.approx(31.9, abs=0.1)

    def test_wind_four_robots(self):
        # widened: published epsilon is rounded; the exact formula gives 41.45
        assert delta_t_critical(inputs(n=4, v_tilde=0.2, epsilon=0.27)) == pytest.approx(41.1, abs=0.5)

    def test_low_kv_five_and_six(self):
        assert delta_t_critical(
            inputs(v_tilde=0.2, epsilon=0.14, energy=LOW_KV)
        ) == pytest.approx(48.3, abs=0.1)
        assert delta_t_critical(
            inputs(n=6, v_tilde=0.2, epsilon=0.14, energy=LOW_KV)
        ) == pytest.approx(39.5, abs=0.1)

    def test_monotone_decreasing_in_n_vtilde_epsilon(self):
        base = delta_t_critical(inputs())
        assert delta_t_critical(inputs(n=6)) < base
        assert delta_t_critical(inputs(v_tilde=0.2)) < base
        assert delta_t_critical(inputs(epsilon=0.3)) < base


class TestSetpointBounds:
    def test_e_m_upper_base(self):
        assert e_m_upper(inputs()) == pytest.approx(13.0603, abs=1e-3)

    def test_delta_e_m_base(self):
        assert delta_e_m(inputs()) == pytest.approx(0.26508, abs=1e-4)

    def test_kappa_limit_gives_midpoint(self):
        fast = EnergyParams(k_e=0.005, k_v=0.015, k_ch=1e12, e_max=14.8, e_lb=12.0, delta=0.2)
        got = e_m_upper(inputs(energy=fast, delta_t=1e-12, epsilon=0.0))
        assert got == pytest.approx(13.4, abs=1e-6)

    def test_ladder_identity(self):
        # e_lb + (n-1) * delta_e_m == e_m_upper, exactly
        for n in (2, 3, 5, 8):
            i = inputs(n=n)
            assert TABLE.e_lb + (n - 1) * delta_e_m(i) == pytest.approx(e_m_upper(i), abs=1e-9)

    def test_ladder_step_scaling(self):
        i2, i3 = inputs(n=2), inputs(n=3)
        assert delta_e_m(i2) == pytest.approx(2.0 * delta_e_m(i3), rel=1e-12)

    def test_back_substitution_equality(self):
        # at delta_t = dt_cr the capacity inequality holds with equality
        i = inputs()
        dt_cr = delta_t_critical(i)
        at_critical = replace(i, delta_t=dt_cr)
        r = discharge_rate(TABLE, i.v_tilde)
        assert delta_e_m(at_critical) - dt_cr * r == pytest.approx(0.0, abs=1e-9)


class TestEpsilonEstimate:
    def test_zero_mission_speed(self):
        assert epsilon_estimate(inputs(epsilon=None, v_n=0.0)) == 0.0

    def test_t_end_base(self):
        assert t_end(inputs()) == pytest.approx(193.103, abs=5e-3)

    def test_quadrature_oracle(self):
        """Closed form equals integrating k_v v_n (1 - e^{-a t}) over the approach."""
        for v_n, v_f in [(0.15, 0.0015), (0.3, 0.01), (0.2, 0.05)]:
            i = inputs(epsilon=None, v_n=v_n, v_f=v_f)
            eps = epsilon_estimate(i)
            assert eps > 0
            span = t_end(i) - t_start_of_epsilon(i, eps)
            a = math.log(v_n / v_f) / span
            quad_val, _ = quad(lambda t: TABLE.k_v * v_n * (1.0 - math.exp(-a * t)), 0.0, span)
            assert eps == pytest.approx(quad_val, rel=0.01)

    def test_floor_at_zero(self):
        # tiny k_c defers the approach start past the worst-case arrival time
        i = inputs(epsilon=None, v_n=0.15, k_c=1e-4)
        assert epsilon_estimate(i) == 0.0

    def test_smaller_v_f_is_more_conservative(self):
        lo = epsilon_estimate(inputs(epsilon=None, v_n=0.15, v_f=0.0001))
        hi = epsilon_estimate(inputs(epsilon=None, v_n=0.15, v_f=0.05))
        assert lo > hi


class TestKcHeuristic:
    WORLD = WorldParams(c_d=0.0, v_w=(0.0, 0.0), r0=9.0)

    def test_worked_example(self):
        rec = k_c_heuristic(1.0, 3.0, self.WORLD, TABLE, delta=0.2)
        assert rec.heuristic == pytest.approx(0.1103, abs=5e-4)
        assert rec.theorem_floor == pytest.approx(0.135)
        assert rec.recommended == pytest.approx(1.05 * 0.135, abs=1e-9)

    def test_static_only_when_kv_zero(self):
        no_kv = EnergyParams(k_e=0.005, k_v=1e-300, k_ch=0.2, e_max=14.8, e_lb=12.0, delta=0.2)
        rec = k_c_heuristic(1.0, 3.0, self.WORLD, no_kv, delta=0.2)
        l1 = (3.0 - math.sqrt(9.0 - 4.0)) / 2.0
        assert rec.heuristic == pytest.approx(0.005 / l1, rel=1e-9)

    def test_monotone_in_r0(self):
        small = k_c_heuristic(1.0, 3.0, self.WORLD, TABLE, delta=0.2).heuristic
        big = k_c_heuristic(1.0, 3.0, WorldParams(c_d=0.0, v_w=(0.0, 0.0), r0=18.0), TABLE, 0.2).heuristic
        assert big > small

    def test_wind_increases_heuristic(self):
        windy = WorldParams(c_d=0.0, v_w=(0.08, 0.08), r0=9.0)
        assert (
            k_c_heuristic(1.0, 3.0, windy, TABLE, 0.2).heuristic
            > k_c_heuristic(1.0, 3.0, self.WORLD, TABLE, 0.2).heuristic
        )

    def test_underdamped_gains_rejected(self):
        with pytest.raises(ValueError, match="overdamped"):
            k_c_heuristic(10.0, 3.0, self.WORLD, TABLE, delta=0.2)

    def test_recommended_gain_passes_validation(self):
        # stock battery constants + the floored heuristic always validate
        from chargecoord.params import CbfGains, validate_params

        world = WorldParams(c_d=0.5, v_w=(0.08, 0.08), r0=9.0)
        rec = k_c_heuristic(1.0, 3.0, world, TABLE, delta=0.2)
        gains = CbfGains(k_c=rec.recommended, delta_t=35.0)
        assert validate_params(TABLE, world, gains) == []


class TestKchMin:
    def test_two_robot_special_case(self):
        got = k_ch_min(inputs(n=2, epsilon=0.0))
        assert abs(got - (1.0 + math.sqrt(2.0)) * 0.00725) < 1e-9

    def test_table_kch_is_comfortable(self):
        assert TABLE.k_ch > 10 * k_ch_min(inputs(n=2, epsilon=0.0))

    def test_half_gap_epsilon_errors(self):
        with pytest.raises(ValueError):
            k_ch_min(inputs(epsilon=(TABLE.e_max - TABLE.e_lb) / 2.0))


class TestMaxRecharges:
    def test_at_midpoint_cap(self):
        # delta_t = 7 s puts the arrival bound exactly at (e_max + e_lb)/2
        assert max_recharges(inputs(delta_t=7.0, epsilon=0.0)) == 2

    def test_at_lower_bound(self):
        # delta_t driving E_M down to e_lb: ratio 1, one revisit
        dt = (1.03625 * 14.8 + 12.0 - 2.03625 * 12.0) / 0.00725
        assert max_recharges(inputs(delta_t=dt, epsilon=0.0)) == 2

    def test_just_below_cap(self):
        assert max_recharges(inputs(delta_t=7.1, epsilon=0.0)) == 2

    def test_cap_applies_above_midpoint(self):
        assert max_recharges(inputs(delta_t=6.0, epsilon=0.0)) == 2


class TestFeasibility:
    def test_base_feasible(self):
        rep = check_feasibility(inputs())
        assert rep.feasible
        assert rep.lower_bound_s == pytest.approx(7.0)
        assert rep.delta_t_cr == pytest.approx(36.39, abs=0.05)

    def test_wind_overload_infeasible(self):
        rep = check_feasibility(inputs(v_tilde=0.2, epsilon=0.28))
        assert not rep.feasible
        assert "exceeds" in rep.reason

    def test_wind_four_feasible(self):
        assert check_feasibility(inputs(n=4, v_tilde=0.2, epsilon=0.27)).feasible

    def test_infeasible_for_any_separation(self):
        # epsilon large enough to drive the critical separation non-positive
        rep = check_feasibility(inputs(epsilon=1.5))
        assert rep.delta_t_cr <= 0
        assert not rep.feasible
        assert "any separation" in rep.reason

    def test_sweep_wind_scenario(self):
        rows = sweep(inputs(v_tilde=0.2, epsilon=0.28), n_values=[4, 5, 6], v_tilde_values=[0.2])
        verdicts = {r.n: r.feasible for r in rows}
        assert verdicts == {4: True, 5: False, 6: False}

    def test_sweep_low_kv(self):
        rows = sweep(
            inputs(v_tilde=0.2, epsilon=0.14, energy=LOW_KV), n_values=[5, 6], v_tilde_values=[0.2]
        )
        assert all(r.feasible for r in rows)

    def test_sweep_both_axes_empty_gives_empty_table(self):
        assert sweep(inputs(), n_values=[], v_tilde_values=[]) == []

    def test_sweep_single_axis_falls_back_to_base(self):
        rows = sweep(inputs(), n_values=[4, 5], v_tilde_values=[])
        assert [r.n for r in rows] == [4, 5]
        assert all(r.v_tilde == 0.15 for r in rows)


def random_inputs(rng) -> CapacityInputs:
    e_max = float(rng.uniform(10.0, 25.0))
    e_lb = e_max * float(rng.uniform(0.4, 0.9))
    energy = EnergyParams(
        k_e=float(rng.uniform(1e-4, 0.05)),
        k_v=float(rng.uniform(1e-3, 0.1)),
        k_ch=float(rng.uniform(0.05, 1.0)),
        e_max=e_max,
        e_lb=e_lb,
        delta=0.2,
    )
    return CapacityInputs(
        n=int(rng.integers(2, 11)),
        v_tilde=float(rng.uniform(0.05, 1.0)),
        delta_t=1.0,
        energy=energy,
        r0=9.0,
        k_c=0.15,
        epsilon=float(rng.uniform(0.0, 0.05 * (e_max - e_lb))),
    )


class TestFuzzLemmas:
    def test_thousand_random_draws(self):
        """Slack bound dominates dt_cr; arrival bound below midpoint; visits <= 2."""
        rng = np.random.default_rng(31415)
        checked_midpoint = 0
        for _ in range(1000):
            i = random_inputs(rng)
            e = i.energy
            dt_cr = delta_t_critical(i)
            assert delta_available(i) > dt_cr
            assert max_recharges(i) <= 2
            lower = (e.e_max - e.e_lb) / (2.0 * e.k_ch)
            if dt_cr >= lower:
                dt = float(rng.uniform(lower, dt_cr))
                j = replace(i, delta_t=dt)
                e_m_bar = e_m_upper(j) + j.epsilon
                assert e_m_bar <= (e.e_max + e.e_lb) / 2.0 + 1e-9
                checked_midpoint += 1
        assert checked_midpoint > 100
