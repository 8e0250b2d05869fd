"""Integrator contract: switched battery rate, Euler updates, energy balance."""

import math

import pytest

from chargecoord.dynamics import StepInput, battery_rate, in_charging_region, step
from chargecoord.params import EnergyParams, RobotState, VelocityHistory, WorldParams

TABLE = EnergyParams(k_e=0.005, k_v=0.015, k_ch=0.2, e_max=14.8, e_lb=12.0, delta=0.2)
WORLD = WorldParams(c_d=0.5, v_w=(0.0, 0.0), r0=9.0)


def make_state(x=(5.0, 0.0), v=(0.0, 0.0), E=14.8, E_min=12.0, world=WORLD) -> RobotState:
    hist = VelocityHistory(capacity=8)
    hist.append(0.0, math.hypot(v[0] - world.v_w[0], v[1] - world.v_w[1]))
    return RobotState(x=x, v=v, E=E, E_min=E_min, vel_history=hist)


class TestChargingRegion:
    def test_center(self):
        assert in_charging_region((0.0, 0.0), TABLE)

    def test_boundary_included(self):
        assert in_charging_region((0.2, 0.0), TABLE)

    def test_outside(self):
        assert not in_charging_region((0.4, 0.0), TABLE)

    def test_configurable_station(self):
        shifted = EnergyParams(0.005, 0.015, 0.2, 14.8, 12.0, 0.2, x_c=(3.0, 4.0))
        assert in_charging_region((3.1, 4.0), shifted)
        assert not in_charging_region((0.0, 0.0), shifted)


class TestBatteryRate:
    def test_static_only_at_wind_speed(self):
        # moving with the wind kills the dynamic term
        world = WorldParams(c_d=0.5, v_w=(0.1, -0.2), r0=9.0)
        st = make_state(x=(5.0, 0.0), v=(0.1, -0.2), world=world)
        assert battery_rate(st, TABLE, world) == pytest.approx(-0.005)

    def test_recharge_rate_inside(self):
        st = make_state(x=(0.1, 0.0), E=13.0)
        assert battery_rate(st, TABLE, WORLD) == pytest.approx(0.2)

    def test_dynamic_term(self):
        st = make_state(v=(0.15, 0.0))
        assert battery_rate(st, TABLE, WORLD) == pytest.approx(-0.00725)
        st2 = make_state(v=(0.09, 0.12))  # same speed, different direction
        assert battery_rate(st2, TABLE, WORLD) == pytest.approx(-0.00725)

    def test_full_battery_clamps_to_zero(self):
        st = make_state(x=(0.05, 0.0), E=14.8)
        assert battery_rate(st, TABLE, WORLD) == 0.0


class TestStep:
    def test_drag_cancellation_keeps_velocity(self):
        world = WorldParams(c_d=0.7, v_w=(0.05, 0.0), r0=9.0)
        v = (0.3, -0.4)
        u = (world.c_d * (v[0] - 0.05), world.c_d * v[1])
        st = make_state(v=v, world=world)
        out = step(st, StepInput(u=u, eta=0.0, dt=0.01), TABLE, world)
        assert out.v == pytest.approx(v)

    def test_wind_drift_with_zero_input(self):
        world = WorldParams(c_d=0.5, v_w=(0.08, 0.08), r0=9.0)
        st = make_state(x=(5.0, 0.0), v=(0.08, 0.08), world=world)
        out = step(st, StepInput(u=(0.0, 0.0), eta=0.0, dt=0.5), TABLE, world)
        assert out.v == pytest.approx((0.08, 0.08))
        assert out.x == pytest.approx((5.0 + 0.5 * 0.08, 0.5 * 0.08))

    def test_euler_update_hand_value(self):
        st = make_state(v=(1.0, 0.0))
        out = step(st, StepInput(u=(0.0, 0.0), eta=0.0, dt=0.01), TABLE, WORLD)
        assert out.v[0] == pytest.approx(0.995)
        assert out.v[1] == 0.0

    def test_emin_integration_and_history(self):
        st = make_state(v=(0.1, 0.0))
        out = step(st, StepInput(u=(0.0, 0.0), eta=0.5, dt=0.02), TABLE, WORLD)
        assert out.E_min == pytest.approx(12.0 + 0.01)
        assert out.vel_history.count == 2
        assert out.vel_history.t_now == pytest.approx(0.02)
        assert out.vel_history.v_now == pytest.approx(math.hypot(*out.v))

    def test_voltage_clamped_at_full(self):
        st = make_state(x=(0.0, 0.0), E=14.799)
        out = step(st, StepInput(u=(0.0, 0.0), eta=0.0, dt=0.01), TABLE, WORLD)
        assert out.E == 14.8

    def test_battery_branch_from_prestep_position(self):
        # starts outside, lands inside: this step still discharges
        st = make_state(x=(0.205, 0.0), v=(-1.0, 0.0))
        out = step(st, StepInput(u=(0.0, 0.0), eta=0.0, dt=0.01), TABLE, WORLD)
        assert in_charging_region(out.x, TABLE)
        assert out.E < st.E

    @pytest.mark.parametrize("u,eta,dt", [((float("nan"), 0), 0, 0.01), ((0, 0), float("inf"), 0.01), ((0, 0), 0, 0.0)])
    def test_nonfinite_input_rejected(self, u, eta, dt):
        with pytest.raises(ValueError):
            step(make_state(), StepInput(u=u, eta=eta, dt=dt), TABLE, WORLD)

    def test_determinism_bit_identical(self):
        def run():
            st = make_state(v=(0.3, 0.1))
            for k in range(200):
                st = step(st, StepInput(u=(0.01, -0.02), eta=1e-4, dt=0.01), TABLE, WORLD)
            return st

        a, b = run(), run()
        assert a.x == b.x and a.v == b.v and a.E == b.E and a.E_min == b.E_min


def test_energy_balance_outside_region():
    """E(t1) - E(t0) equals -k_e*dt_total - k_v*sum(dt*speed) within one step."""
    world = WorldParams(c_d=0.5, v_w=(0.03, -0.02), r0=9.0)
    st = make_state(x=(5.0, 0.0), v=(0.4, 0.2), world=world)
    dt = 0.01
    speeds_pre = []
    e0 = st.E
    for k in range(500):
        speeds_pre.append(math.hypot(st.v[0] - world.v_w[0], st.v[1] - world.v_w[1]))
        st = step(st, StepInput(u=(0.05, 0.02), eta=0.0, dt=dt), TABLE, world)
        assert not in_charging_region(st.x, TABLE)
    predicted = -TABLE.k_e * 500 * dt - TABLE.k_v * dt * sum(speeds_pre)
    one_step = dt * (TABLE.k_e + TABLE.k_v * max(speeds_pre))
    assert abs((st.E - e0) - predicted) <= one_step


def test_constant_acceleration_integrates_exactly():
    """u = c_d (v - v_w) + a_const makes velocity exactly linear in time."""
    world = WorldParams(c_d=0.8, v_w=(0.1, 0.0), r0=9.0)
    a_const = (0.02, -0.01)
    st = make_state(x=(5.0, 0.0), v=(0.2, 0.3), world=world)
    v0 = st.v
    dt = 0.01
    for k in range(1000):
        u = (
            world.c_d * (st.v[0] - world.v_w[0]) + a_const[0],
            world.c_d * (st.v[1] - world.v_w[1]) + a_const[1],
        )
        st = step(st, StepInput(u=u, eta=0.0, dt=dt), TABLE, world)
    t = 1000 * dt
    assert st.v[0] == pytest.approx(v0[0] + a_const[0] * t, abs=1e-12)
    assert st.v[1] == pytest.approx(v0[1] + a_const[1] * t, abs=1e-12)
