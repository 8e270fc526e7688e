from __future__ import annotations

import math

import numpy as np
import pytest

from artdna.plant import (
    ACCEL_ANGLE, BATTERY_VOLTAGE, GYRO_RATE, MOTOR_DRIVE, MOTOR_LEFT, MOTOR_RIGHT, BatteryPlant,
    PendulumPlant, ResourceError, ResourceMap, Vehicle, make_plant, step,
)


def vehicle(**pend):
    return Vehicle(BatteryPlant(), PendulumPlant(**pend))


def test_battery_full_charge_and_discharge():
    v = Vehicle(BatteryPlant(10.0, 0.5))
    assert v.read(BATTERY_VOLTAGE, 0) == 10.0
    readings = [v.read(BATTERY_VOLTAGE, t) for t in range(0, 5000, 250)]
    assert all(b <= a for a, b in zip(readings, readings[1:]))
    assert readings[-1] == pytest.approx(10.0 - 0.5 * 4.75)
    v.battery.recharge(9.0)
    assert v.read(BATTERY_VOLTAGE, 4750) == 9.0
    assert v.read(BATTERY_VOLTAGE, 5750) == pytest.approx(8.5)


def test_pendulum_at_rest_reads_zero():
    v = vehicle()
    assert v.read(ACCEL_ANGLE, 100) == 0.0
    assert v.read(GYRO_RATE, 100) == 0.0


def test_resource_errors():
    v = vehicle()
    with pytest.raises(ResourceError):
        v.read(4242, 0)
    with pytest.raises(ResourceError):
        v.write(ACCEL_ANGLE, 1.0, 0)
    with pytest.raises(ResourceError):
        v.read(MOTOR_DRIVE, 0)
    with pytest.raises(ValueError):
        v.write(MOTOR_DRIVE, float("nan"), 0)
    hidden = Vehicle(BatteryPlant(), None, ResourceMap(visibility={BATTERY_VOLTAGE: {1, 2}}))
    assert hidden.read(BATTERY_VOLTAGE, 0, node=1) == 10.0
    with pytest.raises(ResourceError):
        hidden.read(BATTERY_VOLTAGE, 0, node=3)
    assert BATTERY_VOLTAGE not in hidden.map.accessible_from(3)
    with pytest.raises(ResourceError):
        Vehicle().read(ACCEL_ANGLE, 0)


def test_led_write_is_recorded():
    v = Vehicle()
    v.write(20, 1.0, 5)
    assert v.outputs[20] == 1.0


def test_motor_command_matches_linearized_oracle():
    theta, u, g, l, k = 0.01, 2.0, 9.81, 0.5, 1.5
    p = PendulumPlant(angle=theta, length=l, gravity=g, motor_gain=k)
    v = Vehicle(BatteryPlant(), p)
    v.write(MOTOR_DRIVE, u, 0)
    # small-angle form: l * angle'' = g * angle - k * u
    assert p.angular_accel() == pytest.approx((g * theta - k * u) / l, rel=1e-3)
    before = p.rate
    v.advance_to(1)
    assert (p.rate - before) / 1e-3 == pytest.approx((g * theta - k * u) / l, rel=1e-3)


def test_differential_motors_combine():
    p = PendulumPlant(track_width=0.2)
    v = Vehicle(BatteryPlant(), p)
    v.write(MOTOR_LEFT, 1.0, 0)
    v.write(MOTOR_RIGHT, 3.0, 0)
    assert p.drive == 2.0 and p.turn == pytest.approx(10.0)


def test_undriven_pendulum_falls():
    p = PendulumPlant(angle=0.01)
    for _ in range(2000):
        p.step(0.001)
    assert p.fallen and abs(p.angle) == pytest.approx(math.pi / 2)
    rate = p.rate
    p.step(0.001)
    assert p.fallen and p.rate == rate == 0.0


def test_step_rejects_bad_dt():
    with pytest.raises(ValueError):
        step(PendulumPlant(), 0.0)


def test_pd_feedback_keeps_it_upright_for_a_minute():
    # offline search on l * angle'' = g * angle - u: kp > g and kd > 0 stabilize
    p = PendulumPlant(angle=0.05)
    kp, kd = 30.0, 3.0
    peak = 0.0
    for _ in range(60_000):
        p.drive = kp * p.angle + kd * p.rate
        p.step(0.001)
        peak = max(peak, abs(p.angle))
    assert not p.fallen and peak < p.tip_over
    assert abs(p.angle) < 1e-3


def test_energy_drift_below_one_percent_per_minute():
    p = PendulumPlant(angle=0.3, clamp_fallen=False, tip_over=10.0)
    e0 = p.energy()
    worst = 0.0
    for _ in range(60_000):
        p.step(0.001)
        worst = max(worst, abs(p.energy() - e0))
    assert worst / abs(e0) < 0.01


def test_richardson_first_order():
    def final_angle(dt):
        p = PendulumPlant(angle=0.05, drive=0.2)
        for _ in range(round(0.5 / dt)):
            p.step(dt)
        return p.angle

    a, b, c = final_angle(0.004), final_angle(0.002), final_angle(0.001)
    ratio = (a - b) / (b - c)
    assert ratio == pytest.approx(2.0, abs=0.2)


def test_sensor_noise_is_zero_mean():
    n = 10_000
    p = PendulumPlant(accel_noise=0.05, gyro_noise=0.02, gyro_bias=0.01, gyro_drift=0.001, seed=3)
    accel = np.array([p.accel_angle() for _ in range(n)])
    gyro = np.array([p.gyro_rate() for _ in range(n)]) - 0.01
    assert abs(accel.mean()) <= 3 * 0.05 / math.sqrt(n)
    assert abs(gyro.mean()) <= 3 * 0.02 / math.sqrt(n)
    assert accel.std() == pytest.approx(0.05, rel=0.05)


def test_gyro_drift_grows_with_time():
    p = PendulumPlant(gyro_drift=0.002)
    for _ in range(1000):
        p.step(0.001)
    assert p.gyro_rate() - p.rate == pytest.approx(0.002, rel=1e-6)


def test_seeded_determinism():
    def run(seed):
        v = make_plant({"kind": "vehicle", "pendulum": {"angle": 0.02, "accel_noise": 0.03}}, seed)
        return [v.read(ACCEL_ANGLE, t) for t in range(0, 200, 10)]

    assert run(4) == run(4)
    assert run(4) != run(5)


def test_make_plant():
    v = make_plant({"kind": "battery", "battery": {"voltage": 9.5},
                    "extra": {"300": {"kind": "sensor", "value": 2.5}, "301": {"kind": "actor"}}})
    assert v.read(BATTERY_VOLTAGE, 0) == 9.5
    assert v.read(300, 0) == 2.5
    v.write(301, 1.0, 0)
    with pytest.raises(ValueError):
        make_plant({"kind": "rocket"})
    with pytest.raises(ValueError):
        make_plant({"extra": {"5": {"kind": "thing"}}})
    snap = make_plant({"kind": "vehicle"}).snapshot()
    assert {"voltage", "angle", "rate", "speed", "fallen"} <= set(snap)
