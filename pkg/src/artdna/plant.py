"""Simulated physical environment behind Sensor/Actor resource ids.

Two plants: a battery pack and a two-wheeled self-balancing vehicle
(planar wheeled inverted pendulum). :class:`Vehicle` combines both with
the LEDs, external setpoints and rangefinders of the demonstrator into
one resource table.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Resource ids. Sensors are readable, actors writable.
BATTERY_VOLTAGE = 1
ACCEL_ANGLE = 100
GYRO_RATE = 101
ODOMETER_LEFT = 102
ODOMETER_RIGHT = 103
SPEED_SETPOINT = 104
DIRECTION_SETPOINT = 105
RANGE_LEFT = 110
RANGE_RIGHT = 111
RANGE_MID = 112
MOTOR_DRIVE = 200
MOTOR_DIRECTION = 201
MOTOR_LEFT = 202
MOTOR_RIGHT = 203
LED_FIRST, LED_LAST = 20, 39

SENSOR, ACTOR = "sensor", "actor"


class ResourceError(LookupError):
    pass


@dataclass(frozen=True)
class Resource:
    id: int
    name: str
    kind: str


def _default_resources() -> dict[int, Resource]:
    table = [
        (BATTERY_VOLTAGE, "battery.voltage", SENSOR),
        (ACCEL_ANGLE, "pendulum.accel_angle", SENSOR),
        (GYRO_RATE, "pendulum.gyro_rate", SENSOR),
        (ODOMETER_LEFT, "odometer_left", SENSOR),
        (ODOMETER_RIGHT, "odometer_right", SENSOR),
        (SPEED_SETPOINT, "external.speed_setpoint", SENSOR),
        (DIRECTION_SETPOINT, "external.direction_setpoint", SENSOR),
        (RANGE_LEFT, "rangefinder_left", SENSOR),
        (RANGE_RIGHT, "rangefinder_right", SENSOR),
        (RANGE_MID, "rangefinder_mid", SENSOR),
        (MOTOR_DRIVE, "motor.drive", ACTOR),
        (MOTOR_DIRECTION, "motor.direction", ACTOR),
        (MOTOR_LEFT, "motor.left", ACTOR),
        (MOTOR_RIGHT, "motor.right", ACTOR),
    ]
    res = {rid: Resource(rid, name, kind) for rid, name, kind in table}
    for rid in range(LED_FIRST, LED_LAST + 1):
        res[rid] = Resource(rid, f"led{rid - LED_FIRST}", ACTOR)
    return res


class ResourceMap:
    """Resource id -> plant endpoint, plus which nodes may reach each resource.

    ``visibility`` maps a resource id to the node ids that can access it;
    resources missing from ``visibility`` are reachable from every node.
    """

    def __init__(self, resources: dict[int, Resource] | None = None,
                 visibility: dict[int, set[int]] | None = None):
        self.resources = resources if resources is not None else _default_resources()
        self.visibility = {r: frozenset(v) for r, v in (visibility or {}).items()}

    def visible(self, resource: int, node: int) -> bool:
        vis = self.visibility.get(resource)
        return vis is None or node in vis

    def accessible_from(self, node: int) -> frozenset[int]:
        return frozenset(r for r in self.resources if self.visible(r, node))

    def lookup(self, resource: int, kind: str, node: int | None = None) -> Resource:
        res = self.resources.get(resource)
        if res is None:
            raise ResourceError(f"unmapped resource {resource}")
        if res.kind != kind:
            verb = "read" if kind == SENSOR else "write"
            raise ResourceError(f"cannot {verb} {res.kind} resource {resource} ({res.name})")
        if node is not None and not self.visible(resource, node):
            raise ResourceError(f"resource {resource} ({res.name}) not visible from node {node}")
        return res


@dataclass
class BatteryPlant:
    voltage: float = 10.0
    discharge_rate: float = 0.0005  # V/s

    def step(self, dt: float) -> "BatteryPlant":
        self.voltage = max(0.0, self.voltage - self.discharge_rate * dt)
        return self

    def recharge(self, voltage: float) -> None:
        self.voltage = voltage


@dataclass
class PendulumPlant:
    """Planar wheeled inverted pendulum.

    angle is measured from the vertical, positive forward. The wheel base
    accelerates with ``motor_gain * u`` (m/s^2 per unit command) and the
    pendulum obeys ``l * angle'' = g * sin(angle - mass_offset) - a * cos(angle)``.
    """

    angle: float = 0.0
    rate: float = 0.0
    speed: float = 0.0
    position: float = 0.0
    heading: float = 0.0
    length: float = 0.5
    gravity: float = 9.81
    motor_gain: float = 1.0
    motor_limit: float = 20.0
    wheel_friction: float = 0.0
    mass_offset: float = 0.0
    track_width: float = 0.2
    tip_over: float = 0.6
    accel_noise: float = 0.0
    gyro_noise: float = 0.0
    gyro_bias: float = 0.0  # rad/s
    gyro_drift: float = 0.0  # rad/s of extra bias gained per second
    clamp_fallen: bool = True
    drive: float = 0.0
    turn: float = 0.0
    fallen: bool = False
    t: float = 0.0
    seed: int = 0
    rng: np.random.Generator = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.rng is None:
            self.rng = np.random.default_rng(self.seed)

    def wheel_accel(self) -> float:
        u = min(max(self.drive, -self.motor_limit), self.motor_limit)
        return self.motor_gain * u - self.wheel_friction * self.speed

    def angular_accel(self) -> float:
        a = self.wheel_accel()
        return (self.gravity * math.sin(self.angle - self.mass_offset) - a * math.cos(self.angle)) / self.length

    def energy(self) -> float:
        """Mechanical energy per unit mass of the undriven pendulum."""
        return 0.5 * self.length * self.rate ** 2 + self.gravity * math.cos(self.angle - self.mass_offset)

    def step(self, dt: float) -> "PendulumPlant":
        if dt <= 0:
            raise ValueError("dt must be > 0")
        if self.fallen and self.clamp_fallen:
            self.t += dt
            return self
        # semi-implicit Euler: velocities first, positions from the new velocities
        alpha = self.angular_accel()
        a = self.wheel_accel()
        self.rate += alpha * dt
        self.speed += a * dt
        self.angle += self.rate * dt
        self.position += self.speed * dt
        self.heading += self.turn * dt
        self.t += dt
        if abs(self.angle) > self.tip_over:
            self.fallen = True
            if self.clamp_fallen:
                self.angle = math.copysign(math.pi / 2, self.angle)
                self.rate = 0.0
                self.speed = 0.0
        return self

    def accel_angle(self) -> float:
        return self.angle + (self.rng.normal(0.0, self.accel_noise) if self.accel_noise else 0.0)

    def gyro_rate(self) -> float:
        noise = self.rng.normal(0.0, self.gyro_noise) if self.gyro_noise else 0.0
        return self.rate + self.gyro_bias + self.gyro_drift * self.t + noise

    def odometer(self, side: int) -> float:
        return self.position + side * 0.5 * self.track_width * self.heading


def step(plant, dt: float):
    return plant.step(dt)


class Vehicle:
    """Plant binding for the simulator: resource reads/writes at integer-ms times."""

    def __init__(self, battery: BatteryPlant | None = None, pendulum: PendulumPlant | None = None,
                 resources: ResourceMap | None = None, speed_setpoint: float = 0.0,
                 direction_setpoint: float = 0.0, ranges: tuple[float, float, float] = (1.0, 1.0, 1.0),
                 dt_ms: int = 1, fixed: dict[int, float] | None = None):
        self.battery = battery or BatteryPlant()
        self.pendulum = pendulum
        self.map = resources or ResourceMap()
        self.speed_setpoint = speed_setpoint
        self.direction_setpoint = direction_setpoint
        self.ranges = ranges
        self.dt_ms = dt_ms
        self.fixed = dict(fixed or {})  # constant-valued extra sensors
        self.now = 0
        self.outputs: dict[int, float] = {}

    def advance_to(self, t: int) -> None:
        while self.now < t:
            h = min(self.dt_ms, t - self.now)
            self.battery.step(h / 1000.0)
            if self.pendulum is not None:
                self.pendulum.step(h / 1000.0)
            self.now += h

    def read(self, resource: int, t: int, node: int | None = None) -> float:
        self.map.lookup(resource, SENSOR, node)
        self.advance_to(t)
        p = self.pendulum
        if resource in self.fixed:
            return self.fixed[resource]
        if resource == BATTERY_VOLTAGE:
            return self.battery.voltage
        if resource == SPEED_SETPOINT:
            return self.speed_setpoint
        if resource == DIRECTION_SETPOINT:
            return self.direction_setpoint
        if resource in (RANGE_LEFT, RANGE_RIGHT, RANGE_MID):
            return self.ranges[resource - RANGE_LEFT]
        if p is None:
            raise ResourceError(f"resource {resource} needs the pendulum plant")
        if resource == ACCEL_ANGLE:
            return p.accel_angle()
        if resource == GYRO_RATE:
            return p.gyro_rate()
        if resource == ODOMETER_LEFT:
            return p.odometer(-1)
        if resource == ODOMETER_RIGHT:
            return p.odometer(+1)
        raise ResourceError(f"resource {resource} has no plant endpoint")

    def write(self, resource: int, value: float, t: int, node: int | None = None) -> None:
        self.map.lookup(resource, ACTOR, node)
        if not math.isfinite(value):
            raise ValueError(f"non-finite value written to resource {resource}")
        self.advance_to(t)
        self.outputs[resource] = value
        p = self.pendulum
        if p is None:
            return
        if resource == MOTOR_DRIVE:
            p.drive = value
        elif resource == MOTOR_DIRECTION:
            p.turn = value
        elif resource in (MOTOR_LEFT, MOTOR_RIGHT):
            left = self.outputs.get(MOTOR_LEFT, 0.0)
            right = self.outputs.get(MOTOR_RIGHT, 0.0)
            p.drive = 0.5 * (left + right)
            p.turn = (right - left) / p.track_width

    def snapshot(self) -> dict:
        snap = {"voltage": self.battery.voltage}
        p = self.pendulum
        if p is not None:
            snap.update(angle=p.angle, rate=p.rate, speed=p.speed, position=p.position,
                        drive=p.drive, fallen=p.fallen)
        return snap


def make_plant(cfg: dict | None, seed: int = 0) -> Vehicle:
    """Build a plant from the ``plant`` block of a scenario file."""
    cfg = dict(cfg or {})
    kind = cfg.pop("kind", "battery")
    visibility = {int(k): set(v) for k, v in cfg.pop("visibility", {}).items()}
    battery = BatteryPlant(**cfg.pop("battery", {}))
    pendulum = None
    if kind == "vehicle":
        pendulum = PendulumPlant(seed=seed, **cfg.pop("pendulum", {}))
    elif kind != "battery":
        raise ValueError(f"unknown plant kind {kind!r}")
    ranges = tuple(cfg.pop("ranges", (1.0, 1.0, 1.0)))
    resources = _default_resources()
    fixed = {}
    # extra resources: {"<id>": {"name": ..., "kind": "sensor"|"actor", "value": ...}}
    for key, d in cfg.pop("extra", {}).items():
        rid = int(key)
        kind = d.get("kind", SENSOR)
        if kind not in (SENSOR, ACTOR):
            raise ValueError(f"resource {rid}: kind must be {SENSOR!r} or {ACTOR!r}")
        resources[rid] = Resource(rid, d.get("name", f"extra{rid}"), kind)
        if kind == SENSOR:
            fixed[rid] = float(d.get("value", 0.0))
    return Vehicle(battery, pendulum, ResourceMap(resources, visibility), ranges=ranges, fixed=fixed, **cfg)
