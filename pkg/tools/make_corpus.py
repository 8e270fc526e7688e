"""Regenerate the bundled sample DNAs in src/artdna/corpus/.

Lines are written with symbolic labels and resolved to line numbers
here, so the balanced variants can reuse the balancing core verbatim.
Parameter values marked [DERIVED] are not given by the block diagrams and
were chosen for the simulated plant (gains found by simulation runs).
"""
from __future__ import annotations

import sys
from pathlib import Path

from artdna.dna import Dna, DnaLine, LinkTarget, encode_compact, render_text, validate
from artdna.elements.registry import ALU_OPS

OUT = Path(__file__).resolve().parent.parent / "src" / "artdna" / "corpus"

# resource ids, see artdna.plant
BATTERY, ACCEL, GYRO, ODO_L, ODO_R, SPEED_SP, DIR_SP = 1, 100, 101, 102, 103, 104, 105
RANGE_L, RANGE_R, RANGE_M = 110, 111, 112
MOTOR, DIRECTION, MOTOR_L, MOTOR_R = 200, 201, 202, 203
LED = 20  # first LED

# balancer constants [DERIVED]
INNER_PID = (40.0, 0.0, 3.0, 15)
OUTER_PID = (0.05, 0.02, 0.0, 100)
FILTER_ALPHA = 0.96
MASS_OFFSET = 0.02
ODO_PERIOD = 50
IMU_PERIOD = 15


def L(label, eid, params=(), links=(), comment=None):
    return (label, eid, tuple(params), tuple(links), comment)


def op(name):
    return ALU_OPS[name]


def resolve(layout) -> Dna:
    """Labels to line numbers; links to labels absent from ``layout`` are left out."""
    index = {s[0]: i for i, s in enumerate(layout)}
    if len(index) != len(layout):
        raise ValueError("duplicate label")
    lines = []
    for label, eid, params, links, comment in layout:
        targets = []
        for dst_ch, target, src_ch in links:
            if target not in index:
                continue
            targets.append(LinkTarget(dst_ch, index[target], src_ch))
        lines.append(DnaLine(eid, tuple(targets), params, comment))
    return Dna(tuple(lines))


def battery():
    leds = [L(f"led{k}", 600, (LED + k,), (), f"bar LED {k}") for k in range(1, 9)]
    return [
        L("sensor", 500, (BATTERY, 100), [(1, "level", 1)], "battery voltage, every 100 ms"),
        L("checker", 998, (100,), [(1, "green", 1)], "DNA checker, every 100 ms"),
        L("level", 42, (10.0, 0.25, 8.0), [(k, f"led{k}", 1) for k in range(1, 9)],
          "level discriminator: high 10 V, step 0.25 V, low 8 V"),
        L("green", 600, (LED,), (), "green LED: DNA complete"),
        *leds,
    ]


def balance_core(speed_sp=True, direction=True):
    """The self-balancing DNA; without setpoint inputs it is the 17-line core."""
    layout = [
        L("odoL", 500, (ODO_L, ODO_PERIOD), [(1, "dL", 1)], "odometer left"),
        L("odoR", 500, (ODO_R, ODO_PERIOD), [(1, "dR", 1)], "odometer right"),
    ]
    if speed_sp:
        layout.append(L("speedSp", 500, (SPEED_SP, 100), [(1, "speedErr", 1)], "speed setpoint (external)"))
    layout += [
        L("accel", 500, (ACCEL, IMU_PERIOD), [(1, "filter", 1)], "accelerometer angle"),
        L("gyro", 500, (GYRO, IMU_PERIOD), [(1, "filter", 2)], "gyroscope rate"),
    ]
    if direction:
        layout.append(L("dirSp", 500, (DIR_SP, 100), [(1, "dirAct", 1)], "direction setpoint (external)"))
    layout += [
        L("dL", 13, (0.5, 0), [(1, "speed", 1)], "half the left wheel speed"),
        L("dR", 13, (0.5, 0), [(1, "speed", 2)], "half the right wheel speed"),
        L("filter", 50, (FILTER_ALPHA, IMU_PERIOD), [(1, "angleErr", 1)], "complementary filter [DERIVED alpha]"),
        L("speed", 1, (op("plus"),), [(1, "speedErr", 2)], "average wheel speed"),
        L("angleErr", 1, (op("minus"),), [(1, "inner", 1)], "angle - target angle"),
        L("speedErr", 1, (op("minus"),), [(1, "outer", 1)], "speed setpoint - speed"),
        L("checker", 998, (100,), [(1, "led", 1)], "DNA checker"),
        L("inner", 10, INNER_PID, [(1, "motor", 1)], "angle PID, 15 ms [DERIVED gains]"),
        L("offset", 70, (MASS_OFFSET, 100), [(1, "target", 2)], "mass center offset [DERIVED]"),
        L("outer", 10, OUTER_PID, [(1, "target", 1)], "speed PID, 100 ms [DERIVED gains]"),
        L("led", 600, (LED,), (), "LED: DNA complete"),
        L("motor", 600, (MOTOR,), (), "drive motor"),
    ]
    if direction:
        layout.append(L("dirAct", 600, (DIRECTION,), (), "direction actor"))
    layout.append(L("target", 1, (op("plus"),), [(1, "angleErr", 2)], "target angle incl. mass center"))
    return layout


def agv_parts():
    head = [
        L("rL", 500, (RANGE_L, 50), [(1, "limL", 1), (1, "minLR", 1)], "rangefinder left"),
        L("rR", 500, (RANGE_R, 50), [(1, "limR", 1), (1, "minLR", 2)], "rangefinder right"),
        L("rM", 500, (RANGE_M, 50), [(1, "clear", 1), (1, "minAll", 2)], "rangefinder mid"),
        L("agvChecker", 998, (100,), [(1, "agvLed", 1)], "DNA checker"),
        L("limL", 43, (0.0, 2.0), [(1, "diff", 1)], "clamp left range"),
        L("limR", 43, (0.0, 2.0), [(1, "diff", 2)], "clamp right range"),
        L("clear", 44, (0.2, 0.4), [(1, "sel", 1)], "mid range clear (1) or blocked (0)"),
        L("minLR", 1, (op("min"),), [(1, "minAll", 1)], "nearest side range"),
        L("moving", 45, (0.05,), [(1, "moveLed", 1)], "vehicle moving"),
        L("diff", 1, (op("minus"),), [(1, "steerLim", 1)], "left - right"),
        L("steerLim", 43, (-1.0, 1.0), [(1, "steer", 1)], "steering error limit"),
        L("sel", 1, (op("plus"),), [(1, "evade", 1), (1, "mux", 1)], "1 blocked, 2 clear"),
        L("minAll", 1, (op("min"),), [(1, "speedLim", 1)], "nearest range"),
        L("steer", 1, (op("mult"),), [(1, "steerOut", 1)], "steering gain"),
        L("evade", 41, (), [(1, "mux", 2)], "evasive turn only when blocked"),
        L("one", 70, (1.0, 50), [(1, "sel", 2)], "constant 1"),
        L("speedLim", 43, (0.0, 0.6), [(1, "left", 1), (1, "right", 1), (1, "moving", 1), (1, "spLim", 1)],
          "vehicle speed"),
        L("steerOut", 43, (-0.5, 0.5), [(1, "mux", 3)], "steering limit"),
        L("mux", 40, (), [(1, "turn", 1)], "evasive or normal steering"),
        L("turn", 43, (-1.0, 1.0), [(1, "left", 2), (1, "right", 2), (1, "dirAct", 1)], "turn command"),
        L("moveLed", 600, (LED + 1,), (), "LED: moving"),
        L("rate", 70, (0.8, 50), [(1, "evade", 2), (1, "steer", 2)], "evasive turn rate / steering gain"),
    ]
    motors = [
        L("left", 1, (op("minus"),), [(1, "limLeft", 1)], "left motor = speed - turn"),
        L("right", 1, (op("plus"),), [(1, "limRight", 1)], "right motor = speed + turn"),
        L("limLeft", 43, (-1.0, 1.0), [(1, "motorL", 1)], "left motor limit"),
        L("limRight", 43, (-1.0, 1.0), [(1, "motorR", 1)], "right motor limit"),
        L("agvLed", 600, (LED,), (), "LED: DNA complete"),
        L("motorL", 600, (MOTOR_L,), (), "left motor"),
        L("motorR", 600, (MOTOR_R,), (), "right motor"),
    ]
    return head, motors


def agv():
    head, motors = agv_parts()
    return head + motors


def balanced_agv():
    head, _ = agv_parts()
    extra = [
        L("agvLed", 600, (LED + 2,), (), "LED: DNA complete"),
        L("spLim", 43, (0.0, 0.3), [(1, "speedErr", 1)], "AGV speed as balancing speed setpoint"),
        L("dirAct", 600, (DIRECTION,), (), "direction actor"),
    ]
    return balance_core(speed_sp=False, direction=False) + head + extra


def follower_parts():
    head = [
        L("rL", 500, (RANGE_L, 50), [(1, "limL", 1), (1, "minLR", 1)], "rangefinder left"),
        L("rR", 500, (RANGE_R, 50), [(1, "limR", 1), (1, "minLR", 2)], "rangefinder right"),
        L("rM", 500, (RANGE_M, 50), [(1, "dist", 2)], "rangefinder mid"),
        L("fChecker", 998, (100,), [(1, "fLed", 1)], "DNA checker"),
        L("limL", 43, (0.0, 2.0), [(1, "diff", 1)], "clamp left range"),
        L("limR", 43, (0.0, 2.0), [(1, "diff", 2)], "clamp right range"),
        L("minLR", 1, (op("min"),), [(1, "dist", 1)], "nearest side range"),
        L("fLed", 600, (LED,), (), "LED: DNA complete"),
        L("diff", 1, (op("minus"),), [(1, "dSteer", 1), (1, "pSteer", 1)], "left - right"),
        L("dSteer", 13, (0.1, 0), [(1, "steer", 2)], "steering D part"),
        L("want", 70, (0.3, 50), [(1, "distErr", 2)], "desired distance 30 cm"),
        L("dist", 1, (op("min"),), [(1, "distErr", 1), (1, "near", 1)], "distance to object"),
        L("pSteer", 43, (-1.0, 1.0), [(1, "steer", 1)], "steering P part"),
        L("distErr", 1, (op("minus"),), [(1, "pid", 1)], "distance error"),
        L("steer", 1, (op("plus"),), [(1, "steerLim", 1)], "steering command"),
        L("pid", 10, (1.0, 0.1, 0.05, 50), [(1, "motor", 1)], "distance PID"),
        L("steerLim", 43, (-0.5, 0.5), [(1, "dirAct", 1), (1, "turning", 1)], "steering limit"),
        L("near", 45, (0.15,), (), "object very near (indicator, no actor in this DNA)"),
        L("dirAct", 600, (DIRECTION,), (), "direction actor"),
        L("turning", 44, (0.1, 0.2), (), "turning (indicator, no actor in this DNA)"),
    ]
    motor = [L("motor", 600, (MOTOR,), (), "drive motor")]
    return head, motor


def follower():
    head, motor = follower_parts()
    return head + motor


def _add_link(layout, label, link):
    return [(lb, e, p, lk + ((link,) if lb == label else ()), c) for lb, e, p, lk, c in layout]


def balanced_follower():
    head, _ = follower_parts()
    # the distance PID now sets the balancing speed instead of driving the motor
    head = [(lb, e, p, tuple((c, "spLim" if t == "motor" else t, s) for c, t, s in lk), cm)
            for lb, e, p, lk, cm in head]
    head = _add_link(head, "distErr", (1, "atDist", 1))
    core = _add_link(balance_core(speed_sp=False, direction=False), "filter", (1, "tilt", 1))
    extra = [
        L("spLim", 43, (-0.3, 0.3), [(1, "speedErr", 1)], "distance PID output as balancing speed setpoint"),
        L("tilt", 44, (0.15, 0.25), [(1, "tiltLed", 1)], "tilt warning"),
        L("tiltLed", 600, (LED + 3,), (), "LED: tilt warning"),
        L("atDist", 45, (0.05,), [(1, "atDistLed", 1)], "distance error small"),
        L("atDistLed", 600, (LED + 4,), (), "LED: at distance"),
    ]
    return core + head + extra


def brake():
    return [
        L("pedal", 500, (120, 10), [(1, "pressed", 1), (1, "err", 1)], "brake pedal position"),
        L("pressed", 45, (0.05,), [(1, "lightAct", 1)], "pedal pressed"),
        L("lightAct", 600, (30,), (), "brake light (importance 5)"),
        L("wheel", 500, (121, 10), [(1, "err", 2)], "wheel deceleration"),
        L("err", 1, (op("minus"),), [(1, "ctrl", 1)], "demanded - actual deceleration"),
        L("ctrl", 10, (2.0, 0.5, 0.0, 10), [(1, "brakeAct", 1)], "brake controller"),
        L("brakeAct", 600, (210,), (), "brake actor (importance 9)"),
        L("horn", 500, (122, 50), [(1, "hornAct", 1)], "horn button"),
        L("hornAct", 600, (31,), (), "horn (not seeded)"),
    ]


FIXTURES = {
    "battery": battery,
    "balancer": lambda: balance_core(),
    "agv": agv,
    "balanced_agv": balanced_agv,
    "follower": follower,
    "balanced_follower": balanced_follower,
    "brake": brake,
}

HEADERS = {
    "battery": "Battery indicator: voltage sensor -> level discriminator -> LED bar, plus build LED.",
    "balancer": "Self-balancing vehicle: cascaded speed (100 ms) and angle (15 ms) PID loops.",
    "agv": "Autonomous guided vehicle: rangefinder steering, evasive turn, direct motor control.",
    "balanced_agv": "Self-balancing core (lines 1-17) driven by the AGV logic (lines 18-42).",
    "follower": "Follower: keeps 30 cm to an object ahead and steers towards it.",
    "balanced_follower": "Self-balancing core (lines 1-17) driven by the follower logic (lines 18-42).",
    "brake": "Brake example for importance backtracking: pedal feeds brake light and brake.",
}


def main() -> int:
    ok = True
    for name, fn in FIXTURES.items():
        dna = resolve(fn())
        bad = [d for d in validate(dna) if d.severity == "error"]
        for d in validate(dna):
            print(f"{name}: {d}", file=sys.stderr)
        ok &= not bad
        header = f"// {HEADERS[name]}\n// [DERIVED] parameters are reconstructions, see comments.\n"
        (OUT / f"{name}.adna").write_text(header + render_text(dna), encoding="utf-8")
        (OUT / f"{name}.adnb").write_bytes(encode_compact(dna).to_bytes())
        print(f"{name}: {dna.element_count()} elements, {dna.distinct_elements()} distinct, "
              f"{len(encode_compact(dna).to_bytes())} bytes")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
