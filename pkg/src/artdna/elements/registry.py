"""Static contracts of the basic elements.

Every element is identified by a 12-bit id. The schema fixes the number of
source (input) and destination (output) channels, the ordered parameter
slots and whether the element runs dataflow-driven, time-driven or both.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

MAX_ELEMENT_ID = 4095
LINK_MULTIPLIER_ID = 0


class Mode(str, Enum):
    DATAFLOW = "dataflow"
    TIMED = "timed"
    BOTH = "both"


# Parameter slot kinds. "float" is stored as IEEE-754 single precision,
# everything else as a 32-bit signed integer.
FLOAT = "float"
INT = "int"
OP = "op"
RESOURCE = "resource"
PERIOD = "period"

INT_KINDS = frozenset({INT, OP, RESOURCE, PERIOD})


class UnknownElementError(KeyError):
    def __init__(self, element_id: int):
        super().__init__(element_id)
        self.element_id = element_id

    def __str__(self) -> str:
        return f"unknown element id {self.element_id}"


@dataclass(frozen=True)
class Slot:
    name: str
    kind: str


@dataclass(frozen=True)
class ElementSchema:
    id: int
    name: str
    src_channels: int
    dst_channels: int
    param_schema: tuple[Slot, ...]
    mode: Mode
    stateful: bool
    # source channels that must be fed for the element to do anything useful
    required_src: int = 0

    @property
    def arity(self) -> int:
        return len(self.param_schema)

    @property
    def indirect(self) -> bool:
        """More than one 32-bit slot does not fit a record and goes to the parameter region."""
        return len(self.param_schema) > 1

    def slot_index(self, name: str) -> int | None:
        for i, slot in enumerate(self.param_schema):
            if slot.name == name:
                return i
        return None

    def period_of(self, params) -> int:
        i = self.slot_index("period")
        return int(params[i]) if i is not None else 0

    def is_timed(self, params) -> bool:
        if self.mode is Mode.TIMED:
            return True
        if self.mode is Mode.BOTH:
            return self.period_of(params) > 0
        return False


# ALU opcodes; the text format uses the symbolic names.
ALU_OPS = {
    "plus": 1,
    "minus": 2,
    "mult": 3,
    "div": 4,
    "min": 5,
    "max": 6,
    "greater": 7,
    "less": 8,
    "equal": 9,
    "abs": 10,
    "neg": 11,
}
ALU_OP_NAMES = {v: k for k, v in ALU_OPS.items()}
UNARY_OPS = frozenset({ALU_OPS["abs"], ALU_OPS["neg"]})


def _s(*slots: tuple[str, str]) -> tuple[Slot, ...]:
    return tuple(Slot(n, k) for n, k in slots)


_GAIN_PERIOD = _s(("gain", FLOAT), ("period", PERIOD))

_BUILTIN = [
    ElementSchema(1, "ALU", 2, 1, _s(("op", OP)), Mode.DATAFLOW, False, 2),
    ElementSchema(10, "PID", 1, 1, _s(("p", FLOAT), ("i", FLOAT), ("d", FLOAT), ("period", PERIOD)),
                  Mode.BOTH, True, 1),
    ElementSchema(11, "P", 1, 1, _GAIN_PERIOD, Mode.BOTH, True, 1),
    ElementSchema(12, "I", 1, 1, _GAIN_PERIOD, Mode.BOTH, True, 1),
    ElementSchema(13, "D", 1, 1, _GAIN_PERIOD, Mode.BOTH, True, 1),
    ElementSchema(40, "Multiplexer", 9, 1, (), Mode.DATAFLOW, False, 1),
    ElementSchema(41, "Demultiplexer", 2, 8, (), Mode.DATAFLOW, False, 2),
    ElementSchema(42, "Level", 1, 16, _s(("high", FLOAT), ("step", FLOAT), ("low", FLOAT)),
                  Mode.DATAFLOW, False, 1),
    ElementSchema(43, "Limit", 1, 1, _s(("lo", FLOAT), ("hi", FLOAT)), Mode.DATAFLOW, False, 1),
    ElementSchema(44, "Hysteresis", 1, 1, _s(("low", FLOAT), ("high", FLOAT)), Mode.DATAFLOW, True, 1),
    ElementSchema(45, "Threshold", 1, 1, _s(("threshold", FLOAT),), Mode.DATAFLOW, False, 1),
    ElementSchema(50, "Complementary Filter", 2, 1, _s(("alpha", FLOAT), ("period", PERIOD)),
                  Mode.BOTH, True, 2),
    ElementSchema(70, "Constant", 0, 1, _s(("value", FLOAT), ("period", PERIOD)), Mode.TIMED, False, 0),
    ElementSchema(71, "Counter", 1, 1, _s(("period", PERIOD),), Mode.BOTH, True, 0),
    ElementSchema(500, "Sensor", 0, 1, _s(("resource", RESOURCE), ("period", PERIOD)), Mode.TIMED, False, 0),
    ElementSchema(600, "Actor", 1, 0, _s(("resource", RESOURCE),), Mode.DATAFLOW, False, 1),
    ElementSchema(997, "Stop", 1, 0, (), Mode.DATAFLOW, False, 1),
    ElementSchema(998, "DNA Checker", 0, 1, _s(("period", PERIOD),), Mode.TIMED, False, 0),
    ElementSchema(999, "DNA Logger", 8, 0, (), Mode.DATAFLOW, False, 0),
]

BUILTIN_IDS = frozenset(s.id for s in _BUILTIN)

_registry: dict[int, ElementSchema] = {s.id: s for s in _BUILTIN}


def schema_of(element_id: int) -> ElementSchema:
    try:
        return _registry[element_id]
    except KeyError:
        raise UnknownElementError(element_id) from None


def is_registered(element_id: int) -> bool:
    return element_id in _registry


def register_schema(schema: ElementSchema) -> None:
    """Extension point for application-specific element ids."""
    if not 0 < schema.id <= MAX_ELEMENT_ID:
        raise ValueError(f"element id {schema.id} outside 1..{MAX_ELEMENT_ID}")
    if schema.id in _registry:
        raise ValueError(f"element id {schema.id} already registered")
    _registry[schema.id] = schema


def unregister_schema(element_id: int) -> None:
    if element_id in BUILTIN_IDS:
        raise ValueError("built-in elements cannot be removed")
    _registry.pop(element_id, None)


def all_schemas() -> list[ElementSchema]:
    return sorted(_registry.values(), key=lambda s: s.id)
