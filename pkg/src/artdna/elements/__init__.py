from .behavior import (
    FRESH,
    LATEST,
    NULL_IO,
    ElementIO,
    ElementState,
    SchedulingError,
    Signal,
    init_state,
    on_input,
    on_tick,
)
from .registry import (
    ALU_OPS,
    ElementSchema,
    Mode,
    Slot,
    UnknownElementError,
    all_schemas,
    is_registered,
    register_schema,
    schema_of,
)

__all__ = [
    "ALU_OPS", "ElementIO", "ElementSchema", "ElementState", "FRESH", "LATEST", "Mode", "NULL_IO",
    "SchedulingError", "Signal", "Slot", "UnknownElementError", "all_schemas", "init_state",
    "is_registered", "on_input", "on_tick", "register_schema", "schema_of",
]
