from .compact import (
    DecodeError,
    EncodedDna,
    EncodeError,
    decode_compact,
    encode_compact,
    read_adnb,
    write_adnb,
)
from .model import Dna, DnaLine, Edge, LinkTarget, Topology, f32, topology
from .text import DnaSyntaxError, parse_text, render_text
from .validate import Diagnostic, errors, validate


def load(path) -> Dna:
    """Read a DNA from ``.adna`` text or ``.adnb`` binary, by extension."""
    path = str(path)
    if path.endswith(".adnb"):
        return read_adnb(path)
    with open(path, encoding="utf-8") as fh:
        return parse_text(fh.read())


__all__ = [
    "DecodeError", "Diagnostic", "Dna", "DnaLine", "DnaSyntaxError", "Edge", "EncodeError",
    "EncodedDna", "LinkTarget", "Topology", "decode_compact", "encode_compact", "errors", "f32",
    "load", "parse_text", "read_adnb", "render_text", "topology", "validate", "write_adnb",
]
