from __future__ import annotations

import pytest

from artdna.dna import Dna, DnaLine, LinkTarget, errors, parse_text, topology, validate
from conftest import SAMPLES, corpus_dna


def messages(dna):
    return [str(d) for d in errors(validate(dna))]


def test_dangling_reference():
    dna = parse_text("500 (1:99.1) 1 100\n" + "600 () 20\n" * 11)
    msgs = messages(dna)
    assert any("dangling reference" in m and m.startswith("line 1") for m in msgs)


def test_alu_has_two_source_channels():
    dna = parse_text("70 (1:2.3) 1 10\n1 () plus")
    assert any("2 source channels" in m for m in messages(dna))


@pytest.mark.parametrize("name", SAMPLES + ("brake",))
def test_corpus_has_no_errors(name):
    assert errors(validate(corpus_dna(name))) == []


@pytest.mark.parametrize("src, fragment", [
    ("10 () 1 2 3", "takes 4 parameters"),
    ("500 () 1 0", "needs a period"),
    ("70 (1:1.1 3:1.1) 1 10\n600 () 1", "not contiguous"),
    ("42 () 8 0.25 10", "high > low"),
    ("43 () 3 1", "lower bound"),
    ("123 ()", "unknown element id"),
    ("1 () 99", "unknown ALU operation"),
    ("70 (2:2.1) 1 10\n600 () 1", "not contiguous"),
])
def test_param_and_channel_errors(src, fragment):
    assert any(fragment in m for m in messages(parse_text(src)))


def test_reserved_id_zero():
    dna = Dna((DnaLine(0, (), ()),))
    assert any("reserved" in m for m in messages(dna))


def test_unfed_input_is_a_warning_only():
    dna = parse_text("1 () plus")
    diags = validate(dna)
    assert diags and not errors(diags)
    assert diags[0].line == 1


def test_diagnostics_are_1_based():
    dna = parse_text("70 () 1 10\n70 (1:5.1) 1 10")
    assert errors(validate(dna))[0].line == 2


def test_topology_examples():
    chain = parse_text("500 (1:2.1) 1 10\n11 (1:3.1) 1.0 0\n600 () 200")
    assert len(topology(chain).edges) == 2
    fan = parse_text("500 (1:2.1 1:3.1) 1 10\n600 () 20\n600 () 21")
    topo = topology(fan)
    assert [(e.src, e.dst_channel) for e in topo.edges] == [(0, 1), (0, 1)]
    assert topo.successors(0) == [1, 2]
    empty = topology(Dna())
    assert empty.nodes == [] and empty.edges == []


def test_topology_one_edge_per_link(balancer):
    assert len(topology(balancer).edges) == sum(len(ln.links) for ln in balancer.lines)
    assert LinkTarget(1, 0, 1) < LinkTarget(2, 0, 1)
