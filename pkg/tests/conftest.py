from __future__ import annotations

from importlib import resources
from pathlib import Path

import pytest

from artdna.dna import load

CORPUS = Path(str(resources.files("artdna") / "corpus"))
SAMPLES = ("battery", "balancer", "agv", "balanced_agv", "follower", "balanced_follower")


def corpus_dna(name: str):
    return load(CORPUS / f"{name}.adna")


@pytest.fixture
def battery():
    return corpus_dna("battery")


@pytest.fixture
def balancer():
    return corpus_dna("balancer")
