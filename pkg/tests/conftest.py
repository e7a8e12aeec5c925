"""Shared corpus builders and oracle helpers."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from paircert import GeneratorConfig, Params, generate_instance


def make_corpus(seed: int, count: int, **config_overrides):
    """Deterministic list of (system, params) instances."""
    cfg = GeneratorConfig(seed=seed, **config_overrides)
    return [generate_instance(cfg, i) for i in range(count)]


def small_params(**overrides) -> Params:
    base = dict(
        epsilon=Fraction(1, 4),
        C=Fraction(1),
        t=Fraction(10),
        K=Fraction(0),
        p0=100,
        precision_bits=256,
    )
    base.update(overrides)
    return Params(**base)


@pytest.fixture
def rng():
    return random.Random(20250809)
