import numpy as np
import pytest

from translab.corpus import (bump, interior_corpus, probe_bump, pw_corpus, smoothed_indicator,
                             smoothstep, standard_corpus)
from translab.grids import SpaceGrid


def test_smoothstep_c2():
    s = np.array([0.0, 1.0])
    assert np.allclose(smoothstep(s), [0, 1])
    h = 1e-4
    d1 = (smoothstep(s + h) - smoothstep(s - h)) / (2 * h)
    assert np.abs(d1).max() < 1e-6


def test_supports_are_exact():
    g = SpaceGrid(8.0, 512)
    for tf in standard_corpus(g) + interior_corpus(g) + pw_corpus(g):
        lo, hi = tf.support
        outside = (g.nodes > hi) | (g.nodes < lo)
        assert np.all(tf.values[outside] == 0)
        assert np.abs(tf.values).max() > 0


def test_standard_corpus_size():
    assert len(standard_corpus(SpaceGrid(8.0, 256))) == 10


def test_interior_vanishes_at_ends():
    g = SpaceGrid(8.0, 512)
    for tf in interior_corpus(g):
        assert np.all(tf.values[:3] == 0) and np.all(tf.values[-3:] == 0)


def test_indicator_plateau():
    x = np.linspace(0, 2, 201)
    f = smoothed_indicator(x, 1.0)
    assert np.all(f[x <= 0.5] == 1.0)
    assert np.all(f[x >= 1.0] == 0.0)


def test_probe_bump_unit_mass():
    g = SpaceGrid(8.0, 512)
    d = probe_bump(g, 2.0, 4 * g.h)
    assert np.dot(g.pairing_weights, d) == pytest.approx(1.0)


def test_bump_values():
    assert bump(np.array([0.0]), 0.0, 1.0)[0] == 1.0
