"""Shared scenario builders for the test suite."""

import numpy as np
import pytest

from ofwdyn import sets, streams


@pytest.fixture
def unit_ball2():
    return sets.ball([0.0, 0.0], 1.0, set_strong_convexity=1.0)


@pytest.fixture
def box2():
    return sets.box([-1.0, -1.0], [1.0, 1.0])


@pytest.fixture
def simplex3():
    return sets.simplex(3)


@pytest.fixture
def l1_2():
    return sets.l1_ball(2, 1.0)


def every_set(d: int = 2):
    """One instance of each set kind in dimension d (simplex needs d >= 2)."""
    return [
        sets.ball(np.zeros(d), 1.0, set_strong_convexity=1.0),
        sets.box(-np.ones(d), np.ones(d)),
        sets.simplex(d),
        sets.l1_ball(d, 1.0),
    ]


def static_stream(set_, alpha=2.0, T=10, center=None, seed=3):
    schedule = streams.DriftSchedule(kind=streams.STATIC, seed=seed)
    return streams.make_stream(
        streams.DRIFTING, alpha, schedule, set_, T, base_center=center
    )


def walk_stream(set_, alpha=1.0, T=60, magnitude=0.05, seed=5, interior=False, r=None,
                center=None):
    schedule = streams.DriftSchedule(kind=streams.RANDOM_WALK, magnitude=magnitude, seed=seed)
    return streams.make_stream(
        streams.DRIFTING, alpha, schedule, set_, T,
        base_center=center, interior=interior, interior_radius=r,
    )


def rank1_stream(set_, alpha=1.0, T=20, seed=9, direction=(1.0, -0.5), base_target=0.2,
                 magnitude=0.3):
    schedule = streams.DriftSchedule(
        kind=streams.PIECEWISE, magnitude=magnitude, period=5, seed=seed
    )
    return streams.make_stream(
        streams.RANK1, alpha, schedule, set_, T,
        base_target=base_target, direction=direction,
    )
