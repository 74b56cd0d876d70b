"""Random models, gambles and selections for tests, experiments and the
gap search. All functions take a ``numpy.random.Generator``."""

from __future__ import annotations

import numpy as np

from .chain import ChainModel, LowerTransitionOperator, local_model
from .credal import CredalSet, lower_expectation
from .tree import NGamble, Selection, situations


def random_pmf(rng, n_states, zero_prob=0.0):
    """Dirichlet(1) pmf; each entry is zeroed with probability ``zero_prob``
    (at least one entry survives)."""
    p = rng.dirichlet(np.ones(n_states))
    if zero_prob > 0:
        keep = rng.random(n_states) >= zero_prob
        keep[rng.integers(n_states)] = True
        p = np.where(keep, p, 0.0)
        p /= p.sum()
    # exact normalization to stay well inside the 1e-12 pmf tolerance
    p[np.argmax(p)] += 1.0 - p.sum()
    return p


def random_credal_set(rng, n_states, max_extremes=3, zero_prob=0.0):
    k = int(rng.integers(1, max_extremes + 1))
    return CredalSet([random_pmf(rng, n_states, zero_prob) for _ in range(k)])


def random_model(rng, n_states, kind="stationary", max_extremes=3, zero_prob=0.0, n_operators=3):
    """A random model; ``max_extremes=1`` gives a precise one."""

    def K():
        return random_credal_set(rng, n_states, max_extremes, zero_prob)

    def op():
        return LowerTransitionOperator([K() for _ in range(n_states)])

    states = [chr(ord("a") + i) for i in range(n_states)]
    if kind == "stationary":
        return ChainModel.stationary(states, K(), op())
    if kind == "time_varying":
        return ChainModel.time_varying(states, K(), [op() for _ in range(n_operators)])
    if kind == "general":
        local = {}
        for length in (1, 2):
            for s in situations(n_states, length):
                if rng.random() < 0.5:
                    local[s] = K()
        return ChainModel.general(states, K(), local, K())
    raise ValueError(f"unknown kind {kind!r}")


def random_ngamble(rng, n_states, n, low=-1.0, high=1.0):
    return NGamble(n_states, n, rng.uniform(low, high, size=n_states**n))


def random_selection(rng, n_states, depth, scale=1.0):
    return Selection(
        n_states,
        depth,
        [rng.normal(scale=scale, size=(n_states,) * (k + 1)) for k in range(depth)],
    )


def random_almost_desirable_selection(rng, m, depth, scale=1.0):
    """Random gambles, each shifted up by its negative local lower
    expectation so the defining inequality holds (often with equality)."""

    def gamble(s):
        g = rng.normal(scale=scale, size=m.n_states)
        low = lower_expectation(local_model(m, s), g)
        return g - low if low < 0 else g

    return Selection.from_function(m.n_states, depth, gamble)


def precise_member(rng, m):
    """A precise model obtained by replacing every credal set with a random
    mixture of its extreme points."""

    def pick(K):
        w = rng.dirichlet(np.ones(len(K.extremes)))
        p = w @ K.extremes
        p = np.clip(p, 0.0, None)
        p[np.argmax(p)] += 1.0 - p.sum()
        return CredalSet([p])

    return m.map(pick)


def extreme_member(rng, m):
    """A precise model that picks one extreme point of every credal set."""
    return m.map(lambda K: CredalSet([K.extremes[rng.integers(len(K.extremes))]]))


def precise_family(template):
    """Gap-search family: the template itself first, then random precise members."""
    first = True

    def family(rng):
        nonlocal first
        if first:
            first = False
            return template
        return precise_member(rng, template)

    return family
