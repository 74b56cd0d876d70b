"""Probability mass functions, finitely generated credal sets and the lower
and upper expectations they induce on gambles over a finite state space."""

from __future__ import annotations

import numpy as np

from .exceptions import InputError

PMF_TOL = 1e-12

__all__ = [
    "PMF_TOL",
    "CredalSet",
    "validate_pmf",
    "lower_expectation",
    "upper_expectation",
    "make_vacuous",
    "make_precise",
    "make_linear_vacuous",
]


def validate_pmf(probs, tol=PMF_TOL):
    """Return ``probs`` as a read-only float array after checking it is a pmf.

    Raises :class:`InputError` if an entry is below ``-tol`` or the entries
    do not sum to one within ``tol``.
    """
    p = np.array(probs, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise InputError(f"pmf must be a nonempty vector, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise InputError("pmf has non-finite entries")
    if p.min() < -tol:
        raise InputError(f"pmf has a negative entry {p.min()!r}")
    if abs(p.sum() - 1.0) > tol:
        raise InputError(f"pmf sums to {p.sum()!r}, not 1")
    p.setflags(write=False)
    return p


class CredalSet:
    """A credal set given by a finite list of extreme points.

    Redundant (non-extreme or repeated) points are allowed; they do not
    change the lower envelope.

    Parameters
    ----------
    extremes : array_like, shape (k, n_states)
        One probability mass function per row.
    """

    __slots__ = ("_extremes",)

    def __init__(self, extremes):
        ext = np.array(extremes, dtype=float)
        if ext.ndim == 1:
            ext = ext[np.newaxis, :]
        if ext.ndim != 2 or ext.shape[0] == 0:
            raise InputError("a credal set needs at least one extreme point")
        rows = [validate_pmf(row) for row in ext]
        ext = np.vstack(rows)
        ext.setflags(write=False)
        self._extremes = ext

    @property
    def extremes(self):
        return self._extremes

    @property
    def n_states(self):
        return self._extremes.shape[1]

    @property
    def is_precise(self):
        return bool(np.all(self._extremes == self._extremes[0]))

    def lower(self, f):
        return lower_expectation(self, f)

    def upper(self, f):
        return upper_expectation(self, f)

    def __eq__(self, other):
        if not isinstance(other, CredalSet):
            return NotImplemented
        return np.array_equal(self._extremes, other._extremes)

    __hash__ = None

    def __repr__(self):
        return f"CredalSet({self._extremes.tolist()!r})"


def _check_gamble(K, f):
    g = np.asarray(f, dtype=float)
    if g.shape[-1:] != (K.n_states,):
        raise InputError(
            f"gamble has dimension {g.shape[-1:] or 0}, credal set has {K.n_states}"
        )
    return g


def lower_expectation(K, f):
    """Minimum of the expectations of ``f`` over the extreme points of ``K``.

    ``f`` may also be a stack of gambles with shape ``(..., n_states)``, in
    which case an array of lower expectations is returned.
    """
    g = _check_gamble(K, f)
    values = (g @ K.extremes.T).min(axis=-1)
    return float(values) if values.ndim == 0 else values


def upper_expectation(K, f):
    """Conjugate upper expectation, ``-lower_expectation(K, -f)``."""
    g = _check_gamble(K, f)
    return -lower_expectation(K, -g)


def make_vacuous(n_states):
    if int(n_states) != n_states or n_states < 1:
        raise InputError(f"number of states must be a positive integer, got {n_states!r}")
    return CredalSet(np.eye(int(n_states)))


def make_precise(p):
    return CredalSet([validate_pmf(p)])


def make_linear_vacuous(p, eps):
    """Linear-vacuous mixture: extremes ``(1 - eps) * p + eps * delta_x``."""
    p = validate_pmf(p)
    if not 0.0 <= eps <= 1.0:
        raise InputError(f"eps must lie in [0, 1], got {eps!r}")
    if eps == 0.0:
        return CredalSet([p])
    return CredalSet((1.0 - eps) * p[np.newaxis, :] + eps * np.eye(p.size))
