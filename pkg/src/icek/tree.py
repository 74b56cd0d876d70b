"""Situations, n-measurable gambles, real processes and selections on the
complete event tree over a finite state space.

A situation is a tuple of state indices; ``()`` is the initial situation.
Everything that lives on the situations of a fixed length ``k`` is stored
as a dense array of shape ``(n_states,) * k``, so a situation indexes it
directly and the flattened array is in lexicographic (row-major) order.
"""

from __future__ import annotations

import itertools

import numpy as np

from .exceptions import InputError

__all__ = [
    "situations",
    "situations_upto",
    "validate_situation",
    "NGamble",
    "RealProcess",
    "Selection",
    "capital",
    "capital_array",
    "capital_process",
    "limsup_capital",
    "eval_ngamble",
    "restrict",
]


def situations(n_states, length):
    """All situations of the given length, in lexicographic order."""
    return itertools.product(range(n_states), repeat=length)


def situations_upto(n_states, depth):
    """All situations of length ``< depth``, shortest first."""
    for k in range(depth):
        yield from situations(n_states, k)


def validate_situation(s, n_states):
    s = tuple(int(x) for x in s)
    for x in s:
        if not 0 <= x < n_states:
            raise InputError(f"state index {x} out of range for {n_states} states")
    return s


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


class NGamble:
    """An n-measurable gamble: a real value for every sequence in X^n.

    Parameters
    ----------
    n_states : int
    n : int
        Measurability depth; ``n == 0`` is a constant.
    values : array_like
        Either of shape ``(n_states,) * n`` or flat of length
        ``n_states ** n`` in lexicographic order.
    """

    def __init__(self, n_states, n, values):
        if n < 0:
            raise InputError(f"depth must be >= 0, got {n}")
        v = np.asarray(values, dtype=float)
        shape = (n_states,) * n
        if v.size != n_states**n:
            raise InputError(
                f"size mismatch: an {n}-measurable gamble on {n_states} states "
                f"needs {n_states ** n} values, got {v.size}"
            )
        self.n_states = int(n_states)
        self.n = int(n)
        self.values = _frozen(v.reshape(shape))

    @classmethod
    def constant(cls, n_states, c, n=0):
        return cls(n_states, n, np.full((n_states,) * n, float(c)))

    @classmethod
    def from_function(cls, n_states, n, func):
        """Build from ``func(w)`` evaluated on every ``w`` in X^n."""
        vals = [func(w) for w in situations(n_states, n)]
        return cls(n_states, n, vals)

    def __call__(self, path):
        return eval_ngamble(self, path)

    def lift(self, m):
        """The same gamble, viewed as m-measurable for ``m >= n``."""
        if m < self.n:
            raise InputError(f"cannot lift an {self.n}-measurable gamble to depth {m}")
        shape = (self.n_states,) * m
        v = self.values.reshape(self.values.shape + (1,) * (m - self.n))
        return NGamble(self.n_states, m, np.broadcast_to(v, shape))

    def __add__(self, c):
        return NGamble(self.n_states, self.n, self.values + c)

    def __neg__(self):
        return NGamble(self.n_states, self.n, -self.values)

    def __eq__(self, other):
        if not isinstance(other, NGamble):
            return NotImplemented
        return (
            self.n_states == other.n_states
            and self.n == other.n
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None

    def __repr__(self):
        return f"NGamble(n_states={self.n_states}, n={self.n}, values={self.values.ravel().tolist()!r})"


def eval_ngamble(f, path):
    """Value of ``f`` on any path (or finite prefix) of length ``>= f.n``."""
    path = tuple(path)
    if len(path) < f.n:
        raise InputError(f"path of length {len(path)} is shorter than depth {f.n}")
    return float(f.values[path[: f.n]])


def restrict(f, s):
    """The (n - len(s))-measurable gamble ``w -> f(s + w)``."""
    s = validate_situation(s, f.n_states)
    if len(s) > f.n:
        raise InputError(f"situation of length {len(s)} is deeper than gamble depth {f.n}")
    return NGamble(f.n_states, f.n - len(s), f.values[s])


class RealProcess:
    """A real-valued process on all situations of length ``<= depth``.

    ``levels[k]`` has shape ``(n_states,) * k``.
    """

    def __init__(self, n_states, depth, levels):
        if len(levels) != depth + 1:
            raise InputError(f"expected {depth + 1} levels, got {len(levels)}")
        self.n_states = int(n_states)
        self.depth = int(depth)
        self.levels = []
        for k, lev in enumerate(levels):
            a = np.asarray(lev, dtype=float)
            if a.size != n_states**k:
                raise InputError(f"level {k} needs {n_states ** k} values, got {a.size}")
            self.levels.append(_frozen(a.reshape((n_states,) * k)))

    def __call__(self, s):
        s = tuple(s)
        if len(s) > self.depth:
            raise InputError(f"process is defined up to depth {self.depth}, got length {len(s)}")
        return float(self.levels[len(s)][s])


class Selection:
    """A depth-limited selection: a gamble on X for every situation of
    length ``< depth``, and the zero gamble everywhere deeper.

    ``levels[k]`` has shape ``(n_states,) * k + (n_states,)``; the gamble
    at situation ``s`` is ``levels[len(s)][s]``.
    """

    def __init__(self, n_states, depth, levels):
        if depth < 0:
            raise InputError(f"depth must be >= 0, got {depth}")
        if len(levels) != depth:
            raise InputError(f"expected {depth} levels, got {len(levels)}")
        self.n_states = int(n_states)
        self.depth = int(depth)
        self.levels = []
        for k, lev in enumerate(levels):
            a = np.asarray(lev, dtype=float)
            if a.size != n_states ** (k + 1):
                raise InputError(
                    f"selection level {k} needs {n_states ** (k + 1)} values, got {a.size}"
                )
            self.levels.append(_frozen(a.reshape((n_states,) * (k + 1))))

    @classmethod
    def zeros(cls, n_states, depth):
        return cls(n_states, depth, [np.zeros((n_states,) * (k + 1)) for k in range(depth)])

    @classmethod
    def from_function(cls, n_states, depth, func):
        """Build from ``func(s)``, a gamble on X for each situation ``s``."""
        levels = []
        for k in range(depth):
            lev = np.zeros((n_states,) * (k + 1))
            for s in situations(n_states, k):
                lev[s] = func(s)
            levels.append(lev)
        return cls(n_states, depth, levels)

    def __call__(self, s):
        s = tuple(s)
        if len(s) >= self.depth:
            return np.zeros(self.n_states)
        return self.levels[len(s)][s]

    def __eq__(self, other):
        if not isinstance(other, Selection):
            return NotImplemented
        return (
            self.n_states == other.n_states
            and self.depth == other.depth
            and all(np.array_equal(a, b) for a, b in zip(self.levels, other.levels))
        )

    __hash__ = None

    def __repr__(self):
        return f"Selection(n_states={self.n_states}, depth={self.depth})"


def capital(S, s):
    """Capital ``F^S(s)``: the sum of ``S(s[:i])(s[i])`` along ``s``.

    Gambles at depth ``>= S.depth`` are zero, so any length is accepted.
    """
    s = tuple(s)
    total = 0.0
    for i in range(min(len(s), S.depth)):
        total += S.levels[i][s[: i + 1]]
    return float(total)


def capital_array(S, n):
    """Capital on every situation of length ``n``, shape ``(n_states,) * n``.

    Accumulated level by level in the same order as :func:`capital`, so the
    two agree bit for bit.
    """
    X = S.n_states
    cap = np.zeros(())
    for k in range(n):
        if k < S.depth:
            cap = cap[..., np.newaxis] + S.levels[k]
        else:
            cap = np.broadcast_to(cap[..., np.newaxis], (X,) * (k + 1))
    return np.array(cap)


def capital_process(S, depth):
    """The capital process ``F^S`` as a :class:`RealProcess` up to ``depth``."""
    return RealProcess(S.n_states, depth, [capital_array(S, k) for k in range(depth + 1)])


def limsup_capital(S, path):
    """Limit superior of the capital along a path, given by a prefix of
    length ``>= S.depth``.

    Past ``S.depth`` the capital no longer moves, so the limsup is exactly
    the capital at depth ``S.depth``.
    """
    path = tuple(path)
    if len(path) < S.depth:
        raise InputError(
            f"prefix of length {len(path)} does not determine the limsup of a "
            f"depth-{S.depth} selection"
        )
    return capital(S, path[: S.depth])
