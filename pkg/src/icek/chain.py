"""Imprecise process models: an initial credal set plus a local model for
every situation, either through (stationary or time-varying) lower
transition operators or through an explicit situation-indexed map."""

from __future__ import annotations

import numpy as np

from .credal import CredalSet, lower_expectation
from .exceptions import InputError, UnsupportedOperationError
from .tree import validate_situation

__all__ = [
    "LowerTransitionOperator",
    "ChainModel",
    "local_model",
    "apply_T",
    "reroot",
]

STATIONARY = "stationary"
TIME_VARYING = "time_varying"
GENERAL = "general"


class LowerTransitionOperator:
    """One credal set per current state; maps a gamble on the next state to
    the gamble of its conditional lower expectations."""

    __slots__ = ("per_state",)

    def __init__(self, per_state):
        per_state = tuple(k if isinstance(k, CredalSet) else CredalSet(k) for k in per_state)
        if not per_state:
            raise InputError("a lower transition operator needs at least one state")
        n = len(per_state)
        for x, K in enumerate(per_state):
            if K.n_states != n:
                raise InputError(f"credal set for state {x} has dimension {K.n_states}, expected {n}")
        self.per_state = per_state

    @property
    def n_states(self):
        return len(self.per_state)

    def __call__(self, g):
        g = np.asarray(g, dtype=float)
        return np.array([lower_expectation(K, g) for K in self.per_state])

    def map(self, func):
        return LowerTransitionOperator([func(K) for K in self.per_state])

    def __eq__(self, other):
        if not isinstance(other, LowerTransitionOperator):
            return NotImplemented
        return self.per_state == other.per_state

    __hash__ = None


class ChainModel:
    """Initial model plus local models for every situation.

    Use the :meth:`stationary`, :meth:`time_varying` and :meth:`general`
    constructors. Time-varying operator lists are indexed from time 1 (the
    operator used in situations of length 1) and clamp to their last
    element beyond the list.
    """

    def __init__(self, states, initial, kind, operators=(), local_models=None, default=None):
        self.states = tuple(str(x) for x in states)
        if len(set(self.states)) != len(self.states):
            raise InputError(f"duplicate state names in {self.states}")
        n = len(self.states)
        if n == 0:
            raise InputError("a model needs at least one state")
        if not isinstance(initial, CredalSet):
            initial = CredalSet(initial)
        if initial.n_states != n:
            raise InputError(f"initial model has dimension {initial.n_states}, expected {n}")
        self.initial = initial
        self.kind = kind
        self.operators = tuple(operators)
        self.local_models = {}
        self.default = None
        if kind in (STATIONARY, TIME_VARYING):
            if not self.operators or (kind == STATIONARY and len(self.operators) != 1):
                raise InputError(f"{kind} dynamics need {'one' if kind == STATIONARY else 'at least one'} operator")
            for op in self.operators:
                if op.n_states != n:
                    raise InputError(f"transition operator has {op.n_states} states, expected {n}")
        elif kind == GENERAL:
            if default is None:
                raise InputError("general dynamics require a default local model")
            self.default = default if isinstance(default, CredalSet) else CredalSet(default)
            if self.default.n_states != n:
                raise InputError(f"default local model has dimension {self.default.n_states}, expected {n}")
            for s, K in (local_models or {}).items():
                s = validate_situation(s, n)
                if not s:
                    raise InputError("the initial situation takes the initial model, not a map entry")
                K = K if isinstance(K, CredalSet) else CredalSet(K)
                if K.n_states != n:
                    raise InputError(f"local model at {s} has dimension {K.n_states}, expected {n}")
                self.local_models[s] = K
        else:
            raise InputError(f"unknown dynamics kind {kind!r}")

    @classmethod
    def stationary(cls, states, initial, operator):
        if not isinstance(operator, LowerTransitionOperator):
            operator = LowerTransitionOperator(operator)
        return cls(states, initial, STATIONARY, operators=[operator])

    @classmethod
    def time_varying(cls, states, initial, operators):
        ops = [op if isinstance(op, LowerTransitionOperator) else LowerTransitionOperator(op) for op in operators]
        return cls(states, initial, TIME_VARYING, operators=ops)

    @classmethod
    def general(cls, states, initial, local_models, default):
        return cls(states, initial, GENERAL, local_models=local_models, default=default)

    @property
    def n_states(self):
        return len(self.states)

    @property
    def is_markov(self):
        return self.kind != GENERAL

    def credal_sets(self):
        """Every credal set the model holds, initial model first."""
        yield self.initial
        for op in self.operators:
            yield from op.per_state
        if self.kind == GENERAL:
            yield self.default
            yield from self.local_models.values()

    @property
    def is_precise(self):
        return all(K.is_precise for K in self.credal_sets())

    def operator_at(self, time):
        """The operator ``T_time`` used in situations of length ``time >= 1``."""
        if not self.is_markov:
            raise UnsupportedOperationError("general dynamics have no transition operator; use local_model")
        if time < 1:
            raise InputError(f"transition operators are indexed from time 1, got {time}")
        return self.operators[min(time - 1, len(self.operators) - 1)]

    def state_index(self, name):
        try:
            return self.states.index(str(name))
        except ValueError:
            raise InputError(f"unknown state {name!r}; states are {list(self.states)}") from None

    def map(self, func):
        """A model of the same shape with every credal set ``K`` replaced by ``func(K)``."""
        initial = func(self.initial)
        if self.kind == GENERAL:
            return ChainModel.general(
                self.states,
                initial,
                {s: func(K) for s, K in self.local_models.items()},
                func(self.default),
            )
        return ChainModel(self.states, initial, self.kind, operators=[op.map(func) for op in self.operators])

    def precise_matrix(self):
        """Initial pmf and transition matrix of a stationary precise chain."""
        if self.kind != STATIONARY or not self.is_precise:
            raise UnsupportedOperationError("only stationary models with singleton credal sets have a transition matrix")
        P = np.vstack([K.extremes[0] for K in self.operators[0].per_state])
        return self.initial.extremes[0].copy(), P

    def __eq__(self, other):
        if not isinstance(other, ChainModel):
            return NotImplemented
        return (
            self.states == other.states
            and self.initial == other.initial
            and self.kind == other.kind
            and self.operators == other.operators
            and self.local_models == other.local_models
            and self.default == other.default
        )

    __hash__ = None

    def __repr__(self):
        return f"ChainModel(states={list(self.states)}, kind={self.kind!r})"


def local_model(m, s):
    """The credal set governing the next state in situation ``s``."""
    s = validate_situation(s, m.n_states)
    if not s:
        return m.initial
    if m.kind == GENERAL:
        return m.local_models.get(s, m.default)
    return m.operator_at(len(s)).per_state[s[-1]]


def apply_T(m, time, g):
    """``T_time(g)``: conditional lower expectations of ``g`` per current state."""
    g = np.asarray(g, dtype=float)
    if g.shape != (m.n_states,):
        raise InputError(f"gamble has shape {g.shape}, expected ({m.n_states},)")
    return m.operator_at(time)(g)


def reroot(m, s):
    """The model seen from situation ``s``: its initial model is the local
    model at ``s`` and its local model at ``t`` is the original one at ``s + t``."""
    s = validate_situation(s, m.n_states)
    if not s:
        return m
    L = len(s)
    initial = local_model(m, s)
    if m.kind == STATIONARY:
        return ChainModel.stationary(m.states, initial, m.operators[0])
    if m.kind == TIME_VARYING:
        ops = m.operators[L:] if L < len(m.operators) else m.operators[-1:]
        return ChainModel.time_varying(m.states, initial, ops)
    local = {t[L:]: K for t, K in m.local_models.items() if len(t) > L and t[:L] == s}
    return ChainModel.general(m.states, initial, local, m.default)
