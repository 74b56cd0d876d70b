"""Natural extensions of n-measurable gambles and of monotone limits of
such gambles (reachability and safety events), plus classical oracles for
precise chains.

On n-measurable gambles the Williams and the Ville-Vovk-Shafer extensions
coincide, and both equal the value of the backward recursion

    h_n = f,    h_k(s) = E(h_{k+1}(s .) | s),    answer h_0,

which is what :func:`williams_nmeasurable` computes. The linear program in
:mod:`icek.witness` recovers the same number directly from the definition
and serves as an independent check.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .chain import GENERAL
from .credal import lower_expectation, validate_pmf
from .exceptions import InputError
from .tree import NGamble

logger = logging.getLogger(__name__)

__all__ = [
    "LimitResult",
    "HittingSequence",
    "backward_recursion",
    "williams_nmeasurable",
    "vvs_nmeasurable",
    "upper_nmeasurable",
    "reach_sequence",
    "safety_sequence",
    "monotone_limit_nondecreasing",
    "monotone_limit_nonincreasing",
    "precise_reach_probability",
    "precise_safety_probability",
]

MONOTONE_TOL = 1e-12
WINDOW = 3
# largest dense gamble (number of values) the generic path will build
MAX_DENSE_SIZE = 3**14


@dataclass(frozen=True)
class LimitResult:
    """Per-horizon extension values of a monotone sequence and their limit.

    ``trace[i]`` is the value at horizon ``start + i``. ``horizon`` is the
    first horizon of the final stable window (all later steps moved by less
    than ``tol``); ``depth_reached`` is the last horizon evaluated.
    ``vvs_only`` marks a value that is the Ville-Vovk-Shafer extension of
    the limit but is not claimed for the Williams extension.
    """

    value: float
    horizon: int
    trace: tuple
    converged: bool
    direction: str
    vvs_only: bool = False
    start: int = 1
    tol: float = 1e-6

    @property
    def depth_reached(self):
        return self.start + len(self.trace) - 1

    @property
    def deltas(self):
        t = np.asarray(self.trace)
        return tuple(np.concatenate([[np.nan], np.diff(t)]).tolist())


def _local_lower(m, k, H):
    """Lower expectations at every situation of length ``k`` of the gambles
    ``H[s]`` (shape ``(X,) * k + (X,)``)."""
    X = m.n_states
    if k == 0:
        return np.array(lower_expectation(m.initial, H))
    if m.kind == GENERAL:
        out = np.array(lower_expectation(m.default, H), dtype=float).reshape((X,) * k)
        for s, K in m.local_models.items():
            if len(s) == k:
                out[s] = lower_expectation(K, H[s])
        return out
    op = m.operator_at(k)
    out = np.empty((X,) * k)
    for x, K in enumerate(op.per_state):
        out[..., x] = lower_expectation(K, H[..., x, :])
    return out


def _check_dims(m, f):
    if f.n_states != m.n_states:
        raise InputError(f"gamble is over {f.n_states} states, model has {m.n_states}")


def backward_recursion(m, f):
    """All stages ``h_0, ..., h_n`` of the backward recursion for ``f``.

    ``h_k`` has shape ``(X,) * k``; ``h_k[s]`` is the conditional lower
    expectation of ``f`` given situation ``s``.
    """
    _check_dims(m, f)
    h = np.array(f.values)
    stages = [h]
    for k in range(f.n - 1, -1, -1):
        h = _local_lower(m, k, h)
        stages.append(h)
    return stages[::-1]


def williams_nmeasurable(m, f):
    """Williams natural extension of an n-measurable gamble."""
    return float(backward_recursion(m, f)[0])


def vvs_nmeasurable(m, f):
    """Ville-Vovk-Shafer natural extension of an n-measurable gamble.

    Equal to the Williams extension for every n-measurable gamble.
    """
    return williams_nmeasurable(m, f)


def upper_nmeasurable(m, f):
    return -williams_nmeasurable(m, -f)


def _state_mask(m, subset):
    mask = np.zeros(m.n_states, dtype=bool)
    for a in subset:
        idx = m.state_index(a) if isinstance(a, str) else int(a)
        if not 0 <= idx < m.n_states:
            raise InputError(f"state index {idx} out of range")
        mask[idx] = True
    return mask


class HittingSequence(Sequence):
    """The indicators of reaching ``A`` by time n, or of staying in ``B``
    through time n, for n = 1..N.

    Behaves like the list ``[f_1, ..., f_N]`` of dense n-measurable gambles
    (built on access). :meth:`lower_trace` evaluates the extensions of all
    of them without building the gambles when the model is Markov.
    """

    def __init__(self, kind, mask, horizon):
        if kind not in ("reach", "safety"):
            raise InputError(f"unknown sequence kind {kind!r}")
        if horizon < 1:
            raise InputError(f"horizon must be >= 1, got {horizon}")
        self.kind = kind
        self.mask = np.asarray(mask, dtype=bool)
        self.horizon = int(horizon)

    @property
    def direction(self):
        return "non-decreasing" if self.kind == "reach" else "non-increasing"

    @property
    def n_states(self):
        return self.mask.size

    def __len__(self):
        return self.horizon

    def gamble(self, n):
        """The dense n-measurable indicator ``f_n``."""
        X = self.n_states
        if X**n > MAX_DENSE_SIZE:
            raise InputError(f"a dense {n}-measurable gamble on {X} states is too large")
        inside = self.mask.astype(float)
        if self.kind == "reach":
            acc = np.zeros(())
            for _ in range(n):
                acc = np.maximum(acc[..., np.newaxis], inside)
        else:
            acc = np.ones(())
            for _ in range(n):
                acc = np.minimum(acc[..., np.newaxis], inside)
        return NGamble(X, n, acc)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        if i < 0:
            i += len(self)
        if not 0 <= i < len(self):
            raise IndexError(i)
        return self.gamble(i + 1)

    def _affine(self):
        # w_k = a + b * T_k(w_{k+1}), w_n = indicator
        inside = self.mask.astype(float)
        if self.kind == "reach":
            return inside, inside, 1.0 - inside
        return inside, np.zeros_like(inside), inside

    def lower_value(self, m, n):
        """Extension of ``f_n`` under ``m``."""
        if m.n_states != self.n_states:
            raise InputError(f"sequence is over {self.n_states} states, model has {m.n_states}")
        if m.kind == GENERAL:
            return williams_nmeasurable(m, self.gamble(n))
        terminal, a, b = self._affine()
        w = terminal
        for k in range(n - 1, 0, -1):
            w = a + b * m.operator_at(k)(w)
        return lower_expectation(m.initial, w)

    def lower_trace(self, m, horizon=None):
        horizon = self.horizon if horizon is None else horizon
        return [self.lower_value(m, n) for n in range(1, horizon + 1)]


def reach_sequence(m, A, N):
    """``f_n`` = indicator that some ``x_i`` with ``i <= n`` lies in ``A``."""
    return HittingSequence("reach", _state_mask(m, A), N)


def safety_sequence(m, B, N):
    """``f_n`` = indicator that every ``x_i`` with ``i <= n`` lies in ``B``."""
    return HittingSequence("safety", _state_mask(m, B), N)


def _gamble_at(fs, n):
    if callable(fs):
        return fs(n)
    return fs[n - 1]


def _monotone_limit(m, fs, direction, tol, max_horizon):
    if max_horizon < 1:
        raise InputError(f"max_horizon must be >= 1, got {max_horizon}")
    if isinstance(fs, Sequence):
        max_horizon = min(max_horizon, len(fs))
    sign = 1.0 if direction == "non-decreasing" else -1.0
    structured = isinstance(fs, HittingSequence)
    if structured and fs.direction != direction:
        raise InputError(f"a {fs.kind} sequence is {fs.direction}, not {direction}")

    trace = []
    prev = None
    converged = False
    for n in range(1, max_horizon + 1):
        if structured:
            trace.append(fs.lower_value(m, n))
        else:
            f = _gamble_at(fs, n)
            if prev is not None:
                depth = max(prev.n, f.n)
                gap = sign * (f.lift(depth).values - prev.lift(depth).values)
                if gap.min() < -MONOTONE_TOL:
                    raise InputError(
                        f"sequence is not {direction} between horizons {n - 1} and {n} "
                        f"(violation {-gap.min():.3g})"
                    )
            trace.append(williams_nmeasurable(m, f))
            prev = f
        if len(trace) > WINDOW and all(
            abs(trace[-i] - trace[-i - 1]) < tol for i in range(1, WINDOW + 1)
        ):
            converged = True
            break
    if converged:
        horizon = len(trace) - WINDOW
    else:
        horizon = len(trace)
        logger.info("no convergence within %d horizons (tol=%g)", max_horizon, tol)
    return trace, horizon, converged


def monotone_limit_nondecreasing(m, fs, tol=1e-6, max_horizon=64):
    """Extension of the pointwise limit of a non-decreasing sequence.

    ``fs`` is either a callable ``n -> NGamble`` or a sequence whose entry
    ``i`` is ``f_{i+1}``. The per-horizon values are non-decreasing and
    their limit is both the Williams and the Ville-Vovk-Shafer extension of
    the limit gamble. Stops once ``WINDOW`` consecutive steps move by less
    than ``tol``; no convergence rate is known, so ``converged`` and the
    full trace are always reported.
    """
    trace, horizon, converged = _monotone_limit(m, fs, "non-decreasing", tol, max_horizon)
    return LimitResult(trace[-1], horizon, tuple(trace), converged, "non-decreasing", False, 1, tol)


def monotone_limit_nonincreasing(m, fs, tol=1e-6, max_horizon=64):
    """Ville-Vovk-Shafer extension of the limit of a non-increasing sequence.

    Same stopping rule as :func:`monotone_limit_nondecreasing`. The result
    carries ``vvs_only=True``: the Williams extension of the limit can be
    strictly smaller.
    """
    trace, horizon, converged = _monotone_limit(m, fs, "non-increasing", tol, max_horizon)
    return LimitResult(trace[-1], horizon, tuple(trace), converged, "non-increasing", True, 1, tol)


def _check_stochastic(P, init):
    P = np.asarray(P, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise InputError(f"transition matrix must be square, got shape {P.shape}")
    for row in P:
        validate_pmf(row)
    init = validate_pmf(init)
    if init.size != P.shape[0]:
        raise InputError(f"initial pmf has {init.size} states, matrix has {P.shape[0]}")
    return P, init


def _subset_mask(n, subset):
    mask = np.zeros(n, dtype=bool)
    mask[list(subset)] = True
    return mask


def _iterate_reach(P, A, tol=1e-10, max_steps=10**6):
    h = A.astype(float)
    for _ in range(max_steps):
        nxt = np.where(A, 1.0, P @ h)
        if np.max(np.abs(nxt - h)) < tol:
            return nxt
        h = nxt
    logger.warning("reach iteration hit %d steps without converging", max_steps)
    return h


def precise_reach_probability(P, init, A):
    """Probability that a precise chain ever visits ``A`` (time 1 included).

    Minimal non-negative solution of ``h = 1`` on ``A``, ``h = P h`` off
    ``A``: states that cannot reach ``A`` get 0, the rest solve a linear
    system. Falls back to value iteration if that system is singular.
    """
    P, init = _check_stochastic(P, init)
    n = P.shape[0]
    A = _subset_mask(n, A)
    # states with a positive-probability path into A
    can = A.copy()
    while True:
        grow = can | ((P[:, can] > 0).any(axis=1))
        if np.array_equal(grow, can):
            break
        can = grow
    h = A.astype(float)
    C = can & ~A
    if C.any():
        M = np.eye(C.sum()) - P[np.ix_(C, C)]
        rhs = P[np.ix_(C, A)].sum(axis=1)
        try:
            if np.linalg.cond(M) > 1e12:
                raise np.linalg.LinAlgError("ill-conditioned")
            h[C] = np.linalg.solve(M, rhs)
        except np.linalg.LinAlgError:
            h = _iterate_reach(P, A)
    return float(np.clip(init @ h, 0.0, 1.0))


def precise_safety_probability(P, init, B, tol=1e-10, max_steps=10**6):
    """Probability that a precise chain stays in ``B`` forever.

    Limit of ``P(X_1..X_n in B)``, computed with masked matrix powers
    ``Q = P[B, B]``. Mass can circulate inside ``B`` for up to ``|X|``
    steps before any of it leaks, so the iteration stops once values
    ``|X|`` steps apart differ by less than ``tol``.
    """
    P, init = _check_stochastic(P, init)
    n = P.shape[0]
    B = _subset_mask(n, B)
    v = np.where(B, init, 0.0)
    Q = np.where(B[:, np.newaxis] & B[np.newaxis, :], P, 0.0)
    sums = [v.sum()]
    for _ in range(max_steps):
        v = v @ Q
        sums.append(v.sum())
        if len(sums) > n and abs(sums[-1 - n] - sums[-1]) < tol:
            return float(sums[-1])
        if len(sums) > 2 * n:
            del sums[0]
    logger.warning("safety iteration hit %d steps without converging", max_steps)
    return float(sums[-1])
