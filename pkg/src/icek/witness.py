"""Selection certificates and the constructive devices behind the continuity
results: almost-desirability and domination checks, the linear program
that searches for an optimal certificate, truncated, cutoff and stitched
selections, greedy non-negative paths, and an exploratory search for gaps
between the Williams and Ville-Vovk-Shafer extensions of safety events.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .chain import local_model
from .exceptions import (
    ConstructionError,
    InputError,
    NotAlmostDesirableError,
    SolverError,
)
from .extension import (
    _local_lower,
    monotone_limit_nonincreasing,
    safety_sequence,
    williams_nmeasurable,
)
from .simplex import solve_lp
from .tree import NGamble, RealProcess, Selection, capital_array, situations

logger = logging.getLogger(__name__)

__all__ = [
    "Certificate",
    "CutoffData",
    "StitchResult",
    "GapReport",
    "desirability_violations",
    "is_almost_desirable",
    "domination_violations",
    "dominates",
    "lp_witness_search",
    "truncate_selection",
    "greedy_nonneg_path",
    "compute_cutoff",
    "cutoff_selection",
    "situation_tolerance",
    "stitch_selection",
    "williams_gap_search",
]

CHECK_TOL = 1e-12
# largest LP (number of variables) handed to the dense simplex under solver="auto"
DENSE_SIMPLEX_MAX_VARS = 200


@dataclass
class Certificate:
    """``alpha`` together with an almost-desirable selection whose capital
    at depth ``horizon`` is dominated by ``f - alpha``."""

    alpha: float
    selection: Selection
    horizon: int


def _indices(mask):
    return [tuple(int(i) for i in row) for row in np.argwhere(mask)]


def desirability_violations(m, S, tol=CHECK_TOL):
    """Situations ``s`` (with ``len(s) < S.depth``) where the local lower
    expectation of ``S(s)`` is below ``-tol``, with that value."""
    if S.n_states != m.n_states:
        raise InputError(f"selection is over {S.n_states} states, model has {m.n_states}")
    out = []
    for k in range(S.depth):
        low = np.asarray(_local_lower(m, k, S.levels[k]))
        out.extend((idx, float(low[idx])) for idx in _indices(low < -tol))
    return out


def is_almost_desirable(m, S, tol=CHECK_TOL):
    return not desirability_violations(m, S, tol)


def domination_violations(f, alpha, S, n, tol=CHECK_TOL):
    """Sequences ``w`` in X^n with ``f(w) - alpha < capital(S, w) - tol``,
    each paired with its (negative) slack."""
    if n < f.n:
        raise InputError(f"domination depth {n} is below the gamble depth {f.n}")
    if f.n_states != S.n_states:
        raise InputError("gamble and selection are over different state spaces")
    slack = f.lift(n).values - alpha - capital_array(S, n)
    return [(idx, float(slack[idx])) for idx in _indices(slack < -tol)]


def dominates(f, alpha, S, n, tol=CHECK_TOL):
    """Whether ``f - alpha >= F^S_n`` on every sequence of length ``n``."""
    return not domination_violations(f, alpha, S, n, tol)


def _lp_instance(m, f, horizon):
    """Rows and right-hand sides of the witness LP.

    Variable 0 is alpha; the gamble ``S(s)`` at a situation ``s`` of length
    ``i`` occupies ``X`` consecutive variables starting at
    ``offset[i] + X * flat(s)``, so ``S(w[:i])(w[i])`` sits at
    ``offset[i] + flat(w[:i+1])``.
    """
    X = m.n_states
    offsets = [1]
    for i in range(horizon):
        offsets.append(offsets[-1] + X ** (i + 1))
    n_vars = offsets[-1]

    rows, cols, vals, rhs = [], [], [], []
    r = 0
    # almost-desirability: -sum_x p(x) S(s)(x) <= 0 for every extreme p of E(.|s)
    for i in range(horizon):
        for j, s in enumerate(situations(X, i)):
            base = offsets[i] + X * j
            for p in local_model(m, s).extremes:
                nz = np.flatnonzero(p)
                rows.extend([r] * nz.size)
                cols.extend((base + nz).tolist())
                vals.extend((-p[nz]).tolist())
                rhs.append(0.0)
                r += 1
    # domination: alpha + sum_i S(w[:i])(w[i]) <= f(w) for every w in X^horizon
    fvals = f.lift(horizon).values.ravel()
    W = X**horizon
    flat = np.arange(W)
    for i in range(horizon):
        rows.extend((r + flat).tolist())
        cols.extend((offsets[i] + flat // X ** (horizon - i - 1)).tolist())
        vals.extend([1.0] * W)
    rows.extend((r + flat).tolist())
    cols.extend([0] * W)
    vals.extend([1.0] * W)
    rhs.extend(fvals.tolist())
    r += W
    A = sp.coo_matrix((vals, (rows, cols)), shape=(r, n_vars)).tocsr()
    return A, np.asarray(rhs), offsets


def _repair(m, f, levels, horizon):
    """Make solver output exactly almost-desirable, then take the best alpha
    the repaired selection certifies."""
    X = m.n_states
    fixed = []
    for k, lev in enumerate(levels):
        lev = np.array(lev)
        for _ in range(3):
            low = np.asarray(_local_lower(m, k, lev))
            if low.min() >= 0.0:
                break
            lev = lev + np.maximum(-low, 0.0)[..., np.newaxis]
        fixed.append(lev)
    S = Selection(X, horizon, fixed)
    alpha = float((f.lift(horizon).values - capital_array(S, horizon)).min())
    return S, alpha


def lp_witness_search(m, f, horizon, solver="auto"):
    """Optimal certificate for ``f`` among selections of depth ``horizon``.

    Maximizes ``alpha`` over almost-desirable selections ``S`` with
    ``f - alpha >= F^S_horizon``. ``solver`` is ``"simplex"`` (dense
    Bland simplex), ``"highs"`` (scipy) or ``"auto"`` (simplex for small
    programs). The returned certificate is re-checked and, where solver
    round-off left a tiny infeasibility, repaired: every local gamble is
    lifted to a non-negative lower expectation and ``alpha`` is set to the
    largest value the repaired selection certifies.
    """
    if f.n_states != m.n_states:
        raise InputError(f"gamble is over {f.n_states} states, model has {m.n_states}")
    if horizon < f.n:
        raise InputError(f"horizon {horizon} is below the gamble depth {f.n}")
    A, b, offsets = _lp_instance(m, f, horizon)
    n_vars = A.shape[1]
    c = np.zeros(n_vars)
    c[0] = -1.0
    if solver == "auto":
        solver = "simplex" if n_vars <= DENSE_SIMPLEX_MAX_VARS else "highs"
    instance = {"model": m, "gamble": f, "horizon": horizon, "solver": solver}
    if solver == "simplex":
        res = solve_lp(c, A.toarray(), b)
        ok, x, msg = res.success, res.x, res.status
    elif solver == "highs":
        res = linprog(c, A_ub=A, b_ub=b, bounds=(None, None), method="highs")
        ok, x, msg = res.status == 0, res.x, res.message
    else:
        raise InputError(f"unknown solver {solver!r}")
    if not ok:
        raise SolverError(f"witness LP failed: {msg}", instance=instance)

    X = m.n_states
    levels = [
        x[offsets[i] : offsets[i + 1]].reshape((X,) * (i + 1)) for i in range(horizon)
    ]
    S, alpha = _repair(m, f, levels, horizon)
    if abs(alpha - x[0]) > 1e-6:
        raise SolverError(
            f"certificate repair moved alpha from {x[0]!r} to {alpha!r}", instance=instance
        )
    return Certificate(alpha, S, horizon)


def truncate_selection(S, n):
    """``S`` up to depth ``n`` and zero from there on.

    Its limsup capital on any path equals the capital of ``S`` after ``n``
    steps.
    """
    if not 0 <= n <= S.depth:
        raise InputError(f"truncation depth {n} outside [0, {S.depth}]")
    return Selection(S.n_states, n, S.levels[:n])


def greedy_nonneg_path(m, S, start, depth, tol=CHECK_TOL, check=True):
    """Extend ``start`` to length ``depth``, always moving to the smallest
    state on which the current gamble is non-negative.

    Capital along the result never drops below its value at ``start``.
    With ``check`` the selection is first verified to be almost-desirable.
    """
    if check:
        bad = desirability_violations(m, S, tol)
        if bad:
            s, v = bad[0]
            raise NotAlmostDesirableError(
                f"selection is not almost-desirable at {s} (lower expectation {v:.6g})",
                situation=s,
                value=v,
            )
    path = list(start)
    while len(path) < depth:
        g = S(path)
        ok = np.flatnonzero(g >= -tol)
        if ok.size == 0:
            s = tuple(path)
            raise NotAlmostDesirableError(
                f"gamble at {s} is negative everywhere: {g.tolist()}", situation=s
            )
        path.append(int(ok[0]))
    return tuple(path)


@dataclass
class CutoffData:
    """First-hit indices ``n*`` over all length-``D`` prefixes.

    ``n_star`` has shape ``(X,) * D`` with ``-1`` marking a prefix on
    which no index up to ``D`` satisfies the cutoff condition. ``beta`` is
    the threshold ``-e_v + eps``.
    """

    n_star: np.ndarray
    D: int
    beta: float

    @property
    def n_states(self):
        return self.n_star.shape[0] if self.D else 1

    @property
    def resolved(self):
        return bool((self.n_star >= 0).all())

    @property
    def unresolved(self):
        return _indices(self.n_star < 0)

    @property
    def emptiness_horizon(self):
        """``1 + max n*``: every ``C_n`` from this index on is empty."""
        if not self.resolved:
            return None
        return int(self.n_star.max()) + 1

    def __getitem__(self, prefix):
        v = int(self.n_star[tuple(prefix)[: self.D]])
        return None if v < 0 else v

    def C(self, n):
        """Prefixes ``w`` with ``n*(w) >= n`` (unresolved ones included)."""
        mask = (self.n_star < 0) | (self.n_star >= n)
        return set(_indices(mask))

    def constancy_violations(self):
        """Pairs of prefixes that share their first ``n*(w)`` states but
        have different first-hit indices."""
        out = []
        X = self.n_star.shape[0] if self.D else 1
        for w in situations(X, self.D):
            k = self[w]
            if k is None:
                continue
            block = self.n_star[w[:k]]
            out.extend((w, w[:k] + idx) for idx in _indices(block != k))
        return out


def compute_cutoff(m, S, f_seq, e_v, eps, D):
    """First index ``n <= D`` at which ``capital(S, w_n) - f_n(w)`` drops
    to ``-e_v + eps`` or below, for every prefix ``w`` of length ``D``.

    ``f_seq[n]`` is the n-measurable gamble ``f_n``; indices past the end
    of ``f_seq`` are not examined.
    """
    X = m.n_states
    if S.n_states != X:
        raise InputError("selection and model are over different state spaces")
    beta = -e_v + eps
    n_star = np.full((X,) * D, -1, dtype=int)
    for n in range(min(D, len(f_seq) - 1) + 1):
        f = f_seq[n]
        if f.n > n or f.n_states != X:
            raise InputError(f"f_seq[{n}] is not {n}-measurable on {X} states")
        hit = capital_array(S, n) - f.lift(n).values <= beta + CHECK_TOL
        hit = np.broadcast_to(hit.reshape(hit.shape + (1,) * (D - n)), n_star.shape)
        n_star = np.where((n_star < 0) & hit, n, n_star)
    cd = CutoffData(n_star, D, beta)
    if not cd.resolved:
        logger.info("%d of %d prefixes have no cutoff index", len(cd.unresolved), n_star.size)
    return cd


def cutoff_selection(S, cd):
    """``S`` kept at ``s`` when every prefix through ``s`` has its first-hit
    index beyond ``len(s)``, zero elsewhere (depth ``cd.D``).

    Its limsup capital on a prefix ``w`` equals the capital of ``S`` at
    ``w[:n*(w)]``.
    """
    if not cd.resolved:
        raise InputError(f"cutoff has unresolved prefixes: {cd.unresolved[:5]}")
    X = S.n_states
    levels = []
    for k in range(cd.D):
        lowest = cd.n_star.reshape((X,) * k + (-1,)).min(axis=-1)
        keep = (lowest > k)[..., np.newaxis]
        g = S.levels[k] if k < S.depth else np.zeros((X,) * (k + 1))
        levels.append(np.where(keep, g, 0.0))
    return Selection(X, cd.D, levels)


def situation_tolerance(eps, length):
    """Per-situation slack ``eps * 2**-(length + 2)``; summed along a path
    it stays below ``eps / 2``."""
    return eps * 2.0 ** -(length + 2)


@dataclass
class StitchResult:
    """Stitched selection, the dominating process ``F`` and bookkeeping.

    ``n_star[k]`` holds the list index used at each situation of length
    ``k``; ``fallbacks`` lists situations where no index past ``n_max``
    came within the tolerance of the tail maximum and ``F`` was lowered
    to the maximum over indices ``>= n_max`` instead. ``surrogate_depth``
    is the last list index the tail maxima range over.
    """

    selection: Selection
    process: RealProcess
    n_star: list
    fallbacks: list
    surrogate_depth: int
    eps: float

    def __iter__(self):
        return iter((self.selection, self.process))


def _tail(k, L):
    return range(k, L) if k < L else range(L - 1, L)


def stitch_selection(m, S_list, eps, D):
    """Glue the selections ``S_list[n]`` into one selection of depth ``D``.

    ``F(s)`` is the maximum of ``capital(S_n, s)`` over the list's tail
    ``n >= len(s)`` (a finite stand-in for the limsup over ``n``). At each
    situation ``s`` the gamble is taken from ``S_{n*(s)}``, where ``n*(s)``
    is the first index past every ``n_x(s)`` whose capital at ``s`` is
    within ``nu(s) / 2`` of ``F(s)``. The result is almost-desirable and
    its capital stays below ``F + eps / 2`` on every path; both facts are
    verified before returning.
    """
    L = len(S_list)
    if L < max(D, 1):
        raise InputError(f"need at least {max(D, 1)} selections, got {L}")
    if eps <= 0:
        raise InputError(f"eps must be positive, got {eps}")
    X = m.n_states
    for n, S in enumerate(S_list):
        if S.n_states != X:
            raise InputError(f"S_list[{n}] is over {S.n_states} states, model has {X}")
    caps = [[capital_array(S, k) for k in range(D + 1)] for S in S_list]
    F = [np.array(np.max([caps[n][k] for n in _tail(k, L)], axis=0)) for k in range(D + 1)]
    n_star = [np.zeros((X,) * k, dtype=int) for k in range(D)]
    levels = [np.zeros((X,) * (k + 1)) for k in range(D)]
    fallbacks = []

    for k in range(D - 1, -1, -1):
        half_nu = situation_tolerance(eps, k) / 2
        for s in situations(X, k):
            n_max = 0
            for x in range(X):
                sx = s + (x,)
                ok = np.array([F[k + 1][sx] >= caps[n][k + 1][sx] - half_nu for n in range(L)])
                bad = np.flatnonzero(~ok)
                n_max = max(n_max, int(bad[-1]) + 1 if bad.size else 0)
            close = [n for n in range(n_max, L) if caps[n][k][s] >= F[k][s] - half_nu]
            if not close:
                F[k][s] = max(caps[n][k][s] for n in range(n_max, L))
                close = [n for n in range(n_max, L) if caps[n][k][s] >= F[k][s] - half_nu]
                fallbacks.append(s)
            n_star[k][s] = close[0]
            levels[k][s] = S_list[close[0]](s)

    stitched = Selection(X, D, levels)
    process = RealProcess(X, D, F)
    result = StitchResult(stitched, process, n_star, fallbacks, L - 1, eps)

    bad = desirability_violations(m, stitched)
    if bad:
        raise ConstructionError(f"stitched selection is not almost-desirable at {bad[0]}", instance=result)
    for k in range(D + 1):
        excess = capital_array(stitched, k) - F[k] - eps / 2
        if excess.max() > CHECK_TOL:
            idx = np.unravel_index(np.argmax(excess), excess.shape)
            raise ConstructionError(
                f"capital exceeds F + eps/2 by {excess.max():.3g} at {idx}", instance=result
            )
    return result


@dataclass
class GapRow:
    trial: int
    model: object
    vvs_limit: float
    converged: bool
    williams: tuple
    horizons: tuple
    gap: float
    flagged: bool


@dataclass
class GapReport:
    rows: list = field(default_factory=list)
    threshold: float = 0.01

    @property
    def gaps(self):
        return [r for r in self.rows if r.flagged]


def _safety_cylinder_infimum(mask):
    """Value of the largest n-measurable gamble below the indicator of
    staying in ``B`` forever. On a prefix ``w`` it is the infimum of the
    indicator over all paths through ``w``; some path leaves ``B`` unless
    ``B`` is the whole space, so it is the same constant for every n."""
    return 1.0 if mask.all() else 0.0


def williams_gap_search(family, B, horizons, trials, seed=0, threshold=0.01, certify_upto=3):
    """Compare, for sampled models, the Ville-Vovk-Shafer limit of the
    safety probabilities for ``B`` with what finite certificates give for
    the Williams extension of the safety event itself.

    ``family`` is a callable ``rng -> ChainModel``. For each horizon ``n``
    the Williams value is the extension of the largest n-measurable gamble
    below the safety indicator; for ``n <= certify_upto`` it is also
    re-derived as an LP certificate and checked for domination. A row is
    flagged when the Williams values stay below the VVS limit by more
    than ``threshold``. Finding nothing is a valid outcome.
    """
    rng = np.random.default_rng(seed)
    horizons = tuple(sorted(set(int(h) for h in horizons)))
    report = GapReport(threshold=threshold)
    if not horizons:
        return report
    for t in range(trials):
        model = family(rng)
        seq = safety_sequence(model, B, max(horizons))
        limit = monotone_limit_nonincreasing(model, seq, max_horizon=max(horizons))
        mask = seq.mask
        williams = []
        floor = _safety_cylinder_infimum(mask)
        for n in horizons:
            value = williams_nmeasurable(model, NGamble.constant(model.n_states, floor))
            if n <= certify_upto:
                g = NGamble.constant(model.n_states, floor, n)
                cert = lp_witness_search(model, g, n)
                if not dominates(seq.gamble(n), cert.alpha, cert.selection, n) or abs(cert.alpha - value) > 1e-6:
                    raise ConstructionError(f"certificate disagrees at horizon {n}", instance=model)
            williams.append(value)
        gap = limit.value - max(williams)
        report.rows.append(
            GapRow(t, model, limit.value, limit.converged, tuple(williams), horizons, gap, gap > threshold)
        )
    return report
