"""Williams and Ville-Vovk-Shafer natural extensions for imprecise Markov
chains on finite state spaces, with checkable selection certificates."""

from .chain import ChainModel, LowerTransitionOperator, apply_T, local_model, reroot
from .credal import (
    CredalSet,
    lower_expectation,
    make_linear_vacuous,
    make_precise,
    make_vacuous,
    upper_expectation,
)
from .exceptions import (
    ConstructionError,
    InputError,
    NotAlmostDesirableError,
    ParseError,
    SolverError,
    UnsupportedOperationError,
)
from .extension import (
    LimitResult,
    monotone_limit_nondecreasing,
    monotone_limit_nonincreasing,
    precise_reach_probability,
    precise_safety_probability,
    reach_sequence,
    safety_sequence,
    vvs_nmeasurable,
    williams_nmeasurable,
)
from .tree import NGamble, RealProcess, Selection, capital, eval_ngamble, limsup_capital, restrict
from .witness import (
    Certificate,
    CutoffData,
    compute_cutoff,
    cutoff_selection,
    dominates,
    greedy_nonneg_path,
    is_almost_desirable,
    lp_witness_search,
    stitch_selection,
    truncate_selection,
    williams_gap_search,
)

__version__ = "0.1.0"
