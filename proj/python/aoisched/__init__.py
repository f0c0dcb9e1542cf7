"""Age-of-information scheduling over ARQ/HARQ channels.

Thin wrapper around the compiled ``_core`` extension.
"""

from ._core import (
    Action,
    BracketError,
    ChannelModel,
    Error,
    InadmissibleError,
    InvalidArgument,
    IterationLimitError,
    NoStationaryError,
    Policy,
    ProtocolViolation,
    SearchFailure,
    Truncation,
    arq_aoi,
    arq_cost,
    arq_lagrangian,
    arq_optimal,
    evaluate_exact,
    learn,
    search_eta_star,
    simulate,
    solve,
    solve_constrained,
    threshold_candidates,
    trace,
    verify,
)

__all__ = [name for name in dir() if not name.startswith("_")]
