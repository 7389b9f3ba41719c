"""Exact contextuality analysis of finite measurement systems.

Decides standard, M- and CbD-contextuality with rational arithmetic,
computes minimal direct influences, and builds verifiable witnesses
(global distributions, couplings, aligned causal models) or Farkas
certificates of infeasibility.
"""

from __future__ import annotations

from .coupling import (
    CONTEXTUAL,
    NONCONTEXTUAL,
    NOT_APPLICABLE,
    ContextualityVerdict,
    Coupling,
    cbd_contextuality_test,
    equality_probability,
    is_coupling_for,
    m_contextuality_test,
    standard_contextuality_test,
)
from .errors import CapacityError, CtxlabError, DomainMismatch, IncompleteModel, InputError, TheoremViolation
from .feasibility import Equality, FeasibilityProblem, FeasibilityResult, solve
from .model import (
    CanonicalModel,
    build_minimal_pair_model,
    coupling_to_model,
    direct_influence,
    hahn_jordan,
    induced_distribution,
    is_aligned,
    is_context_free,
    is_model_for,
    minimal_direct_influence,
    minimal_influences,
    model_to_coupling,
)
from .partitioned import (
    Partition,
    PartitionedModel,
    classify_signals,
    from_partitioned,
    has_hidden_signals,
    has_no_signaling,
    signaling,
    to_partitioned,
    verify_partition,
)
from .system import (
    ContextDistribution,
    MeasurementSystem,
    OutcomeSpace,
    connection,
    is_consistently_connected,
    marginal,
    tv_distance,
    validate,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
