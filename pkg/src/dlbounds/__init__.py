"""Capacity lower bounds for coefficients of log-concave generating series,
checked against exact counts of flows, contingency tables and parabolic
Verma weight multiplicities."""

from .bounds import (
    BoundReport,
    correction_factor,
    count_contingency_tables,
    ct_bound,
    dag_flow_bound,
    explicit_flow_bound,
    laurent_coeff_bound,
)
from .capacity import (
    CapacityInstance,
    CapacityResult,
    SchurFactor,
    capacity_optimize,
    capacity_split_lower_bound,
    dual_flow_eval,
    edge_capacity_closed_form,
    support_member,
)
from .flows import (
    BudgetExceeded,
    Dag,
    DomainError,
    count_flows_exact,
    degree_bounds,
    enumerate_flows,
    eval_flow_series,
    flow_feasible,
    suffix_component,
    terminal_vertices,
)
from .laurent import (
    CoeffSequence,
    SparsePoly,
    convergence_ratio_interval,
    is_log_concave,
    is_m_convex,
    lorentzian_check,
    normalize,
    poly_project,
    truncate,
)
from .tableaux import kostka, schur_eval
from .verma import (
    VermaInstance,
    build_GJ,
    character_coefficient_exact,
    decompose_J,
    lambda_parts,
    verma_bound,
    verma_explicit_bound,
)

__version__ = "0.1.0"
