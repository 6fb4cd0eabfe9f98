"""Decision-support engine for strategic environmental assessment over
coaxial activity/impact/receptor matrices.

Two complementary interpretations of the same matrices are provided: a
linear model (footprint evaluation plus LP-based planning queries with
sensitivity analysis) and a causal probabilistic model (noisy-OR inference
with interventions), together with tooling to compare the two.
"""

from .budget import TimeBudgetError
from .causal import (
    CausalProgram,
    CombinationParams,
    GroundClause,
    GroundProgram,
    OracleLimitError,
    StratificationError,
    build_program,
    enumerate_oracle,
    export_text,
    ground,
    impact_probability,
    intervene,
    parse_program_text,
    receptor_evidence,
    receptor_probabilities,
    receptor_probability,
)
from .compare import (
    ComparisonCell,
    ComparisonTable,
    DivergenceEntry,
    SignAgreement,
    build_table,
    divergence_rank,
    isotonic_fit,
    parse_scatter,
    scatter_export,
    sign_agreement,
)
from .linear import (
    CapacityObjective,
    DeltaResult,
    FootprintReport,
    MaxReceptorResult,
    SignConvention,
    assess,
    build_capacity_problem,
    build_max_receptor_problem,
    optimize_scenario_delta,
    solve_max_receptor,
    unit_footprint,
    unit_receptor_effects,
)
from .lp import (
    LinearConstraint,
    LpProblem,
    LpSolution,
    MalformedProblemError,
    PivotLimitError,
    SensitivityReport,
    Variable,
    export_lp_text,
    sensitivity_report,
    solve_lp,
    solve_mip,
)
from .matrices import (
    Activity,
    CoaxialMatrices,
    DemandGroup,
    Impact,
    LevelMapping,
    MatrixFormatError,
    Polarity,
    Receptor,
    Scenario,
    UnknownEntityError,
    ValidationReport,
    builder,
    load_matrices,
    load_matrices_dir,
    load_scenario,
    matrices_to_files,
    save_matrices,
    scenario_from_dict,
    scenario_to_dict,
    validate,
    validate_scenario,
)

__version__ = "0.1.0"
