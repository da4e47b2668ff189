//! Guaranteed lower/upper bounds on Pareto optimal outcomes of bi- and
//! tri-criteria binary linear problems, designated by Chebyshev weight
//! vectors and computed under time budgets.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bnb;
pub mod engine;
pub mod error;
pub mod instances;
pub mod lp;
pub mod scalarization;
pub mod shells;
pub mod surrogate;

pub use bnb::{
    brute_force_chebyshev, BranchAndBound, BranchPolicy, Region, ScalarSolver, SolveReport, SolveStatus,
    SolveTask,
};
pub use engine::{
    chute, find_upper_shell, lower_stage, multiplier_stage, upper_stage, ChuteConfig, ChuteResult, LowerStage,
    MultiplierStage, ProbeRecord, ProbeSchedule, Timings, UpperSearch, Variant,
};
pub use error::{ChuteError, Result};
pub use instances::{
    dominates, generate_instance, parse_instance, sample_weight_vectors, GeneratorConfig, MomipInstance, Outcome,
    Solution, WeightVector,
};
pub use scalarization::{
    chebyshev_value, estimate_reference_point, ChebyshevParams, RefProvenance, ReferencePoint, DEFAULT_EPSILON,
    DEFAULT_RHO,
};
pub use shells::{
    eligible_for_upper, gap_vector, interval_representation, lower_bounds, merge_lower, merge_upper,
    upper_bounds, BoundSide, BoundSource, BoundVector, IntervalRepresentation, MemberProvenance, Shell,
    ShellKind, ShellMember,
};
pub use surrogate::{
    make_surrogate, suboptimal_multipliers, DualConfig, DualIteration, DualTrace, Multipliers, StopReason,
    SurrogateInstance,
};
