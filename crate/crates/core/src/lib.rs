//! Time-division bandwidth allocation between sensory-data upload and
//! model-parameter download in an end-edge collaboration system.
//!
//! The end device uploads a proportion `ρ` of its frames at quantization level
//! `q` so the edge model can improve to `mAP* = g_q(ρ)`, and the edge sends `M`
//! distilled parameters back, giving the end model `mAP = f(M, mAP*)`. Uplink
//! and downlink share one channel in time. The solver builds the upper boundary
//! `L(M)` of reachable `mAP*` for every `M` ([`envelope`]) and then maximises
//! `f(M, L(M))` over a single variable ([`solver`]).
//!
//! ```
//! use edgealloc_core::{solve, synth, validate_instance};
//!
//! let instance = validate_instance(synth::reference_instance()).unwrap();
//! let result = solve(&instance).unwrap();
//! assert_eq!(result.m_opt, 1e6);
//! assert_eq!(result.t_d_opt, 8.0);
//! ```

// `!(x > 0.0)` is used on purpose so NaN falls on the rejecting side.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod envelope;
pub mod error;
pub mod feasibility;
pub mod model;
pub mod oracle;
pub mod search;
pub mod solver;
pub mod sweep;
pub mod synth;
pub mod validate;

pub use envelope::{
    build_envelope, build_envelope_with, per_level_boundary, rho_cap, write_envelope_csv, Envelope,
    EnvelopeOptions, EnvelopePoint, EnvelopeSample, PerLevelBoundary, Segment, SegmentKind,
};
pub use error::{Error, Issue, Result, ValidationReport};
pub use feasibility::{check_feasible, Candidate, Constraint, FeasibilityReport};
pub use model::{
    downlink_rate, uplink_rate, BlendCurve, FusionModel, PerfCurve, ProblemInstance,
    QuantLevelModel, SystemParams,
};
pub use oracle::{
    brute_force, grid_resolution_bound, GridSpec, OracleCandidate, OracleOptions, OracleResult,
};
pub use solver::{objective, solve, solve_with, AllocationResult, SolveOptions};
pub use sweep::{
    overhead_split, run_sweep, Baseline, FixedStrategyBaseline, OverheadSplit, SweepRow, SweepSpec,
    SweepTable, SweptParam,
};
pub use validate::{validate_instance, ValidatedInstance};
