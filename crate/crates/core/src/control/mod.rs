//! The variational source solver and the cutoff-blend control construction on
//! the truncated periodic space.

pub mod bspline;
pub mod source;

pub use source::{
    envelope_integral, random_compatible_source, solve_source_problem, Envelope,
    SeparableSource, SourceParams, SourceSolution, SourceTerm, SumSource,
};
pub mod synthesis;

pub use synthesis::{
    blend_source, exactness_defects, synthesize_control, verify_endpoints, ControlProblem,
    ControlSolution, ControlSummary, ControlledTrajectory, EndpointCheck, Perturbed,
};
