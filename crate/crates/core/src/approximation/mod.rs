//! Finite-dimensional analogue of the approximation machinery: flow
//! mollification and spatial truncation, semigroup fits on time windows, and
//! extension of a localized trajectory to a larger periodic interval.

mod extend;
mod trajectory;

pub use extend::{
    cross_gram, extend_field, extend_rounds, extend_solution, match_semigroup_windows,
    region_distance, smooth_truncate, ExtendedTrajectory, ExtensionParams, ExtensionResult,
    ExtensionSummary, FieldExtension, Truncation, WindowFit, WindowFits, TIKHONOV,
};
pub use trajectory::{CompactTrajectory, ModalTrajectory};
