//! Exact spectral representation of the periodic Kawahara group and a discrete
//! space-time realization of `P = ∂t + ∂x + ∂x³ − ∂x⁵`.

mod fd;
mod field;
mod grid;
mod ops;
mod trajectory;

pub use fd::fornberg_weights;
pub use field::SpectralField;
pub use grid::SpaceTimeGrid;
pub use ops::{
    apply_generator, apply_p, eigenvalue, evolve, periodic_nodes, project, synthesize,
    wavenumber, PResidual, TimeDerivativeKind,
};
pub use trajectory::{TrajectoryField, TrajectoryValues};

/// Default truncation order.
pub const DEFAULT_ORDER: usize = 32;
