//! Carleman weight, coefficient functions, the integration-by-parts identity
//! and numerical certification of the global Carleman inequality.

mod certify;
mod coefficients;
mod identity;
pub mod jet;
pub mod testfn;
mod weight;

pub use certify::{
    carleman_sides, certify, positivity_check, CarlemanReport, PositivityReport, SidesSampler,
};
pub use coefficients::{
    claimed_leading_terms, coefficient_jets, coefficients, coefficients_from_partials, combine,
    combined_coefficients, displayed_combined_coefficients, leading_terms, CarlemanCoefficients,
    CombinedCoefficients, Scalar,
};
pub use identity::{ibp_identity_check, IdentityResidual};
pub use testfn::{AdmissibleFunction, CutOrbit, PointValues, SmoothField, ZeroField};
pub use weight::{WeightPartials, WeightProfile};

use crate::profile::panel_rule;
use crate::quadrature::{CompositeRule, Resolution, NODES_PER_PANEL};

const PANELS_PER_PERIOD: f64 = 3.0;

/// Time and space rules for integrating over the support of `u`.
pub(crate) fn space_time_rules(u: &dyn SmoothField, res: Resolution) -> (CompositeRule, CompositeRule) {
    let (a, b) = u.time_support();
    let l = u.half_length();
    let periods = u.time_frequency() * (b - a) / (2.0 * std::f64::consts::PI);
    let factor = res.panels() as f64 / Resolution::Default.panels() as f64;
    let panels = res.panels().max((PANELS_PER_PERIOD * periods * factor).ceil() as usize);
    let t_rule = panel_rule(a, b, &u.time_breakpoints(), panels, NODES_PER_PANEL);
    let x_rule = CompositeRule::new(-l, l, res.panels(), NODES_PER_PANEL);
    (t_rule, x_rule)
}
