//! Complex interpolation on the strip `{0 < Re z < 1}`: harmonic measure,
//! analytic reproduction, closed-form couple norms and competitor bounds.

mod couple;
mod strip;

pub use couple::{
    competitor_upper_bound, couple_norm_closed, elementary_factors, CondShape, CoupleSpec, PowerCompetitor,
    PowerFactor, WeightedEndpoint,
};
pub use strip::{reproduce, strip_measure, ExpSum, StripMeasure, DEFAULT_GRID, HALF_WIDTH};
