//! Carroll wave functions, their group representations and quantum checks.

mod checks;
mod grid;
mod wave;

pub use checks::{
    alpha_fiber_integral, alpha_pullback_residual, carroll_residual, carroll_residual_with, d_alpha_residual,
    density_drift, kg_limit_check, laplacian, polarization_residual, prequantum_alpha, CarrollResidual, KgReport,
    PrequantumAlpha, CIRCLE_TOL, FD_DS,
};
pub use grid::{Axis, GridSpec, Interpolation};
pub use wave::{
    rep, rep_momentum, rep_momentum_with, rep_position, rep_position_with, Carrier, Polarization, Transformed,
    WaveFunction, CLIP_MARGIN,
};
