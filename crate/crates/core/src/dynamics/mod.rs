//! Presymplectic dynamics of the flat-space models.

mod eom;
mod field;
mod integrate;
mod scenario;
mod sigma;

pub use eom::{
    eom, eom_from_kernel, kernel_report, planar_effective_mass, planar_force, EomOutcome, KernelReport, Tangent,
};
pub use field::{central_jacobian, FieldPreset, FieldSpec, FD_STEP};
pub use integrate::{integrate, rk4_step, Sample, Trajectory};
pub use scenario::{sphere_frame, EvolutionPoint, Params, Scenario, ScenarioKind, UNIT_TOL};
pub use sigma::{effective_mass_sq, kernel_basis, kernel_dim, sigma_matrix, Layout, KERNEL_FLOOR, KERNEL_RTOL};
