use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::scenario::{sphere_frame, EvolutionPoint, Scenario, ScenarioKind};
use super::sigma::{effective_mass_sq, kernel_basis, sigma_matrix, Layout, KERNEL_RTOL};
use crate::error::Result;
use crate::lie::{cross3, eps_apply};

/// Relative threshold under which a mass-like denominator counts as zero.
pub const DEGENERACY_RTOL: f64 = 1e-12;

/// Rates `(dx/ds, dv/ds[, du/ds])`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tangent {
    pub dx: DVector<f64>,
    pub dv: DVector<f64>,
    pub du: Option<DVector<f64>>,
}

impl Tangent {
    pub fn max_abs_diff(&self, other: &Tangent) -> f64 {
        let mut d = (&self.dx - &other.dx).amax().max((&self.dv - &other.dv).amax());
        match (&self.du, &other.du) {
            (Some(a), Some(b)) => d = d.max((a - b).amax()),
            (None, None) => {}
            _ => return f64::INFINITY,
        }
        d
    }

    pub fn norm(&self) -> f64 {
        let mut n2 = self.dx.norm_squared() + self.dv.norm_squared();
        if let Some(du) = &self.du {
            n2 += du.norm_squared();
        }
        n2.sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EomOutcome {
    Regular(Tangent),
    /// Precondition failed; the reason names the constraint.
    Degenerate(String),
}

impl EomOutcome {
    pub fn tangent(&self) -> Option<&Tangent> {
        match self {
            EomOutcome::Regular(t) => Some(t),
            EomOutcome::Degenerate(_) => None,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, EomOutcome::Degenerate(_))
    }
}

/// Summary of the kernel of sigma at a point, for reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelReport {
    pub kernel_dim: usize,
    pub reduced_kernel_dim: usize,
    pub effective_mass_sq: Option<f64>,
}

fn is_zero(value: f64, scale: f64) -> bool {
    scale == 0.0 || value.abs() <= DEGENERACY_RTOL * scale
}

/// Effective mass squared of a planar scenario at `y`, with the scale used to
/// judge whether it vanishes.
pub fn planar_effective_mass(y: &EvolutionPoint, scenario: &Scenario) -> (f64, f64) {
    let pr = scenario.params();
    let (_, b) = scenario.fields_at(y.x(), y.s());
    let qb = if scenario.kind().has_field() { pr.q * b[0] } else { 0.0 };
    let q1 = pr.q1 - 0.5 * qb;
    (
        effective_mass_sq(pr.m, pr.q1, pr.q2, qb),
        pr.m * pr.m + 4.0 * (q1 * pr.q2).abs(),
    )
}

/// Equations of motion in closed form.
pub fn eom(y: &EvolutionPoint, scenario: &Scenario) -> Result<EomOutcome> {
    y.check_layout(scenario)?;
    let pr = scenario.params();
    let kind = scenario.kind();
    let d = kind.spatial_dim();
    let zero = DVector::zeros(d);
    if kind.is_planar() {
        let (mt2, scale) = planar_effective_mass(y, scenario);
        if is_zero(mt2, scale) {
            return Ok(EomOutcome::Degenerate(format!(
                "effective mass vanishes (m^2 + 4(q1 - qB/2)q2 = {mt2:e}); motions are constrained by \
                 m dx = -2 q2 eps dv and <qE + mu theta grad B, dx> ds = 0 only"
            )));
        }
        if kind == ScenarioKind::Free2DExt {
            return Ok(EomOutcome::Regular(Tangent {
                dx: zero.clone(),
                dv: zero,
                du: None,
            }));
        }
        let f = planar_force(y, scenario);
        return Ok(EomOutcome::Regular(Tangent {
            dx: eps_apply(&f) * (-2.0 * pr.q2 / mt2),
            dv: f * (pr.m / mt2),
            du: None,
        }));
    }
    if pr.m == 0.0 {
        return Ok(EomOutcome::Degenerate("mass vanishes".into()));
    }
    if kind.has_spin() && pr.spin == 0.0 {
        return Ok(EomOutcome::Degenerate("scalar spin vanishes".into()));
    }
    let tangent = match kind {
        ScenarioKind::Free3D => Tangent {
            dx: zero.clone(),
            dv: zero,
            du: None,
        },
        ScenarioKind::FreeSpin3D => Tangent {
            dx: zero.clone(),
            dv: zero,
            du: Some(DVector::zeros(3)),
        },
        ScenarioKind::EM3DSpinless => {
            let (e, _) = scenario.fields_at(y.x(), y.s());
            Tangent {
                dx: zero,
                dv: e * (pr.q / pr.m),
                du: None,
            }
        }
        ScenarioKind::EM3DSpin => {
            let u = y.u().expect("layout checked");
            let field = scenario.field().expect("validated");
            let (e, b) = scenario.fields_at(y.x(), y.s());
            let grad_ub = field.grad_b(y.x(), y.s()).transpose() * u;
            Tangent {
                dx: zero,
                dv: (e * pr.q + grad_ub * pr.mu) / pr.m,
                du: Some(cross3(u, &b) * (pr.mu / pr.spin)),
            }
        }
        _ => unreachable!("planar kinds handled above"),
    };
    Ok(EomOutcome::Regular(tangent))
}

/// `qE + mu theta grad B` for the planar models.
pub fn planar_force(y: &EvolutionPoint, scenario: &Scenario) -> DVector<f64> {
    let pr = scenario.params();
    match scenario.field() {
        Some(f) => {
            let gb = f.grad_b(y.x(), y.s()).row(0).transpose();
            f.e(y.x(), y.s()) * pr.q + gb * (pr.mu * pr.theta)
        }
        None => DVector::zeros(2),
    }
}

/// Reduced 2-form: drops the gauge fiber `(w, z)`.
fn reduced_sigma(sig: &DMatrix<f64>, lay: &Layout) -> DMatrix<f64> {
    match lay.fiber {
        Some((iw, iz)) => sig.clone().remove_columns_at(&[iw, iz]).remove_rows_at(&[iw, iz]),
        None => sig.clone(),
    }
}

/// Equations of motion read off the kernel of the presymplectic form.
pub fn eom_from_kernel(y: &EvolutionPoint, scenario: &Scenario) -> Result<EomOutcome> {
    let sig = sigma_matrix(y, scenario)?;
    let lay = Layout::of(scenario.kind());
    let red = reduced_sigma(&sig, &lay);
    let ker = kernel_basis(&red, KERNEL_RTOL);
    if ker.ncols() != 1 {
        return Ok(EomOutcome::Degenerate(format!(
            "kernel of the reduced 2-form has dimension {} (expected 1)",
            ker.ncols()
        )));
    }
    let k = ker.column(0);
    let ds = k[lay.s];
    if ds.abs() <= DEGENERACY_RTOL * k.amax() {
        return Ok(EomOutcome::Degenerate("kernel direction has no ds component".into()));
    }
    let k = k / ds;
    let d = lay.d;
    let dx = k.rows(lay.x, d).into_owned();
    let dv = k.rows(lay.v, d).into_owned();
    let du = match (lay.spin, y.u()) {
        (Some((ia, ib)), Some(u)) => {
            let (e1, e2) = sphere_frame(u);
            Some(e1 * k[ia] + e2 * k[ib])
        }
        _ => None,
    };
    Ok(EomOutcome::Regular(Tangent { dx, dv, du }))
}

/// Kernel dimensions (full and with the fiber dropped) and effective mass at `y`.
pub fn kernel_report(y: &EvolutionPoint, scenario: &Scenario) -> Result<KernelReport> {
    let sig = sigma_matrix(y, scenario)?;
    let lay = Layout::of(scenario.kind());
    let kernel_dim = kernel_basis(&sig, KERNEL_RTOL).ncols();
    let reduced_kernel_dim = kernel_basis(&reduced_sigma(&sig, &lay), KERNEL_RTOL).ncols();
    let effective_mass_sq = scenario
        .kind()
        .is_planar()
        .then(|| planar_effective_mass(y, scenario).0);
    Ok(KernelReport {
        kernel_dim,
        reduced_kernel_dim,
        effective_mass_sq,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::FieldSpec;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    fn planar(x: &[f64], vv: &[f64]) -> EvolutionPoint {
        EvolutionPoint::planar(v(x), v(vv), 0.0, 0.0, 0.0)
    }

    #[test]
    fn planar_electric_drift() {
        let e0 = 0.7;
        let sc = Scenario::em_2d_ext(
            1.0,
            1.0,
            0.0,
            0.0,
            0.5,
            0.0,
            FieldSpec::uniform(vec![e0, 0.0], vec![0.0]),
        )
        .unwrap();
        let y = planar(&[0.3, 0.1], &[0.0, 0.0]);
        let t = eom(&y, &sc).unwrap();
        let t = t.tangent().unwrap();
        assert!((t.dx.clone() - v(&[0.0, e0])).amax() < 1e-15);
        assert!((t.dv.clone() - v(&[e0, 0.0])).amax() < 1e-15);
        let k = eom_from_kernel(&y, &sc).unwrap();
        assert!(k.tangent().unwrap().max_abs_diff(t) < 1e-12);
    }

    #[test]
    fn photon_drift() {
        let g0 = 0.9;
        let f = FieldSpec::linear(
            vec![0., 0.],
            DMatrix::zeros(2, 2),
            vec![0.2],
            DMatrix::from_row_slice(1, 2, &[g0, 0.0]),
        );
        let sc = Scenario::photon_2d(1.0, 1.0, 0.4, 1.0, f).unwrap();
        let y = planar(&[0.5, -0.5], &[0.1, 0.2]);
        let t = eom(&y, &sc).unwrap();
        let t = t.tangent().unwrap();
        assert!((t.dx.clone() - v(&[0.0, g0 / 2.0])).amax() < 1e-15);
        assert_eq!(t.dv, v(&[0.0, 0.0]));
        assert!(eom_from_kernel(&y, &sc).unwrap().tangent().unwrap().max_abs_diff(t) < 1e-12);
    }

    #[test]
    fn photon_without_second_charge_is_degenerate() {
        let f = FieldSpec::uniform(vec![0., 0.], vec![1.0]);
        let sc = Scenario::photon_2d(1.0, 1.0, 0.0, 1.0, f).unwrap();
        let y = planar(&[0., 0.], &[0., 0.]);
        assert!(eom(&y, &sc).unwrap().is_degenerate());
        assert!(eom_from_kernel(&y, &sc).unwrap().is_degenerate());
    }

    #[test]
    fn spinless_electric_kernel() {
        let sc =
            Scenario::em_3d_spinless(2.0, 3.0, FieldSpec::uniform(vec![1., -1., 0.5], vec![0.3, 0.2, 0.1])).unwrap();
        let y = EvolutionPoint::spatial(v(&[0., 1., 0.]), v(&[1., 0., 0.]), 0.0);
        let t = eom_from_kernel(&y, &sc).unwrap();
        let t = t.tangent().unwrap();
        assert!(t.dx.amax() < 1e-14);
        assert!((t.dv.clone() - v(&[1.5, -1.5, 0.75])).amax() < 1e-13);
    }

    #[test]
    fn free_models_are_static() {
        let y = planar(&[1., 2.], &[3., 4.]);
        let sc = Scenario::free_2d_ext(1.0, 0.2, 0.3, 0.1).unwrap();
        let t = eom(&y, &sc).unwrap();
        assert_eq!(t.tangent().unwrap().norm(), 0.0);
        assert!(eom_from_kernel(&y, &sc).unwrap().tangent().unwrap().norm() < 1e-14);
        let sc = Scenario::free_2d_ext(1.0, 0.5, -0.5, 0.0).unwrap();
        assert!(eom(&y, &sc).unwrap().is_degenerate());
        assert!(eom_from_kernel(&y, &sc).unwrap().is_degenerate());
    }

    #[test]
    fn spin_precession_rate_from_kernel() {
        let b = v(&[0.0, 0.0, 2.0]);
        let sc = Scenario::em_3d_spin(
            1.0,
            0.5,
            0.0,
            0.3,
            FieldSpec::uniform(vec![0.; 3], b.as_slice().to_vec()),
        )
        .unwrap();
        let u = v(&[1.0, 0.0, 0.0]);
        let y = EvolutionPoint::with_spin(v(&[0.; 3]), v(&[0.; 3]), 0.0, u.clone()).unwrap();
        let k = eom_from_kernel(&y, &sc).unwrap();
        let du = k.tangent().unwrap().du.clone().unwrap();
        assert!((du - cross3(&u, &b) * (0.3 / 0.5)).amax() < 1e-14);
    }
}
