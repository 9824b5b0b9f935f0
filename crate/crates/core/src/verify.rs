//! Seeded randomized sweeps over the library's invariants, for self-reports.

use nalgebra::{DMatrix, DVector, Rotation3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::coadjoint::{casimirs, coadjoint, coadjoint_closed_form, coadjoint_dual, moment_map, Moment};
use crate::dynamics::{eom, eom_from_kernel, kernel_dim, EvolutionPoint, FieldSpec, Scenario, ScenarioKind};
use crate::error::Result;
use crate::lie::{bracket, AlgebraElement, AlgebraKind, GroupElement};
use crate::quantize::{carroll_residual, d_alpha_residual, rep, GridSpec, Polarization, WaveFunction};

/// One property check: the worst value seen against its tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub samples: usize,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckOutcome {
    pub fn new(name: &str, samples: usize, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            samples,
            value,
            tolerance,
            passed: value <= tolerance,
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uni(r: &mut ChaCha8Rng) -> f64 {
    r.random_range(-1.0..1.0)
}

fn vec_of(r: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| uni(r))
}

pub fn random_rotation(r: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
    if d == 2 {
        let t: f64 = r.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        DMatrix::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()])
    } else {
        let axis = Vector3::new(uni(r), uni(r), uni(r)) * 2.0;
        let m = Rotation3::from_scaled_axis(axis).into_inner();
        DMatrix::from_iterator(3, 3, m.iter().cloned())
    }
}

pub fn random_algebra(r: &mut ChaCha8Rng, kind: AlgebraKind) -> AlgebraElement {
    let c: Vec<f64> = (0..kind.algebra_dim()).map(|_| uni(r)).collect();
    AlgebraElement::from_coords(kind, &c).expect("coordinate count matches the kind")
}

pub fn random_group(r: &mut ChaCha8Rng, kind: AlgebraKind) -> GroupElement {
    let d = kind.spatial_dim();
    let (a1, a2) = if kind.is_extended() {
        (uni(r), uni(r))
    } else {
        (0.0, 0.0)
    };
    GroupElement::new(kind, random_rotation(r, d), vec_of(r, d), vec_of(r, d), uni(r), a1, a2)
        .expect("random rotations are orthogonal")
}

pub fn random_moment(r: &mut ChaCha8Rng, kind: AlgebraKind) -> Moment {
    let mut c: Vec<f64> = (0..kind.algebra_dim()).map(|_| uni(r)).collect();
    // keep the mass away from zero so every Casimir is defined
    let im = kind.rotation_dim() + 2 * kind.spatial_dim();
    c[im] = if c[im] < 0.0 { c[im] - 0.5 } else { c[im] + 0.5 };
    Moment::from_coords(kind, &c).expect("coordinate count matches the kind")
}

fn random_field(r: &mut ChaCha8Rng, d: usize) -> FieldSpec {
    let rb = d * (d - 1) / 2;
    FieldSpec::linear(
        vec_of(r, d).as_slice().to_vec(),
        DMatrix::from_fn(d, d, |_, _| 0.3 * uni(r)),
        vec_of(r, rb).as_slice().to_vec(),
        DMatrix::from_fn(rb, d, |_, _| 0.3 * uni(r)),
    )
}

fn positive(r: &mut ChaCha8Rng) -> f64 {
    r.random_range(0.5..2.0)
}

/// Random scenario of the given kind together with a point of its evolution space.
pub fn random_scenario(r: &mut ChaCha8Rng, kind: ScenarioKind) -> (Scenario, EvolutionPoint) {
    let d = kind.spatial_dim();
    let sc = match kind {
        ScenarioKind::Free3D => Scenario::free_3d(positive(r)),
        ScenarioKind::FreeSpin3D => Scenario::free_spin_3d(positive(r), positive(r)),
        ScenarioKind::EM3DSpinless => Scenario::em_3d_spinless(positive(r), uni(r), random_field(r, 3)),
        ScenarioKind::EM3DSpin => Scenario::em_3d_spin(positive(r), positive(r), uni(r), uni(r), random_field(r, 3)),
        ScenarioKind::Free2DExt => Scenario::free_2d_ext(positive(r), uni(r), uni(r), uni(r)),
        ScenarioKind::EM2DExt => {
            Scenario::em_2d_ext(positive(r), uni(r), uni(r), uni(r), uni(r), uni(r), random_field(r, 2))
        }
        ScenarioKind::Photon2D => {
            let q2 = positive(r);
            Scenario::photon_2d(uni(r), positive(r), q2, uni(r), random_field(r, 2))
        }
    }
    .expect("random parameters satisfy the scenario constraints");
    let (x, v, s) = (vec_of(r, d), vec_of(r, d), uni(r));
    let y = if kind.is_planar() {
        EvolutionPoint::planar(x, v, s, uni(r), uni(r))
    } else if kind.has_spin() {
        let u = vec_of(r, 3).normalize();
        EvolutionPoint::with_spin(x, v, s, u).expect("normalized")
    } else {
        EvolutionPoint::spatial(x, v, s)
    };
    (sc, y)
}

pub fn jacobi(r: &mut ChaCha8Rng, n: usize) -> Result<CheckOutcome> {
    let mut worst: f64 = 0.0;
    for kind in AlgebraKind::all() {
        for _ in 0..n {
            let (x, y, z) = (
                random_algebra(r, kind),
                random_algebra(r, kind),
                random_algebra(r, kind),
            );
            let t1 = bracket(&x, &bracket(&y, &z)?)?;
            let t2 = bracket(&y, &bracket(&z, &x)?)?;
            let t3 = bracket(&z, &bracket(&x, &y)?)?;
            let sum = t1.add(&t2)?.add(&t3)?;
            worst = worst.max(sum.max_abs_diff(&AlgebraElement::zero(kind)));
        }
    }
    Ok(CheckOutcome::new("jacobi_identity", 3 * n, worst, 1e-12))
}

pub fn bracket_is_commutator(r: &mut ChaCha8Rng, n: usize) -> Result<CheckOutcome> {
    let mut worst: f64 = 0.0;
    for kind in AlgebraKind::all() {
        for _ in 0..n {
            let (x, y) = (random_algebra(r, kind), random_algebra(r, kind));
            let (mx, my) = (x.to_matrix().into_inner(), y.to_matrix().into_inner());
            let comm = &mx * &my - &my * &mx;
            worst = worst.max((bracket(&x, &y)?.to_matrix().into_inner() - comm).amax());
        }
    }
    Ok(CheckOutcome::new("bracket_matches_commutator", 3 * n, worst, 1e-12))
}

pub fn group_law_is_matrix_product(r: &mut ChaCha8Rng, n: usize) -> Result<CheckOutcome> {
    let mut worst: f64 = 0.0;
    for kind in AlgebraKind::all() {
        for _ in 0..n {
            let (a, b) = (random_group(r, kind), random_group(r, kind));
            let prod = a.to_matrix().into_inner() * b.to_matrix().into_inner();
            worst = worst.max((a.compose(&b)?.to_matrix().into_inner() - prod).amax());
        }
    }
    Ok(CheckOutcome::new(
        "group_law_matches_matrix_product",
        3 * n,
        worst,
        1e-12,
    ))
}

pub fn coadjoint_routes_agree(r: &mut ChaCha8Rng, n: usize) -> Result<CheckOutcome> {
    let mut worst: f64 = 0.0;
    let kind = AlgebraKind::ExtCarr2;
    for _ in 0..n {
        let (a, mu) = (random_group(r, kind), random_moment(r, kind));
        worst = worst.max(coadjoint_closed_form(&a, &mu).max_abs_diff(&coadjoint_dual(&a, &mu)?));
    }
    Ok(CheckOutcome::new("coadjoint_closed_form_matches_dual", n, worst, 1e-10))
}

pub fn casimir_invariance(r: &mut ChaCha8Rng, n: usize) -> Result<CheckOutcome> {
    let mut worst: f64 = 0.0;
    for kind in AlgebraKind::all() {
        for _ in 0..n {
            let (a, mu) = (random_group(r, kind), random_moment(r, kind));
            worst = worst.max(casimirs(&mu).max_abs_diff(&casimirs(&coadjoint(&a, &mu)?)));
        }
    }
    Ok(CheckOutcome::new("casimirs_coadjoint_invariant", 3 * n, worst, 1e-10))
}

/// `J(a . y) = Coad(a) J(y)` on the free models.
pub fn moment_equivariance(r: &mut ChaCha8Rng, n: usize) -> Result<CheckOutcome> {
    let mut worst: f64 = 0.0;
    let kinds = [ScenarioKind::Free3D, ScenarioKind::FreeSpin3D, ScenarioKind::Free2DExt];
    for kind in kinds {
        for _ in 0..n {
            let (sc, y) = random_scenario(r, kind);
            let mut a = random_group(r, kind.algebra_kind());
            if kind.is_planar() {
                // central parameters act trivially on the evolution space
                a = GroupElement::new(
                    a.kind(),
                    a.rot().clone(),
                    a.boost_part().clone(),
                    a.translation_part().clone(),
                    a.time_shift(),
                    0.0,
                    0.0,
                )?;
            }
            let lhs = moment_map(&y.transform(&a)?, &sc)?;
            let rhs = coadjoint(&a, &moment_map(&y, &sc)?)?;
            worst = worst.max(lhs.max_abs_diff(&rhs));
        }
    }
    Ok(CheckOutcome::new("moment_map_equivariant", 3 * n, worst, 1e-10))
}

pub fn eom_routes_agree(r: &mut ChaCha8Rng, n: usize) -> Result<CheckOutcome> {
    let mut worst: f64 = 0.0;
    for kind in ScenarioKind::ALL {
        for _ in 0..n {
            let (sc, y) = random_scenario(r, kind);
            let gap = match (eom(&y, &sc)?.tangent(), eom_from_kernel(&y, &sc)?.tangent()) {
                (Some(a), Some(b)) => a.max_abs_diff(b) / a.norm().max(1.0),
                (None, None) => 0.0,
                _ => f64::INFINITY,
            };
            worst = worst.max(gap);
        }
    }
    Ok(CheckOutcome::new("closed_form_eom_matches_kernel", 7 * n, worst, 1e-9))
}

/// Kernel dimensions 3 and 5 for the free planar model, 1 for the free spatial one.
pub fn kernel_dimensions(r: &mut ChaCha8Rng, n: usize) -> Result<CheckOutcome> {
    let mut mismatches = 0usize;
    for _ in 0..n {
        let (sc, y) = random_scenario(r, ScenarioKind::Free2DExt);
        let pr = *sc.params();
        mismatches += usize::from(kernel_dim(&y, &sc)? != 3);
        // choose q1 so that m^2 + 4 q1 q2 = 0
        let q2 = if pr.q2.abs() < 0.1 { 0.5 } else { pr.q2 };
        let crit = Scenario::free_2d_ext(pr.m, -pr.m * pr.m / (4.0 * q2), q2, pr.theta)?;
        mismatches += usize::from(kernel_dim(&y, &crit)? != 5);
        let (sc3, y3) = random_scenario(r, ScenarioKind::Free3D);
        mismatches += usize::from(kernel_dim(&y3, &sc3)? != 1);
    }
    Ok(CheckOutcome::new("kernel_dimensions", 3 * n, mismatches as f64, 0.0))
}

/// Small-grid quantization checks: Carroll residual, unitarity, and `d alpha`.
pub fn quantum_checks(r: &mut ChaCha8Rng, n: usize) -> Result<Vec<CheckOutcome>> {
    let grid = GridSpec::cube(2, 8.0, 96)?;
    let mut fd: f64 = 0.0;
    let mut unit: f64 = 0.0;
    let mut dalpha: f64 = 0.0;
    for _ in 0..n {
        let m = positive(r);
        let pol = if r.random_bool(0.5) {
            Polarization::Position
        } else {
            Polarization::Momentum
        };
        let psi = WaveFunction::gaussian(pol, m, 1.0, grid.clone(), &[0.3 * uni(r), 0.3 * uni(r)], 1.2)?;
        fd = fd.max(carroll_residual(&psi, &[0.0, uni(r)]).max());
        let mut a = random_group(r, AlgebraKind::Carr2);
        a = GroupElement::new(
            AlgebraKind::Carr2,
            a.rot().clone(),
            a.boost_part() * 0.5,
            a.translation_part() * 0.5,
            a.time_shift(),
            0.0,
            0.0,
        )?;
        let out = rep(&a, &psi)?;
        unit = unit.max((out.psi.l2_norm() - psi.l2_norm()).abs());
        let x: Vec<f64> = (0..3).map(|_| uni(r)).collect();
        let p: Vec<f64> = (0..3).map(|_| uni(r)).collect();
        let probes = vec![(vec_of(r, 7).as_slice().to_vec(), vec_of(r, 7).as_slice().to_vec())];
        dalpha = dalpha.max(d_alpha_residual(&x, &p, uni(r), positive(r), &probes)?);
    }
    Ok(vec![
        CheckOutcome::new("carroll_equation_fd_residual", n, fd, 1e-7),
        CheckOutcome::new("representation_unitarity", n, unit, 1e-5),
        CheckOutcome::new("d_alpha_equals_omega_over_hbar", n, dalpha, 1e-8),
    ])
}

/// Runs every sweep with `n` draws each.
pub fn run_all(seed: u64, n: usize) -> Result<Vec<CheckOutcome>> {
    let mut r = rng(seed);
    let mut out = vec![
        jacobi(&mut r, n)?,
        bracket_is_commutator(&mut r, n)?,
        group_law_is_matrix_product(&mut r, n)?,
        coadjoint_routes_agree(&mut r, n)?,
        casimir_invariance(&mut r, n)?,
        moment_equivariance(&mut r, n)?,
        eom_routes_agree(&mut r, n)?,
        kernel_dimensions(&mut r, n.min(50))?,
    ];
    out.extend(quantum_checks(&mut r, n.clamp(1, 3))?);
    Ok(out)
}
