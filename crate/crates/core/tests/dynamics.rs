mod common;

use carroll::coadjoint::moment_map;
use carroll::dynamics::{
    eom, eom_from_kernel, integrate, kernel_dim, kernel_report, sigma_matrix, EvolutionPoint, FieldSpec, Scenario,
    ScenarioKind,
};
use common::{eom_oracle, rng, scenario, uni, vecr, Affine, PLANAR};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn v(x: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(x)
}

fn kinds() -> impl Strategy<Value = ScenarioKind> {
    prop::sample::select(ScenarioKind::ALL.to_vec())
}

fn rel_gap(a: &carroll::dynamics::Tangent, b: &carroll::dynamics::Tangent) -> f64 {
    a.max_abs_diff(b) / a.norm().max(1.0)
}

#[test]
fn em2d_example() {
    let e0 = 0.7;
    let f = FieldSpec::uniform(vec![e0, 0.0], vec![0.0]);
    let sc = Scenario::em_2d_ext(1.0, 1.0, 0.0, 0.0, 0.5, 0.0, f).unwrap();
    let y = EvolutionPoint::planar(v(&[0.3, -0.2]), v(&[0.1, 0.4]), 0.0, 0.0, 0.0);
    assert_eq!(kernel_report(&y, &sc).unwrap().effective_mass_sq, Some(1.0));
    for out in [eom(&y, &sc).unwrap(), eom_from_kernel(&y, &sc).unwrap()] {
        let t = out.tangent().unwrap();
        assert!((&t.dx - v(&[0.0, e0])).amax() < 1e-12);
        assert!((&t.dv - v(&[e0, 0.0])).amax() < 1e-12);
    }
}

#[test]
fn photon_example() {
    let g0 = 0.9;
    // B = g0 x1, mu theta = 1
    let f = FieldSpec::linear(
        vec![0.0, 0.0],
        DMatrix::zeros(2, 2),
        vec![0.0],
        DMatrix::from_row_slice(1, 2, &[g0, 0.0]),
    );
    let sc = Scenario::photon_2d(1.0, 1.0, 0.8, 1.0, f).unwrap();
    let y = EvolutionPoint::planar(v(&[0.5, 0.1]), v(&[0.0, 0.0]), 0.0, 0.0, 0.0);
    for out in [eom(&y, &sc).unwrap(), eom_from_kernel(&y, &sc).unwrap()] {
        let t = out.tangent().unwrap();
        assert!((&t.dx - v(&[0.0, g0 / 2.0])).amax() < 1e-12, "{t:?}");
        assert!(t.dv.amax() < 1e-12);
    }
}

#[test]
fn photon_requires_both_charges() {
    let f = FieldSpec::uniform(vec![0.0, 0.0], vec![1.0]);
    let sc = Scenario::photon_2d(1.0, 1.0, 0.0, 1.0, f).unwrap();
    let y = EvolutionPoint::planar(v(&[0.0, 0.0]), v(&[0.0, 0.0]), 0.0, 0.0, 0.0);
    assert!(eom(&y, &sc).unwrap().is_degenerate());
    assert!(eom_from_kernel(&y, &sc).unwrap().is_degenerate());
}

#[test]
fn spatial_kernel_is_the_time_line() {
    let mut r = rng(11);
    let (sc, _, _, y) = scenario(&mut r, ScenarioKind::Free3D);
    let sig = sigma_matrix(&y, &sc).unwrap();
    assert_eq!(sig.rank(1e-12), 6);
    assert_eq!(kernel_dim(&y, &sc).unwrap(), 1);
    let t = eom_from_kernel(&y, &sc).unwrap();
    assert_eq!(t.tangent().unwrap().dx.amax(), 0.0);
}

#[test]
fn degenerate_free_planar_point_has_five_dim_kernel() {
    let (m, q2) = (1.5, 0.75);
    let sc = Scenario::free_2d_ext(m, -m * m / (4.0 * q2), q2, 0.2).unwrap();
    let y = EvolutionPoint::planar(v(&[1.0, 2.0]), v(&[-0.5, 0.3]), 0.1, 0.0, 0.0);
    assert_eq!(kernel_dim(&y, &sc).unwrap(), 5);
    assert!(eom(&y, &sc).unwrap().is_degenerate());
}

#[test]
fn em3d_uniform_field_is_linear_in_s() {
    let (m, q) = (2.0, 0.5);
    let e = [0.3, -0.1, 0.4];
    let sc = Scenario::em_3d_spinless(m, q, FieldSpec::uniform(e.to_vec(), vec![1.0, 2.0, 3.0])).unwrap();
    let y0 = EvolutionPoint::spatial(v(&[0.1, 0.2, 0.3]), v(&[1.0, 0.0, -1.0]), 0.0);
    let traj = integrate(&y0, &sc, (0.0, 2.0), 1e-2).unwrap();
    let end = &traj.last().point;
    let expect = y0.v() + v(&e) * (q / m * 2.0);
    assert!((end.v() - expect).amax() < 1e-13);
    assert_eq!(end.x(), y0.x());
}

#[test]
fn em2d_drift_in_uniform_electric_field() {
    let e0 = 0.7;
    let f = FieldSpec::uniform(vec![e0, 0.0], vec![0.0]);
    let sc = Scenario::em_2d_ext(1.0, 1.0, 0.0, 0.0, 0.5, 0.0, f).unwrap();
    let y0 = EvolutionPoint::planar(v(&[0.0, 0.0]), v(&[0.0, 0.0]), 0.0, 0.0, 0.0);
    let traj = integrate(&y0, &sc, (0.0, 1.0), 1e-3).unwrap();
    assert!((traj.last().point.x() - v(&[0.0, e0])).amax() < 1e-9);
}

#[test]
fn spin_precession_matches_rotation() {
    let (mu, b) = (0.8, v(&[0.0, 0.0, 1.5]));
    let f = FieldSpec::uniform(vec![0.0; 3], b.as_slice().to_vec());
    let sc = Scenario::em_3d_spin(1.0, 1.0, 0.0, mu, f).unwrap();
    let u0 = v(&[1.0, 0.0, 0.0]);
    let y0 = EvolutionPoint::with_spin(v(&[0.0; 3]), v(&[0.0; 3]), 0.0, u0).unwrap();
    let span = 3.0;
    let traj = integrate(&y0, &sc, (0.0, span), 1e-3).unwrap();
    // du = mu u x B rotates u by -mu|B| s about B
    let w = -mu * b.norm() * span;
    let expect = v(&[w.cos(), w.sin(), 0.0]);
    assert!((traj.last().point.u().unwrap() - expect).amax() < 1e-10);
    let angle = traj.column("precession_angle").unwrap();
    let period = 2.0 * std::f64::consts::PI * span / angle.last().unwrap().abs();
    let expect_period = 2.0 * std::f64::consts::PI / (mu * b.norm());
    assert!((period / expect_period - 1.0).abs() < 1e-6);
}

#[test]
fn free_planar_trajectory_is_static() {
    let mut r = rng(3);
    let (sc, _, _, y0) = scenario(&mut r, ScenarioKind::Free2DExt);
    let traj = integrate(&y0, &sc, (y0.s(), y0.s() + 1.0), 1e-2).unwrap();
    let end = &traj.last().point;
    assert_eq!(end.x(), y0.x());
    assert_eq!(end.v(), y0.v());
    assert_eq!(traj.max_moment_drift(), 0.0);
}

#[test]
fn degenerate_run_is_truncated() {
    let f = FieldSpec::uniform(vec![1.0, 0.0], vec![0.0]);
    let sc = Scenario::photon_2d(1.0, 0.0, 0.5, 1.0, f).unwrap();
    let y0 = EvolutionPoint::planar(v(&[0.0, 0.0]), v(&[0.0, 0.0]), 0.0, 0.0, 0.0);
    let traj = integrate(&y0, &sc, (0.0, 1.0), 1e-2).unwrap();
    assert!(traj.is_truncated());
    assert_eq!(traj.samples.len(), 1);
}

#[test]
fn invalid_scenarios_are_rejected() {
    assert!(Scenario::em_3d_spinless(1.0, 1.0, FieldSpec::uniform(vec![0.0; 2], vec![0.0])).is_err());
    let y = EvolutionPoint::spatial(v(&[0.0; 2]), v(&[0.0; 2]), 0.0);
    assert!(eom(&y, &Scenario::free_3d(1.0).unwrap()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sigma_is_antisymmetric(kind in kinds(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let (sc, _, _, y) = scenario(&mut r, kind);
        let s = sigma_matrix(&y, &sc).unwrap();
        prop_assert_eq!(&s + s.transpose(), DMatrix::zeros(s.nrows(), s.ncols()));
    }

    #[test]
    fn closed_form_matches_kernel(kind in kinds(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let (sc, _, _, y) = scenario(&mut r, kind);
        let (a, b) = (eom(&y, &sc).unwrap(), eom_from_kernel(&y, &sc).unwrap());
        prop_assert!(rel_gap(a.tangent().unwrap(), b.tangent().unwrap()) < 1e-9);
    }

    #[test]
    fn closed_form_matches_oracle(kind in kinds(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let (sc, c, field, y) = scenario(&mut r, kind);
        let t = eom(&y, &sc).unwrap();
        let t = t.tangent().unwrap();
        let (dx, dv, du) = eom_oracle(kind, &c, field.as_ref(), y.x(), y.u()).unwrap();
        prop_assert!((&t.dx - dx).amax() < 1e-12);
        prop_assert!((&t.dv - dv).amax() < 1e-12);
        if let (Some(a), Some(b)) = (&t.du, du) {
            prop_assert!((a - b).amax() < 1e-12);
        }
    }

    #[test]
    fn free_planar_kernel_dims(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (sc, c, _, y) = scenario(&mut r, ScenarioKind::Free2DExt);
        prop_assume!((c.m * c.m + 4.0 * c.q1 * c.q2).abs() > 1e-6);
        prop_assert_eq!(kernel_dim(&y, &sc).unwrap(), 3);
        let q2 = if c.q2.abs() < 0.1 { 0.5 } else { c.q2 };
        let crit = Scenario::free_2d_ext(c.m, -c.m * c.m / (4.0 * q2), q2, c.theta).unwrap();
        prop_assert_eq!(kernel_dim(&y, &crit).unwrap(), 5);
    }

    #[test]
    fn magnetic_field_is_transparent(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = Affine::random(&mut r, 3);
        let mut g = f.clone();
        g.b0 = vecr(&mut r, 3);
        g.db = DMatrix::from_fn(3, 3, |_, _| uni(&mut r));
        let (m, q) = (1.0 + uni(&mut r).abs(), uni(&mut r));
        let a = Scenario::em_3d_spinless(m, q, f.spec()).unwrap();
        let b = Scenario::em_3d_spinless(m, q, g.spec()).unwrap();
        let y0 = EvolutionPoint::spatial(vecr(&mut r, 3), vecr(&mut r, 3), 0.0);
        let ta = integrate(&y0, &a, (0.0, 0.5), 1e-2).unwrap();
        let tb = integrate(&y0, &b, (0.0, 0.5), 1e-2).unwrap();
        prop_assert_eq!(ta.to_csv(), tb.to_csv());
    }

    #[test]
    fn unextended_limit(seed in any::<u64>()) {
        // q1 = q2 = 0: dx = 0 and m dv = qE + mu theta grad B
        let mut r = rng(seed);
        let f = Affine::random(&mut r, 2);
        let (m, q, mu, th) = (1.0 + uni(&mut r).abs(), uni(&mut r), uni(&mut r), uni(&mut r));
        let sc = Scenario::em_2d_ext(m, q, mu, 0.0, 0.0, th, f.spec()).unwrap();
        let x = vecr(&mut r, 2);
        let y = EvolutionPoint::planar(x.clone(), vecr(&mut r, 2), 0.0, 0.0, 0.0);
        let t = eom(&y, &sc).unwrap();
        let t = t.tangent().unwrap();
        let force = f.e(&x) * q + f.db.row(0).transpose() * (mu * th);
        prop_assert!(t.dx.amax() < 1e-15);
        prop_assert!((&t.dv - force / m).amax() < 1e-12);
    }

    #[test]
    fn free_moment_map_is_conserved(seed in any::<u64>(), which in 0usize..3) {
        let mut r = rng(seed);
        let kind = [ScenarioKind::Free3D, ScenarioKind::FreeSpin3D, ScenarioKind::Free2DExt][which];
        let (sc, _, _, y0) = scenario(&mut r, kind);
        let traj = integrate(&y0, &sc, (0.0, 0.2), 1e-3).unwrap();
        prop_assert!(traj.max_moment_drift() < 1e-10);
        let end = moment_map(&traj.last().point, &sc).unwrap();
        prop_assert!(end.max_abs_diff(&moment_map(&y0, &sc).unwrap()) < 1e-10);
    }

    #[test]
    fn planar_oracle_degeneracy_agrees(seed in any::<u64>(), which in 0usize..3) {
        let mut r = rng(seed);
        let kind = PLANAR[which];
        let (sc, c, field, y) = scenario(&mut r, kind);
        let lib = eom(&y, &sc).unwrap().is_degenerate();
        prop_assert_eq!(lib, eom_oracle(kind, &c, field.as_ref(), y.x(), None).is_none());
    }
}
