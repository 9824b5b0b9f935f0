mod common;

use carroll::coadjoint::{
    adjoint, casimirs, coadjoint, coadjoint_closed_form, coadjoint_dual, moment_map, pair, Moment,
};
use carroll::dynamics::ScenarioKind;
use carroll::lie::{AlgebraKind, GroupElement};
use common::{algebra, coadjoint_oracle, group, pairing, rng, scenario, uni};
use nalgebra::DVector;
use proptest::prelude::*;
use rand_chacha::ChaCha20Rng;

fn kinds() -> impl Strategy<Value = AlgebraKind> {
    prop::sample::select(AlgebraKind::all().to_vec())
}

fn moment(r: &mut ChaCha20Rng, kind: AlgebraKind) -> Moment {
    let mut c: Vec<f64> = (0..kind.algebra_dim()).map(|_| uni(r)).collect();
    let im = kind.rotation_dim() + 2 * kind.spatial_dim();
    c[im] += c[im].signum() * 0.5;
    Moment::from_coords(kind, &c).unwrap()
}

fn gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn pure_boost_on_extended_dual() {
    let k = AlgebraKind::ExtCarr2;
    let (m, q1, q2) = (1.3, 0.4, -0.7);
    let p = DVector::from_vec(vec![0.2, -0.5]);
    let mu = Moment::new(k, DVector::zeros(1), DVector::zeros(2), p.clone(), m, q1, q2).unwrap();
    let b = DVector::from_vec(vec![0.6, 0.9]);
    let a = GroupElement::boost(k, b.clone()).unwrap();
    let out = coadjoint(&a, &mu).unwrap();
    assert!((out.l()[0] + q2 * b.norm_squared()).abs() < 1e-14);
    let eb = DVector::from_vec(vec![b[1], -b[0]]);
    assert!((out.g() - eb * (2.0 * q2)).amax() < 1e-14);
    assert!((out.p() - (p + b * m)).amax() < 1e-14);
    assert_eq!((out.m(), out.q1(), out.q2()), (m, q1, q2));
}

#[test]
fn pure_translation_on_extended_dual() {
    let k = AlgebraKind::ExtCarr2;
    let mu = Moment::new(
        k,
        DVector::zeros(1),
        DVector::zeros(2),
        DVector::zeros(2),
        2.0,
        0.3,
        0.1,
    )
    .unwrap();
    let c = DVector::from_vec(vec![1.0, -2.0]);
    let out = coadjoint(&GroupElement::translation(k, c.clone()).unwrap(), &mu).unwrap();
    assert!((out.l()[0] - 0.3 * c.norm_squared()).abs() < 1e-14);
    assert!((out.g() - &c * 2.0).amax() < 1e-14);
    let ec = DVector::from_vec(vec![c[1], -c[0]]);
    assert!((out.p() - ec * 0.6).amax() < 1e-14);
}

#[test]
fn planar_second_casimir_is_rest_spin() {
    // at rest at the origin the renormalized spin reduces to (1 + 4 q1 q2 / m^2) l
    let k = AlgebraKind::ExtCarr2;
    let (m, q1, q2, l) = (2.0, 0.5, 0.25, 0.8);
    let mu = Moment::new(
        k,
        DVector::from_element(1, l),
        DVector::zeros(2),
        DVector::zeros(2),
        m,
        q1,
        q2,
    )
    .unwrap();
    let c = casimirs(&mu);
    assert!((c.c2.unwrap() - (1.0 + 4.0 * q1 * q2 / (m * m)) * l).abs() < 1e-15);
    assert_eq!((c.c1, c.c3, c.c4), (m, q1, q2));
}

#[test]
fn massless_orbit_has_no_spin_casimir() {
    let mu = Moment::from_coords(AlgebraKind::Carr3, &[0.0; 10]).unwrap();
    assert!(casimirs(&mu).c2.is_none());
}

#[test]
fn kind_mismatch_is_an_error() {
    let mut r = rng(1);
    let a = group(&mut r, AlgebraKind::Carr2, false);
    let mu = moment(&mut r, AlgebraKind::ExtCarr2);
    assert!(coadjoint(&a, &mu).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_form_matches_dual(seed in any::<u64>()) {
        let mut r = rng(seed);
        let k = AlgebraKind::ExtCarr2;
        let (a, mu) = (group(&mut r, k, true), moment(&mut r, k));
        prop_assert!(coadjoint_closed_form(&a, &mu).max_abs_diff(&coadjoint_dual(&a, &mu).unwrap()) < 1e-10);
    }

    #[test]
    fn coadjoint_matches_matrix_oracle(kind in kinds(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let (a, mu) = (group(&mut r, kind, true), moment(&mut r, kind));
        let lib = coadjoint(&a, &mu).unwrap().coords();
        prop_assert!(gap(&lib, &coadjoint_oracle(&a, &mu.coords())) < 1e-10);
    }

    #[test]
    fn pairing_matches_oracle(kind in kinds(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let (mu, z) = (moment(&mut r, kind), algebra(&mut r, kind));
        prop_assert!((pair(&mu, &z).unwrap() - pairing(kind, &mu.coords(), &z.coords())).abs() < 1e-14);
    }

    #[test]
    fn duality_identity(kind in kinds(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let (a, mu, z) = (group(&mut r, kind, true), moment(&mut r, kind), algebra(&mut r, kind));
        let lhs = pair(&coadjoint(&a, &mu).unwrap(), &adjoint(&a, &z).unwrap()).unwrap();
        prop_assert!((lhs - pair(&mu, &z).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn coadjoint_is_an_action(kind in kinds(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let (a, b, mu) = (group(&mut r, kind, true), group(&mut r, kind, true), moment(&mut r, kind));
        let ab = coadjoint(&a.compose(&b).unwrap(), &mu).unwrap();
        let seq = coadjoint(&a, &coadjoint(&b, &mu).unwrap()).unwrap();
        prop_assert!(ab.max_abs_diff(&seq) < 1e-10);
    }

    #[test]
    fn casimirs_invariant(kind in kinds(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let (a, mu) = (group(&mut r, kind, true), moment(&mut r, kind));
        prop_assert!(casimirs(&mu).max_abs_diff(&casimirs(&coadjoint(&a, &mu).unwrap())) < 1e-10);
    }

    #[test]
    fn adjoint_preserves_brackets(kind in kinds(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let (a, x, y) = (group(&mut r, kind, true), algebra(&mut r, kind), algebra(&mut r, kind));
        let lhs = adjoint(&a, &carroll::lie::bracket(&x, &y).unwrap()).unwrap();
        let rhs = carroll::lie::bracket(&adjoint(&a, &x).unwrap(), &adjoint(&a, &y).unwrap()).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-10);
    }

    #[test]
    fn moment_map_equivariant(seed in any::<u64>(), which in 0usize..3) {
        let mut r = rng(seed);
        let kind = [ScenarioKind::Free3D, ScenarioKind::FreeSpin3D, ScenarioKind::Free2DExt][which];
        let (sc, _, _, y) = scenario(&mut r, kind);
        // central parameters act trivially on evolution space
        let a = group(&mut r, kind.algebra_kind(), false);
        let lhs = moment_map(&y.transform(&a).unwrap(), &sc).unwrap();
        let rhs = coadjoint(&a, &moment_map(&y, &sc).unwrap()).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-10);
    }
}

#[test]
fn adjoint_of_identity_is_identity() {
    let mut r = rng(9);
    for kind in AlgebraKind::all() {
        let z = algebra(&mut r, kind);
        let out = adjoint(&GroupElement::identity(kind), &z).unwrap();
        assert!(out.max_abs_diff(&z) < 1e-15);
    }
}
