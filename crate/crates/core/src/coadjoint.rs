//! Dual-space machinery: pairing, adjoint and coadjoint actions, Casimirs and
//! the moment map of the free models.

use nalgebra::DVector;
use serde::Serialize;

use crate::dynamics::{EvolutionPoint, Scenario, ScenarioKind};
use crate::error::{Error, Result};
use crate::lie::{cross2, cross3, eps_apply, AlgebraElement, AlgebraKind, GroupElement};

/// Dual-algebra coordinates `(l, g, p, m, q1, q2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Moment {
    kind: AlgebraKind,
    l: DVector<f64>,
    g: DVector<f64>,
    p: DVector<f64>,
    m: f64,
    q1: f64,
    q2: f64,
}

impl Moment {
    pub fn new(
        kind: AlgebraKind,
        l: DVector<f64>,
        g: DVector<f64>,
        p: DVector<f64>,
        m: f64,
        q1: f64,
        q2: f64,
    ) -> Result<Self> {
        let d = kind.spatial_dim();
        for (what, v, n) in [("l", &l, kind.rotation_dim()), ("g", &g, d), ("p", &p, d)] {
            if v.len() != n {
                return Err(Error::Dimension {
                    what,
                    expected: n,
                    got: v.len(),
                });
            }
        }
        if !kind.is_extended() && (q1 != 0.0 || q2 != 0.0) {
            return Err(Error::Invalid(format!("central charges must vanish for {kind}")));
        }
        Ok(Self {
            kind,
            l,
            g,
            p,
            m,
            q1,
            q2,
        })
    }

    /// Flat coordinates `(l, g, p, m[, q1, q2])`, same layout as algebra coordinates.
    pub fn from_coords(kind: AlgebraKind, c: &[f64]) -> Result<Self> {
        if c.len() != kind.algebra_dim() {
            return Err(Error::Dimension {
                what: "moment coordinates",
                expected: kind.algebra_dim(),
                got: c.len(),
            });
        }
        let r = kind.rotation_dim();
        let d = kind.spatial_dim();
        let (q1, q2) = if kind.is_extended() {
            (c[r + 2 * d + 1], c[r + 2 * d + 2])
        } else {
            (0.0, 0.0)
        };
        Self::new(
            kind,
            DVector::from_column_slice(&c[..r]),
            DVector::from_column_slice(&c[r..r + d]),
            DVector::from_column_slice(&c[r + d..r + 2 * d]),
            c[r + 2 * d],
            q1,
            q2,
        )
    }

    pub fn coords(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .l
            .iter()
            .chain(self.g.iter())
            .chain(self.p.iter())
            .copied()
            .collect();
        out.push(self.m);
        if self.kind.is_extended() {
            out.push(self.q1);
            out.push(self.q2);
        }
        out
    }

    pub fn kind(&self) -> AlgebraKind {
        self.kind
    }
    pub fn l(&self) -> &DVector<f64> {
        &self.l
    }
    pub fn g(&self) -> &DVector<f64> {
        &self.g
    }
    pub fn p(&self) -> &DVector<f64> {
        &self.p
    }
    pub fn m(&self) -> f64 {
        self.m
    }
    pub fn q1(&self) -> f64 {
        self.q1
    }
    pub fn q2(&self) -> f64 {
        self.q2
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coords()
            .iter()
            .zip(other.coords())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Casimir invariants. `c2` is absent when `m = 0`.
///
/// For the planar kinds `c2` is the renormalized anyonic spin; for `Carr(3+1)`
/// it is the squared spin `|l - g x p / m|^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CasimirSet {
    pub c1: f64,
    pub c2: Option<f64>,
    pub c3: f64,
    pub c4: f64,
}

impl CasimirSet {
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let c2 = match (self.c2, other.c2) {
            (Some(a), Some(b)) => (a - b).abs(),
            (None, None) => 0.0,
            _ => f64::INFINITY,
        };
        [
            (self.c1 - other.c1).abs(),
            c2,
            (self.c3 - other.c3).abs(),
            (self.c4 - other.c4).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

fn check_same(left: AlgebraKind, right: AlgebraKind) -> Result<()> {
    if left != right {
        return Err(Error::KindMismatch { left, right });
    }
    Ok(())
}

/// `l w - <beta, g> + <gamma, p> + m phi + alpha1 q1 + alpha2 q2`.
pub fn pair(mu: &Moment, z: &AlgebraElement) -> Result<f64> {
    check_same(mu.kind, z.kind())?;
    Ok(mu.l.dot(z.omega()) - z.beta().dot(&mu.g)
        + z.gamma().dot(&mu.p)
        + mu.m * z.phi()
        + z.alpha1() * mu.q1
        + z.alpha2() * mu.q2)
}

/// `Ad(a) Z = a Z a^{-1}`, computed on the matrix representation.
pub fn adjoint(a: &GroupElement, z: &AlgebraElement) -> Result<AlgebraElement> {
    check_same(a.kind(), z.kind())?;
    let m = a.to_matrix().0 * z.to_matrix().0 * a.inverse().to_matrix().0;
    AlgebraElement::from_matrix(a.kind(), &m)
}

/// Coadjoint action. Closed form for the extended kind, dual route otherwise.
pub fn coadjoint(a: &GroupElement, mu: &Moment) -> Result<Moment> {
    check_same(a.kind(), mu.kind)?;
    if mu.kind.is_extended() {
        Ok(coadjoint_closed_form(a, mu))
    } else {
        coadjoint_dual(a, mu)
    }
}

/// Coadjoint action on the extended planar dual, in closed form.
pub fn coadjoint_closed_form(a: &GroupElement, mu: &Moment) -> Moment {
    let rot = a.rot();
    let b = a.boost_part();
    let c = a.translation_part();
    let (m, q1, q2) = (mu.m, mu.q1, mu.q2);
    let ag = rot * &mu.g;
    let ap = rot * &mu.p;
    let l =
        mu.l[0] + cross2(b, &ag) - cross2(c, &ap) + m * cross2(b, c) + q1 * c.norm_squared() - q2 * b.norm_squared();
    let g = &ag + c * m + eps_apply(b) * (2.0 * q2);
    let p = &ap + b * m + eps_apply(c) * (2.0 * q1);
    Moment {
        kind: mu.kind,
        l: DVector::from_element(1, l),
        g,
        p,
        m,
        q1,
        q2,
    }
}

/// Coadjoint action through `Coad(a) mu . Z = mu . Ad(a^{-1}) Z` on the basis.
pub fn coadjoint_dual(a: &GroupElement, mu: &Moment) -> Result<Moment> {
    check_same(a.kind(), mu.kind)?;
    let kind = mu.kind;
    let inv = a.inverse();
    let values = AlgebraElement::basis(kind)
        .iter()
        .map(|e| pair(mu, &adjoint(&inv, e)?))
        .collect::<Result<Vec<f64>>>()?;
    moment_from_pairings(kind, &values)
}

/// Recovers a moment from its pairings with the algebra basis.
pub fn moment_from_pairings(kind: AlgebraKind, values: &[f64]) -> Result<Moment> {
    let r = kind.rotation_dim();
    let d = kind.spatial_dim();
    let mut c = values.to_vec();
    // the boost entries pair with a minus sign
    for v in &mut c[r..r + d] {
        *v = -*v;
    }
    Moment::from_coords(kind, &c)
}

pub fn casimirs(mu: &Moment) -> CasimirSet {
    let m = mu.m;
    let c2 = if m == 0.0 {
        None
    } else {
        match mu.kind {
            AlgebraKind::Carr3 => {
                let spin = &mu.l - cross3(&mu.g, &mu.p) / m;
                Some(spin.norm_squared())
            }
            _ => {
                let (q1, q2) = (mu.q1, mu.q2);
                let m2 = m * m;
                Some(
                    (1.0 + 4.0 * q1 * q2 / m2) * mu.l[0] + cross2(&mu.g, &mu.p) / m + q1 * mu.g.norm_squared() / m2
                        - q2 * mu.p.norm_squared() / m2,
                )
            }
        }
    };
    CasimirSet {
        c1: m,
        c2,
        c3: mu.q1,
        c4: mu.q2,
    }
}

/// Souriau moment map of the free models.
pub fn moment_map(y: &EvolutionPoint, scenario: &Scenario) -> Result<Moment> {
    y.check_layout(scenario)?;
    let pr = scenario.params();
    let m = pr.m;
    let (x, v) = (y.x(), y.v());
    match scenario.kind() {
        ScenarioKind::Free3D | ScenarioKind::FreeSpin3D => {
            let p = v * m;
            let mut l = cross3(x, &p);
            if let Some(u) = y.u() {
                l += u * pr.spin;
            }
            Moment::new(AlgebraKind::Carr3, l, x * m, p, m, 0.0, 0.0)
        }
        ScenarioKind::Free2DExt => {
            let (q1, q2) = (pr.q1, pr.q2);
            let l = m * cross2(v, x) + q1 * x.norm_squared() - q2 * v.norm_squared() + pr.theta;
            let g = x * m + eps_apply(v) * (2.0 * q2);
            let p = v * m + eps_apply(x) * (2.0 * q1);
            Moment::new(AlgebraKind::ExtCarr2, DVector::from_element(1, l), g, p, m, q1, q2)
        }
        other => Err(Error::Unsupported {
            op: "moment_map",
            scenario: format!("{other:?}"),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    fn ext_moment(l: f64, g: &[f64], p: &[f64], m: f64, q1: f64, q2: f64) -> Moment {
        Moment::new(AlgebraKind::ExtCarr2, v(&[l]), v(g), v(p), m, q1, q2).unwrap()
    }

    #[test]
    fn pairing_picks_mass_times_phi() {
        let mu = ext_moment(0.0, &[0., 0.], &[0., 0.], 2.5, 0.0, 0.0);
        let z = AlgebraElement::from_coords(AlgebraKind::ExtCarr2, &[0., 0., 0., 0., 0., 3.0, 0., 0.]).unwrap();
        assert_eq!(pair(&mu, &z).unwrap(), 7.5);
        assert_eq!(pair(&mu, &AlgebraElement::zero(AlgebraKind::ExtCarr2)).unwrap(), 0.0);
    }

    #[test]
    fn pairing_matrix_on_bases() {
        for kind in AlgebraKind::all() {
            let n = kind.algebra_dim();
            let (r, d) = (kind.rotation_dim(), kind.spatial_dim());
            for (i, e) in AlgebraElement::basis(kind).iter().enumerate() {
                for j in 0..n {
                    let mut c = vec![0.0; n];
                    c[j] = 1.0;
                    let mu = Moment::from_coords(kind, &c).unwrap();
                    let expected = if i != j {
                        0.0
                    } else if (r..r + d).contains(&i) {
                        -1.0
                    } else {
                        1.0
                    };
                    assert_eq!(pair(&mu, e).unwrap(), expected);
                }
            }
        }
    }

    #[test]
    fn pure_boost_coadjoint() {
        let (m, q1, q2) = (1.5, 0.3, -0.7);
        let b = v(&[0.4, -1.1]);
        let a = GroupElement::boost(AlgebraKind::ExtCarr2, b.clone()).unwrap();
        let mu = ext_moment(0.0, &[0., 0.], &[0.2, 0.9], m, q1, q2);
        let out = coadjoint(&a, &mu).unwrap();
        assert!((out.l()[0] + q2 * b.norm_squared()).abs() < 1e-14);
        assert!((out.g() - eps_apply(&b) * (2.0 * q2)).amax() < 1e-14);
        assert!((out.p() - (mu.p() + &b * m)).amax() < 1e-14);
        let dual = coadjoint_dual(&a, &mu).unwrap();
        assert!(out.max_abs_diff(&dual) < 1e-12);
    }

    #[test]
    fn rotation_adjoint_rotates_translation() {
        let t = 0.8f64;
        let rot = nalgebra::DMatrix::from_row_slice(2, 2, &[t.cos(), t.sin(), -t.sin(), t.cos()]);
        let a = GroupElement::rotation(AlgebraKind::Carr2, rot.clone()).unwrap();
        let z = AlgebraElement::from_coords(AlgebraKind::Carr2, &[0., 0., 0., 1.0, 2.0, 0.]).unwrap();
        let out = adjoint(&a, &z).unwrap();
        assert!((out.gamma() - &rot * z.gamma()).amax() < 1e-15);
        assert_eq!(out.phi(), 0.0);
    }

    #[test]
    fn identity_actions() {
        let mu = ext_moment(0.3, &[1., 2.], &[3., 4.], 5.0, 6.0, 7.0);
        let e = GroupElement::identity(AlgebraKind::ExtCarr2);
        assert_eq!(coadjoint(&e, &mu).unwrap(), mu);
        let z = AlgebraElement::from_coords(AlgebraKind::ExtCarr2, &[1., 2., 3., 4., 5., 6., 7., 8.]).unwrap();
        assert_eq!(adjoint(&e, &z).unwrap(), z);
    }

    #[test]
    fn casimir_special_cases() {
        let c = casimirs(&ext_moment(0.7, &[0., 0.], &[0., 0.], 2.0, 0.0, 0.0));
        assert_eq!(c.c2, Some(0.7));
        let c = casimirs(&ext_moment(0.7, &[1., 0.], &[0., 1.], 0.0, 1.0, 2.0));
        assert_eq!((c.c1, c.c2, c.c3, c.c4), (0.0, None, 1.0, 2.0));
    }

    #[test]
    fn free_moment_gives_renormalized_spin() {
        let (m, q1, q2, theta) = (1.3, 0.4, 0.9, 0.25);
        let sc = Scenario::free_2d_ext(m, q1, q2, theta).unwrap();
        let y = EvolutionPoint::planar(v(&[0.3, -1.2]), v(&[2.0, 0.5]), 0.0, 0.0, 0.0);
        let mu = moment_map(&y, &sc).unwrap();
        let c2 = casimirs(&mu).c2.unwrap();
        assert!((c2 - (1.0 + 4.0 * q1 * q2 / (m * m)) * theta).abs() < 1e-13);
    }

    #[test]
    fn moment_at_origin() {
        let sc = Scenario::free_2d_ext(1.0, 2.0, 3.0, 0.0).unwrap();
        let y = EvolutionPoint::planar(v(&[0., 0.]), v(&[0., 0.]), 0.0, 0.0, 0.0);
        assert_eq!(
            moment_map(&y, &sc).unwrap(),
            ext_moment(0.0, &[0., 0.], &[0., 0.], 1.0, 2.0, 3.0)
        );
    }

    #[test]
    fn moment_map_rejects_field_scenarios() {
        let sc = Scenario::em_3d_spinless(
            1.0,
            1.0,
            crate::dynamics::FieldSpec::uniform(vec![1., 0., 0.], vec![0., 0., 1.]),
        )
        .unwrap();
        let y = EvolutionPoint::spatial(v(&[0., 0., 0.]), v(&[0., 0., 0.]), 0.0);
        assert!(matches!(moment_map(&y, &sc), Err(Error::Unsupported { .. })));
    }
}
