//! Independent oracles and generators shared by the integration tests.
#![allow(dead_code)]

use carroll::dynamics::{EvolutionPoint, FieldSpec, Scenario, ScenarioKind};
use carroll::lie::{AlgebraElement, AlgebraKind, GroupElement};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed ^ 0x5eed_0ac1e)
}

pub fn uni(r: &mut ChaCha20Rng) -> f64 {
    r.random_range(-1.0..1.0)
}

pub fn vecr(r: &mut ChaCha20Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| uni(r))
}

/// Matrix exponential by scaling and squaring of a plain Taylor series.
pub fn expm(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let norm = m.amax() * n as f64;
    let mut k = 0;
    while norm / f64::from(1u32 << k) > 0.25 {
        k += 1;
    }
    let a = m / f64::from(1u32 << k);
    let mut term = DMatrix::<f64>::identity(n, n);
    let mut sum = term.clone();
    for j in 1..30 {
        term = &term * &a / j as f64;
        sum += &term;
    }
    for _ in 0..k {
        sum = &sum * &sum;
    }
    sum
}

/// Rotation from `exp` of a random skew matrix, built without the crate.
pub fn rotation(r: &mut ChaCha20Rng, d: usize) -> DMatrix<f64> {
    let w = DMatrix::from_fn(d, d, |_, _| 2.0 * uni(r));
    expm(&((&w - w.transpose()) * 0.5))
}

pub fn algebra(r: &mut ChaCha20Rng, kind: AlgebraKind) -> AlgebraElement {
    let c: Vec<f64> = (0..kind.algebra_dim()).map(|_| uni(r)).collect();
    AlgebraElement::from_coords(kind, &c).unwrap()
}

pub fn group(r: &mut ChaCha20Rng, kind: AlgebraKind, central: bool) -> GroupElement {
    let d = kind.spatial_dim();
    let (a1, a2) = if central && kind.is_extended() {
        (uni(r), uni(r))
    } else {
        (0.0, 0.0)
    };
    GroupElement::new(kind, rotation(r, d), vecr(r, d), vecr(r, d), uni(r), a1, a2).unwrap()
}

/// `l w - <beta, g> + <gamma, p> + m phi + alpha1 q1 + alpha2 q2` on raw coordinates
/// laid out as `(rot, boost, trans, time, a1, a2)` and `(l, g, p, m, q1, q2)`.
pub fn pairing(kind: AlgebraKind, mu: &[f64], z: &[f64]) -> f64 {
    let r = kind.rotation_dim();
    let d = kind.spatial_dim();
    let mut acc = 0.0;
    for i in 0..r {
        acc += mu[i] * z[i];
    }
    for i in 0..d {
        acc -= mu[r + i] * z[r + i];
        acc += mu[r + d + i] * z[r + d + i];
    }
    for i in r + 2 * d..kind.algebra_dim() {
        acc += mu[i] * z[i];
    }
    acc
}

/// Coadjoint action through `<Coad(a) mu, Z> = <mu, a^{-1} Z a>` on the
/// matrix representation.
pub fn coadjoint_oracle(a: &GroupElement, mu: &[f64]) -> Vec<f64> {
    let kind = a.kind();
    let n = kind.algebra_dim();
    let ma = a.to_matrix().into_inner();
    let mi = ma.clone().try_inverse().unwrap();
    let r = kind.rotation_dim();
    let d = kind.spatial_dim();
    (0..n)
        .map(|k| {
            let mut e = vec![0.0; n];
            e[k] = 1.0;
            let z = AlgebraElement::from_coords(kind, &e).unwrap().to_matrix().into_inner();
            let conj = &mi * z * &ma;
            let zc = AlgebraElement::from_matrix(kind, &conj).unwrap().coords();
            let v = pairing(kind, mu, &zc);
            if (r..r + d).contains(&k) {
                -v
            } else {
                v
            }
        })
        .collect()
}

pub fn eps(v: &DVector<f64>) -> DVector<f64> {
    DVector::from_vec(vec![v[1], -v[0]])
}

pub fn cross(a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    DVector::from_vec(vec![
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ])
}

/// Affine field `E = e0 + de x`, `B = b0 + db x` kept alongside its spec.
#[derive(Clone)]
pub struct Affine {
    pub e0: DVector<f64>,
    pub de: DMatrix<f64>,
    pub b0: DVector<f64>,
    pub db: DMatrix<f64>,
}

impl Affine {
    pub fn random(r: &mut ChaCha20Rng, d: usize) -> Self {
        let rb = d * (d - 1) / 2;
        Self {
            e0: vecr(r, d),
            de: DMatrix::from_fn(d, d, |_, _| 0.4 * uni(r)),
            b0: vecr(r, rb),
            db: DMatrix::from_fn(rb, d, |_, _| 0.4 * uni(r)),
        }
    }

    pub fn spec(&self) -> FieldSpec {
        FieldSpec::linear(
            self.e0.as_slice().to_vec(),
            self.de.clone(),
            self.b0.as_slice().to_vec(),
            self.db.clone(),
        )
    }

    pub fn e(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.e0 + &self.de * x
    }

    pub fn b(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.b0 + &self.db * x
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Charges {
    pub m: f64,
    pub spin: f64,
    pub q: f64,
    pub mu: f64,
    pub q1: f64,
    pub q2: f64,
    pub theta: f64,
}

/// Closed-form rates written out from the model equations; `None` when degenerate.
pub fn eom_oracle(
    kind: ScenarioKind,
    c: &Charges,
    field: Option<&Affine>,
    x: &DVector<f64>,
    u: Option<&DVector<f64>>,
) -> Option<(DVector<f64>, DVector<f64>, Option<DVector<f64>>)> {
    let d = x.len();
    let z = DVector::zeros(d);
    match kind {
        ScenarioKind::Free3D => (c.m != 0.0).then(|| (z.clone(), z.clone(), None)),
        ScenarioKind::FreeSpin3D => {
            (c.m != 0.0 && c.spin != 0.0).then(|| (z.clone(), z.clone(), Some(DVector::zeros(3))))
        }
        ScenarioKind::EM3DSpinless => {
            let f = field?;
            (c.m != 0.0).then(|| (z.clone(), f.e(x) * (c.q / c.m), None))
        }
        ScenarioKind::EM3DSpin => {
            let f = field?;
            let u = u?;
            if c.m == 0.0 || c.spin == 0.0 {
                return None;
            }
            let dv = (f.e(x) * c.q + f.db.transpose() * u * c.mu) / c.m;
            let du = cross(u, &f.b(x)) * (c.mu / c.spin);
            Some((z, dv, Some(du)))
        }
        ScenarioKind::Free2DExt | ScenarioKind::EM2DExt | ScenarioKind::Photon2D => {
            let (force, bz) = match field {
                Some(f) => (f.e(x) * c.q + f.db.row(0).transpose() * (c.mu * c.theta), f.b(x)[0]),
                None => (DVector::zeros(2), 0.0),
            };
            let q1t = c.q1 - 0.5 * c.q * bz;
            let mt2 = c.m * c.m + 4.0 * q1t * c.q2;
            let scale = c.m * c.m + 4.0 * (q1t * c.q2).abs();
            if scale == 0.0 || mt2.abs() <= 1e-12 * scale {
                return None;
            }
            Some((eps(&force) * (-2.0 * c.q2 / mt2), force * (c.m / mt2), None))
        }
    }
}

pub const PLANAR: [ScenarioKind; 3] = [ScenarioKind::Free2DExt, ScenarioKind::EM2DExt, ScenarioKind::Photon2D];

/// Random scenario with the data needed to evaluate the oracle.
pub fn scenario(r: &mut ChaCha20Rng, kind: ScenarioKind) -> (Scenario, Charges, Option<Affine>, EvolutionPoint) {
    let pos = |r: &mut ChaCha20Rng| r.random_range(0.5..2.0);
    let d = kind.spatial_dim();
    let mut c = Charges {
        m: pos(r),
        spin: 0.0,
        q: 0.0,
        mu: 0.0,
        q1: 0.0,
        q2: 0.0,
        theta: 0.0,
    };
    let field = kind.has_field().then(|| Affine::random(r, d));
    let fs = || field.as_ref().unwrap().spec();
    let sc = match kind {
        ScenarioKind::Free3D => Scenario::free_3d(c.m),
        ScenarioKind::FreeSpin3D => {
            c.spin = pos(r);
            Scenario::free_spin_3d(c.m, c.spin)
        }
        ScenarioKind::EM3DSpinless => {
            c.q = uni(r);
            Scenario::em_3d_spinless(c.m, c.q, fs())
        }
        ScenarioKind::EM3DSpin => {
            (c.spin, c.q, c.mu) = (pos(r), uni(r), uni(r));
            Scenario::em_3d_spin(c.m, c.spin, c.q, c.mu, fs())
        }
        ScenarioKind::Free2DExt => {
            (c.q1, c.q2, c.theta) = (uni(r), uni(r), uni(r));
            Scenario::free_2d_ext(c.m, c.q1, c.q2, c.theta)
        }
        ScenarioKind::EM2DExt => {
            (c.q, c.mu, c.q1, c.q2, c.theta) = (uni(r), uni(r), uni(r), uni(r), uni(r));
            Scenario::em_2d_ext(c.m, c.q, c.mu, c.q1, c.q2, c.theta, fs())
        }
        ScenarioKind::Photon2D => {
            c.m = 0.0;
            (c.mu, c.q1, c.q2, c.theta) = (uni(r), pos(r), pos(r), uni(r));
            Scenario::photon_2d(c.mu, c.q1, c.q2, c.theta, fs())
        }
    }
    .unwrap();
    let (x, v, s) = (vecr(r, d), vecr(r, d), uni(r));
    let y = if kind.is_planar() {
        EvolutionPoint::planar(x, v, s, uni(r), uni(r))
    } else if kind.has_spin() {
        let u = vecr(r, 3).normalize();
        EvolutionPoint::with_spin(x, v, s, u).unwrap()
    } else {
        EvolutionPoint::spatial(x, v, s)
    };
    (sc, c, field, y)
}

pub fn max_gap(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).amax()
}
