//! Carroll algebras and groups in coordinates and as matrices.
//!
//! Three kinds are supported: `Carr(3+1)`, `Carr(2+1)` and the doubly centrally
//! extended planar algebra `ExtCarr(2+1)`. Every value carries its kind and all
//! binary operations refuse to mix kinds.
//!
//! Coordinates follow the block matrices
//!
//! ```text
//!  Z = | j(w)   0  gamma |        a = | A      0  c |
//!      | -beta  0  phi   |            | -b^T A 1  f |
//!      | 0      0  0     |            | 0      0  1 |
//! ```
//!
//! and, for the extended kind, the 6x6 representation with rows/columns ordered
//! `(x1, x2, s, 1, a, 1)`. In two dimensions `j(w) = w * eps` with
//! `eps = [[0, 1], [-1, 0]]`; in three dimensions `j(w)` is the hat map
//! `j(w) x = w x x`.
//!
//! The coordinate bracket is the commutator of these matrices, so
//! `to_matrix([Z1, Z2]) = Z1 Z2 - Z2 Z1` holds exactly.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Orthogonality tolerance for rotation blocks.
pub const ORTHO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AlgebraKind {
    /// Carroll algebra/group in 3+1 dimensions.
    Carr3,
    /// Carroll algebra/group in 2+1 dimensions, no central extension.
    Carr2,
    /// Doubly centrally extended planar Carroll algebra/group.
    ExtCarr2,
}

impl AlgebraKind {
    pub fn spatial_dim(self) -> usize {
        match self {
            AlgebraKind::Carr3 => 3,
            AlgebraKind::Carr2 | AlgebraKind::ExtCarr2 => 2,
        }
    }

    /// Dimension of the rotation parameter, d(d-1)/2.
    pub fn rotation_dim(self) -> usize {
        let d = self.spatial_dim();
        d * (d - 1) / 2
    }

    pub fn is_extended(self) -> bool {
        self == AlgebraKind::ExtCarr2
    }

    /// Size of the faithful matrix representation.
    pub fn matrix_size(self) -> usize {
        match self {
            AlgebraKind::ExtCarr2 => 6,
            k => k.spatial_dim() + 2,
        }
    }

    /// Dimension of the Lie algebra.
    pub fn algebra_dim(self) -> usize {
        let d = self.spatial_dim();
        self.rotation_dim() + 2 * d + 1 + if self.is_extended() { 2 } else { 0 }
    }

    pub fn all() -> [AlgebraKind; 3] {
        [AlgebraKind::Carr3, AlgebraKind::Carr2, AlgebraKind::ExtCarr2]
    }
}

impl fmt::Display for AlgebraKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AlgebraKind::Carr3 => "Carr(3+1)",
            AlgebraKind::Carr2 => "Carr(2+1)",
            AlgebraKind::ExtCarr2 => "ExtCarr(2+1)",
        };
        f.write_str(s)
    }
}

/// The planar symplectic matrix `[[0, 1], [-1, 0]]`.
pub fn eps() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])
}

/// `eps * v` for a planar vector.
pub fn eps_apply(v: &DVector<f64>) -> DVector<f64> {
    DVector::from_vec(vec![v[1], -v[0]])
}

/// Planar cross product `a x b = det(a, b) = <a, eps b>`.
pub fn cross2(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

pub fn cross3(a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    DVector::from_vec(vec![
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ])
}

/// The rotation generator `j(w)` in so(d).
pub fn rotation_generator(kind: AlgebraKind, omega: &DVector<f64>) -> DMatrix<f64> {
    match kind.spatial_dim() {
        2 => eps() * omega[0],
        _ => DMatrix::from_row_slice(
            3,
            3,
            &[
                0.0, -omega[2], omega[1], //
                omega[2], 0.0, -omega[0], //
                -omega[1], omega[0], 0.0,
            ],
        ),
    }
}

fn check_len(what: &'static str, v: &DVector<f64>, expected: usize) -> Result<()> {
    if v.len() != expected {
        return Err(Error::Dimension {
            what,
            expected,
            got: v.len(),
        });
    }
    Ok(())
}

fn check_same(left: AlgebraKind, right: AlgebraKind) -> Result<()> {
    if left != right {
        return Err(Error::KindMismatch { left, right });
    }
    Ok(())
}

/// Coordinates `(omega, beta, gamma, phi, alpha1, alpha2)` of a Lie algebra element.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    kind: AlgebraKind,
    omega: DVector<f64>,
    beta: DVector<f64>,
    gamma: DVector<f64>,
    phi: f64,
    alpha1: f64,
    alpha2: f64,
}

impl AlgebraElement {
    pub fn new(
        kind: AlgebraKind,
        omega: DVector<f64>,
        beta: DVector<f64>,
        gamma: DVector<f64>,
        phi: f64,
        alpha1: f64,
        alpha2: f64,
    ) -> Result<Self> {
        let d = kind.spatial_dim();
        check_len("omega", &omega, kind.rotation_dim())?;
        check_len("beta", &beta, d)?;
        check_len("gamma", &gamma, d)?;
        if !kind.is_extended() && (alpha1 != 0.0 || alpha2 != 0.0) {
            return Err(Error::Invalid(format!("central coefficients must vanish for {kind}")));
        }
        Ok(Self {
            kind,
            omega,
            beta,
            gamma,
            phi,
            alpha1,
            alpha2,
        })
    }

    pub fn zero(kind: AlgebraKind) -> Self {
        let d = kind.spatial_dim();
        Self {
            kind,
            omega: DVector::zeros(kind.rotation_dim()),
            beta: DVector::zeros(d),
            gamma: DVector::zeros(d),
            phi: 0.0,
            alpha1: 0.0,
            alpha2: 0.0,
        }
    }

    /// Builds an element from the flat coordinate vector
    /// `(omega, beta, gamma, phi[, alpha1, alpha2])`.
    pub fn from_coords(kind: AlgebraKind, coords: &[f64]) -> Result<Self> {
        if coords.len() != kind.algebra_dim() {
            return Err(Error::Dimension {
                what: "algebra coordinates",
                expected: kind.algebra_dim(),
                got: coords.len(),
            });
        }
        let r = kind.rotation_dim();
        let d = kind.spatial_dim();
        let omega = DVector::from_column_slice(&coords[..r]);
        let beta = DVector::from_column_slice(&coords[r..r + d]);
        let gamma = DVector::from_column_slice(&coords[r + d..r + 2 * d]);
        let phi = coords[r + 2 * d];
        let (alpha1, alpha2) = if kind.is_extended() {
            (coords[r + 2 * d + 1], coords[r + 2 * d + 2])
        } else {
            (0.0, 0.0)
        };
        Self::new(kind, omega, beta, gamma, phi, alpha1, alpha2)
    }

    pub fn coords(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.kind.algebra_dim());
        out.extend(self.omega.iter());
        out.extend(self.beta.iter());
        out.extend(self.gamma.iter());
        out.push(self.phi);
        if self.kind.is_extended() {
            out.push(self.alpha1);
            out.push(self.alpha2);
        }
        out
    }

    /// Coordinate basis, in the order of [`AlgebraElement::coords`].
    pub fn basis(kind: AlgebraKind) -> Vec<AlgebraElement> {
        let n = kind.algebra_dim();
        (0..n)
            .map(|k| {
                let mut c = vec![0.0; n];
                c[k] = 1.0;
                Self::from_coords(kind, &c).expect("basis coordinates are valid")
            })
            .collect()
    }

    pub fn kind(&self) -> AlgebraKind {
        self.kind
    }
    pub fn omega(&self) -> &DVector<f64> {
        &self.omega
    }
    pub fn beta(&self) -> &DVector<f64> {
        &self.beta
    }
    pub fn gamma(&self) -> &DVector<f64> {
        &self.gamma
    }
    pub fn phi(&self) -> f64 {
        self.phi
    }
    pub fn alpha1(&self) -> f64 {
        self.alpha1
    }
    pub fn alpha2(&self) -> f64 {
        self.alpha2
    }

    pub fn scale(&self, t: f64) -> Self {
        Self {
            kind: self.kind,
            omega: &self.omega * t,
            beta: &self.beta * t,
            gamma: &self.gamma * t,
            phi: self.phi * t,
            alpha1: self.alpha1 * t,
            alpha2: self.alpha2 * t,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_same(self.kind, other.kind)?;
        Ok(Self {
            kind: self.kind,
            omega: &self.omega + &other.omega,
            beta: &self.beta + &other.beta,
            gamma: &self.gamma + &other.gamma,
            phi: self.phi + other.phi,
            alpha1: self.alpha1 + other.alpha1,
            alpha2: self.alpha2 + other.alpha2,
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coords()
            .iter()
            .zip(other.coords())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Matrix representation (`(d+2) x (d+2)`, or `6 x 6` for the extended kind).
    pub fn to_matrix(&self) -> MatrixRep {
        let kind = self.kind;
        let d = kind.spatial_dim();
        let n = kind.matrix_size();
        let (s, one) = (d, d + 1);
        let mut m = DMatrix::zeros(n, n);
        let j = rotation_generator(kind, &self.omega);
        m.view_mut((0, 0), (d, d)).copy_from(&j);
        for i in 0..d {
            m[(i, one)] = self.gamma[i];
            m[(s, i)] = -self.beta[i];
        }
        m[(s, one)] = self.phi;
        if kind.is_extended() {
            let (arow, last) = (4, 5);
            let eb = eps_apply(&self.beta);
            // gamma^T eps as a row
            let ge = eps().transpose() * &self.gamma;
            for i in 0..2 {
                m[(i, last)] = eb[i];
                m[(arow, i)] = ge[i];
            }
            m[(s, last)] = self.alpha2;
            m[(arow, one)] = self.alpha1;
            m[(arow, last)] = -self.phi;
        }
        MatrixRep(m)
    }

    /// Reads coordinates back from a matrix, rejecting matrices outside the
    /// algebra's block pattern.
    pub fn from_matrix(kind: AlgebraKind, m: &DMatrix<f64>) -> Result<Self> {
        let n = kind.matrix_size();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::Dimension {
                what: "algebra matrix",
                expected: n,
                got: m.nrows(),
            });
        }
        let d = kind.spatial_dim();
        let (s, one) = (d, d + 1);
        let omega = match d {
            2 => DVector::from_vec(vec![m[(0, 1)]]),
            _ => DVector::from_vec(vec![m[(2, 1)], m[(0, 2)], m[(1, 0)]]),
        };
        let beta = DVector::from_fn(d, |i, _| -m[(s, i)]);
        let gamma = DVector::from_fn(d, |i, _| m[(i, one)]);
        let phi = m[(s, one)];
        let (alpha1, alpha2) = if kind.is_extended() {
            (m[(4, one)], m[(s, 5)])
        } else {
            (0.0, 0.0)
        };
        let z = Self::new(kind, omega, beta, gamma, phi, alpha1, alpha2)?;
        let residual = (&z.to_matrix().0 - m).amax();
        let scale = m.amax().max(1.0);
        if residual > 1e-10 * scale {
            return Err(Error::NotInAlgebra { kind, residual });
        }
        Ok(z)
    }
}

/// `(A, b, c, f, a1, a2)`: rotation, boost, space translation, time
/// translation and the two central parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    kind: AlgebraKind,
    a: DMatrix<f64>,
    b: DVector<f64>,
    c: DVector<f64>,
    f: f64,
    a1: f64,
    a2: f64,
}

impl GroupElement {
    pub fn new(
        kind: AlgebraKind,
        a: DMatrix<f64>,
        b: DVector<f64>,
        c: DVector<f64>,
        f: f64,
        a1: f64,
        a2: f64,
    ) -> Result<Self> {
        let d = kind.spatial_dim();
        if a.nrows() != d || a.ncols() != d {
            return Err(Error::Dimension {
                what: "rotation block",
                expected: d,
                got: a.nrows(),
            });
        }
        check_len("b", &b, d)?;
        check_len("c", &c, d)?;
        let ortho = (a.transpose() * &a - DMatrix::identity(d, d)).amax();
        let det = a.determinant();
        if ortho > ORTHO_TOL || (det - 1.0).abs() > ORTHO_TOL {
            return Err(Error::Invalid(format!(
                "rotation block is not in SO({d}) (|A^T A - I| = {ortho:e}, det = {det})"
            )));
        }
        if !kind.is_extended() && (a1 != 0.0 || a2 != 0.0) {
            return Err(Error::Invalid(format!("central parameters must vanish for {kind}")));
        }
        Ok(Self {
            kind,
            a,
            b,
            c,
            f,
            a1,
            a2,
        })
    }

    pub fn identity(kind: AlgebraKind) -> Self {
        let d = kind.spatial_dim();
        Self {
            kind,
            a: DMatrix::identity(d, d),
            b: DVector::zeros(d),
            c: DVector::zeros(d),
            f: 0.0,
            a1: 0.0,
            a2: 0.0,
        }
    }

    /// Pure translation `(I, 0, c, 0, 0, 0)`.
    pub fn translation(kind: AlgebraKind, c: DVector<f64>) -> Result<Self> {
        let d = kind.spatial_dim();
        Self::new(kind, DMatrix::identity(d, d), DVector::zeros(d), c, 0.0, 0.0, 0.0)
    }

    /// Pure boost `(I, b, 0, 0, 0, 0)`.
    pub fn boost(kind: AlgebraKind, b: DVector<f64>) -> Result<Self> {
        let d = kind.spatial_dim();
        Self::new(kind, DMatrix::identity(d, d), b, DVector::zeros(d), 0.0, 0.0, 0.0)
    }

    /// Pure rotation `(A, 0, 0, 0, 0, 0)`.
    pub fn rotation(kind: AlgebraKind, a: DMatrix<f64>) -> Result<Self> {
        let d = kind.spatial_dim();
        Self::new(kind, a, DVector::zeros(d), DVector::zeros(d), 0.0, 0.0, 0.0)
    }

    pub fn kind(&self) -> AlgebraKind {
        self.kind
    }
    pub fn rot(&self) -> &DMatrix<f64> {
        &self.a
    }
    pub fn boost_part(&self) -> &DVector<f64> {
        &self.b
    }
    pub fn translation_part(&self) -> &DVector<f64> {
        &self.c
    }
    pub fn time_shift(&self) -> f64 {
        self.f
    }
    pub fn a1(&self) -> f64 {
        self.a1
    }
    pub fn a2(&self) -> f64 {
        self.a2
    }

    /// Flat numeric record: `A` row-major, then `b`, `c`, `f`, `a1`, `a2`.
    pub fn to_record(&self) -> Vec<f64> {
        let d = self.kind.spatial_dim();
        let mut out = Vec::with_capacity(d * d + 2 * d + 3);
        for i in 0..d {
            for j in 0..d {
                out.push(self.a[(i, j)]);
            }
        }
        out.extend(self.b.iter());
        out.extend(self.c.iter());
        out.push(self.f);
        out.push(self.a1);
        out.push(self.a2);
        out
    }

    pub fn from_record(kind: AlgebraKind, rec: &[f64]) -> Result<Self> {
        let d = kind.spatial_dim();
        let expected = d * d + 2 * d + 3;
        if rec.len() != expected {
            return Err(Error::Dimension {
                what: "group record",
                expected,
                got: rec.len(),
            });
        }
        let a = DMatrix::from_row_slice(d, d, &rec[..d * d]);
        let b = DVector::from_column_slice(&rec[d * d..d * d + d]);
        let c = DVector::from_column_slice(&rec[d * d + d..d * d + 2 * d]);
        let k = d * d + 2 * d;
        Self::new(kind, a, b, c, rec[k], rec[k + 1], rec[k + 2])
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.to_record()
            .iter()
            .zip(other.to_record())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Matrix representation of the group element.
    pub fn to_matrix(&self) -> MatrixRep {
        let kind = self.kind;
        let d = kind.spatial_dim();
        let n = kind.matrix_size();
        let (s, one) = (d, d + 1);
        let mut m = DMatrix::identity(n, n);
        m.view_mut((0, 0), (d, d)).copy_from(&self.a);
        let bta = self.a.transpose() * &self.b;
        for i in 0..d {
            m[(i, one)] = self.c[i];
            m[(s, i)] = -bta[i];
        }
        m[(s, one)] = self.f;
        if kind.is_extended() {
            let (arow, last) = (4, 5);
            let eb = eps_apply(&self.b);
            // -(eps c)^T A as a row
            let eca = self.a.transpose() * eps_apply(&self.c);
            for i in 0..2 {
                m[(i, last)] = eb[i];
                m[(arow, i)] = -eca[i];
            }
            m[(s, last)] = self.a2;
            m[(arow, one)] = self.a1;
            m[(arow, last)] = -(self.f + self.b.dot(&self.c));
        }
        MatrixRep(m)
    }

    /// Group law.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        check_same(self.kind, other.kind)?;
        let a = &self.a * &other.a;
        let ac = &self.a * &other.c;
        let b = &self.a * &other.b + &self.b;
        let c = &ac + &self.c;
        let f = self.f + other.f - self.b.dot(&ac);
        let (a1, a2) = if self.kind.is_extended() {
            let aeb = &self.a * eps_apply(&other.b);
            (
                self.a1 + other.a1 - eps_apply(&self.c).dot(&ac),
                self.a2 + other.a2 - self.b.dot(&aeb),
            )
        } else {
            (0.0, 0.0)
        };
        Ok(Self {
            kind: self.kind,
            a,
            b,
            c,
            f,
            a1,
            a2,
        })
    }

    pub fn inverse(&self) -> Self {
        let at = self.a.transpose();
        let b = -(&at * &self.b);
        let c = -(&at * &self.c);
        let f = -self.f - self.b.dot(&self.c);
        Self {
            kind: self.kind,
            a: at,
            b,
            c,
            f,
            a1: -self.a1,
            a2: -self.a2,
        }
    }

    /// Action on a spacetime event: `x' = A x + c`, `s' = s - <b, A x> + f`.
    pub fn act_event(&self, x: &DVector<f64>, s: f64) -> Result<(DVector<f64>, f64)> {
        check_len("event position", x, self.kind.spatial_dim())?;
        let ax = &self.a * x;
        let s_new = s - self.b.dot(&ax) + self.f;
        Ok((ax + &self.c, s_new))
    }
}

/// A matrix representative of an algebra or group element.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixRep(pub DMatrix<f64>);

impl MatrixRep {
    pub fn entries(&self) -> &DMatrix<f64> {
        &self.0
    }
    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }
}

/// Lie bracket in coordinates; equal to the commutator of the matrix representatives.
pub fn bracket(z1: &AlgebraElement, z2: &AlgebraElement) -> Result<AlgebraElement> {
    check_same(z1.kind, z2.kind)?;
    let kind = z1.kind;
    let j1 = rotation_generator(kind, &z1.omega);
    let j2 = rotation_generator(kind, &z2.omega);
    let omega = match kind.spatial_dim() {
        2 => DVector::zeros(1),
        _ => cross3(&z1.omega, &z2.omega),
    };
    let beta = &j1 * &z2.beta - &j2 * &z1.beta;
    let gamma = &j1 * &z2.gamma - &j2 * &z1.gamma;
    let phi = z2.beta.dot(&z1.gamma) - z1.beta.dot(&z2.gamma);
    let (alpha1, alpha2) = if kind.is_extended() {
        (
            2.0 * z1.gamma.dot(&eps_apply(&z2.gamma)),
            -2.0 * z1.beta.dot(&eps_apply(&z2.beta)),
        )
    } else {
        (0.0, 0.0)
    };
    Ok(AlgebraElement {
        kind,
        omega,
        beta,
        gamma,
        phi,
        alpha1,
        alpha2,
    })
}

/// Sum of `K^n * c_n` type series used by the exponential: returns
/// `(A, W, U)` with `A = exp(K)`, `W = sum K^n/(n+1)!`, `U = sum K^n/(n+2)!`.
fn rotation_series(kind: AlgebraKind, omega: &DVector<f64>) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let d = kind.spatial_dim();
    let id = DMatrix::<f64>::identity(d, d);
    let k = rotation_generator(kind, omega);
    match d {
        2 => {
            let w = omega[0];
            let (s, c) = w.sin_cos();
            let a = &id * c + eps() * s;
            // K^2 = -w^2 I, so each series splits into an even and an odd part
            let (c1, c2, _) = series_coeffs(w.abs());
            let wmat = &id * sinc(w.abs()) + &k * c1;
            let umat = &id * c1 + &k * c2;
            (a, wmat, umat)
        }
        _ => {
            let theta = omega.norm();
            let k2 = &k * &k;
            let (c1, c2, c3) = series_coeffs(theta);
            // exp(K) = I + sinc K + c1 K^2 (Rodrigues)
            let a = &id + &k * sinc(theta) + &k2 * c1;
            let wmat = &id + &k * c1 + &k2 * c2;
            let umat = &id * 0.5 + &k * c2 + &k2 * c3;
            (a, wmat, umat)
        }
    }
}

/// `sin t / t`.
fn sinc(t: f64) -> f64 {
    if t < 1.0 {
        alt_series(t, 1)
    } else {
        t.sin() / t
    }
}

/// Returns `((1-cos t)/t^2, (t - sin t)/t^3, (t^2/2 - 1 + cos t)/t^4)`.
fn series_coeffs(t: f64) -> (f64, f64, f64) {
    if t < 1.0 {
        (alt_series(t, 2), alt_series(t, 3), alt_series(t, 4))
    } else {
        let (s, c) = t.sin_cos();
        let t2 = t * t;
        ((1.0 - c) / t2, (t - s) / (t2 * t), (t2 / 2.0 - 1.0 + c) / (t2 * t2))
    }
}

/// `sum_k (-1)^k t^{2k} / (2k + offset)!` for `t < 1`.
fn alt_series(t: f64, offset: u32) -> f64 {
    let t2 = t * t;
    let mut term = 1.0 / (1..=offset).map(f64::from).product::<f64>();
    let mut sum = term;
    let mut n = offset;
    for _ in 0..20 {
        term *= -t2 / f64::from((n + 1) * (n + 2));
        n += 2;
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// Exponential map, in closed form per block.
pub fn exp(z: &AlgebraElement) -> GroupElement {
    let kind = z.kind;
    let (a, w, u) = rotation_series(kind, &z.omega);
    let b = &w * &z.beta;
    let c = &w * &z.gamma;
    let f = z.phi - z.beta.dot(&(&u * &z.gamma));
    let (a1, a2) = if kind.is_extended() {
        let ug = &u * eps_apply(&z.gamma);
        let ub = &u * eps_apply(&z.beta);
        (z.alpha1 + z.gamma.dot(&ug), z.alpha2 - z.beta.dot(&ub))
    } else {
        (0.0, 0.0)
    };
    GroupElement {
        kind,
        a,
        b,
        c,
        f,
        a1,
        a2,
    }
}
