use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Central-difference step for user fields.
pub const FD_STEP: f64 = 1e-5;

type FieldFn = dyn Fn(&DVector<f64>, f64) -> DVector<f64> + Send + Sync;

/// Electromagnetic background: `E(x, s)` in R^d and `B(x, s)` in R^{d(d-1)/2}.
#[derive(Clone)]
pub enum FieldSpec {
    Uniform {
        e: DVector<f64>,
        b: DVector<f64>,
    },
    /// `E = e0 + de x`, `B = b0 + db x`.
    Linear {
        e0: DVector<f64>,
        de: DMatrix<f64>,
        b0: DVector<f64>,
        db: DMatrix<f64>,
    },
    /// Arbitrary closures; gradients by central differences.
    Custom {
        dim: usize,
        e: Arc<FieldFn>,
        b: Arc<FieldFn>,
    },
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Uniform { e, b } => f
                .debug_struct("Uniform")
                .field("e", &e.as_slice())
                .field("b", &b.as_slice())
                .finish(),
            FieldSpec::Linear { e0, b0, .. } => f
                .debug_struct("Linear")
                .field("e0", &e0.as_slice())
                .field("b0", &b0.as_slice())
                .finish_non_exhaustive(),
            FieldSpec::Custom { dim, .. } => f.debug_struct("Custom").field("dim", dim).finish_non_exhaustive(),
        }
    }
}

/// Serializable description of the preset fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldPreset {
    pub e: Vec<f64>,
    pub b: Vec<f64>,
    /// Row-major `d x d`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grad_e: Option<Vec<f64>>,
    /// Row-major `r x d`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grad_b: Option<Vec<f64>>,
}

impl FieldSpec {
    pub fn uniform(e: Vec<f64>, b: Vec<f64>) -> Self {
        FieldSpec::Uniform {
            e: DVector::from_vec(e),
            b: DVector::from_vec(b),
        }
    }

    pub fn linear(e0: Vec<f64>, de: DMatrix<f64>, b0: Vec<f64>, db: DMatrix<f64>) -> Self {
        FieldSpec::Linear {
            e0: DVector::from_vec(e0),
            de,
            b0: DVector::from_vec(b0),
            db,
        }
    }

    pub fn custom<E, B>(dim: usize, e: E, b: B) -> Self
    where
        E: Fn(&DVector<f64>, f64) -> DVector<f64> + Send + Sync + 'static,
        B: Fn(&DVector<f64>, f64) -> DVector<f64> + Send + Sync + 'static,
    {
        FieldSpec::Custom {
            dim,
            e: Arc::new(e),
            b: Arc::new(b),
        }
    }

    pub fn from_preset(p: &FieldPreset) -> Result<Self> {
        let d = p.e.len();
        if p.grad_e.is_none() && p.grad_b.is_none() {
            return Ok(Self::uniform(p.e.clone(), p.b.clone()));
        }
        let r = p.b.len();
        let de = match &p.grad_e {
            Some(g) if g.len() == d * d => DMatrix::from_row_slice(d, d, g),
            Some(g) => {
                return Err(Error::Dimension {
                    what: "grad_e",
                    expected: d * d,
                    got: g.len(),
                })
            }
            None => DMatrix::zeros(d, d),
        };
        let db = match &p.grad_b {
            Some(g) if g.len() == r * d => DMatrix::from_row_slice(r, d, g),
            Some(g) => {
                return Err(Error::Dimension {
                    what: "grad_b",
                    expected: r * d,
                    got: g.len(),
                })
            }
            None => DMatrix::zeros(r, d),
        };
        Ok(Self::linear(p.e.clone(), de, p.b.clone(), db))
    }

    /// Spatial dimension the field is defined on.
    pub fn dim(&self) -> usize {
        match self {
            FieldSpec::Uniform { e, .. } => e.len(),
            FieldSpec::Linear { e0, .. } => e0.len(),
            FieldSpec::Custom { dim, .. } => *dim,
        }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        let r = d * (d - 1) / 2;
        let (ne, nb) = match self {
            FieldSpec::Uniform { e, b } => (e.len(), b.len()),
            FieldSpec::Linear { e0, de, b0, db } => {
                if de.shape() != (d, d) || db.shape() != (b0.len(), d) {
                    return Err(Error::Invalid("field gradient shapes do not match dimension".into()));
                }
                (e0.len(), b0.len())
            }
            FieldSpec::Custom { dim, .. } => (*dim, r),
        };
        if ne != d {
            return Err(Error::Dimension {
                what: "electric field",
                expected: d,
                got: ne,
            });
        }
        if nb != r {
            return Err(Error::Dimension {
                what: "magnetic field",
                expected: r,
                got: nb,
            });
        }
        Ok(())
    }

    pub fn e(&self, x: &DVector<f64>, s: f64) -> DVector<f64> {
        match self {
            FieldSpec::Uniform { e, .. } => e.clone(),
            FieldSpec::Linear { e0, de, .. } => e0 + de * x,
            FieldSpec::Custom { e, .. } => e(x, s),
        }
    }

    pub fn b(&self, x: &DVector<f64>, s: f64) -> DVector<f64> {
        match self {
            FieldSpec::Uniform { b, .. } => b.clone(),
            FieldSpec::Linear { b0, db, .. } => b0 + db * x,
            FieldSpec::Custom { b, .. } => b(x, s),
        }
    }

    /// Spatial Jacobian of `B`: entry `(k, j)` is `d B_k / d x_j`.
    pub fn grad_b(&self, x: &DVector<f64>, s: f64) -> DMatrix<f64> {
        match self {
            FieldSpec::Uniform { b, .. } => DMatrix::zeros(b.len(), x.len()),
            FieldSpec::Linear { db, .. } => db.clone(),
            FieldSpec::Custom { b, .. } => central_jacobian(|y| b(y, s), x, FD_STEP),
        }
    }
}

/// Second-order central-difference Jacobian.
pub fn central_jacobian<F>(f: F, x: &DVector<f64>, h: f64) -> DMatrix<f64>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    let n = x.len();
    let f0 = f(x);
    let mut jac = DMatrix::zeros(f0.len(), n);
    for j in 0..n {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += h;
        xm[j] -= h;
        let col = (f(&xp) - f(&xm)) / (2.0 * h);
        jac.set_column(j, &col);
    }
    jac
}
