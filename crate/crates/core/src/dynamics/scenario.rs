use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::field::FieldSpec;
use crate::error::{Error, Result};
use crate::lie::{eps_apply, AlgebraKind, GroupElement};

/// Tolerance on `|u| = 1`.
pub const UNIT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScenarioKind {
    Free3D,
    FreeSpin3D,
    EM3DSpinless,
    EM3DSpin,
    Free2DExt,
    EM2DExt,
    Photon2D,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 7] = [
        ScenarioKind::Free3D,
        ScenarioKind::FreeSpin3D,
        ScenarioKind::EM3DSpinless,
        ScenarioKind::EM3DSpin,
        ScenarioKind::Free2DExt,
        ScenarioKind::EM2DExt,
        ScenarioKind::Photon2D,
    ];

    pub fn spatial_dim(self) -> usize {
        if self.is_planar() {
            2
        } else {
            3
        }
    }

    pub fn is_planar(self) -> bool {
        matches!(
            self,
            ScenarioKind::Free2DExt | ScenarioKind::EM2DExt | ScenarioKind::Photon2D
        )
    }

    pub fn has_spin(self) -> bool {
        matches!(self, ScenarioKind::FreeSpin3D | ScenarioKind::EM3DSpin)
    }

    pub fn has_field(self) -> bool {
        matches!(
            self,
            ScenarioKind::EM3DSpinless | ScenarioKind::EM3DSpin | ScenarioKind::EM2DExt | ScenarioKind::Photon2D
        )
    }

    pub fn is_free(self) -> bool {
        matches!(
            self,
            ScenarioKind::Free3D | ScenarioKind::FreeSpin3D | ScenarioKind::Free2DExt
        )
    }

    /// Symmetry group of the free model with this layout.
    pub fn algebra_kind(self) -> AlgebraKind {
        if self.is_planar() {
            AlgebraKind::ExtCarr2
        } else {
            AlgebraKind::Carr3
        }
    }

    /// Number of coordinates on the evolution space chart.
    pub fn chart_dim(self) -> usize {
        let d = self.spatial_dim();
        2 * d + 1 + if self.is_planar() { 2 } else { 0 } + if self.has_spin() { 2 } else { 0 }
    }
}

/// Physical parameters. Unused entries are zero.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Params {
    pub m: f64,
    /// Scalar spin of the 3+1 spinning models.
    pub spin: f64,
    pub q: f64,
    /// Magnetic moment (3+1) or anyon coupling (planar).
    pub mu: f64,
    pub q1: f64,
    pub q2: f64,
    /// Anyonic spin.
    pub theta: f64,
}

/// One of the seven dynamical models together with its parameters and background.
#[derive(Debug, Clone)]
pub struct Scenario {
    kind: ScenarioKind,
    params: Params,
    field: Option<FieldSpec>,
}

impl Scenario {
    pub fn new(kind: ScenarioKind, params: Params, field: Option<FieldSpec>) -> Result<Self> {
        let bad = |msg: &str| Err(Error::Invalid(format!("{kind:?}: {msg}")));
        let vals = [
            params.m,
            params.spin,
            params.q,
            params.mu,
            params.q1,
            params.q2,
            params.theta,
        ];
        if vals.iter().any(|v| !v.is_finite()) {
            return bad("parameters must be finite");
        }
        if !kind.is_planar() && (params.q1 != 0.0 || params.q2 != 0.0) {
            return bad("central charges q1, q2 must vanish in 3+1 dimensions");
        }
        if !kind.is_planar() && params.theta != 0.0 {
            return bad("anyonic spin theta only exists in the plane");
        }
        if kind == ScenarioKind::Photon2D && (params.m != 0.0 || params.q != 0.0) {
            return bad("a planar photon requires m = 0 and q = 0");
        }
        if !kind.has_spin() && params.spin != 0.0 {
            return bad("scalar spin only enters the spinning models");
        }
        match (&field, kind.has_field()) {
            (None, true) => return bad("an electromagnetic field is required"),
            (Some(_), false) => return bad("free models take no field"),
            (Some(f), true) => f.validate(kind.spatial_dim())?,
            (None, false) => {}
        }
        Ok(Self { kind, params, field })
    }

    pub fn free_3d(m: f64) -> Result<Self> {
        Self::new(ScenarioKind::Free3D, Params { m, ..Params::default() }, None)
    }

    pub fn free_spin_3d(m: f64, spin: f64) -> Result<Self> {
        Self::new(
            ScenarioKind::FreeSpin3D,
            Params {
                m,
                spin,
                ..Params::default()
            },
            None,
        )
    }

    pub fn em_3d_spinless(m: f64, q: f64, field: FieldSpec) -> Result<Self> {
        Self::new(
            ScenarioKind::EM3DSpinless,
            Params {
                m,
                q,
                ..Params::default()
            },
            Some(field),
        )
    }

    pub fn em_3d_spin(m: f64, spin: f64, q: f64, mu: f64, field: FieldSpec) -> Result<Self> {
        let p = Params {
            m,
            spin,
            q,
            mu,
            ..Params::default()
        };
        Self::new(ScenarioKind::EM3DSpin, p, Some(field))
    }

    pub fn free_2d_ext(m: f64, q1: f64, q2: f64, theta: f64) -> Result<Self> {
        let p = Params {
            m,
            q1,
            q2,
            theta,
            ..Params::default()
        };
        Self::new(ScenarioKind::Free2DExt, p, None)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn em_2d_ext(m: f64, q: f64, mu: f64, q1: f64, q2: f64, theta: f64, field: FieldSpec) -> Result<Self> {
        let p = Params {
            m,
            q,
            mu,
            q1,
            q2,
            theta,
            ..Params::default()
        };
        Self::new(ScenarioKind::EM2DExt, p, Some(field))
    }

    pub fn photon_2d(mu: f64, q1: f64, q2: f64, theta: f64, field: FieldSpec) -> Result<Self> {
        let p = Params {
            mu,
            q1,
            q2,
            theta,
            ..Params::default()
        };
        Self::new(ScenarioKind::Photon2D, p, Some(field))
    }

    pub fn kind(&self) -> ScenarioKind {
        self.kind
    }
    pub fn params(&self) -> &Params {
        &self.params
    }
    pub fn field(&self) -> Option<&FieldSpec> {
        self.field.as_ref()
    }

    /// Electric and magnetic field at a point, zero for free models.
    pub fn fields_at(&self, x: &DVector<f64>, s: f64) -> (DVector<f64>, DVector<f64>) {
        let d = self.kind.spatial_dim();
        match &self.field {
            Some(f) => (f.e(x, s), f.b(x, s)),
            None => (DVector::zeros(d), DVector::zeros(d * (d - 1) / 2)),
        }
    }
}

/// A point of the evolution space.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionPoint {
    x: DVector<f64>,
    v: DVector<f64>,
    s: f64,
    fiber: Option<(f64, f64)>,
    u: Option<DVector<f64>>,
}

impl EvolutionPoint {
    /// `(x, v, s)` in 3+1 dimensions.
    pub fn spatial(x: DVector<f64>, v: DVector<f64>, s: f64) -> Self {
        Self {
            x,
            v,
            s,
            fiber: None,
            u: None,
        }
    }

    /// `(x, v, s, u)` with `|u| = 1`.
    pub fn with_spin(x: DVector<f64>, v: DVector<f64>, s: f64, u: DVector<f64>) -> Result<Self> {
        if u.len() != 3 {
            return Err(Error::Dimension {
                what: "spin direction",
                expected: 3,
                got: u.len(),
            });
        }
        if (u.norm() - 1.0).abs() > UNIT_TOL {
            return Err(Error::Invalid(format!(
                "spin direction must be a unit vector, |u| = {}",
                u.norm()
            )));
        }
        Ok(Self {
            x,
            v,
            s,
            fiber: None,
            u: Some(u),
        })
    }

    /// `(x, v, s, w, z)` in the plane.
    pub fn planar(x: DVector<f64>, v: DVector<f64>, s: f64, w: f64, z: f64) -> Self {
        Self {
            x,
            v,
            s,
            fiber: Some((w, z)),
            u: None,
        }
    }

    pub fn x(&self) -> &DVector<f64> {
        &self.x
    }
    pub fn v(&self) -> &DVector<f64> {
        &self.v
    }
    pub fn s(&self) -> f64 {
        self.s
    }
    pub fn fiber(&self) -> Option<(f64, f64)> {
        self.fiber
    }
    pub fn u(&self) -> Option<&DVector<f64>> {
        self.u.as_ref()
    }

    pub fn check_layout(&self, scenario: &Scenario) -> Result<()> {
        let kind = scenario.kind();
        let d = kind.spatial_dim();
        if self.x.len() != d || self.v.len() != d {
            return Err(Error::Layout(format!(
                "{kind:?} needs {d}-dimensional x and v, got {} and {}",
                self.x.len(),
                self.v.len()
            )));
        }
        if kind.is_planar() != self.fiber.is_some() {
            return Err(Error::Layout(format!(
                "{kind:?}: fiber coordinates (w, z) present iff planar"
            )));
        }
        if kind.has_spin() != self.u.is_some() {
            return Err(Error::Layout(format!(
                "{kind:?}: spin direction u present iff spinning model"
            )));
        }
        Ok(())
    }

    /// Returns a copy with updated position, momentum state, time and spin.
    pub(crate) fn moved(&self, x: DVector<f64>, v: DVector<f64>, s: f64, u: Option<DVector<f64>>) -> Self {
        Self {
            x,
            v,
            s,
            fiber: self.fiber,
            u,
        }
    }

    /// Natural group action on the evolution space of the free models.
    pub fn transform(&self, a: &GroupElement) -> Result<Self> {
        let d = self.x.len();
        let expected = if self.fiber.is_some() {
            AlgebraKind::ExtCarr2
        } else {
            AlgebraKind::Carr3
        };
        if a.kind() != expected || a.kind().spatial_dim() != d {
            return Err(Error::KindMismatch {
                left: a.kind(),
                right: expected,
            });
        }
        let rot = a.rot();
        let b = a.boost_part();
        let ax = rot * &self.x;
        let (x, s) = a.act_event(&self.x, self.s)?;
        let v = rot * &self.v + b;
        let fiber = self.fiber.map(|(w, z)| {
            let c = a.translation_part();
            (
                w + a.a1() - eps_apply(c).dot(&ax),
                z + a.a2() - b.dot(&(rot * eps_apply(&self.v))),
            )
        });
        let u = self.u.as_ref().map(|u| rot * u);
        Ok(Self { x, v, s, fiber, u })
    }

    /// Flat coordinates in chart order `(x, v, s[, w, z][, u])`.
    pub fn coords(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.x.iter().chain(self.v.iter()).copied().collect();
        out.push(self.s);
        if let Some((w, z)) = self.fiber {
            out.push(w);
            out.push(z);
        }
        if let Some(u) = &self.u {
            out.extend(u.iter());
        }
        out
    }
}

/// Orthonormal tangent frame `(e1, e2)` at `u` with `e1 x e2 = u`.
pub fn sphere_frame(u: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
    let mut axis = DVector::zeros(3);
    let k = u.iamin();
    axis[k] = 1.0;
    let e1 = (&axis - u * u.dot(&axis)).normalize();
    let e2 = crate::lie::cross3(u, &e1);
    (e1, e2)
}
