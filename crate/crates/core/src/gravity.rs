//! Carroll particles on a curved 2+1 Cartan geometry.
//!
//! A geometry is given on one chart `x = (s, x1, x2)` by analytic closures for the
//! tetrad `e^mu_a` (column `a`, with `e_0 = xi`), the connection coefficients
//! `Gamma^mu_{nu lambda}` and the exotic curvature sources attached to the two
//! central directions. The particle state is `(x^mu, v_mu)` where `v = theta^0`
//! is the time covector of the particle frame; the spatial covectors `theta^A`
//! are those of the geometry.

use std::fmt;
use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::{Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Central-difference step for exterior derivatives (refined by one Richardson step).
pub const FD_STEP: f64 = 1e-5;
/// Determinant below which a tetrad counts as singular.
pub const SINGULAR_TOL: f64 = 1e-12;

type MatFn = dyn Fn(&Vector3<f64>) -> Matrix3<f64> + Send + Sync;
type GammaFn = dyn Fn(&Vector3<f64>) -> [Matrix3<f64>; 3] + Send + Sync;
type ScalarFn = dyn Fn(&Vector3<f64>) -> f64 + Send + Sync;
type Covec2Fn = dyn Fn(&Vector3<f64>) -> Vector2<f64> + Send + Sync;
type Covec3Fn = dyn Fn(&Vector3<f64>) -> Vector3<f64> + Send + Sync;

/// Exotic curvature sources: magnetic scalars `O1, O2` and electric covectors
/// `Omega_{1,A}, Omega_{2,A}`.
#[derive(Clone)]
pub struct ExoticSources {
    pub o1: Arc<ScalarFn>,
    pub o2: Arc<ScalarFn>,
    pub omega1: Arc<Covec2Fn>,
    pub omega2: Arc<Covec2Fn>,
}

impl ExoticSources {
    pub fn none() -> Self {
        Self::constant(0.0, 0.0, Vector2::zeros(), Vector2::zeros())
    }

    pub fn constant(o1: f64, o2: f64, omega1: Vector2<f64>, omega2: Vector2<f64>) -> Self {
        Self {
            o1: Arc::new(move |_| o1),
            o2: Arc::new(move |_| o2),
            omega1: Arc::new(move |_| omega1),
            omega2: Arc::new(move |_| omega2),
        }
    }

    /// Combined electric source `T_A = q1 Omega_{1,A} + q2 Omega_{2,A}`.
    pub fn electric(&self, x: &Vector3<f64>, q1: f64, q2: f64) -> Vector2<f64> {
        (self.omega1)(x) * q1 + (self.omega2)(x) * q2
    }

    /// `q1 - q1 O1 - q2 O2`: the magnetic parts only shift the first charge.
    pub fn shifted_q1(&self, x: &Vector3<f64>, q1: f64, q2: f64) -> f64 {
        q1 - q1 * (self.o1)(x) - q2 * (self.o2)(x)
    }
}

/// Named geometries addressable from configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case")]
pub enum GeometryPreset {
    Flat,
    KerrNewman {
        mass: f64,
        a: f64,
        charge: f64,
    },
    FlatWithT {
        t1: f64,
        t2: f64,
    },
    FlatWithSources {
        o1: f64,
        o2: f64,
        omega1: [f64; 2],
        omega2: [f64; 2],
    },
}

#[derive(Clone)]
pub struct CarrollGeometry {
    name: String,
    tetrad: Arc<MatFn>,
    cotetrad: Option<Arc<MatFn>>,
    gamma: Arc<GammaFn>,
    sources: ExoticSources,
    potential1: Option<Arc<Covec3Fn>>,
    potential2: Option<Arc<Covec3Fn>>,
}

impl fmt::Debug for CarrollGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CarrollGeometry")
            .field("name", &self.name)
            .finish_non_exhaustive()
    }
}

impl CarrollGeometry {
    /// Geometry from closures. `gamma(x)[mu][(nu, lambda)] = Gamma^mu_{nu lambda}`.
    pub fn new<E, G>(name: impl Into<String>, tetrad: E, gamma: G, sources: ExoticSources) -> Self
    where
        E: Fn(&Vector3<f64>) -> Matrix3<f64> + Send + Sync + 'static,
        G: Fn(&Vector3<f64>) -> [Matrix3<f64>; 3] + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            tetrad: Arc::new(tetrad),
            cotetrad: None,
            gamma: Arc::new(gamma),
            sources,
            potential1: None,
            potential2: None,
        }
    }

    /// Supplies an explicit cotetrad (rows `theta^a_mu`) instead of inverting the tetrad.
    pub fn with_cotetrad<F>(mut self, f: F) -> Self
    where
        F: Fn(&Vector3<f64>) -> Matrix3<f64> + Send + Sync + 'static,
    {
        self.cotetrad = Some(Arc::new(f));
        self
    }

    /// Supplies the potentials of the two central components of the connection,
    /// enabling the curvature consistency checks.
    pub fn with_potentials<F1, F2>(mut self, p1: F1, p2: F2) -> Self
    where
        F1: Fn(&Vector3<f64>) -> Vector3<f64> + Send + Sync + 'static,
        F2: Fn(&Vector3<f64>) -> Vector3<f64> + Send + Sync + 'static,
    {
        self.potential1 = Some(Arc::new(p1));
        self.potential2 = Some(Arc::new(p2));
        self
    }

    pub fn with_sources(mut self, sources: ExoticSources) -> Self {
        self.sources = sources;
        self
    }

    /// `e = I`, `Gamma = 0`, no sources.
    pub fn flat() -> Self {
        Self::flat_with_sources(0.0, 0.0, Vector2::zeros(), Vector2::zeros())
    }

    /// Flat geometry with constant exotic sources.
    pub fn flat_with_sources(o1: f64, o2: f64, omega1: Vector2<f64>, omega2: Vector2<f64>) -> Self {
        let potential = move |o: f64, om: Vector2<f64>| {
            // flat Maurer-Cartan part plus primitives of the declared sources
            move |x: &Vector3<f64>| Vector3::new(0.0, -o * x[2] + x[0] * om[0], o * x[1] + x[0] * om[1])
        };
        let p1 = potential(o1, omega1);
        let p2 = potential(o2, omega2);
        Self::new(
            "flat",
            |_| Matrix3::identity(),
            |_| [Matrix3::zeros(); 3],
            ExoticSources::constant(o1, o2, omega1, omega2),
        )
        .with_cotetrad(|_| Matrix3::identity())
        .with_potentials(move |x| p1(x) + Vector3::new(0.0, x[2], -x[1]), p2)
    }

    /// Flat geometry whose only source is `Omega_{2,A} = T_A / q2`, so that the
    /// combined electric source equals `T` for a particle with charge `q2`
    /// and no first-charge source.
    pub fn flat_with_t(t: Vector2<f64>, q2: f64) -> Result<Self> {
        if q2 == 0.0 {
            return Err(Error::Invalid("flat_with_t needs q2 != 0".into()));
        }
        Ok(Self::flat_with_sources(0.0, 0.0, Vector2::zeros(), t / q2))
    }

    pub fn from_preset(p: &GeometryPreset, q2: f64) -> Result<Self> {
        match p {
            GeometryPreset::Flat => Ok(Self::flat()),
            GeometryPreset::KerrNewman { mass, a, charge } => Ok(kerr_newman_horizon(*mass, *a, *charge)?.0),
            GeometryPreset::FlatWithT { t1, t2 } => Self::flat_with_t(Vector2::new(*t1, *t2), q2),
            GeometryPreset::FlatWithSources { o1, o2, omega1, omega2 } => Ok(Self::flat_with_sources(
                *o1,
                *o2,
                Vector2::from(*omega1),
                Vector2::from(*omega2),
            )),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn sources(&self) -> &ExoticSources {
        &self.sources
    }

    pub fn tetrad(&self, x: &Vector3<f64>) -> Matrix3<f64> {
        (self.tetrad)(x)
    }

    /// Cotetrad rows `theta^a_mu`.
    pub fn cotetrad(&self, x: &Vector3<f64>) -> Result<Matrix3<f64>> {
        match &self.cotetrad {
            Some(f) => Ok(f(x)),
            None => invert(&self.tetrad(x), x),
        }
    }

    pub fn gamma(&self, x: &Vector3<f64>) -> [Matrix3<f64>; 3] {
        (self.gamma)(x)
    }

    pub fn xi(&self, x: &Vector3<f64>) -> Vector3<f64> {
        self.tetrad(x).column(0).into_owned()
    }
}

fn invert(m: &Matrix3<f64>, x: &Vector3<f64>) -> Result<Matrix3<f64>> {
    if m.determinant().abs() < SINGULAR_TOL {
        return Err(Error::SingularTetrad(x.iter().copied().collect()));
    }
    m.try_inverse()
        .ok_or_else(|| Error::SingularTetrad(x.iter().copied().collect()))
}

/// `omega^a_c(d_lambda)` as `w[lambda][(a, c)]`, for the section tetrad.
fn connection_forms(geom: &CarrollGeometry, x: &Vector3<f64>) -> Result<[Matrix3<f64>; 3]> {
    let theta = geom.cotetrad(x)?;
    let e = geom.tetrad(x);
    let g = geom.gamma(x);
    let mut out = [Matrix3::zeros(); 3];
    for (lam, w) in out.iter_mut().enumerate() {
        let de = fd_partial(|y| geom.tetrad(y), x, lam);
        // (d_lambda e^mu_c + Gamma^mu_{nu lambda} e^nu_c)
        let mut cov = de;
        for mu in 0..3 {
            for c in 0..3 {
                cov[(mu, c)] += (0..3).map(|nu| g[mu][(nu, lam)] * e[(nu, c)]).sum::<f64>();
            }
        }
        *w = theta * cov;
    }
    Ok(out)
}

fn fd_partial<F>(f: F, x: &Vector3<f64>, k: usize) -> Matrix3<f64>
where
    F: Fn(&Vector3<f64>) -> Matrix3<f64>,
{
    let central = |h: f64| {
        let mut xp = *x;
        let mut xm = *x;
        xp[k] += h;
        xm[k] -= h;
        (f(&xp) - f(&xm)) / (2.0 * h)
    };
    richardson(central(FD_STEP), central(0.5 * FD_STEP))
}

/// One Richardson step on central differences at `h` and `h/2`.
fn richardson(coarse: Matrix3<f64>, fine: Matrix3<f64>) -> Matrix3<f64> {
    (fine * 4.0 - coarse) / 3.0
}

fn fd_exterior<F>(f: F, x: &Vector3<f64>) -> Matrix3<f64>
where
    F: Fn(&Vector3<f64>) -> Vector3<f64>,
{
    let jacobian = |h: f64| {
        let mut jac = Matrix3::zeros();
        for k in 0..3 {
            let mut xp = *x;
            let mut xm = *x;
            xp[k] += h;
            xm[k] -= h;
            let col = (f(&xp) - f(&xm)) / (2.0 * h);
            // jac[(k, mu)] = d_k w_mu
            jac.set_row(k, &col.transpose());
        }
        jac
    };
    let jac = richardson(jacobian(FD_STEP), jacobian(0.5 * FD_STEP));
    jac - jac.transpose()
}

fn wedge(a: &Vector3<f64>, b: &Vector3<f64>) -> Matrix3<f64> {
    a * b.transpose() - b * a.transpose()
}

/// Residuals of the structure equations at one point. Two-forms are evaluated
/// on the probe pairs; `omega1`/`omega2` are absent when the geometry carries
/// no potentials for the central components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StructureResiduals {
    pub duality: f64,
    pub torsion: f64,
    pub carroll_constraint: f64,
    pub omega1: Option<f64>,
    pub omega2: Option<f64>,
}

impl StructureResiduals {
    pub fn max(&self) -> f64 {
        [
            self.duality,
            self.torsion,
            self.carroll_constraint,
            self.omega1.unwrap_or(0.0),
            self.omega2.unwrap_or(0.0),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Coordinate bivectors `(d_i, d_j)`, `i < j`.
pub fn coordinate_probes() -> Vec<(Vector3<f64>, Vector3<f64>)> {
    let b = [Vector3::x(), Vector3::y(), Vector3::z()];
    vec![(b[0], b[1]), (b[0], b[2]), (b[1], b[2])]
}

pub fn structure_residuals(
    geom: &CarrollGeometry,
    x: &Vector3<f64>,
    probes: &[(Vector3<f64>, Vector3<f64>)],
) -> Result<StructureResiduals> {
    let e = geom.tetrad(x);
    let theta = geom.cotetrad(x)?;
    let duality = (theta * e - Matrix3::identity()).amax();
    let w = connection_forms(geom, x)?;
    let on = |form: &Matrix3<f64>| {
        probes
            .iter()
            .map(|(p, q)| (p.transpose() * form * q)[0].abs())
            .fold(0.0, f64::max)
    };

    // Omega^a = d theta^a + omega^a_c ^ theta^c
    let mut torsion = 0.0f64;
    for a in 0..3 {
        let row = |y: &Vector3<f64>| {
            geom.cotetrad(y)
                .map(|t| t.row(a).transpose())
                .unwrap_or_else(|_| Vector3::zeros())
        };
        let mut form = fd_exterior(row, x);
        for c in 0..3 {
            let wac = Vector3::new(w[0][(a, c)], w[1][(a, c)], w[2][(a, c)]);
            form += wedge(&wac, &theta.row(c).transpose());
        }
        torsion = torsion.max(on(&form));
    }

    // omega^A_0 = 0 and omega^0_0 = 0
    let carroll_constraint = (0..3)
        .flat_map(|lam| (0..3).map(move |a| (lam, a)))
        .map(|(lam, a)| w[lam][(a, 0)].abs())
        .fold(0.0, f64::max);

    let src = geom.sources();
    let th = |a: usize| theta.row(a).transpose();
    let area = wedge(&th(1), &th(2)) * 2.0;
    let omega1 = geom.potential1.as_ref().map(|p| {
        let declared = area * (src.o1)(x) + electric_part(&th(0), &th(1), &th(2), &(src.omega1)(x));
        on(&(fd_exterior(|y| p(y), x) + area - declared))
    });
    let omega2 = geom.potential2.as_ref().map(|p| {
        let w01 = Vector3::new(w[0][(0, 1)], w[1][(0, 1)], w[2][(0, 1)]);
        let w02 = Vector3::new(w[0][(0, 2)], w[1][(0, 2)], w[2][(0, 2)]);
        let declared = area * (src.o2)(x) + electric_part(&th(0), &th(1), &th(2), &(src.omega2)(x));
        on(&(fd_exterior(|y| p(y), x) - wedge(&w01, &w02) * 2.0 - declared))
    });
    Ok(StructureResiduals {
        duality,
        torsion,
        carroll_constraint,
        omega1,
        omega2,
    })
}

fn electric_part(t0: &Vector3<f64>, t1: &Vector3<f64>, t2: &Vector3<f64>, om: &Vector2<f64>) -> Matrix3<f64> {
    wedge(t0, t1) * om[0] + wedge(t0, t2) * om[1]
}

/// Charges of the particle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GravityParams {
    pub m: f64,
    pub q1: f64,
    pub q2: f64,
}

/// `(x^mu, v_mu)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GravityState {
    pub x: Vector3<f64>,
    pub v: Vector3<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// No electric exotic source: motion along `xi`.
    Geodesic,
    /// Electric exotic source present.
    Exotic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GravityTangent {
    pub dx: Vector3<f64>,
    pub dv: Vector3<f64>,
    pub regime: Regime,
    /// Electric source `T_A` at the point.
    pub t: Vector2<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GravityOutcome {
    Regular(GravityTangent),
    Degenerate(String),
}

impl GravityOutcome {
    pub fn tangent(&self) -> Option<&GravityTangent> {
        match self {
            GravityOutcome::Regular(t) => Some(t),
            GravityOutcome::Degenerate(_) => None,
        }
    }
}

/// Particle frame: rows `(v, theta^1, theta^2)` and its inverse (columns `e_a`).
pub fn particle_frame(geom: &CarrollGeometry, y: &GravityState) -> Result<(Matrix3<f64>, Matrix3<f64>)> {
    let mut cot = geom.cotetrad(&y.x)?;
    cot.set_row(0, &y.v.transpose());
    let e = invert(&cot, &y.x)?;
    Ok((cot, e))
}

/// Equations of motion in an arbitrary parameter `tau`.
pub fn eom_gravity(y: &GravityState, geom: &CarrollGeometry, params: &GravityParams) -> Result<GravityOutcome> {
    let (cot, e) = particle_frame(geom, y)?;
    let src = geom.sources();
    let t = src.electric(&y.x, params.q1, params.q2);
    let q1 = src.shifted_q1(&y.x, params.q1, params.q2);
    let mt2 = params.m * params.m + 4.0 * q1 * params.q2;
    let gamma = geom.gamma(&y.x);
    let transport = |xdot: &Vector3<f64>| {
        // Gamma^nu_{mu lambda} v_nu xdot^lambda
        Vector3::from_fn(|mu, _| {
            (0..3)
                .map(|nu| y.v[nu] * (0..3).map(|lam| gamma[nu][(mu, lam)] * xdot[lam]).sum::<f64>())
                .sum()
        })
    };
    let xi = geom.xi(&y.x);
    if t == Vector2::zeros() {
        let scale = params.m * params.m + 4.0 * (q1 * params.q2).abs();
        if scale == 0.0 || mt2.abs() <= 1e-12 * scale {
            return Ok(GravityOutcome::Degenerate(format!("effective mass vanishes ({mt2:e})")));
        }
        return Ok(GravityOutcome::Regular(GravityTangent {
            dx: xi,
            dv: transport(&xi),
            regime: Regime::Geodesic,
            t,
        }));
    }
    if params.q2 == 0.0 {
        return Ok(GravityOutcome::Degenerate(
            "electric exotic source needs q2 != 0".into(),
        ));
    }
    // eps^{AB} T_B with eps^{12} = 1
    let et = Vector2::new(t[1], -t[0]);
    let dx = xi * (mt2 / (2.0 * params.q2)) + e.column(1) * et[0] + e.column(2) * et[1];
    let th_t = cot.row(1).transpose() * t[0] + cot.row(2).transpose() * t[1];
    let dv = th_t * (params.m / (2.0 * params.q2)) + transport(&dx);
    Ok(GravityOutcome::Regular(GravityTangent {
        dx,
        dv,
        regime: Regime::Exotic,
        t,
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GravitySample {
    pub s: f64,
    pub state: GravityState,
    pub regime: Regime,
    pub t: Vector2<f64>,
    /// `theta^A(dx/ds)`.
    pub spatial_velocity: Vector2<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GravityTrajectory {
    pub step: f64,
    pub samples: Vec<GravitySample>,
    pub diagnostic: Option<String>,
}

impl GravityTrajectory {
    pub fn is_truncated(&self) -> bool {
        self.diagnostic.is_some()
    }

    /// Largest spatial displacement `|theta^A(x_k - x_0)|` in chart coordinates.
    pub fn max_spatial_displacement(&self) -> f64 {
        let x0 = self.samples[0].state.x;
        self.samples
            .iter()
            .map(|smp| ((smp.state.x[1] - x0[1]).powi(2) + (smp.state.x[2] - x0[2]).powi(2)).sqrt())
            .fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,x1,x2,v0,v1,v2,T1,T2,vel1,vel2\n");
        for smp in &self.samples {
            let st = &smp.state;
            let row = [
                smp.s,
                st.x[1],
                st.x[2],
                st.v[0],
                st.v[1],
                st.v[2],
                smp.t[0],
                smp.t[1],
                smp.spatial_velocity[0],
                smp.spatial_velocity[1],
            ];
            let cells: Vec<String> = row.iter().map(|c| format!("{c:?}")).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

/// Tangent reparametrized by the chart time `x^0`.
fn s_rate(
    y: &GravityState,
    geom: &CarrollGeometry,
    params: &GravityParams,
) -> Result<std::result::Result<GravityTangent, String>> {
    match eom_gravity(y, geom, params)? {
        GravityOutcome::Degenerate(r) => Ok(Err(r)),
        GravityOutcome::Regular(t) => {
            let rate = t.dx[0];
            if rate.abs() < 1e-300 || !rate.is_finite() {
                return Ok(Err("motion does not advance along the time direction".into()));
            }
            Ok(Ok(GravityTangent {
                dx: t.dx / rate,
                dv: t.dv / rate,
                ..t
            }))
        }
    }
}

fn sample(geom: &CarrollGeometry, y: &GravityState, t: &GravityTangent) -> Result<GravitySample> {
    let cot = geom.cotetrad(&y.x)?;
    let vel = cot * t.dx;
    Ok(GravitySample {
        s: y.x[0],
        state: *y,
        regime: t.regime,
        t: t.t,
        spatial_velocity: Vector2::new(vel[1], vel[2]),
    })
}

/// RK4 in the chart time `s = x^0` from `s_span.0` to `s_span.1`.
pub fn integrate_gravity(
    y0: &GravityState,
    geom: &CarrollGeometry,
    params: &GravityParams,
    s_span: (f64, f64),
    step: f64,
) -> Result<GravityTrajectory> {
    let (s0, s1) = s_span;
    if !(step > 0.0 && step.is_finite()) || !(s1 > s0) {
        return Err(Error::Invalid(format!("invalid span [{s0}, {s1}] or step {step}")));
    }
    let n = ((s1 - s0) / step - 1e-9).ceil().max(1.0) as usize;
    let h = (s1 - s0) / n as f64;
    let mut y = GravityState {
        x: Vector3::new(s0, y0.x[1], y0.x[2]),
        v: y0.v,
    };
    let mut traj = GravityTrajectory {
        step: h,
        samples: Vec::with_capacity(n + 1),
        diagnostic: None,
    };
    for k in 0..=n {
        let k1 = match s_rate(&y, geom, params)? {
            Ok(t) => t,
            Err(r) => {
                traj.diagnostic = Some(format!("degenerate at s = {}: {r}", y.x[0]));
                return Ok(traj);
            }
        };
        traj.samples.push(sample(geom, &y, &k1)?);
        if k == n {
            break;
        }
        let shift = |t: &GravityTangent, c: f64| GravityState {
            x: y.x + t.dx * c,
            v: y.v + t.dv * c,
        };
        let mut stages = [k1; 4];
        for (i, c) in [0.5 * h, 0.5 * h, h].into_iter().enumerate() {
            match s_rate(&shift(&stages[i], c), geom, params)? {
                Ok(t) => stages[i + 1] = t,
                Err(r) => {
                    traj.diagnostic = Some(format!("degenerate near s = {}: {r}", y.x[0]));
                    return Ok(traj);
                }
            }
        }
        let [a, b, c, d] = stages;
        let mut x = y.x + (a.dx + b.dx * 2.0 + c.dx * 2.0 + d.dx) * (h / 6.0);
        x[0] = s0 + (k + 1) as f64 * h;
        let v = y.v + (a.dv + b.dv * 2.0 + c.dv * 2.0 + d.dv) * (h / 6.0);
        y = GravityState { x, v };
    }
    Ok(traj)
}

/// Outcome of the horizon structure check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HorizonReport {
    pub r_plus: f64,
    /// `max |g(xi, .)|` over samples.
    pub xi_in_kernel: f64,
    pub kernel_dim_min: usize,
    pub kernel_dim_max: usize,
    /// `max |L_xi g|` by finite differences.
    pub lie_derivative: f64,
    /// Same checks in the original `(t, theta, phi)` chart with the horizon generator.
    pub original_chart_xi_in_kernel: f64,
    pub original_chart_lie_derivative: f64,
    pub torsion: f64,
    pub samples: usize,
}

/// Degenerate horizon metric in the chart `(s, theta, phi~)`.
pub fn horizon_metric(r: f64, a: f64, x: &Vector3<f64>) -> Matrix3<f64> {
    let (h_tt, h_pp) = horizon_components(r, a, x[1]);
    Matrix3::from_diagonal(&Vector3::new(0.0, h_tt, h_pp))
}

fn horizon_components(r: f64, a: f64, th: f64) -> (f64, f64) {
    let sigma = r * r + a * a * th.cos().powi(2);
    let k = r * r + a * a;
    (sigma, k * k * th.sin().powi(2) / sigma)
}

fn horizon_components_prime(r: f64, a: f64, th: f64) -> (f64, f64) {
    let (s, c) = th.sin_cos();
    let sigma = r * r + a * a * c * c;
    let dsigma = -2.0 * a * a * c * s;
    let k2 = (r * r + a * a).powi(2);
    let num = k2 * s * s;
    let dnum = k2 * 2.0 * s * c;
    (dsigma, (dnum * sigma - num * dsigma) / (sigma * sigma))
}

fn lie_derivative_fd<G>(g: G, xi: &Vector3<f64>, x: &Vector3<f64>) -> f64
where
    G: Fn(&Vector3<f64>) -> Matrix3<f64>,
{
    // xi is constant on the chart, so only the transport term survives
    let mut acc = Matrix3::zeros();
    for k in 0..3 {
        acc += fd_partial(&g, x, k) * xi[k];
    }
    acc.amax()
}

/// Horizon of a Kerr-Newman black hole as a Carroll structure.
pub fn kerr_newman_horizon(mass: f64, a: f64, charge: f64) -> Result<(CarrollGeometry, HorizonReport)> {
    let disc = mass * mass - a * a - charge * charge;
    if !(disc >= 0.0) || mass <= 0.0 {
        return Err(Error::Invalid(format!(
            "no horizon for M = {mass}, a = {a}, Q = {charge} (naked singularity)"
        )));
    }
    let r = mass + disc.sqrt();
    let tetrad = move |x: &Vector3<f64>| {
        let (h_tt, h_pp) = horizon_components(r, a, x[1]);
        Matrix3::from_diagonal(&Vector3::new(1.0, 1.0 / h_tt.sqrt(), 1.0 / h_pp.sqrt()))
    };
    let cotetrad = move |x: &Vector3<f64>| {
        let (h_tt, h_pp) = horizon_components(r, a, x[1]);
        Matrix3::from_diagonal(&Vector3::new(1.0, h_tt.sqrt(), h_pp.sqrt()))
    };
    let gamma = move |x: &Vector3<f64>| {
        let (h_tt, h_pp) = horizon_components(r, a, x[1]);
        let (d_tt, d_pp) = horizon_components_prime(r, a, x[1]);
        let mut g = [Matrix3::zeros(); 3];
        g[1][(1, 1)] = d_tt / (2.0 * h_tt);
        g[1][(2, 2)] = -d_pp / (2.0 * h_tt);
        g[2][(1, 2)] = d_pp / (2.0 * h_pp);
        g[2][(2, 1)] = d_pp / (2.0 * h_pp);
        g
    };
    let k = r * r + a * a;
    let geom = CarrollGeometry::new(
        format!("kerr_newman(M={mass}, a={a}, Q={charge})"),
        tetrad,
        gamma,
        ExoticSources::none(),
    )
    .with_cotetrad(cotetrad)
    .with_potentials(
        move |x| Vector3::new(0.0, 0.0, 2.0 * k * x[1].cos()),
        |_| Vector3::zeros(),
    );

    let xi = Vector3::new(1.0, 0.0, 0.0);
    let omega_h = a / k;
    let xi_orig = Vector3::new(1.0, 0.0, omega_h);
    let original = move |x: &Vector3<f64>| {
        let th = x[1];
        let (s, c) = th.sin_cos();
        let sigma = r * r + a * a * c * c;
        let s2 = s * s;
        let g_tt = a * a * s2 / sigma;
        let g_tp = -a * s2 * k / sigma;
        let g_pp = k * k * s2 / sigma;
        Matrix3::new(g_tt, 0.0, g_tp, 0.0, sigma, 0.0, g_tp, 0.0, g_pp)
    };
    let mut report = HorizonReport {
        r_plus: r,
        xi_in_kernel: 0.0,
        kernel_dim_min: usize::MAX,
        kernel_dim_max: 0,
        lie_derivative: 0.0,
        original_chart_xi_in_kernel: 0.0,
        original_chart_lie_derivative: 0.0,
        torsion: 0.0,
        samples: 0,
    };
    let n = 24;
    for i in 0..n {
        let th = 0.1 + (std::f64::consts::PI - 0.2) * i as f64 / (n - 1) as f64;
        for (j, s) in [-1.3, 0.0, 2.1].into_iter().enumerate() {
            let x = Vector3::new(s, th, 0.7 * j as f64 - 0.4);
            let g = horizon_metric(r, a, &x);
            report.xi_in_kernel = report.xi_in_kernel.max((g * xi).amax());
            let sv = g.singular_values();
            let smax = sv.max();
            let dim = sv.iter().filter(|&&v| v <= 1e-12 * smax).count();
            report.kernel_dim_min = report.kernel_dim_min.min(dim);
            report.kernel_dim_max = report.kernel_dim_max.max(dim);
            report.lie_derivative = report
                .lie_derivative
                .max(lie_derivative_fd(|y| horizon_metric(r, a, y), &xi, &x));
            report.original_chart_xi_in_kernel =
                report.original_chart_xi_in_kernel.max((original(&x) * xi_orig).amax());
            report.original_chart_lie_derivative = report
                .original_chart_lie_derivative
                .max(lie_derivative_fd(original, &xi_orig, &x));
            report.torsion = report
                .torsion
                .max(structure_residuals(&geom, &x, &coordinate_probes())?.torsion);
            report.samples += 1;
        }
    }
    Ok((geom, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> GravityParams {
        GravityParams {
            m: 1.0,
            q1: 0.0,
            q2: 0.5,
        }
    }

    #[test]
    fn flat_residuals_vanish() {
        let g = CarrollGeometry::flat();
        let r = structure_residuals(&g, &Vector3::new(0.3, -1.0, 2.0), &coordinate_probes()).unwrap();
        assert!(r.max() < 1e-9, "{r:?}");
    }

    #[test]
    fn flat_with_sources_is_consistent() {
        let g = CarrollGeometry::flat_with_sources(0.3, -0.2, Vector2::new(0.5, 1.0), Vector2::new(-0.7, 0.1));
        let r = structure_residuals(&g, &Vector3::new(0.3, -1.0, 2.0), &coordinate_probes()).unwrap();
        assert!(r.max() < 1e-9, "{r:?}");
    }

    #[test]
    fn antisymmetric_connection_has_torsion() {
        let g = CarrollGeometry::new(
            "perturbed",
            |_| Matrix3::identity(),
            |_| {
                let mut g = [Matrix3::zeros(); 3];
                g[1][(0, 2)] = 1e-3;
                g[1][(2, 0)] = -1e-3;
                g
            },
            ExoticSources::none(),
        );
        let r = structure_residuals(&g, &Vector3::zeros(), &coordinate_probes()).unwrap();
        assert!(r.torsion > 1e-4);
    }

    #[test]
    fn singular_tetrad_rejected() {
        let g = CarrollGeometry::new(
            "bad",
            |_| Matrix3::zeros(),
            |_| [Matrix3::zeros(); 3],
            ExoticSources::none(),
        );
        assert!(matches!(g.cotetrad(&Vector3::zeros()), Err(Error::SingularTetrad(_))));
    }

    #[test]
    fn flat_geodesic_regime() {
        let g = CarrollGeometry::flat();
        let y = GravityState {
            x: Vector3::new(0.0, 1.0, 2.0),
            v: Vector3::new(1.0, 0.3, -0.4),
        };
        let out = eom_gravity(&y, &g, &params()).unwrap();
        let t = out.tangent().unwrap();
        assert_eq!(t.regime, Regime::Geodesic);
        assert_eq!(t.dx, Vector3::new(1.0, 0.0, 0.0));
        assert_eq!(t.dv, Vector3::zeros());
        // theta^0 = ds + v dx in the flat case
        let (cot, _) = particle_frame(&g, &y).unwrap();
        assert_eq!(cot.row(0).transpose(), y.v);
    }

    #[test]
    fn electric_source_drift() {
        let t0 = 0.8;
        let g = CarrollGeometry::flat_with_t(Vector2::new(t0, 0.0), 0.5).unwrap();
        let y = GravityState {
            x: Vector3::zeros(),
            v: Vector3::new(1.0, 0.0, 0.0),
        };
        let out = eom_gravity(&y, &g, &params()).unwrap();
        let t = out.tangent().unwrap();
        assert_eq!(t.regime, Regime::Exotic);
        assert!((t.t - Vector2::new(t0, 0.0)).amax() < 1e-15);
        assert!((t.dx - Vector3::new(1.0, 0.0, -t0)).amax() < 1e-15);
        assert!((t.dv - Vector3::new(0.0, t0, 0.0)).amax() < 1e-15);
    }

    #[test]
    fn schwarzschild_is_round_sphere() {
        let m = 1.3;
        let (_, rep) = kerr_newman_horizon(m, 0.0, 0.0).unwrap();
        assert!((rep.r_plus - 2.0 * m).abs() < 1e-15);
        for th in [0.2, 1.0, 2.5] {
            let g = horizon_metric(rep.r_plus, 0.0, &Vector3::new(0.0, th, 0.0));
            let r2 = 4.0 * m * m;
            assert!((g[(1, 1)] - r2).abs() < 1e-12 * r2);
            assert!((g[(2, 2)] - r2 * th.sin().powi(2)).abs() < 1e-12 * r2);
        }
    }

    #[test]
    fn naked_singularity_rejected() {
        assert!(kerr_newman_horizon(1.0, 0.9, 0.5).is_err());
    }

    #[test]
    fn kerr_newman_structure() {
        let (g, rep) = kerr_newman_horizon(1.0, 0.6, 0.3).unwrap();
        assert_eq!(rep.xi_in_kernel, 0.0);
        assert_eq!((rep.kernel_dim_min, rep.kernel_dim_max), (1, 1));
        assert_eq!(rep.lie_derivative, 0.0);
        assert!(rep.original_chart_xi_in_kernel < 1e-14);
        assert!(rep.torsion < 1e-8, "{}", rep.torsion);
        let r = structure_residuals(&g, &Vector3::new(0.0, 1.1, 0.4), &coordinate_probes()).unwrap();
        assert!(r.max() < 1e-8, "{r:?}");
    }
}
