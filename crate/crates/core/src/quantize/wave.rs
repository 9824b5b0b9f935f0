use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::{GridSpec, Interpolant, Interpolation};
use crate::error::{Error, Result};
use crate::lie::GroupElement;

/// Which half of phase space the profile lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarization {
    Position,
    Momentum,
}

/// Exact plane-wave factor `exp(i(<k, y> + theta))` multiplying the sampled envelope.
///
/// Group actions only ever multiply a profile by such factors, so keeping them
/// symbolic means interpolation only sees the smooth envelope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Carrier {
    pub k: Vec<f64>,
    pub theta: f64,
}

impl Carrier {
    pub fn trivial(d: usize) -> Self {
        Self {
            k: vec![0.0; d],
            theta: 0.0,
        }
    }

    pub fn at(&self, y: &[f64]) -> Complex64 {
        let ph: f64 = self.k.iter().zip(y).map(|(k, y)| k * y).sum::<f64>() + self.theta;
        Complex64::from_polar(1.0, ph)
    }
}

/// A Carroll wave function in separated form: `exp(i rate s)` times a spatial profile.
///
/// The profile on the grid is `carrier(y) * envelope(y)` with `y = x` in the
/// position polarization and `y = p` in the momentum polarization. The phase
/// rate is `m / hbar` for genuine solutions; other values are allowed so that
/// wrong-phase states can be built and detected.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    polarization: Polarization,
    m: f64,
    hbar: f64,
    phase_rate: f64,
    grid: GridSpec,
    envelope: Vec<Complex64>,
    carrier: Carrier,
}

impl WaveFunction {
    pub fn new(polarization: Polarization, m: f64, hbar: f64, grid: GridSpec, profile: Vec<Complex64>) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::Invalid(format!("mass must be finite, got {m}")));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::Invalid(format!("hbar must be positive, got {hbar}")));
        }
        if profile.len() != grid.len() {
            return Err(Error::Dimension {
                what: "profile samples",
                expected: grid.len(),
                got: profile.len(),
            });
        }
        if profile.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Invalid("profile has non-finite samples".into()));
        }
        let d = grid.dim();
        Ok(Self {
            polarization,
            m,
            hbar,
            phase_rate: m / hbar,
            grid,
            envelope: profile,
            carrier: Carrier::trivial(d),
        })
    }

    /// Samples `f` on every grid node.
    pub fn from_fn(
        polarization: Polarization,
        m: f64,
        hbar: f64,
        grid: GridSpec,
        f: impl Fn(&[f64]) -> Complex64,
    ) -> Result<Self> {
        let profile = (0..grid.len()).map(|i| f(&grid.node(i))).collect();
        Self::new(polarization, m, hbar, grid, profile)
    }

    /// Normalized isotropic Gaussian `exp(-|y - center|^2 / (2 width^2))`.
    pub fn gaussian(
        polarization: Polarization,
        m: f64,
        hbar: f64,
        grid: GridSpec,
        center: &[f64],
        width: f64,
    ) -> Result<Self> {
        if center.len() != grid.dim() {
            return Err(Error::Dimension {
                what: "gaussian center",
                expected: grid.dim(),
                got: center.len(),
            });
        }
        let c = center.to_vec();
        let psi = Self::from_fn(polarization, m, hbar, grid, move |y| {
            let r2: f64 = y.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum();
            Complex64::new((-0.5 * r2 / (width * width)).exp(), 0.0)
        })?;
        let n = psi.l2_norm();
        Ok(psi.scaled(1.0 / n))
    }

    /// Overrides the `s` phase rate.
    pub fn with_phase_rate(mut self, rate: f64) -> Self {
        self.phase_rate = rate;
        self
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        for v in &mut self.envelope {
            *v *= factor;
        }
        self
    }

    pub fn polarization(&self) -> Polarization {
        self.polarization
    }
    pub fn m(&self) -> f64 {
        self.m
    }
    pub fn hbar(&self) -> f64 {
        self.hbar
    }
    pub fn phase_rate(&self) -> f64 {
        self.phase_rate
    }
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }
    pub fn carrier(&self) -> &Carrier {
        &self.carrier
    }
    pub fn envelope(&self) -> &[Complex64] {
        &self.envelope
    }

    /// Profile value at a grid node.
    pub fn profile_at(&self, node: usize) -> Complex64 {
        self.carrier.at(&self.grid.node(node)) * self.envelope[node]
    }

    /// Sampled profile `phi` on every node.
    pub fn profile(&self) -> Vec<Complex64> {
        (0..self.grid.len()).map(|i| self.profile_at(i)).collect()
    }

    /// Full wave function at `(node, s)`.
    ///
    /// In the momentum polarization the node is `p` and `x` supplies the
    /// `exp(i<p, x>/hbar)` factor; it is ignored in the position polarization.
    pub fn value(&self, node: usize, s: f64, x: Option<&[f64]>) -> Complex64 {
        let base = Complex64::from_polar(1.0, self.phase_rate * s) * self.profile_at(node);
        match (self.polarization, x) {
            (Polarization::Momentum, Some(x)) => {
                let p = self.grid.node(node);
                let px: f64 = p.iter().zip(x).map(|(a, b)| a * b).sum();
                base * Complex64::from_polar(1.0, px / self.hbar)
            }
            _ => base,
        }
    }

    /// Trapezoidal L2 norm of the profile over the grid.
    pub fn l2_norm(&self) -> f64 {
        (0..self.grid.len())
            .map(|i| self.grid.weight(i) * self.envelope[i].norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `||self - other|| / ||other||` for profiles on the same grid.
    pub fn relative_l2_error(&self, other: &Self) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::Invalid("wave functions live on different grids".into()));
        }
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..self.grid.len() {
            let w = self.grid.weight(i);
            let b = other.profile_at(i);
            num += w * (self.profile_at(i) - b).norm_sqr();
            den += w * b.norm_sqr();
        }
        Ok((num / den.max(f64::MIN_POSITIVE)).sqrt())
    }

    /// Writes `y_1, .., y_d, re, im` rows.
    pub fn to_csv(&self) -> String {
        let d = self.grid.dim();
        let sym = match self.polarization {
            Polarization::Position => "x",
            Polarization::Momentum => "p",
        };
        let mut out = String::new();
        let cols: Vec<String> = (1..=d).map(|k| format!("{sym}{k}")).collect();
        let _ = writeln!(out, "{},re,im", cols.join(","));
        for i in 0..self.grid.len() {
            let v = self.profile_at(i);
            for y in self.grid.node(i) {
                let _ = write!(out, "{y:?},");
            }
            let _ = writeln!(out, "{:?},{:?}", v.re, v.im);
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Result of a group action on a sampled wave function.
#[derive(Debug, Clone)]
pub struct Transformed {
    pub psi: WaveFunction,
    /// Fraction of the squared norm whose image left the grid.
    pub clipped_mass: f64,
    pub warning: Option<String>,
}

/// Default clipped-mass fraction above which a warning is attached.
pub const CLIP_MARGIN: f64 = 1e-10;

fn check_plain(a: &GroupElement, psi: &WaveFunction) -> Result<()> {
    if a.a1() != 0.0 || a.a2() != 0.0 {
        return Err(Error::Invalid(format!(
            "representation needs a plain Carroll element, got central parameters ({}, {})",
            a.a1(),
            a.a2()
        )));
    }
    let d = a.kind().spatial_dim();
    if psi.grid.dim() != d {
        return Err(Error::Dimension {
            what: "grid dimension",
            expected: d,
            got: psi.grid.dim(),
        });
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Pulls the envelope back along `y -> A^T (y - shift)` and accounts for lost mass.
fn pullback(
    psi: &WaveFunction,
    a: &GroupElement,
    shift: &DVector<f64>,
    scheme: Interpolation,
) -> (Vec<Complex64>, f64) {
    let grid = &psi.grid;
    let at = a.rot().transpose();
    let it = Interpolant::new(grid, &psi.envelope, scheme);
    let env = (0..grid.len())
        .map(|i| {
            let y = DVector::from_vec(grid.node(i));
            let src = &at * (y - shift);
            it.eval(src.as_slice())
        })
        .collect();
    let mut lost = 0.0;
    let mut total = 0.0;
    for i in 0..grid.len() {
        let w = grid.weight(i) * psi.envelope[i].norm_sqr();
        total += w;
        let img = a.rot() * DVector::from_vec(grid.node(i)) + shift;
        if !grid.contains(img.as_slice()) {
            lost += w;
        }
    }
    (env, if total > 0.0 { lost / total } else { 0.0 })
}

fn finish(mut psi: WaveFunction, env: Vec<Complex64>, carrier: Carrier, clipped: f64, margin: f64) -> Transformed {
    psi.envelope = env;
    psi.carrier = carrier;
    let warning = (clipped > margin).then(|| {
        format!("transformed support leaves the grid: clipped mass fraction {clipped:.3e} exceeds margin {margin:.1e}")
    });
    Transformed {
        psi,
        clipped_mass: clipped,
        warning,
    }
}

/// Position representation: `phi'(x) = exp(i m/hbar (<b, x - c> - f)) phi(A^T (x - c))`.
pub fn rep_position(a: &GroupElement, psi: &WaveFunction) -> Result<Transformed> {
    rep_position_with(a, psi, Interpolation::default(), CLIP_MARGIN)
}

pub fn rep_position_with(
    a: &GroupElement,
    psi: &WaveFunction,
    scheme: Interpolation,
    margin: f64,
) -> Result<Transformed> {
    check_plain(a, psi)?;
    if psi.polarization != Polarization::Position {
        return Err(Error::Invalid(
            "rep_position needs a position-polarized wave function".into(),
        ));
    }
    let kappa = psi.m / psi.hbar;
    let (b, c) = (a.boost_part(), a.translation_part());
    let ak = a.rot() * DVector::from_column_slice(&psi.carrier.k);
    let k = (b * kappa + &ak).as_slice().to_vec();
    let theta = psi.carrier.theta - kappa * (b.dot(c) + a.time_shift()) - ak.dot(c);
    let (env, clipped) = pullback(psi, a, c, scheme);
    Ok(finish(psi.clone(), env, Carrier { k, theta }, clipped, margin))
}

/// Momentum representation: `phi'(p) = exp(-i m f/hbar) exp(-i <p, c>/hbar) phi(A^T (p - m b))`.
pub fn rep_momentum(a: &GroupElement, psi: &WaveFunction) -> Result<Transformed> {
    rep_momentum_with(a, psi, Interpolation::default(), CLIP_MARGIN)
}

pub fn rep_momentum_with(
    a: &GroupElement,
    psi: &WaveFunction,
    scheme: Interpolation,
    margin: f64,
) -> Result<Transformed> {
    check_plain(a, psi)?;
    if psi.polarization != Polarization::Momentum {
        return Err(Error::Invalid(
            "rep_momentum needs a momentum-polarized wave function".into(),
        ));
    }
    let (m, hbar) = (psi.m, psi.hbar);
    let (b, c) = (a.boost_part(), a.translation_part());
    let ak = a.rot() * DVector::from_column_slice(&psi.carrier.k);
    let k = (&ak - c / hbar).as_slice().to_vec();
    let mb = b * m;
    let theta = psi.carrier.theta - m * a.time_shift() / hbar - dot(ak.as_slice(), mb.as_slice());
    let (env, clipped) = pullback(psi, a, &mb, scheme);
    Ok(finish(psi.clone(), env, Carrier { k, theta }, clipped, margin))
}

/// Dispatches on the polarization of `psi`.
pub fn rep(a: &GroupElement, psi: &WaveFunction) -> Result<Transformed> {
    match psi.polarization {
        Polarization::Position => rep_position(a, psi),
        Polarization::Momentum => rep_momentum(a, psi),
    }
}
