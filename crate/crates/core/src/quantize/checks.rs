use num_complex::Complex64;
use serde::Serialize;

use super::wave::{Polarization, WaveFunction};
use crate::error::{Error, Result};

/// Default step of the finite-difference `s` derivative.
pub const FD_DS: f64 = 1e-4;

/// `|(-i hbar d/ds - m) Psi|` maximised over grid nodes and `s` samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CarrollResidual {
    /// Derivative taken from the phase rate.
    pub analytic: f64,
    /// Central difference in `s`.
    pub finite_difference: f64,
}

impl CarrollResidual {
    pub fn max(&self) -> f64 {
        self.analytic.max(self.finite_difference)
    }
}

pub fn carroll_residual(psi: &WaveFunction, s_samples: &[f64]) -> CarrollResidual {
    carroll_residual_with(psi, s_samples, FD_DS)
}

pub fn carroll_residual_with(psi: &WaveFunction, s_samples: &[f64], ds: f64) -> CarrollResidual {
    let (m, hbar) = (psi.m(), psi.hbar());
    let i = Complex64::i();
    let mut analytic: f64 = 0.0;
    let mut fd: f64 = 0.0;
    for node in 0..psi.grid().len() {
        let amp = psi.profile_at(node).norm();
        analytic = analytic.max((hbar * psi.phase_rate() - m).abs() * amp);
        for &s in s_samples {
            let dpsi = (psi.value(node, s + ds, None) - psi.value(node, s - ds, None)) / (2.0 * ds);
            let r = -i * hbar * dpsi - psi.value(node, s, None) * m;
            fd = fd.max(r.norm());
        }
    }
    CarrollResidual {
        analytic,
        finite_difference: fd,
    }
}

/// Largest change of `|Psi|^2` at a fixed node across the `s` samples.
pub fn density_drift(psi: &WaveFunction, s_samples: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for node in 0..psi.grid().len() {
        let rho: Vec<f64> = s_samples.iter().map(|&s| psi.value(node, s, None).norm_sqr()).collect();
        let lo = rho.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = rho.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !rho.is_empty() {
            worst = worst.max(hi - lo);
        }
    }
    worst
}

/// Residuals of `((1/C^2) Lap - d_s^2 - m^2/hbar^2) Psi` along a sequence of `C`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KgReport {
    pub c_values: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Ratio of consecutive residuals, rescaled to one decade of `C`.
    pub decade_ratios: Vec<f64>,
    /// Residual of the limiting equation `(d_s^2 + m^2/hbar^2) Psi = 0`.
    pub limit_residual: f64,
}

/// Discrete Laplacian of the profile on interior nodes (3-point stencil per axis).
pub fn laplacian(psi: &WaveFunction) -> Vec<Option<Complex64>> {
    let grid = psi.grid();
    let st = grid.strides();
    let h = grid.spacing();
    let phi = psi.profile();
    (0..grid.len())
        .map(|flat| {
            let idx = grid.multi_index(flat);
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, ax) in grid.axes().iter().enumerate() {
                if idx[k] == 0 || idx[k] + 1 == ax.n {
                    return None;
                }
                acc += (phi[flat + st[k]] - phi[flat] * 2.0 + phi[flat - st[k]]) / (h[k] * h[k]);
            }
            Some(acc)
        })
        .collect()
}

pub fn kg_limit_check(psi: &WaveFunction, c_values: &[f64]) -> Result<KgReport> {
    if psi.polarization() != Polarization::Position {
        return Err(Error::Invalid(
            "the Klein-Gordon check needs a position-polarized wave function".into(),
        ));
    }
    if c_values.is_empty() || c_values.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
        return Err(Error::Invalid("light speeds must be positive and finite".into()));
    }
    if c_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid("light speeds must be strictly increasing".into()));
    }
    let mass_term = psi.phase_rate().powi(2) - (psi.m() / psi.hbar()).powi(2);
    let lap = laplacian(psi);
    let phi = psi.profile();
    let residual_at = |inv_c2: f64| {
        lap.iter()
            .zip(&phi)
            .filter_map(|(l, p)| l.map(|l| (l * inv_c2 + p * mass_term).norm()))
            .fold(0.0, f64::max)
    };
    let residuals: Vec<f64> = c_values.iter().map(|c| residual_at(1.0 / (c * c))).collect();
    let decade_ratios = c_values
        .windows(2)
        .zip(residuals.windows(2))
        .map(|(c, r)| (r[0] / r[1]).powf(1.0 / (c[1] / c[0]).log10()))
        .collect();
    Ok(KgReport {
        c_values: c_values.to_vec(),
        residuals,
        decade_ratios,
        limit_residual: residual_at(0.0),
    })
}

/// The prequantum 1-form `alpha = <p, dx>/hbar + dz/(iz)` at a point of `Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrequantumAlpha {
    pub dx: Vec<f64>,
    pub dp: Vec<f64>,
    /// Coefficient of `dz`, equal to `1/(iz)`.
    pub dz: Complex64,
}

impl PrequantumAlpha {
    /// Pairing with a tangent vector `(dx, dp, dz)`; `dz` must be tangent to the circle.
    pub fn apply(&self, vx: &[f64], vp: &[f64], vz: Complex64) -> f64 {
        let lin: f64 = self.dx.iter().zip(vx).map(|(a, b)| a * b).sum::<f64>()
            + self.dp.iter().zip(vp).map(|(a, b)| a * b).sum::<f64>();
        lin + (self.dz * vz).re
    }
}

/// Relative tolerance on `|z| = 1`.
pub const CIRCLE_TOL: f64 = 1e-12;

pub fn prequantum_alpha(x: &[f64], p: &[f64], z: Complex64, hbar: f64) -> Result<PrequantumAlpha> {
    if x.len() != p.len() {
        return Err(Error::Dimension {
            what: "momentum",
            expected: x.len(),
            got: p.len(),
        });
    }
    if (z.norm() - 1.0).abs() > CIRCLE_TOL {
        return Err(Error::Invalid(format!(
            "fiber coordinate must satisfy |z| = 1, got |z| = {}",
            z.norm()
        )));
    }
    if !(hbar.is_finite() && hbar > 0.0) {
        return Err(Error::Invalid(format!("hbar must be positive, got {hbar}")));
    }
    Ok(PrequantumAlpha {
        dx: p.iter().map(|pi| pi / hbar).collect(),
        dp: vec![0.0; p.len()],
        dz: 1.0 / (Complex64::i() * z),
    })
}

/// A point of `Y` in the chart `(x, p, theta)` with `z = exp(i theta)`.
fn alpha_chart(y: &[f64], d: usize, hbar: f64) -> Vec<f64> {
    let z = Complex64::from_polar(1.0, y[2 * d]);
    let a = prequantum_alpha(&y[..d], &y[d..2 * d], z, hbar).expect("chart point is on the circle");
    let mut out = Vec::with_capacity(2 * d + 1);
    out.extend_from_slice(&a.dx);
    out.extend_from_slice(&a.dp);
    out.push(a.apply(&vec![0.0; d], &vec![0.0; d], Complex64::i() * z));
    out
}

/// Largest `|d alpha(X, Y) - omega(X, Y)/hbar|` over coordinate bivectors and
/// the supplied probes, with `d alpha` from central differences of the chart
/// components.
pub fn d_alpha_residual(x: &[f64], p: &[f64], theta: f64, hbar: f64, probes: &[(Vec<f64>, Vec<f64>)]) -> Result<f64> {
    let d = x.len();
    prequantum_alpha(x, p, Complex64::from_polar(1.0, theta), hbar)?;
    let n = 2 * d + 1;
    let mut y0 = x.to_vec();
    y0.extend_from_slice(p);
    y0.push(theta);
    let h = 1e-5;
    // jac[i][j] = d alpha_j / d y_i
    let mut jac = vec![vec![0.0; n]; n];
    for (i, row) in jac.iter_mut().enumerate() {
        let mut yp = y0.clone();
        let mut ym = y0.clone();
        yp[i] += h;
        ym[i] -= h;
        let (ap, am) = (alpha_chart(&yp, d, hbar), alpha_chart(&ym, d, hbar));
        for j in 0..n {
            row[j] = (ap[j] - am[j]) / (2.0 * h);
        }
    }
    let dalpha = |u: &[f64], w: &[f64]| {
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (jac[i][j] - jac[j][i]) * u[i] * w[j];
            }
        }
        acc
    };
    // omega = dp ^ dx
    let omega = |u: &[f64], w: &[f64]| (0..d).map(|k| u[d + k] * w[k] - w[d + k] * u[k]).sum::<f64>();
    let mut worst: f64 = 0.0;
    let unit = |i: usize| {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        e
    };
    for i in 0..n {
        for j in 0..n {
            let (u, w) = (unit(i), unit(j));
            worst = worst.max((dalpha(&u, &w) - omega(&u, &w) / hbar).abs());
        }
    }
    for (u, w) in probes {
        if u.len() != n || w.len() != n {
            return Err(Error::Dimension {
                what: "probe vector",
                expected: n,
                got: u.len().min(w.len()),
            });
        }
        worst = worst.max((dalpha(u, w) - omega(u, w) / hbar).abs());
    }
    Ok(worst)
}

/// Pulls `hbar * alpha` back along `(x, p, s) -> (x, p, exp(i m s/hbar))` and
/// returns the largest deviation from `<p, dx> + m ds`.
pub fn alpha_pullback_residual(x: &[f64], p: &[f64], s: f64, m: f64, hbar: f64) -> Result<f64> {
    let d = x.len();
    let z = |s: f64| Complex64::from_polar(1.0, m * s / hbar);
    let a = prequantum_alpha(x, p, z(s), hbar)?;
    let zero = vec![0.0; d];
    let mut worst: f64 = 0.0;
    for k in 0..d {
        let mut e = zero.clone();
        e[k] = 1.0;
        worst = worst.max((hbar * a.apply(&e, &zero, Complex64::new(0.0, 0.0)) - p[k]).abs());
        worst = worst.max((hbar * a.apply(&zero, &e, Complex64::new(0.0, 0.0))).abs());
    }
    let h = 1e-5;
    let dz = (z(s + h) - z(s - h)) / (2.0 * h);
    worst = worst.max((hbar * a.apply(&zero, &zero, dz) - m).abs());
    Ok(worst)
}

/// Trapezoidal line integral of `alpha` along `s -> (x, p, exp(i m s/hbar))`.
pub fn alpha_fiber_integral(x: &[f64], p: &[f64], m: f64, hbar: f64, s0: f64, s1: f64, n: usize) -> Result<f64> {
    let n = n.max(1);
    let h = (s1 - s0) / n as f64;
    let rate = m / hbar;
    let zero = vec![0.0; x.len()];
    let mut total = 0.0;
    for k in 0..=n {
        let s = s0 + k as f64 * h;
        let z = Complex64::from_polar(1.0, rate * s);
        let a = prequantum_alpha(x, p, z, hbar)?;
        let val = a.apply(&zero, &zero, Complex64::i() * z * rate);
        let w = if k == 0 || k == n { 0.5 } else { 1.0 };
        total += w * h * val;
    }
    Ok(total)
}

/// Largest derivative of the full wave function along the horizontal lift of
/// the polarization, normalised by the largest `|Psi|`.
///
/// Position: along `d/dp_i`. Momentum: along `d/dx_i - (p_i/m) d/ds`.
pub fn polarization_residual(psi: &WaveFunction, x_probe: &[f64], s: f64, h: f64) -> Result<f64> {
    let d = psi.grid().dim();
    if x_probe.len() != d {
        return Err(Error::Dimension {
            what: "x probe",
            expected: d,
            got: x_probe.len(),
        });
    }
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for node in 0..psi.grid().len() {
        let here = psi.value(node, s, Some(x_probe));
        scale = scale.max(here.norm());
        for k in 0..d {
            let deriv = match psi.polarization() {
                // the position wave function has no p argument at all
                Polarization::Position => {
                    let f = |_dp: f64| psi.value(node, s, None);
                    (f(h) - f(-h)) / (2.0 * h)
                }
                Polarization::Momentum => {
                    if psi.m() == 0.0 {
                        return Err(Error::Invalid("momentum polarization needs m != 0".into()));
                    }
                    let pk = psi.grid().node(node)[k];
                    let f = |t: f64| {
                        let mut x = x_probe.to_vec();
                        x[k] += t;
                        psi.value(node, s - t * pk / psi.m(), Some(&x))
                    };
                    (f(h) - f(-h)) / (2.0 * h)
                }
            };
            worst = worst.max(deriv.norm());
        }
    }
    Ok(if scale > 0.0 { worst / scale } else { worst })
}
