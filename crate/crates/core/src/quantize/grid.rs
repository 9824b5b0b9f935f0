use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One uniformly sampled axis, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, n: usize) -> Result<Self> {
        let ax = Self { min, max, n };
        ax.validate()?;
        Ok(ax)
    }

    fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite()) || self.max <= self.min {
            return Err(Error::Invalid(format!(
                "axis extent [{}, {}] must be finite with max > min",
                self.min, self.max
            )));
        }
        if self.n < 2 {
            return Err(Error::Invalid(format!("axis needs at least 2 samples, got {}", self.n)));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / (self.n - 1) as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.min + i as f64 * self.spacing()
    }

    /// Continuous index of `x`.
    pub fn index_of(&self, x: f64) -> f64 {
        (x - self.min) / self.spacing()
    }
}

/// A tensor-product grid; node data is stored row-major (last axis fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    axes: Vec<Axis>,
}

impl GridSpec {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::Invalid("grid needs at least one axis".into()));
        }
        for ax in &axes {
            ax.validate()?;
        }
        Ok(Self { axes })
    }

    /// Square grid `[-half, half]^d` with `n` samples per axis.
    pub fn cube(d: usize, half: f64, n: usize) -> Result<Self> {
        Self::new(vec![Axis::new(-half, half, n)?; d])
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.n).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> Vec<f64> {
        self.axes.iter().map(Axis::spacing).collect()
    }

    pub(crate) fn strides(&self) -> Vec<usize> {
        let mut st = vec![1; self.dim()];
        for k in (0..self.dim().saturating_sub(1)).rev() {
            st[k] = st[k + 1] * self.axes[k + 1].n;
        }
        st
    }

    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        let mut rem = flat;
        let mut idx = vec![0; self.dim()];
        for k in (0..self.dim()).rev() {
            idx[k] = rem % self.axes[k].n;
            rem /= self.axes[k].n;
        }
        idx
    }

    pub fn node(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat)
            .iter()
            .zip(&self.axes)
            .map(|(&i, ax)| ax.coord(i))
            .collect()
    }

    /// Trapezoidal quadrature weight of a node.
    pub fn weight(&self, flat: usize) -> f64 {
        self.multi_index(flat)
            .iter()
            .zip(&self.axes)
            .map(|(&i, ax)| {
                let h = ax.spacing();
                if i == 0 || i == ax.n - 1 {
                    0.5 * h
                } else {
                    h
                }
            })
            .product()
    }

    /// Whether `x` lies in the closed grid box.
    pub fn contains(&self, x: &[f64]) -> bool {
        const SLACK: f64 = 1e-9;
        x.iter().zip(&self.axes).all(|(&xi, ax)| {
            let t = ax.index_of(xi);
            t >= -SLACK && t <= (ax.n - 1) as f64 + SLACK
        })
    }
}

/// Scheme used to evaluate sampled profiles off the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    Multilinear,
    #[default]
    CubicBspline,
}

/// A sampled profile prepared for off-grid evaluation.
pub(crate) struct Interpolant<'a> {
    grid: &'a GridSpec,
    scheme: Interpolation,
    coeffs: Vec<Complex64>,
    strides: Vec<usize>,
}

const POLE: f64 = -0.267_949_192_431_122_7; // sqrt(3) - 2

fn mirror(k: isize, n: usize) -> usize {
    let n = n as isize;
    if n == 1 {
        return 0;
    }
    let period = 2 * (n - 1);
    let mut k = k.rem_euclid(period);
    if k >= n {
        k = period - k;
    }
    k as usize
}

/// In-place cubic B-spline prefilter on one line with mirror boundaries.
fn prefilter_line(c: &mut [Complex64]) {
    let n = c.len();
    if n < 2 {
        return;
    }
    let z = POLE;
    let gain = (1.0 - z) * (1.0 - 1.0 / z);
    for v in c.iter_mut() {
        *v *= gain;
    }
    // causal initialisation, exact mirror sum or truncated when it converged
    let horizon = (f64::EPSILON.ln() / z.abs().ln()).ceil() as usize;
    if horizon < n {
        let mut zn = z;
        let mut sum = c[0];
        for v in c.iter().take(horizon).skip(1) {
            sum += v * zn;
            zn *= z;
        }
        c[0] = sum;
    } else {
        let mut zn = z;
        let iz = 1.0 / z;
        let mut z2n = z.powi(n as i32 - 1);
        let mut sum = c[0] + c[n - 1] * z2n;
        z2n *= z2n * iz;
        for v in c.iter().take(n - 1).skip(1) {
            sum += v * (zn + z2n);
            zn *= z;
            z2n *= iz;
        }
        c[0] = sum / (1.0 - zn * zn);
    }
    for k in 1..n {
        let prev = c[k - 1];
        c[k] += prev * z;
    }
    c[n - 1] = (c[n - 2] * z + c[n - 1]) * (z / (z * z - 1.0));
    for k in (0..n - 1).rev() {
        let next = c[k + 1];
        c[k] = (next - c[k]) * z;
    }
}

fn bspline_weights(w: f64) -> [f64; 4] {
    let u = 1.0 - w;
    [
        u * u * u / 6.0,
        2.0 / 3.0 - w * w + 0.5 * w * w * w,
        2.0 / 3.0 - u * u + 0.5 * u * u * u,
        w * w * w / 6.0,
    ]
}

impl<'a> Interpolant<'a> {
    pub(crate) fn new(grid: &'a GridSpec, values: &[Complex64], scheme: Interpolation) -> Self {
        let strides = grid.strides();
        let mut coeffs = values.to_vec();
        if scheme == Interpolation::CubicBspline {
            let mut line = Vec::new();
            for (k, ax) in grid.axes().iter().enumerate() {
                let st = strides[k];
                for start in 0..grid.len() {
                    // visit each line once, from its first node
                    if !(start / st).is_multiple_of(ax.n) {
                        continue;
                    }
                    line.clear();
                    line.extend((0..ax.n).map(|i| coeffs[start + i * st]));
                    prefilter_line(&mut line);
                    for (i, v) in line.iter().enumerate() {
                        coeffs[start + i * st] = *v;
                    }
                }
            }
        }
        Self {
            grid,
            scheme,
            coeffs,
            strides,
        }
    }

    /// Value at `x`, zero outside the grid box.
    pub(crate) fn eval(&self, x: &[f64]) -> Complex64 {
        if !self.grid.contains(x) {
            return Complex64::new(0.0, 0.0);
        }
        let d = self.grid.dim();
        let axes = self.grid.axes();
        let (width, offset) = match self.scheme {
            Interpolation::Multilinear => (2usize, 0isize),
            Interpolation::CubicBspline => (4usize, 1isize),
        };
        let mut base = Vec::with_capacity(d);
        let mut weights = Vec::with_capacity(d);
        for (k, ax) in axes.iter().enumerate() {
            let t = ax.index_of(x[k]).clamp(0.0, (ax.n - 1) as f64);
            let mut i0 = t.floor();
            if i0 as usize >= ax.n - 1 {
                i0 = (ax.n - 2) as f64;
            }
            let w = t - i0;
            base.push(i0 as isize - offset);
            weights.push(match self.scheme {
                Interpolation::Multilinear => [1.0 - w, w, 0.0, 0.0],
                Interpolation::CubicBspline => bspline_weights(w),
            });
        }
        let mut acc = Complex64::new(0.0, 0.0);
        let total = width.pow(d as u32);
        for combo in 0..total {
            let mut rem = combo;
            let mut flat = 0;
            let mut wt = 1.0;
            for k in (0..d).rev() {
                let j = rem % width;
                rem /= width;
                flat += mirror(base[k] + j as isize, axes[k].n) * self.strides[k];
                wt *= weights[k][j];
            }
            acc += self.coeffs[flat] * wt;
        }
        acc
    }
}
