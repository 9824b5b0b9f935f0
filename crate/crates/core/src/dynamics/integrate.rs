use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DVector;

use super::eom::{eom, EomOutcome, Tangent};
use super::scenario::{EvolutionPoint, Scenario, ScenarioKind};
use crate::coadjoint::moment_map;
use crate::error::{Error, Result};
use crate::lie::cross3;

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub s: f64,
    pub point: EvolutionPoint,
    pub conserved: Vec<f64>,
}

/// Integrated trajectory with its conserved-quantity log.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub scenario: ScenarioKind,
    pub step: f64,
    pub method: &'static str,
    pub conserved_names: Vec<String>,
    pub samples: Vec<Sample>,
    /// Set when the run stopped early.
    pub diagnostic: Option<String>,
}

impl Trajectory {
    pub fn is_truncated(&self) -> bool {
        self.diagnostic.is_some()
    }

    pub fn last(&self) -> &Sample {
        self.samples
            .last()
            .expect("a trajectory has at least its initial sample")
    }

    /// Largest deviation of a logged column from its initial value.
    pub fn conserved_drift(&self, name: &str) -> Option<f64> {
        let k = self.conserved_names.iter().position(|n| n == name)?;
        let c0 = self.samples[0].conserved[k];
        Some(
            self.samples
                .iter()
                .map(|smp| (smp.conserved[k] - c0).abs())
                .fold(0.0, f64::max),
        )
    }

    /// Largest deviation over every moment-map column.
    pub fn max_moment_drift(&self) -> f64 {
        self.conserved_names
            .iter()
            .filter(|n| n.starts_with("l") || n.starts_with("g") || n.starts_with("p"))
            .filter_map(|n| self.conserved_drift(n))
            .fold(0.0, f64::max)
    }

    /// Any CSV column by header name.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.csv_header().iter().position(|n| n == name)?;
        Some(self.samples.iter().map(|smp| Self::row(smp)[k]).collect())
    }

    fn row(smp: &Sample) -> Vec<f64> {
        let p = &smp.point;
        let mut row: Vec<f64> = vec![smp.s];
        row.extend(p.x().iter());
        row.extend(p.v().iter());
        if let Some((w, z)) = p.fiber() {
            row.push(w);
            row.push(z);
        }
        if let Some(u) = p.u() {
            row.extend(u.iter());
        }
        row.extend(smp.conserved.iter());
        row
    }

    pub fn csv_header(&self) -> Vec<String> {
        let d = self.scenario.spatial_dim();
        let mut h = vec!["s".to_string()];
        h.extend((1..=d).map(|i| format!("x{i}")));
        h.extend((1..=d).map(|i| format!("v{i}")));
        if self.scenario.is_planar() {
            h.push("w".into());
            h.push("z".into());
        }
        if self.scenario.has_spin() {
            h.extend(["u1", "u2", "u3"].map(String::from));
        }
        h.extend(self.conserved_names.iter().cloned());
        h
    }

    /// CSV text; floats use the shortest round-trip representation.
    pub fn to_csv(&self) -> String {
        let mut out = self.csv_header().join(",");
        out.push('\n');
        for smp in &self.samples {
            for (k, val) in Self::row(smp).iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{val:?}");
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

struct Logger {
    names: Vec<String>,
    moment: bool,
    spin: bool,
    precession: bool,
    u0_perp: Option<DVector<f64>>,
    angle: f64,
    last_raw: f64,
}

impl Logger {
    fn new(scenario: &Scenario) -> Self {
        let kind = scenario.kind();
        let mut names = Vec::new();
        let moment = kind.is_free();
        if moment {
            let d = kind.spatial_dim();
            let r = d * (d - 1) / 2;
            if r == 1 {
                names.push("l".to_string());
            } else {
                names.extend((1..=r).map(|i| format!("l{i}")));
            }
            names.extend((1..=d).map(|i| format!("g{i}")));
            names.extend((1..=d).map(|i| format!("p{i}")));
        }
        let spin = kind.has_spin();
        if spin {
            names.push("u_norm_drift".into());
        }
        let precession = kind == ScenarioKind::EM3DSpin;
        if precession {
            names.push("u_dot_bhat".into());
            names.push("precession_angle".into());
        }
        Self {
            names,
            moment,
            spin,
            precession,
            u0_perp: None,
            angle: 0.0,
            last_raw: 0.0,
        }
    }

    fn record(&mut self, y: &EvolutionPoint, scenario: &Scenario, norm_drift: f64) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.names.len());
        if self.moment {
            let mu = moment_map(y, scenario)?;
            out.extend(mu.l().iter());
            out.extend(mu.g().iter());
            out.extend(mu.p().iter());
        }
        if self.spin {
            out.push(norm_drift);
        }
        if self.precession {
            let u = y.u().expect("spin layout");
            let (_, b) = scenario.fields_at(y.x(), y.s());
            let bn = b.norm();
            if bn == 0.0 {
                out.push(0.0);
                out.push(0.0);
            } else {
                let bhat = b / bn;
                let ub = u.dot(&bhat);
                let perp = u - &bhat * ub;
                out.push(ub);
                let angle = match &self.u0_perp {
                    None => {
                        self.u0_perp = Some(perp);
                        0.0
                    }
                    Some(p0) => {
                        let raw = cross3(p0, &perp).dot(&bhat).atan2(p0.dot(&perp));
                        let mut delta = raw - self.last_raw;
                        if delta > std::f64::consts::PI {
                            delta -= 2.0 * std::f64::consts::PI;
                        } else if delta < -std::f64::consts::PI {
                            delta += 2.0 * std::f64::consts::PI;
                        }
                        self.last_raw = raw;
                        self.angle += delta;
                        self.angle
                    }
                };
                out.push(angle);
            }
        }
        Ok(out)
    }
}

fn add_scaled(y: &EvolutionPoint, t: &Tangent, h: f64, s: f64) -> EvolutionPoint {
    let u = match (y.u(), &t.du) {
        (Some(u), Some(du)) => Some(u + du * h),
        (u, _) => u.cloned(),
    };
    y.moved(y.x() + &t.dx * h, y.v() + &t.dv * h, s, u)
}

fn tangent_at(y: &EvolutionPoint, scenario: &Scenario) -> Result<std::result::Result<Tangent, String>> {
    Ok(match eom(y, scenario)? {
        EomOutcome::Regular(t) => Ok(t),
        EomOutcome::Degenerate(reason) => Err(reason),
    })
}

/// One classical RK4 step in `s`, without renormalizing `u`.
pub fn rk4_step(
    y: &EvolutionPoint,
    scenario: &Scenario,
    h: f64,
) -> Result<std::result::Result<EvolutionPoint, String>> {
    let s = y.s();
    let k1 = match tangent_at(y, scenario)? {
        Ok(t) => t,
        Err(e) => return Ok(Err(e)),
    };
    let y2 = add_scaled(y, &k1, 0.5 * h, s + 0.5 * h);
    let k2 = match tangent_at(&y2, scenario)? {
        Ok(t) => t,
        Err(e) => return Ok(Err(e)),
    };
    let y3 = add_scaled(y, &k2, 0.5 * h, s + 0.5 * h);
    let k3 = match tangent_at(&y3, scenario)? {
        Ok(t) => t,
        Err(e) => return Ok(Err(e)),
    };
    let y4 = add_scaled(y, &k3, h, s + h);
    let k4 = match tangent_at(&y4, scenario)? {
        Ok(t) => t,
        Err(e) => return Ok(Err(e)),
    };
    let w = h / 6.0;
    let comb = |a: &DVector<f64>, b: &DVector<f64>, c: &DVector<f64>, d: &DVector<f64>| (a + b * 2.0 + c * 2.0 + d) * w;
    let x = y.x() + comb(&k1.dx, &k2.dx, &k3.dx, &k4.dx);
    let v = y.v() + comb(&k1.dv, &k2.dv, &k3.dv, &k4.dv);
    let u = match (y.u(), &k1.du, &k2.du, &k3.du, &k4.du) {
        (Some(u), Some(a), Some(b), Some(c), Some(d)) => Some(u + comb(a, b, c, d)),
        (u, ..) => u.cloned(),
    };
    Ok(Ok(y.moved(x, v, s + h, u)))
}

/// Fixed-step RK4 over `s` from `s_span.0` to `s_span.1`.
///
/// The step is adjusted down so that an integer number of steps covers the span.
/// Degeneracy stops the run and sets [`Trajectory::diagnostic`].
pub fn integrate(y0: &EvolutionPoint, scenario: &Scenario, s_span: (f64, f64), step: f64) -> Result<Trajectory> {
    y0.check_layout(scenario)?;
    let (s0, s1) = s_span;
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Invalid(format!("step must be positive, got {step}")));
    }
    if !(s1 > s0) {
        return Err(Error::Invalid(format!("span must be increasing, got [{s0}, {s1}]")));
    }
    let n = ((s1 - s0) / step - 1e-9).ceil().max(1.0) as usize;
    let h = (s1 - s0) / n as f64;
    let start = y0.moved(y0.x().clone(), y0.v().clone(), s0, y0.u().cloned());
    let mut logger = Logger::new(scenario);
    let mut traj = Trajectory {
        scenario: scenario.kind(),
        step: h,
        method: "rk4",
        conserved_names: logger.names.clone(),
        samples: Vec::with_capacity(n + 1),
        diagnostic: None,
    };
    let c0 = logger.record(&start, scenario, 0.0)?;
    traj.samples.push(Sample {
        s: s0,
        point: start.clone(),
        conserved: c0,
    });
    if let EomOutcome::Degenerate(reason) = eom(&start, scenario)? {
        traj.diagnostic = Some(format!("degenerate at s = {s0}: {reason}"));
        return Ok(traj);
    }
    let mut y = start;
    for k in 1..=n {
        let s_next = s0 + k as f64 * h;
        let mut next = match rk4_step(&y, scenario, h)? {
            Ok(p) => p,
            Err(reason) => {
                traj.diagnostic = Some(format!("degenerate at s = {}: {reason}", y.s()));
                return Ok(traj);
            }
        };
        let mut drift = 0.0;
        if let Some(u) = next.u() {
            let nrm = u.norm();
            drift = nrm - 1.0;
            next = next.moved(next.x().clone(), next.v().clone(), s_next, Some(u / nrm));
        } else {
            next = next.moved(next.x().clone(), next.v().clone(), s_next, None);
        }
        let c = logger.record(&next, scenario, drift)?;
        traj.samples.push(Sample {
            s: s_next,
            point: next.clone(),
            conserved: c,
        });
        y = next;
    }
    Ok(traj)
}
