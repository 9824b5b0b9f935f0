use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector, Rotation3, Vector2, Vector3};
use serde_json::{json, Value};

use super::config::{DynamicsConfig, GeometryName, GravityConfig, InvariantsConfig, QuantizeConfig, RunConfig};
use crate::coadjoint::{casimirs, moment_map};
use crate::dynamics::{
    eom, eom_from_kernel, integrate, kernel_report, planar_effective_mass, EvolutionPoint, FieldPreset, FieldSpec,
    Params, Scenario,
};
use crate::error::{Error, Result};
use crate::gravity::{
    coordinate_probes, integrate_gravity, kerr_newman_horizon, structure_residuals, CarrollGeometry, GeometryPreset,
    GravityParams, GravityState, GravityTrajectory, Regime,
};
use crate::lie::{AlgebraKind, GroupElement};
use crate::quantize::{
    alpha_pullback_residual, carroll_residual, d_alpha_residual, density_drift, kg_limit_check, polarization_residual,
    rep_momentum_with, rep_position_with, GridSpec, Polarization, WaveFunction, CLIP_MARGIN,
};
use crate::verify::{run_all, CheckOutcome};

/// Environment variable that overrides the configured output directory.
pub const OUTPUT_DIR_ENV: &str = "CARROLL_OUTPUT_DIR";

/// Exit status of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Validation = 1,
    /// Degeneracy during integration or a failed invariant check.
    Runtime = 2,
}

/// In-memory artifacts of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub status: ExitStatus,
    pub csv: Option<String>,
    pub report: Value,
}

/// Files written by [`run_to_dir`].
#[derive(Debug, Clone, PartialEq)]
pub struct Written {
    pub status: ExitStatus,
    pub csv: Option<PathBuf>,
    pub report: PathBuf,
}

fn checks_json(checks: &[CheckOutcome]) -> Value {
    serde_json::to_value(checks).expect("check outcomes serialize")
}

fn status_of(checks: &[CheckOutcome], truncated: bool) -> ExitStatus {
    if truncated || checks.iter().any(|c| !c.passed) {
        ExitStatus::Runtime
    } else {
        ExitStatus::Success
    }
}

fn dvec(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

/// Builds the scenario and initial point of a dynamics job.
pub fn dynamics_setup(c: &DynamicsConfig) -> Result<(Scenario, EvolutionPoint)> {
    let params = Params {
        m: c.m.unwrap_or(0.0),
        spin: c.spin.unwrap_or(0.0),
        q: c.q.unwrap_or(0.0),
        mu: c.mu.unwrap_or(0.0),
        q1: c.q1.unwrap_or(0.0),
        q2: c.q2.unwrap_or(0.0),
        theta: c.theta.unwrap_or(0.0),
    };
    let field = match (&c.e, &c.b) {
        (Some(e), Some(b)) => Some(FieldSpec::from_preset(&FieldPreset {
            e: e.clone(),
            b: b.clone(),
            grad_e: c.grad_e.clone(),
            grad_b: c.grad_b.clone(),
        })?),
        _ => None,
    };
    let sc = Scenario::new(c.scenario, params, field)?;
    let (x, v) = (dvec(&c.x0), dvec(&c.v0));
    let y = if c.scenario.is_planar() {
        EvolutionPoint::planar(x, v, c.s0, c.w0.unwrap_or(0.0), c.z0.unwrap_or(0.0))
    } else if let Some(u) = &c.u0 {
        EvolutionPoint::with_spin(x, v, c.s0, dvec(u))?
    } else {
        EvolutionPoint::spatial(x, v, c.s0)
    };
    y.check_layout(&sc)?;
    Ok((sc, y))
}

fn run_dynamics(c: &DynamicsConfig) -> Result<RunOutput> {
    let (sc, y0) = dynamics_setup(c)?;
    let kind = sc.kind();
    let kernel = kernel_report(&y0, &sc)?;
    let effective_mass_sq = kind.is_planar().then(|| planar_effective_mass(&y0, &sc).0);
    let moment = if kind.is_free() {
        Some(moment_map(&y0, &sc)?)
    } else {
        None
    };
    let traj = integrate(&y0, &sc, (c.s0, c.s0 + c.span), c.step)?;

    let mut checks = Vec::new();
    let eom_gap = match (eom(&y0, &sc)?.tangent(), eom_from_kernel(&y0, &sc)?.tangent()) {
        (Some(a), Some(b)) => a.max_abs_diff(b) / a.norm().max(1.0),
        (None, None) => 0.0,
        _ => f64::INFINITY,
    };
    checks.push(CheckOutcome::new(
        "closed_form_eom_matches_kernel_at_y0",
        1,
        eom_gap,
        1e-9,
    ));
    if kind.is_free() && !traj.is_truncated() {
        checks.push(CheckOutcome::new(
            "moment_map_drift",
            traj.samples.len(),
            traj.max_moment_drift(),
            1e-10,
        ));
    }
    if let Some(drift) = traj.conserved_drift("u_norm_drift") {
        let steps = traj.samples.len().saturating_sub(1).max(1);
        checks.push(CheckOutcome::new(
            "u_norm_drift_per_step",
            steps,
            drift / steps as f64,
            1e-12,
        ));
    }

    let last = traj.last();
    let report = json!({
        "job": "dynamics",
        "name": c.name,
        "seed": c.seed,
        "scenario": format!("{kind:?}"),
        "params": sc.params(),
        "effective_mass_sq": effective_mass_sq,
        "kernel": kernel,
        "moment": moment.as_ref().map(|m| m.coords()),
        "casimirs": moment.as_ref().map(casimirs),
        "integration": {
            "method": traj.method,
            "step": traj.step,
            "samples": traj.samples.len(),
            "s_span": [c.s0, c.s0 + c.span],
            "truncated": traj.is_truncated(),
            "diagnostic": traj.diagnostic,
        },
        "final_state": {
            "s": last.s,
            "coords": last.point.coords(),
        },
        "invariants": checks_json(&checks),
    });
    Ok(RunOutput {
        status: status_of(&checks, traj.is_truncated()),
        csv: Some(traj.to_csv()),
        report,
    })
}

fn geometry_preset(c: &GravityConfig) -> GeometryPreset {
    let v2 = |v: &Option<Vec<f64>>| {
        let v = v.as_deref().unwrap_or(&[0.0, 0.0]);
        [v[0], v[1]]
    };
    match c.geometry {
        GeometryName::Flat => GeometryPreset::Flat,
        GeometryName::KerrNewman => GeometryPreset::KerrNewman {
            mass: c.mass.unwrap_or(0.0),
            a: c.a.unwrap_or(0.0),
            charge: c.charge.unwrap_or(0.0),
        },
        GeometryName::FlatWithT => GeometryPreset::FlatWithT {
            t1: c.t1.unwrap_or(0.0),
            t2: c.t2.unwrap_or(0.0),
        },
        GeometryName::FlatWithSources => GeometryPreset::FlatWithSources {
            o1: c.o1.unwrap_or(0.0),
            o2: c.o2.unwrap_or(0.0),
            omega1: v2(&c.omega1),
            omega2: v2(&c.omega2),
        },
    }
}

/// Checks along a gravity trajectory: no spatial motion when geodesic, and
/// velocity orthogonal to `T` with `dv` parallel to `T` otherwise.
pub fn gravity_checks(traj: &GravityTrajectory) -> Vec<CheckOutcome> {
    let n = traj.samples.len();
    let geodesic = traj.samples.iter().all(|s| s.regime == Regime::Geodesic);
    if geodesic {
        return vec![CheckOutcome::new(
            "geodesic_spatial_displacement",
            n,
            traj.max_spatial_displacement(),
            1e-8,
        )];
    }
    let mut ortho: f64 = 0.0;
    let mut parallel: f64 = 0.0;
    for w in traj.samples.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let tn = a.t.norm().max(f64::MIN_POSITIVE);
        ortho = ortho.max(a.spatial_velocity.dot(&a.t).abs() / tn);
        // dv_A over one step against T_A: the 2D cross product vanishes when parallel
        let dv = Vector2::new(b.state.v[1] - a.state.v[1], b.state.v[2] - a.state.v[2]) / (b.s - a.s);
        let cross = dv[0] * a.t[1] - dv[1] * a.t[0];
        parallel = parallel.max(cross.abs() / (tn * dv.norm().max(1.0)));
    }
    vec![
        CheckOutcome::new("spatial_velocity_orthogonal_to_t", n, ortho, 1e-9),
        CheckOutcome::new("velocity_rate_parallel_to_t", n.saturating_sub(1), parallel, 1e-6),
    ]
}

fn run_gravity(c: &GravityConfig) -> Result<RunOutput> {
    let preset = geometry_preset(c);
    let q2 = c.q2.unwrap_or(0.0);
    let mut report = json!({
        "job": "gravity",
        "name": c.name,
        "seed": c.seed,
        "geometry": preset,
    });
    let mut checks = Vec::new();
    let geom = if let GeometryPreset::KerrNewman { mass, a, charge } = preset {
        let (geom, hr) = kerr_newman_horizon(mass, a, charge)?;
        checks.push(CheckOutcome::new("xi_in_kernel", hr.samples, hr.xi_in_kernel, 1e-10));
        checks.push(CheckOutcome::new(
            "lie_derivative_of_metric",
            hr.samples,
            hr.lie_derivative,
            1e-10,
        ));
        checks.push(CheckOutcome::new(
            "kernel_dimension_one",
            hr.samples,
            (hr.kernel_dim_min.abs_diff(1) + hr.kernel_dim_max.abs_diff(1)) as f64,
            0.0,
        ));
        checks.push(CheckOutcome::new("torsion_free", hr.samples, hr.torsion, 1e-8));
        report["horizon"] = serde_json::to_value(&hr).expect("horizon report serializes");
        geom
    } else {
        CarrollGeometry::from_preset(&preset, q2)?
    };

    let mut csv = None;
    let mut truncated = false;
    if let (Some(m), Some(q1), Some(x0), Some(v0), Some(span)) = (c.m, c.q1, &c.x0, &c.v0, c.span) {
        let params = GravityParams { m, q1, q2 };
        let y0 = GravityState {
            x: Vector3::new(x0[0], x0[1], x0[2]),
            v: Vector3::new(v0[0], v0[1], v0[2]),
        };
        let res = structure_residuals(&geom, &y0.x, &coordinate_probes())?;
        report["structure_residuals_at_x0"] = serde_json::to_value(res).expect("residuals serialize");
        let traj = integrate_gravity(&y0, &geom, &params, (x0[0], x0[0] + span), c.step)?;
        checks.extend(gravity_checks(&traj));
        truncated = traj.is_truncated();
        let last = traj.samples.last();
        report["particle"] = json!({
            "m": m, "q1": q1, "q2": q2,
            "effective_mass_sq": m * m + 4.0 * geom.sources().shifted_q1(&y0.x, q1, q2) * q2,
        });
        report["integration"] = json!({
            "method": "rk4",
            "step": traj.step,
            "samples": traj.samples.len(),
            "truncated": truncated,
            "diagnostic": traj.diagnostic,
            "max_spatial_displacement": traj.max_spatial_displacement(),
        });
        report["final_state"] = json!(last.map(|s| json!({
            "s": s.s,
            "x": s.state.x.as_slice(),
            "v": s.state.v.as_slice(),
        })));
        csv = Some(traj.to_csv());
    }
    report["invariants"] = checks_json(&checks);
    Ok(RunOutput {
        status: status_of(&checks, truncated),
        csv,
        report,
    })
}

/// Carroll group element described by a quantize job.
pub fn quantize_element(c: &QuantizeConfig) -> Result<GroupElement> {
    let d = c.dim;
    let kind = if d == 2 { AlgebraKind::Carr2 } else { AlgebraKind::Carr3 };
    let rot = match (&c.rotation, d) {
        (None, _) => DMatrix::identity(d, d),
        (Some(r), 2) => {
            let t = r[0];
            DMatrix::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()])
        }
        (Some(r), _) => {
            let m = Rotation3::from_scaled_axis(Vector3::new(r[0], r[1], r[2])).into_inner();
            DMatrix::from_iterator(3, 3, m.iter().cloned())
        }
    };
    let zero = vec![0.0; d];
    GroupElement::new(
        kind,
        rot,
        dvec(c.boost.as_deref().unwrap_or(&zero)),
        dvec(c.translation.as_deref().unwrap_or(&zero)),
        c.time_shift,
        0.0,
        0.0,
    )
}

fn run_quantize(c: &QuantizeConfig) -> Result<RunOutput> {
    let grid = GridSpec::cube(c.dim, c.grid_half, c.grid_n)?;
    let psi = WaveFunction::gaussian(c.polarization, c.m, c.hbar, grid, &c.center, c.width)?;
    let a = quantize_element(c)?;
    let act = |g: &GroupElement, w: &WaveFunction| match c.polarization {
        Polarization::Position => rep_position_with(g, w, c.interpolation, CLIP_MARGIN),
        Polarization::Momentum => rep_momentum_with(g, w, c.interpolation, CLIP_MARGIN),
    };
    let out = act(&a, &psi)?;
    let twice = act(&a.compose(&a)?, &psi)?;
    let iterated = act(&a, &out.psi)?;
    let rep_err = iterated.psi.relative_l2_error(&twice.psi)?;
    let unitarity = (out.psi.l2_norm() - psi.l2_norm()).abs();
    let cr = carroll_residual(&psi, &c.s_samples);
    let probe_x = vec![0.0; c.dim];
    let pol = if c.polarization == Polarization::Momentum && c.m == 0.0 {
        None
    } else {
        Some(polarization_residual(
            &psi,
            &probe_x,
            c.s_samples.first().copied().unwrap_or(0.0),
            1e-4,
        )?)
    };
    let p_probe: Vec<f64> = (0..c.dim).map(|k| 0.5 - 0.25 * k as f64).collect();
    let dalpha = d_alpha_residual(&c.center, &p_probe, 0.3, c.hbar, &[])?;
    let pullback = alpha_pullback_residual(&c.center, &p_probe, 0.3, c.m, c.hbar)?;

    let mut checks = vec![
        CheckOutcome::new("carroll_equation_analytic", psi.grid().len(), cr.analytic, 0.0),
        CheckOutcome::new(
            "carroll_equation_fd",
            psi.grid().len() * c.s_samples.len(),
            cr.finite_difference,
            1e-7,
        ),
        CheckOutcome::new(
            "density_static",
            psi.grid().len(),
            density_drift(&psi, &c.s_samples),
            1e-14,
        ),
        CheckOutcome::new("unitarity", 1, unitarity, 1e-6),
        CheckOutcome::new("representation_property", 1, rep_err, 1e-6),
        CheckOutcome::new("d_alpha_equals_omega_over_hbar", 1, dalpha, 1e-8),
        CheckOutcome::new("alpha_pullback_equals_varpi_over_hbar", 1, pullback, 1e-8),
    ];
    if let Some(p) = pol {
        checks.push(CheckOutcome::new("polarization_constancy", psi.grid().len(), p, 1e-7));
    }
    let kg = if c.polarization == Polarization::Position {
        let kg = kg_limit_check(&psi, &c.c_values)?;
        let worst = kg
            .decade_ratios
            .iter()
            .map(|q| (q / 100.0 - 1.0).abs())
            .fold(0.0, f64::max);
        checks.push(CheckOutcome::new(
            "klein_gordon_decade_ratio",
            kg.decade_ratios.len(),
            worst,
            0.05,
        ));
        Some(kg)
    } else {
        None
    };
    let report = json!({
        "job": "quantize",
        "name": c.name,
        "seed": c.seed,
        "polarization": c.polarization,
        "m": c.m,
        "hbar": c.hbar,
        "grid": psi.grid(),
        "interpolation": c.interpolation,
        "element": a.to_record(),
        "norm_before": psi.l2_norm(),
        "norm_after": out.psi.l2_norm(),
        "clipped_mass": out.clipped_mass,
        "warning": out.warning,
        "carroll_residual": cr,
        "klein_gordon": kg,
        "invariants": checks_json(&checks),
    });
    Ok(RunOutput {
        status: status_of(&checks, false),
        csv: Some(out.psi.to_csv()),
        report,
    })
}

fn run_invariants(c: &InvariantsConfig) -> Result<RunOutput> {
    let checks = run_all(c.seed, c.samples)?;
    let report = json!({
        "job": "invariants",
        "name": c.name,
        "seed": c.seed,
        "samples": c.samples,
        "invariants": checks_json(&checks),
        "all_passed": checks.iter().all(|k| k.passed),
    });
    Ok(RunOutput {
        status: status_of(&checks, false),
        csv: None,
        report,
    })
}

/// Runs a job in memory.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    let mut out = match config {
        RunConfig::Dynamics(c) => run_dynamics(c)?,
        RunConfig::Gravity(c) => run_gravity(c)?,
        RunConfig::Quantize(c) => run_quantize(c)?,
        RunConfig::Invariants(c) => run_invariants(c)?,
    };
    out.report["exit_code"] = json!(out.status as i32);
    Ok(out)
}

/// Output directory: the environment override, else the configured one, else `out`.
pub fn output_dir(config: &RunConfig) -> PathBuf {
    std::env::var_os(OUTPUT_DIR_ENV)
        .map(PathBuf::from)
        .or_else(|| config.output_dir().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// Runs a job and writes `<stem>.csv` and `<stem>.report.json` into `dir`.
pub fn run_to_dir(config: &RunConfig, dir: &Path, stem: &str) -> Result<Written> {
    let out = run(config)?;
    std::fs::create_dir_all(dir)?;
    let csv = match &out.csv {
        Some(text) => {
            let p = dir.join(format!("{stem}.csv"));
            std::fs::write(&p, text)?;
            Some(p)
        }
        None => None,
    };
    let report = dir.join(format!("{stem}.report.json"));
    let text = serde_json::to_string_pretty(&out.report).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(&report, text + "\n")?;
    Ok(Written {
        status: out.status,
        csv,
        report,
    })
}
