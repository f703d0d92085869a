//! The non-verification subcommands: bound reports, trajectory CSVs,
//! crossing searches, and the canned two-level example.
//!
//! Machine-readable output (JSON, CSV) goes to stdout or `--out`; a short
//! human-readable table goes to stderr. `--degrees` reformats angles in the
//! stderr table only, so piped output is always radians.

use std::path::{Path, PathBuf};

use serde::Serialize;
use subspace_qsl::bounds::{
    self, bounds_report_with_settings, off_diagonal_speed, subspace_dispersion, ZERO_RATE_THRESHOLD,
};
use subspace_qsl::dynamics::first_crossing_time;
use subspace_qsl::operators::projector_from_frame;
use subspace_qsl::{CMatrix, QslError};

use crate::config::{wire_of_parts, Instance, WireConfig};
use crate::error::{CliError, Result};

/// Smallest rate treated as nonzero when picking a default search window.
const RATE_FLOOR: f64 = 1e-14;

/// Prints a value as pretty JSON on stdout, newline-terminated.
pub fn emit_json<T: Serialize>(value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Usage(format!("serialization failed: {e}")))?;
    println!("{text}");
    Ok(())
}

fn fmt_angle(theta: f64, degrees: bool) -> String {
    if degrees {
        format!("{:.6} deg", theta.to_degrees())
    } else {
        format!("{theta:.6} rad")
    }
}

/// A time bound that may be unreachable because its rate vanishes.
#[derive(Clone, Copy, Debug)]
enum Bound {
    Time(f64),
    Never,
}

impl Bound {
    fn of(value: Option<f64>) -> Bound {
        match value {
            Some(t) => Bound::Time(t),
            None => Bound::Never,
        }
    }

    fn display(&self) -> String {
        match self {
            Bound::Time(t) => format!("{t:.12}"),
            Bound::Never => "never".to_string(),
        }
    }
}

impl Serialize for Bound {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Bound::Time(t) => serializer.serialize_f64(*t),
            Bound::Never => serializer.serialize_str("never"),
        }
    }
}

#[derive(Serialize)]
struct ThetaOutput {
    theta: f64,
    t_bound_v: Bound,
    t_bound_dispersion: Bound,
    t_brachistochrone: Bound,
}

#[derive(Serialize)]
struct StateLevelOutput {
    dispersion: f64,
    mean_excess_energy: f64,
    mandelshtam_tamm_orthogonality: Bound,
    margolus_levitin_orthogonality: Bound,
    fleming: Vec<FlemingOutput>,
}

#[derive(Serialize)]
struct FlemingOutput {
    theta: f64,
    t_bound: Bound,
}

#[derive(Serialize)]
struct BoundsOutput<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<&'a str>,
    dim: usize,
    rank: usize,
    invariant: bool,
    v_speed: f64,
    subspace_dispersion: f64,
    spectral_halfwidth: f64,
    e_min: f64,
    e_max: f64,
    omega: f64,
    per_theta: Vec<ThetaOutput>,
    #[serde(skip_serializing_if = "Option::is_none")]
    state_level: Option<StateLevelOutput>,
}

/// Maps "this rate vanishes" errors to [`Bound::Never`], letting real
/// failures through.
fn bound_or_never(r: subspace_qsl::Result<f64>) -> Result<Bound> {
    match r {
        Ok(t) => Ok(Bound::Time(t)),
        Err(
            QslError::ZeroDispersion
            | QslError::ZeroMeanExcess
            | QslError::ZeroSpeed
            | QslError::ZeroWidth,
        ) => Ok(Bound::Never),
        Err(e) => Err(e.into()),
    }
}

pub fn cmd_bounds(instance: &Instance, thetas: &[f64], degrees: bool) -> Result<()> {
    let thetas = if thetas.is_empty() {
        vec![std::f64::consts::FRAC_PI_2]
    } else {
        thetas.to_vec()
    };
    let h = &instance.hamiltonian;
    let report = bounds_report_with_settings(h, &instance.frame, &thetas, &instance.optimizer)?;

    let state_level = match &instance.state {
        None => None,
        Some(psi) => {
            let mut fleming = Vec::with_capacity(thetas.len());
            for &theta in &thetas {
                fleming.push(FlemingOutput {
                    theta,
                    t_bound: bound_or_never(bounds::fleming_bound(h, psi, theta))?,
                });
            }
            Some(StateLevelOutput {
                dispersion: bounds::state_dispersion(h, psi)?,
                mean_excess_energy: bounds::mean_excess_energy(h, psi)?,
                mandelshtam_tamm_orthogonality: bound_or_never(bounds::mandelshtam_tamm_bound(
                    h, psi,
                ))?,
                margolus_levitin_orthogonality: bound_or_never(bounds::margolus_levitin_bound(
                    h, psi,
                ))?,
                fleming,
            })
        }
    };

    let output = BoundsOutput {
        label: instance.label.as_deref(),
        dim: h.dim(),
        rank: instance.frame.rank(),
        invariant: report.v_speed <= ZERO_RATE_THRESHOLD,
        v_speed: report.v_speed,
        subspace_dispersion: report.subspace_dispersion,
        spectral_halfwidth: report.spectral_halfwidth,
        e_min: report.e_min,
        e_max: report.e_max,
        omega: report.omega,
        per_theta: report
            .per_theta
            .iter()
            .map(|t| ThetaOutput {
                theta: t.theta,
                t_bound_v: Bound::of(t.t_bound_v),
                t_bound_dispersion: Bound::of(t.t_bound_dispersion),
                t_brachistochrone: Bound::of(t.t_brachistochrone),
            })
            .collect(),
        state_level,
    };

    if let Some(label) = output.label {
        eprintln!("{:<28}{label}", "instance");
    }
    eprintln!(
        "{:<28}{} (subspace rank {})",
        "dimension", output.dim, output.rank
    );
    eprintln!("{:<28}{:.12}", "off-diagonal speed V", output.v_speed);
    eprintln!(
        "{:<28}{:.12}",
        "subspace dispersion", output.subspace_dispersion
    );
    eprintln!(
        "{:<28}{:.12}",
        "spectral halfwidth", output.spectral_halfwidth
    );
    eprintln!("{:<28}{:.12}", "spectral width", output.omega);
    if output.invariant {
        eprintln!("{:<28}yes (the subspace never moves)", "invariant");
    }
    for t in &output.per_theta {
        eprintln!(
            "{:<28}t >= {} (speed), {} (dispersion), {} (width)",
            format!("theta = {}", fmt_angle(t.theta, degrees)),
            t.t_bound_v.display(),
            t.t_bound_dispersion.display(),
            t.t_brachistochrone.display(),
        );
    }

    emit_json(&output)
}

pub fn cmd_evolve(
    instance: &Instance,
    t_max: f64,
    points: usize,
    out: Option<&Path>,
    degrees: bool,
) -> Result<()> {
    let h = &instance.hamiltonian;
    let p0 = projector_from_frame(&instance.frame);
    let v = off_diagonal_speed(h, &p0)?;
    let de = subspace_dispersion(h, &instance.frame, &instance.optimizer)?.value;
    let traj = subspace_qsl::dynamics::angle_trajectory(h, &p0, t_max, points, v, de)?;

    let mut csv = String::with_capacity(96 * (points + 1));
    csv.push_str("t,norm_diff,theta,v_bound,dispersion_bound\n");
    for i in 0..traj.times.len() {
        csv.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            traj.times[i],
            traj.norm_diff[i],
            traj.theta[i],
            traj.v_bound[i],
            traj.dispersion_bound[i],
        ));
    }

    match out {
        Some(path) => {
            std::fs::write(path, &csv).map_err(|source| CliError::Write {
                path: path.to_path_buf(),
                source,
            })?;
            eprintln!("wrote {} rows to {}", traj.times.len(), path.display());
        }
        None => print!("{csv}"),
    }
    let final_theta = *traj.theta.last().expect("at least two grid points");
    eprintln!(
        "{} samples over [0, {t_max}]; final angle {}",
        traj.times.len(),
        fmt_angle(final_theta, degrees),
    );
    Ok(())
}

pub fn cmd_t_theta(
    instance: &Instance,
    thetas: &[f64],
    horizon: Option<f64>,
    tol: Option<f64>,
    degrees: bool,
) -> Result<()> {
    let thetas = if thetas.is_empty() {
        vec![std::f64::consts::FRAC_PI_2]
    } else {
        thetas.to_vec()
    };
    let h = &instance.hamiltonian;
    let p0 = projector_from_frame(&instance.frame);
    let tol = tol.unwrap_or(instance.crossing_tol);
    let horizon = match horizon {
        Some(w) => w,
        None => {
            // Four times the slowest plausible crossing time, capped so a
            // near-invariant subspace cannot demand an absurd window.
            let v = off_diagonal_speed(h, &p0)?;
            let scale = 2.0 * std::f64::consts::PI / v.max(RATE_FLOOR);
            scale.min(1e3 / h.norm()?.max(RATE_FLOOR))
        }
    };

    let mut results = Vec::with_capacity(thetas.len());
    for &theta in &thetas {
        let r = first_crossing_time(h, &p0, theta, horizon, tol)?;
        match r.t_theta {
            Some(t) => eprintln!(
                "theta = {:<18} first reached at t = {t:.12}",
                fmt_angle(theta, degrees),
            ),
            None => eprintln!(
                "theta = {:<18} not reached within [0, {horizon:.6}] (sup angle {})",
                fmt_angle(theta, degrees),
                fmt_angle(r.sup_angle_observed, degrees),
            ),
        }
        results.push(r);
    }

    if results.len() == 1 {
        emit_json(&results[0])
    } else {
        emit_json(&results)
    }
}

/// The two-level instance on which every bound in the library is tight:
/// `H = diag(e1, e2)` with the equal superposition of the two levels.
pub fn two_level_config(e1: f64, e2: f64) -> Result<WireConfig> {
    if !e1.is_finite() || !e2.is_finite() {
        return Err(CliError::Usage(format!(
            "energy levels must be finite, got {e1} and {e2}"
        )));
    }
    if e1 == e2 {
        return Err(CliError::DegenerateLevels { level: e1 });
    }
    let h = CMatrix::from_fn(2, 2, |i, j| {
        if i == j {
            subspace_qsl::C64::new(if i == 0 { e1 } else { e2 }, 0.0)
        } else {
            subspace_qsl::C64::new(0.0, 0.0)
        }
    });
    let half = std::f64::consts::FRAC_1_SQRT_2;
    let frame = CMatrix::from_fn(2, 1, |_, _| subspace_qsl::C64::new(half, 0.0));
    let mut wire = wire_of_parts(
        Some("two levels, equal superposition".to_string()),
        &h,
        Some(&frame),
        None,
    );
    wire.tolerances = Some(crate::config::WireTolerances {
        hermiticity_tol: Some(1e-10),
        ..Default::default()
    });
    Ok(wire)
}

pub fn cmd_example(e1: f64, e2: f64, out: Option<&PathBuf>) -> Result<()> {
    let wire = two_level_config(e1, e2)?;
    let text = crate::config::render(&wire);
    match out {
        Some(path) => {
            std::fs::write(path, text + "\n").map_err(|source| CliError::Write {
                path: path.clone(),
                source,
            })?;
            eprintln!("wrote example config to {}", path.display());
        }
        None => println!("{text}"),
    }
    Ok(())
}
