//! Randomized re-verification of every inequality the library promises.
//!
//! Each trial draws a seeded instance and measures the slack of each
//! property: how close the measured quantity came to its bound, with
//! positive slack meaning the bound was exceeded. A property is violated
//! when its slack passes its tolerance. The summary is a pure function of
//! the master seed: per-trial seeds are derived by index before any work is
//! scheduled, and results are merged in index order, so the output is
//! byte-identical for every thread count.

use std::path::{Path, PathBuf};

use serde::Serialize;
use subspace_qsl::bounds::{
    mandelshtam_tamm_bound, margolus_levitin_bound, off_diagonal_speed, spectral_halfwidth_bound,
    state_dispersion, subspace_dispersion, OptimizerSettings,
};
use subspace_qsl::dynamics::{angle_trajectory, evolve_state, first_crossing_time};
use subspace_qsl::geometry::{maximal_angle, state_angle};
use subspace_qsl::operators::StateVector;
use subspace_qsl::operators::{
    projector_from_frame, random_frame, random_hermitian, random_state, spectral_decomposition,
    validate_hermitian, Frame,
};
use subspace_qsl::rng::SplitMix64;
use subspace_qsl::{CMatrix, QslError, C64};

use crate::commands::emit_json;
use crate::config::{wire_of_parts, WireConfig};
use crate::error::{CliError, Result};

/// One verified inequality: its stable name and the slack it may not exceed.
struct PropertySpec {
    name: &'static str,
    tolerance: f64,
}

const PROPERTIES: [PropertySpec; 10] = [
    PropertySpec {
        name: "angle_under_speed_bound",
        tolerance: 1e-8,
    },
    PropertySpec {
        name: "rate_chain",
        tolerance: 1e-9,
    },
    PropertySpec {
        name: "full_space_dispersion_is_halfwidth",
        tolerance: 1e-8,
    },
    PropertySpec {
        name: "brachistochrone_floor",
        tolerance: 1e-8,
    },
    PropertySpec {
        name: "crossing_consistency",
        tolerance: 1e-8,
    },
    PropertySpec {
        name: "angle_triangle_inequality",
        tolerance: 1e-10,
    },
    PropertySpec {
        name: "angle_symmetry",
        tolerance: 1e-12,
    },
    PropertySpec {
        name: "angle_identity",
        tolerance: 1e-12,
    },
    PropertySpec {
        name: "fleming_state_bound",
        tolerance: 1e-8,
    },
    PropertySpec {
        name: "state_orthogonalization_floor",
        tolerance: 1e-8,
    },
];

const CROSSING_TOL: f64 = 1e-9;
const RATE_FLOOR: f64 = 1e-14;
const GRID_POINTS: usize = 25;

/// Slacks measured on one instance; `None` marks a property the instance
/// could not exercise (an unattained crossing, a stationary state).
struct TrialOutcome {
    slacks: [Option<f64>; 10],
    /// Instance description, attached only when some slack broke its
    /// tolerance so passing runs pay nothing for it.
    config: Option<WireConfig>,
}

pub struct VerifyArgs {
    pub trials: usize,
    pub seed: u64,
    pub n_max: usize,
    pub k_max: usize,
    pub out: PathBuf,
    pub inject_non_hermitian: bool,
}

#[derive(Serialize)]
struct PropertySummary {
    name: &'static str,
    tolerance: f64,
    evaluated: usize,
    violations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_slack: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    worst_seed: Option<u64>,
}

#[derive(Serialize)]
struct VerifySummary {
    seed: u64,
    trials: usize,
    n_max: usize,
    k_max: usize,
    all_passed: bool,
    violations: usize,
    properties: Vec<PropertySummary>,
}

#[derive(Serialize)]
struct ViolationRecord {
    property: &'static str,
    trial: usize,
    seed: u64,
    slack: f64,
    tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    config: Option<WireConfig>,
}

#[derive(Serialize)]
struct ViolationReport {
    master_seed: u64,
    records: Vec<ViolationRecord>,
}

/// Worker count: the `SUBSPACE_QSL_THREADS` cap, or else the machine's
/// parallelism capped at 8; never more threads than trials.
fn thread_count(trials: usize) -> Result<usize> {
    let requested = match std::env::var("SUBSPACE_QSL_THREADS") {
        Err(std::env::VarError::NotPresent) => 0,
        Err(e) => return Err(CliError::Usage(format!("SUBSPACE_QSL_THREADS: {e}"))),
        Ok(s) => s.trim().parse::<usize>().map_err(|_| {
            CliError::Usage(format!(
                "SUBSPACE_QSL_THREADS must be a nonnegative integer, got {s:?}"
            ))
        })?,
    };
    let chosen = if requested == 0 {
        std::thread::available_parallelism()
            .map(|p| p.get())
            .unwrap_or(1)
            .min(8)
    } else {
        requested
    };
    Ok(chosen.clamp(1, trials.max(1)))
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<bool> {
    if args.inject_non_hermitian {
        // Test hook: route a deliberately corrupted matrix through the same
        // validation the config loader uses, to pin the exit code.
        let m = CMatrix::from_fn(2, 2, |i, j| {
            if i == 0 && j == 1 {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        validate_hermitian(&m, 1e-10)?;
        unreachable!("the injected matrix is non-Hermitian");
    }
    if args.trials == 0 {
        return Err(CliError::Usage(
            "at least one trial is required".to_string(),
        ));
    }
    if args.n_max < 2 {
        return Err(CliError::Usage(format!(
            "--n-max must be at least 2, got {}",
            args.n_max
        )));
    }
    if args.k_max < 1 {
        return Err(CliError::Usage(format!(
            "--k-max must be at least 1, got {}",
            args.k_max
        )));
    }

    // Per-trial seeds are fixed before any scheduling, making the whole run
    // a deterministic function of the master seed.
    let seeds: Vec<u64> = {
        let mut master = SplitMix64::new(args.seed);
        (0..args.trials).map(|_| master.next_u64()).collect()
    };

    let workers = thread_count(args.trials)?;
    let mut slots: Vec<Option<subspace_qsl::Result<TrialOutcome>>> = Vec::new();
    slots.resize_with(args.trials, || None);
    let chunk = args.trials.div_ceil(workers);
    std::thread::scope(|scope| {
        for (slot_chunk, seed_chunk) in slots.chunks_mut(chunk).zip(seeds.chunks(chunk)) {
            scope.spawn(move || {
                for (slot, &s) in slot_chunk.iter_mut().zip(seed_chunk) {
                    *slot = Some(run_trial(s, args.n_max, args.k_max));
                }
            });
        }
    });

    let mut summaries: Vec<PropertySummary> = PROPERTIES
        .iter()
        .map(|p| PropertySummary {
            name: p.name,
            tolerance: p.tolerance,
            evaluated: 0,
            violations: 0,
            max_slack: None,
            worst_seed: None,
        })
        .collect();
    let mut records = Vec::new();

    for (trial, slot) in slots.into_iter().enumerate() {
        let outcome = slot.expect("every slot is filled by its worker")?;
        for (j, &slack) in outcome.slacks.iter().enumerate() {
            let Some(slack) = slack else { continue };
            let summary = &mut summaries[j];
            summary.evaluated += 1;
            if summary.max_slack.is_none_or(|m| slack > m) {
                summary.max_slack = Some(slack);
                summary.worst_seed = Some(seeds[trial]);
            }
            if slack > PROPERTIES[j].tolerance {
                summary.violations += 1;
                records.push(ViolationRecord {
                    property: PROPERTIES[j].name,
                    trial,
                    seed: seeds[trial],
                    slack,
                    tolerance: PROPERTIES[j].tolerance,
                    config: outcome.config.clone(),
                });
            }
        }
    }

    let violations = records.len();
    let summary = VerifySummary {
        seed: args.seed,
        trials: args.trials,
        n_max: args.n_max,
        k_max: args.k_max,
        all_passed: violations == 0,
        violations,
        properties: summaries,
    };

    for p in &summary.properties {
        eprintln!(
            "{:<38}{:>6} evaluated  {:>3} violations  max slack {}",
            p.name,
            p.evaluated,
            p.violations,
            p.max_slack.map_or("-".to_string(), |s| format!("{s:.3e}")),
        );
    }

    if violations > 0 {
        write_report(&args.out, args.seed, records)?;
        eprintln!(
            "{violations} violations; instances written to {}",
            args.out.display()
        );
    }
    emit_json(&summary)?;
    Ok(violations == 0)
}

fn write_report(path: &Path, master_seed: u64, records: Vec<ViolationRecord>) -> Result<()> {
    let report = ViolationReport {
        master_seed,
        records,
    };
    let text = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::Usage(format!("serialization failed: {e}")))?;
    std::fs::write(path, text + "\n").map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Largest value of `values[i] - bounds[i]`; positive means some bound was
/// broken.
fn max_excess(values: &[f64], bounds: &[f64]) -> f64 {
    values
        .iter()
        .zip(bounds)
        .map(|(v, b)| v - b)
        .fold(f64::NEG_INFINITY, f64::max)
}

fn run_trial(seed: u64, n_max: usize, k_max: usize) -> subspace_qsl::Result<TrialOutcome> {
    let mut rng = SplitMix64::new(seed);
    let n = 2 + (rng.next_u64() as usize) % (n_max - 1);
    let k_cap = k_max.min(n - 1);
    let k = 1 + (rng.next_u64() as usize) % k_cap;

    let h = random_hermitian(n, rng.next_u64());
    let f = random_frame(n, k, rng.next_u64())?;
    let psi = random_state(n, rng.next_u64())?;
    let pair_index = rng.next_u64() as usize;
    let triple_ranks = [
        1 + (rng.next_u64() as usize) % n,
        1 + (rng.next_u64() as usize) % n,
        1 + (rng.next_u64() as usize) % n,
    ];
    let triple_seeds = [rng.next_u64(), rng.next_u64(), rng.next_u64()];

    let p0 = projector_from_frame(&f);
    let optimizer = OptimizerSettings::default();
    let hnorm = h.norm()?.max(RATE_FLOOR);
    let v = off_diagonal_speed(&h, &p0)?;
    let de = subspace_dispersion(&h, &f, &optimizer)?.value;
    let hw = spectral_halfwidth_bound(&h)?;
    let spec = spectral_decomposition(&h)?;

    let mut slacks: [Option<f64>; 10] = [None; 10];

    // angle_under_speed_bound: theta(t) <= V t on a grid.
    let traj = angle_trajectory(&h, &p0, 8.0 / hnorm, GRID_POINTS, v, de)?;
    slacks[0] = Some(max_excess(&traj.theta, &traj.v_bound));

    // rate_chain: V <= dispersion <= halfwidth.
    slacks[1] = Some((v - de).max(de - hw));

    // full_space_dispersion_is_halfwidth: the optimizer attains the
    // halfwidth when the frame spans everything.
    let full = Frame::try_new(CMatrix::identity(n, n))?;
    let de_full = subspace_dispersion(&h, &full, &optimizer)?.value;
    slacks[2] = Some((de_full - hw).abs());

    // brachistochrone_floor: with the spectrum centered and scaled to width
    // one, any attained crossing takes at least 2 theta.
    let omega = spec.width();
    if omega > 1e-12 {
        let mid = 0.5 * (spec.e_max() + spec.e_min());
        let centered = (h.entries() - CMatrix::identity(n, n).map(|z| z * C64::new(mid, 0.0)))
            .map(|z| z / C64::new(omega, 0.0));
        let hb = validate_hermitian(&centered, 1e-10)?;
        let theta = std::f64::consts::FRAC_PI_4;
        let vb = off_diagonal_speed(&hb, &p0)?;
        if vb > RATE_FLOOR {
            let horizon = 4.0 * theta / vb;
            let hit = first_crossing_time(&hb, &p0, theta, horizon, CROSSING_TOL)?;
            if let Some(t) = hit.t_theta {
                slacks[3] = Some(2.0 * theta - t);
            }
        }
    }

    // crossing_consistency: a measured crossing respects both rate bounds.
    if v > RATE_FLOOR {
        let theta = 0.6;
        let horizon = (4.0 * theta / v).min(1e4 / hnorm);
        let hit = first_crossing_time(&h, &p0, theta, horizon, CROSSING_TOL)?;
        if let Some(t) = hit.t_theta {
            slacks[4] = Some((theta / v - t).max(theta / de - t));
        }
    }

    // Metric axioms for the maximal angle on an independent random triple.
    let triple: Vec<_> = (0..3)
        .map(|i| {
            random_frame(n, triple_ranks[i], triple_seeds[i]).map(|f| projector_from_frame(&f))
        })
        .collect::<subspace_qsl::Result<_>>()?;
    let a12 = maximal_angle(&triple[0], &triple[1])?;
    let a21 = maximal_angle(&triple[1], &triple[0])?;
    let a13 = maximal_angle(&triple[0], &triple[2])?;
    let a31 = maximal_angle(&triple[2], &triple[0])?;
    let a23 = maximal_angle(&triple[1], &triple[2])?;
    let a32 = maximal_angle(&triple[2], &triple[1])?;
    slacks[5] = Some((a13 - a12 - a23).max(a12 - a13 - a32).max(a23 - a21 - a13));
    slacks[6] = Some(
        (a12 - a21)
            .abs()
            .max((a13 - a31).abs())
            .max((a23 - a32).abs()),
    );
    slacks[7] = Some(maximal_angle(&triple[0], &triple[0])?);

    // fleming_state_bound: overlap angle under the dispersion line.
    let de_state = state_dispersion(&h, &psi)?;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..GRID_POINTS {
        let t = 8.0 / hnorm * i as f64 / (GRID_POINTS - 1) as f64;
        let psi_t = evolve_state(&h, &psi, t)?;
        let angle = state_angle(&psi, &psi_t)?;
        worst = worst.max(angle - de_state * t);
    }
    slacks[8] = Some(worst);

    // state_orthogonalization_floor: a fully random state almost never
    // orthogonalizes exactly, so probe with an equal superposition of two
    // eigenvectors, which hits orthogonality at pi over the level gap and
    // makes the tighter of the two bounds an equality.
    let (i, j) = (pair_index % n, {
        let j = pair_index / n % (n - 1);
        if j >= pair_index % n {
            j + 1
        } else {
            j
        }
    });
    let pair_state = {
        let scale = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        StateVector::try_new(
            (spec.eigenvectors().column(i) + spec.eigenvectors().column(j)) * scale,
        )?
    };
    let mut floor = f64::NEG_INFINITY;
    match mandelshtam_tamm_bound(&h, &pair_state) {
        Ok(b) => floor = floor.max(b),
        Err(QslError::ZeroDispersion) => {}
        Err(e) => return Err(e),
    }
    match margolus_levitin_bound(&h, &pair_state) {
        Ok(b) => floor = floor.max(b),
        Err(QslError::ZeroMeanExcess | QslError::ZeroDispersion) => {}
        Err(e) => return Err(e),
    }
    let de_pair = state_dispersion(&h, &pair_state)?;
    if floor.is_finite() && de_pair > RATE_FLOOR {
        let p_state = pair_state.as_frame().projector();
        let horizon = 4.0 * std::f64::consts::FRAC_PI_2 / de_pair;
        let hit = first_crossing_time(
            &h,
            &p_state,
            std::f64::consts::FRAC_PI_2,
            horizon,
            CROSSING_TOL,
        )?;
        if let Some(t) = hit.t_theta {
            slacks[9] = Some(floor - t);
        }
    }

    // Attach the instance only when it will be reported.
    let violated = slacks
        .iter()
        .zip(&PROPERTIES)
        .any(|(s, p)| s.is_some_and(|s| s > p.tolerance));
    let config = violated.then(|| {
        wire_of_parts(
            Some(format!("verify trial, seed {seed}")),
            h.entries(),
            Some(f.columns()),
            None,
        )
    });

    Ok(TrialOutcome { slacks, config })
}
