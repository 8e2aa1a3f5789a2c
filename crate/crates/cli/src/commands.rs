//! The four subcommands. Each returns its rendered output and a status.

use std::time::Instant;

use exact_rwa::drive::{h_eff, h_rot, h_rwa, symmetry_check, EffSeriesOrder, Mutation};
use exact_rwa::erroranalysis::{measure_delta_n, propagate_errors, significance, ErrorBudget};
use exact_rwa::functional::{functional_Q, IntegrandKind};
use exact_rwa::propagate::{propagate_to_times, verify_stroboscopic_window, StroboscopicOptions};
use exact_rwa::su2::{dexp_hamiltonian, exp_su2, log_su2, PauliVector, RotationVector, Unitary2};
use exact_rwa::variational::minimize;
use exact_rwa::Vec3;
use num_complex::Complex64;
use serde_json::json;

use crate::config::{OutputFormat, RunConfig, TrajectorySource};
use crate::record::{Quantity, ResultRecord};
use crate::CliError;

/// How a command ended; maps onto the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    VerificationFailed,
    NotConverged,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Success => 0,
            Status::VerificationFailed => 2,
            Status::NotConverged => 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub output: String,
    pub status: Status,
    pub record: Option<ResultRecord>,
}

fn finish(mut record: ResultRecord, started: Instant, format: OutputFormat, status: Status) -> Outcome {
    record.wall_time_s = started.elapsed().as_secs_f64();
    let output = match format {
        OutputFormat::Record => record.to_json(),
        OutputFormat::Csv => record.to_csv(),
    };
    Outcome { output, status, record: Some(record) }
}

/// Bloch vector of `U|0⟩`.
pub fn bloch_of_ground(u: &Unitary2) -> Vec3 {
    let [a, b] = u.apply_to_ground();
    let cross = a.conj() * b;
    Vec3::new(2.0 * cross.re, 2.0 * cross.im, a.norm_sqr() - b.norm_sqr())
}

/// CSV rows `t,beta0,source,bx,by,bz`; every source starts in `|0⟩` at `t_i(β₀)`.
pub fn cmd_trajectory(config: &RunConfig) -> Result<Outcome, CliError> {
    let env = config.envelope()?;
    let drive = config.drive_config();
    let eff = config.effective_hamiltonian()?;
    let resolution = config.resolution();
    let t_c = drive.t_c();
    let (lo, hi) = config.trajectory_window();
    let per = config.trajectory.samples_per_tc;
    let dt = t_c / per as f64;
    let mut out = String::from("t,beta0,source,bx,by,bz\n");
    for &beta0 in &config.trajectory.beta0 {
        let t_i = drive.gauge_time(beta0);
        let first = ((lo - t_i) / dt).ceil() as i64;
        let last = ((hi - t_i) / dt).floor() as i64;
        let times: Vec<f64> = (first..=last).map(|k| t_i + k as f64 * dt).collect();
        let gauged = eff.at_gauge(beta0);
        for &source in &config.trajectory.sources {
            let us = match source {
                TrajectorySource::Exact => propagate_to_times(&|t| h_rot(&drive, &env, t), t_i, &times, t_c, &resolution),
                TrajectorySource::Rwa => propagate_to_times(&|t| h_rwa(&drive, &env, t), t_i, &times, t_c, &resolution),
                TrajectorySource::Effective => propagate_to_times(&|t| gauged.at(t), t_i, &times, t_c, &resolution),
            };
            for (t, u) in times.iter().zip(&us) {
                let b = bloch_of_ground(u);
                out.push_str(&format!("{t:?},{beta0:?},{},{:?},{:?},{:?}\n", source.label(), b.x, b.y, b.z));
            }
        }
    }
    Ok(Outcome { output: out, status: Status::Success, record: None })
}

pub fn cmd_functional(config: &RunConfig) -> Result<Outcome, CliError> {
    let started = Instant::now();
    let source = config.source()?;
    let kind = config.functional.kind;
    let q = functional_Q(kind, source.as_ref(), &config.quadrature_grid())?;
    let mut record = ResultRecord::new("functional", config);
    record.quantities.push(Quantity::new(format!("Q[{}]", kind.label()), q.value, q.quad_uncertainty));
    record.details = json!({
        "kind": kind,
        "source": config.functional.source,
        "domain": config.domain.preset,
        "window": config.window(),
        "grid": q.grid,
    });
    Ok(finish(record, started, config.output.format, Status::Success))
}

/// The bound that matches the integrand: the full chain for `fI`, the
/// simplified bounds otherwise.
fn bound_for(kind: IntegrandKind, budget: &ErrorBudget) -> f64 {
    match kind {
        IntegrandKind::FI => budget.delta_q,
        IntegrandKind::FISimplified => budget.delta_q_simplified,
        IntegrandKind::FII | IntegrandKind::FIISimplified | IntegrandKind::FIISimplifiedSquared => budget.delta_q_ii_simplified,
    }
}

pub fn cmd_minimize(config: &RunConfig) -> Result<Outcome, CliError> {
    let started = Instant::now();
    let source = config.source()?;
    let result = minimize(source.as_ref(), &config.minimize_config(), &config.start_params())?;
    let env = config.envelope()?;
    let map = measure_delta_n(&env, &config.drive_config(), config.functional.order, &config.stroboscopic_grid(), &config.resolution())?;
    let budget = propagate_errors(&map, config.budget_policy());
    let kind = config.functional.kind;
    let measured = bound_for(kind, &budget);
    let propagated = config.errors.bound_override.unwrap_or(measured);
    let quad = result.q_start.quad_uncertainty + result.q_final.quad_uncertainty;
    let bound = propagated + quad;
    let verdict = significance(result.improvement, bound);

    let mut record = ResultRecord::new("minimize", config);
    let label = kind.label();
    record.quantities = vec![
        Quantity::new(format!("Q_start[{label}]"), result.q_start.value, result.q_start.quad_uncertainty),
        Quantity::new(format!("Q_final[{label}]"), result.q_final.value, result.q_final.quad_uncertainty),
        Quantity::new("improvement", result.improvement, quad),
        Quantity::new("bound", bound, 0.0),
        Quantity::new("delta_Q_measured", measured, 0.0),
    ];
    record.improvement = Some(result.improvement);
    record.verdict = Some(verdict);
    record.details = json!({
        "bound": bound,
        "bound_overridden": config.errors.bound_override.is_some(),
        "verdict_vs_measured": significance(result.improvement, measured + quad),
        "budget": budget,
        "iterations": result.iterations,
        "evaluations": result.evaluations,
        "converged": result.converged,
        "simplex_fallback": result.simplex_fallback,
        "params_final": result.params_final,
    });
    let status = if result.converged { Status::Success } else { Status::NotConverged };
    Ok(finish(record, started, config.output.format, status))
}

/// Weyl-sequence points in `[-1, 1)³`, reproducible without a RNG.
fn probe_points(count: usize) -> impl Iterator<Item = Vec3> {
    const STEPS: [f64; 3] = [0.618_033_988_749_895, 0.414_213_562_373_095, 0.732_050_807_568_877];
    (1..=count).map(|k| {
        let c = |i: usize| 2.0 * (k as f64 * STEPS[i]).fract() - 1.0;
        Vec3::new(c(0), c(1), c(2))
    })
}

struct Su2Suite {
    round_trip: f64,
    unitarity: f64,
    dexp_relative: f64,
}

fn su2_suite(samples: usize) -> Su2Suite {
    let mut suite = Su2Suite { round_trip: 0.0, unitarity: 0.0, dexp_relative: 0.0 };
    let points: Vec<Vec3> = probe_points(2 * samples).collect();
    for pair in points.chunks_exact(2) {
        // angles up to 3 keep the principal log unambiguous
        let n = RotationVector(pair[0] * 1.7);
        let n_dot = pair[1];
        let u = exp_su2(n);
        suite.round_trip = suite.round_trip.max((log_su2(&u).n.0 - n.0).norm());
        suite.unitarity = suite.unitarity.max(u.unitarity_defect());
        let step = 1e-5;
        let plus = exp_su2(RotationVector(n.0 + n_dot * step));
        let minus = exp_su2(RotationVector(n.0 - n_dot * step));
        let du: Vec<_> = (0..2)
            .flat_map(|i| (0..2).map(move |j| (i, j)))
            .map(|(i, j)| (plus.matrix()[i][j] - minus.matrix()[i][j]) / (2.0 * step))
            .collect();
        let du = Unitary2::from_matrix([[du[0], du[1]], [du[2], du[3]]]);
        // i U̇ U†
        let m = du.mul(&u.adjoint());
        let i = Complex64::new(0.0, 1.0);
        let generator = PauliVector::from_matrix(&[[i * m.matrix()[0][0], i * m.matrix()[0][1]], [i * m.matrix()[1][0], i * m.matrix()[1][1]]]);
        let analytic = dexp_hamiltonian(n, n_dot);
        let rel = (generator.0 - analytic.0).norm() / analytic.0.norm().max(1e-300);
        suite.dexp_relative = suite.dexp_relative.max(rel);
    }
    suite
}

/// Stroboscopic agreement, S-symmetry and the SU(2) identity suite.
pub fn cmd_verify(config: &RunConfig, mutation: Mutation) -> Result<Outcome, CliError> {
    let started = Instant::now();
    let env = config.envelope()?;
    let drive = config.drive_config();
    let v = &config.verify;
    let (lo, hi) = config.window();
    let options = StroboscopicOptions { resolution: config.resolution(), mutation };
    let mut strob = 0.0f64;
    for &beta0 in &v.beta0 {
        let report = verify_stroboscopic_window(&env, &drive, beta0, config.functional.order, lo, hi, &options)?;
        strob = strob.max(report.max_deviation());
    }

    let order = EffSeriesOrder::new(config.functional.order, &env)?;
    let samples: Vec<(f64, f64)> = probe_points(v.su2_samples.max(16)).map(|p| (p.x * hi.abs().max(lo.abs()), p.y * std::f64::consts::PI)).collect();
    let rot = symmetry_check(|t, _| h_rot(&drive, &env, t), &samples);
    let eff = symmetry_check(|t, b| h_eff(&env, t, b, order, drive.omega).expect("order validated"), &samples);
    let symmetry = rot.max_violation.max(eff.max_violation);
    let su2 = su2_suite(v.su2_samples);

    let checks = [
        ("stroboscopic", strob, v.tolerance),
        ("symmetry", symmetry, v.symmetry_tolerance),
        ("su2_round_trip", su2.round_trip.max(su2.unitarity), v.su2_tolerance),
        ("dexp_vs_fd", su2.dexp_relative, v.dexp_tolerance),
    ];
    let failed: Vec<&str> = checks.iter().filter(|(_, got, tol)| !(got <= tol)).map(|(name, _, _)| *name).collect();
    let mut record = ResultRecord::new("verify", config);
    record.quantities = checks.iter().map(|(name, got, _)| Quantity::new(*name, *got, 0.0)).collect();
    record.details = json!({
        "checks": checks.iter().map(|(name, got, tol)| json!({"name": name, "value": got, "tolerance": tol, "pass": got <= tol})).collect::<Vec<_>>(),
        "failed": failed,
        "mutation": mutation,
    });
    let status = if failed.is_empty() { Status::Success } else { Status::VerificationFailed };
    Ok(finish(record, started, config.output.format, status))
}
