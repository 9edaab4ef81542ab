//! Command-line front end. `run` maps a parsed [`Cli`] to a report and an
//! exit code: 0 when every asserted bound holds, 2 on a violated bound, 1 on
//! input errors.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::discrepancy::{random_outcome_discrepancies, solve_hermitian_with, solve_kls, DiscrepancyInstance};
use crate::engine::{DescentCertificate, FiniteDistribution, DESCENT_SLACK};
use crate::error::{Error, Result};
use crate::gen::{gen_instance, GenKind, GenOptions};
use crate::io::{parse_ensemble, write_ensemble, BoundCheck, EnsembleFile, InstanceStats, RunReport};
use crate::linalg::{HermitianMatrix, MatrixEnsemble};
use crate::lyapunov::{ks_r_partition, lyapunov_select, mixed_bound_reference, weighted_approx, LyapunovInstance, CERT_TOL};
use crate::mixed::{mixed_char_poly, quadratic_mixed_char_poly};
use crate::verify;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;

const SLACK: f64 = 1e-7;
const REAL_TOL: f64 = 1e-7;

#[derive(Debug, Parser)]
#[command(name = "interlace", version, about = "Mixed characteristic polynomials and constructive discrepancy bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the JSON report to this path.
    #[arg(long, global = true)]
    pub json: Option<PathBuf>,
    /// Appends a deliberately violated check (exercises the exit-code contract).
    #[arg(long, global = true, hide = true)]
    pub inject_violation: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mixed characteristic polynomial of a signed ensemble.
    McpEval(McpEvalArgs),
    /// Outcome with ||sum (s_i - E xi_i) A_i|| <= 4 sigma for PSD A_i.
    Discrepancy(DiscrepancyArgs),
    /// Outcome with ||sum (s_i - E xi_i) B_i|| <= 8 sigma for hermitian B_i.
    Hermitian(HermitianArgs),
    /// Subset I_0 with ||sum_{I_0} T_i - sum t_i T_i|| <= 2 sqrt(eps).
    Lyapunov(LyapunovArgs),
    /// Partition into r blocks with ||sum_{I_k} A_i|| <= t_k (1 + sqrt(r eps))^2.
    Partition(PartitionArgs),
    /// Run seeded verification suites.
    Verify(VerifyArgs),
    /// Generate a random instance file.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
pub struct McpEvalArgs {
    /// Ensemble file (JSON).
    #[arg(long)]
    pub input: PathBuf,
    /// Scalars eps_i (default all 1).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub signs: Option<Vec<f64>>,
    /// Evaluate mu_2 instead.
    #[arg(long)]
    pub quadratic: bool,
}

#[derive(Debug, Args)]
pub struct DiscrepancyArgs {
    /// Ensemble file (JSON).
    #[arg(long)]
    pub input: PathBuf,
    /// Also sample N random outcomes and report their norms (information only).
    #[arg(long, default_value_t = 0)]
    pub compare_random: usize,
    /// Skip the two-point reduction.
    #[arg(long)]
    pub no_reduce: bool,
    /// Seed for the random comparison outcomes.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct HermitianArgs {
    /// Ensemble file (JSON).
    #[arg(long)]
    pub input: PathBuf,
    /// Skip the two-point reduction.
    #[arg(long)]
    pub no_reduce: bool,
}

#[derive(Debug, Args)]
pub struct LyapunovArgs {
    /// Ensemble file (JSON).
    #[arg(long)]
    pub input: PathBuf,
    /// Approximate t * sum T_i with one common weight instead of the file's weights.
    #[arg(long)]
    pub t: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PartitionArgs {
    /// Ensemble file (JSON).
    #[arg(long)]
    pub input: PathBuf,
    /// Block proportions; overrides the file.
    #[arg(long, value_delimiter = ',')]
    pub proportions: Option<Vec<f64>>,
    /// Equal proportions for r blocks when neither the file nor --proportions gives them.
    #[arg(long, default_value_t = 2)]
    pub r: usize,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// One of oracle, structural, barrier, greedy, bounds, descent, all.
    #[arg(long, default_value = "all")]
    pub suite: String,
    /// Base seed for the suites.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// psd-trace-capped, rank-one, lyapunov or ksr.
    #[arg(long)]
    pub kind: String,
    /// Matrix dimension.
    #[arg(long)]
    pub d: usize,
    /// Number of matrices.
    #[arg(long)]
    pub m: usize,
    /// Trace cap (largest trace of a single matrix).
    #[arg(long)]
    pub epsilon: f64,
    /// Generator seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of blocks for ksr instances.
    #[arg(long, default_value_t = 2)]
    pub blocks: usize,
    /// Output file (stdout when absent).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

pub struct Outcome {
    pub report: Option<RunReport>,
    pub exit_code: i32,
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::McpEval(_) => "mcp-eval",
        Command::Discrepancy(_) => "discrepancy",
        Command::Hermitian(_) => "hermitian",
        Command::Lyapunov(_) => "lyapunov",
        Command::Partition(_) => "partition",
        Command::Verify(_) => "verify",
        Command::Gen(_) => "gen",
    }
}

/// Runs the command, printing the table to `out` and errors and violations to `err`.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let start = Instant::now();
    let result = match &cli.command {
        Command::McpEval(a) => mcp_eval(a),
        Command::Discrepancy(a) => discrepancy(a),
        Command::Hermitian(a) => hermitian(a),
        Command::Lyapunov(a) => lyapunov(a),
        Command::Partition(a) => partition(a),
        Command::Verify(a) => verify_cmd(a),
        Command::Gen(a) => gen_cmd(a, out),
    };
    let mut report = match result {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            let code = if matches!(e, Error::DescentIncrease { .. }) { EXIT_VIOLATION } else { EXIT_INPUT };
            return Outcome { report: None, exit_code: code };
        }
    };
    report.command = command_name(&cli.command).to_string();
    report.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    if cli.inject_violation {
        report.checks.push(BoundCheck::new("injected violation", 1.0, 0.0, 0.0));
    }
    // generated files on stdout keep the table off stdout
    if matches!(&cli.command, Command::Gen(g) if g.output.is_none()) {
        print_table(&report, err);
    } else {
        print_table(&report, out);
    }
    if let Some(path) = &cli.json {
        if let Err(e) = std::fs::write(path, report.to_json()) {
            let _ = writeln!(err, "error: {}: {e}", path.display());
            return Outcome { report: Some(report), exit_code: EXIT_INPUT };
        }
    }
    let mut code = EXIT_OK;
    for c in report.checks.iter().filter(|c| !c.holds) {
        let _ = writeln!(err, "VIOLATED {}: {:.12} > {:.12}", c.name, c.achieved, c.bound);
        code = EXIT_VIOLATION;
    }
    Outcome { report: Some(report), exit_code: code }
}

fn print_table(r: &RunReport, out: &mut dyn Write) {
    let _ = writeln!(out, "command: {}", r.command);
    if let Some(seed) = r.seed {
        let _ = writeln!(out, "seed: {seed}");
    }
    if let Some(s) = &r.stats {
        let _ = write!(out, "d = {}, m = {}, eps = {:.6}", s.d, s.m, s.epsilon);
        if let Some(sigma) = s.sigma {
            let _ = write!(out, ", sigma = {sigma:.6}");
        }
        let _ = writeln!(out);
    }
    if let Some(obj) = r.result.as_object() {
        for (k, v) in obj {
            match v.as_array() {
                Some(items) if items.iter().all(|x| x.is_object()) && !items.is_empty() => {
                    let _ = writeln!(out, "{k}:");
                    for item in items {
                        let mut item = item.clone();
                        item.as_object_mut().map(|o| o.remove("failures"));
                        let _ = writeln!(out, "  {item}");
                    }
                }
                _ => {
                    let _ = writeln!(out, "{k}: {v}");
                }
            }
        }
    }
    if !r.maxroot_trace.is_empty() {
        let trace: Vec<String> = r.maxroot_trace.iter().map(|x| format!("{x:.9}")).collect();
        let _ = writeln!(out, "maxroot trace: {}", trace.join(" "));
    }
    if !r.checks.is_empty() {
        let width = r.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        let _ = writeln!(out, "{:<width$}  {:>16}  {:>16}  status", "check", "achieved", "bound");
        for c in &r.checks {
            let status = if c.holds { "ok" } else { "VIOLATED" };
            let _ = writeln!(out, "{:<width$}  {:>16.10}  {:>16.10}  {status}", c.name, c.achieved, c.bound);
        }
    }
    let _ = writeln!(out, "wall time: {:.1} ms", r.wall_time_ms);
}

fn report(stats: Option<InstanceStats>, result: serde_json::Value, checks: Vec<BoundCheck>, trace: Vec<f64>) -> RunReport {
    RunReport { command: String::new(), seed: None, stats, result, checks, maxroot_trace: trace, wall_time_ms: 0.0 }
}

fn stats_of(e: &MatrixEnsemble, sigma: Option<f64>) -> InstanceStats {
    let epsilon = e.matrices().iter().map(|a| a.trace()).fold(f64::NEG_INFINITY, f64::max);
    InstanceStats { d: e.dim(), m: e.len(), epsilon, sigma }
}

fn descent_checks(cert: Option<&DescentCertificate>, checks: &mut Vec<BoundCheck>) -> Vec<f64> {
    let Some(cert) = cert else { return Vec::new() };
    for (k, w) in cert.maxroots.windows(2).enumerate() {
        checks.push(BoundCheck::new(format!("descent step {k} maxroot"), w[1], w[0], DESCENT_SLACK));
    }
    cert.maxroots.clone()
}

fn load(path: &std::path::Path) -> Result<(EnsembleFile, MatrixEnsemble)> {
    let file = parse_ensemble(path)?;
    let e = file.ensemble()?;
    Ok((file, e))
}

fn dists_or_signs(file: &EnsembleFile, m: usize) -> Result<(Vec<FiniteDistribution>, bool)> {
    Ok(match file.dists()? {
        Some(d) => (d, false),
        None => (vec![FiniteDistribution::fair_signs(); m], true),
    })
}

/// `sigma` from `(var, tr)` pairs and the weighted sum, recomputed here.
fn sigma_of(mats: &[HermitianMatrix], dists: &[FiniteDistribution]) -> Result<f64> {
    let coeffs: Vec<f64> = mats.iter().zip(dists).map(|(a, d)| d.variance() * a.trace()).collect();
    let diag = mats.iter().zip(&coeffs).map(|(a, c)| c * a.trace()).fold(0.0, f64::max);
    let sum = HermitianMatrix::linear_combination(mats[0].dim(), &mats.iter().collect::<Vec<_>>(), &coeffs).operator_norm()?;
    Ok(diag.max(sum).sqrt())
}

fn deviation(mats: &[HermitianMatrix], dists: &[FiniteDistribution], outcome: &[f64]) -> Result<f64> {
    let c: Vec<f64> = outcome.iter().zip(dists).map(|(s, d)| s - d.mean()).collect();
    HermitianMatrix::linear_combination(mats[0].dim(), &mats.iter().collect::<Vec<_>>(), &c).operator_norm()
}

fn mcp_eval(a: &McpEvalArgs) -> Result<RunReport> {
    let (_, e) = load(&a.input)?;
    let m = e.len();
    let signs = a.signs.clone().unwrap_or_else(|| vec![1.0; m]);
    if signs.len() != m {
        return Err(Error::Validation {
            invariant: "LengthMismatch".into(),
            detail: format!("--signs has {} entries for {m} matrices", signs.len()),
        });
    }
    let p = if a.quadratic { quadratic_mixed_char_poly(&e)? } else { mixed_char_poly(&e, &signs)? };
    let rep = p.root_report(REAL_TOL)?;
    let mut result = json!({
        "polynomial": if a.quadratic { "mu_2" } else { "mu" },
        "coefficients": p.coeffs(),
        "real_rooted": rep.real_rooted,
        "max_imag_residual": rep.max_imag_residual,
    });
    let mut checks = Vec::new();
    let psd = e.first_non_psd()?.is_none();
    if rep.real_rooted {
        result["maxroot"] = json!(rep.maxroot);
        result["minroot"] = json!(rep.minroot);
    }
    if psd && !a.quadratic && rep.real_rooted {
        let top = p.maxroot_certified(1e-12)?;
        let neg: Vec<f64> = signs.iter().map(|s| -s).collect();
        let q = mixed_char_poly(&e, &neg)?;
        let pq = p.mul(&q).maxroot_certified(1e-12)?;
        checks.push(BoundCheck::new("||sum e_i A_i|| <= maxroot(mu[eA] mu[-eA])", e.weighted_sum(&signs).operator_norm()?, pq, SLACK));
        if signs.iter().all(|&s| s == 1.0) {
            checks.push(BoundCheck::new("||sum A_i|| <= maxroot mu", e.sum().operator_norm()?, top, SLACK));
            if e.stats()?.sum_leq_identity {
                checks.push(BoundCheck::new("maxroot mu <= (1 + sqrt eps)^2", top, mixed_bound_reference(&e, None)?, SLACK));
            }
        }
    }
    Ok(report(Some(stats_of(&e, None)), result, checks, Vec::new()))
}

fn discrepancy(a: &DiscrepancyArgs) -> Result<RunReport> {
    let (file, e) = load(&a.input)?;
    let (dists, defaulted) = dists_or_signs(&file, e.len())?;
    let inst = DiscrepancyInstance::new(e.clone(), dists.clone())?;
    let res = solve_kls(&inst, !a.no_reduce)?;
    let sigma = sigma_of(e.matrices(), &dists)?;
    let achieved = deviation(e.matrices(), &dists, &res.outcome)?;
    let mut checks = vec![BoundCheck::new("||sum (s_i - E xi_i) A_i|| <= 4 sigma", achieved, 4.0 * sigma, SLACK)];
    let trace = descent_checks(res.certificate.as_ref(), &mut checks);
    let mut result = json!({
        "outcome": res.outcome,
        "achieved": achieved,
        "bound": 4.0 * sigma,
        "fair_signs_default": defaulted,
        "two_point_reduction": !a.no_reduce,
    });
    let mut r = report(Some(stats_of(&e, Some(sigma))), serde_json::Value::Null, checks, trace);
    if a.compare_random > 0 {
        let norms = random_outcome_discrepancies(&inst, a.compare_random, a.seed)?;
        let mean = norms.iter().sum::<f64>() / norms.len() as f64;
        let max = norms.iter().copied().fold(0.0, f64::max);
        let min = norms.iter().copied().fold(f64::INFINITY, f64::min);
        result["random_outcomes"] = json!({ "samples": norms.len(), "min": min, "mean": mean, "max": max });
        r.seed = Some(a.seed);
    }
    r.result = result;
    Ok(r)
}

fn hermitian(a: &HermitianArgs) -> Result<RunReport> {
    let (file, e) = load(&a.input)?;
    let (dists, defaulted) = dists_or_signs(&file, e.len())?;
    let res = solve_hermitian_with(e.matrices(), &dists, !a.no_reduce)?;
    let abs = e.matrices().iter().map(|b| b.abs()).collect::<Result<Vec<_>>>()?;
    let sigma = sigma_of(&abs, &dists)?;
    let achieved = deviation(e.matrices(), &dists, &res.outcome)?;
    let mut checks = vec![BoundCheck::new("||sum (s_i - E xi_i) B_i|| <= 8 sigma", achieved, 8.0 * sigma, SLACK)];
    let trace = descent_checks(res.lifted.certificate.as_ref(), &mut checks);
    let result = json!({
        "outcome": res.outcome,
        "achieved": achieved,
        "bound": 8.0 * sigma,
        "fair_signs_default": defaulted,
    });
    Ok(report(Some(stats_of(&e, Some(sigma))), result, checks, trace))
}

fn lyapunov(a: &LyapunovArgs) -> Result<RunReport> {
    let (file, e) = load(&a.input)?;
    let stats = e.stats()?;
    let eps = stats.epsilon;
    let (sel, bound, result) = match a.t {
        Some(t) => {
            let w = weighted_approx(&e, t)?;
            let bound = w.bound;
            let extra = json!({ "t": t, "direct_bound": w.direct_bound, "partition_bound": w.partition_bound });
            (w.selection, bound, extra)
        }
        None => {
            let weights = file.weights.clone().ok_or_else(|| Error::Validation {
                invariant: "MissingWeights".into(),
                detail: "lyapunov needs a weights section or --t".into(),
            })?;
            let sel = lyapunov_select(&LyapunovInstance::new(e.clone(), weights)?)?;
            (sel, 2.0 * eps.sqrt(), json!({}))
        }
    };
    let weights: Vec<f64> = match a.t {
        Some(t) => vec![t; e.len()],
        None => file.weights.clone().unwrap_or_default(),
    };
    let coeffs: Vec<f64> = (0..e.len()).map(|i| if sel.indices.contains(&i) { 1.0 } else { 0.0 } - weights[i]).collect();
    let achieved = e.weighted_sum(&coeffs).operator_norm()?;
    let mut checks = vec![BoundCheck::new("||sum_{I_0} T_i - sum t_i T_i|| <= bound", achieved, bound, SLACK)];
    let trace = descent_checks(sel.solve.certificate.as_ref(), &mut checks);
    let mut result = result;
    result["selected"] = json!(sel.indices);
    result["achieved"] = json!(achieved);
    result["bound"] = json!(bound);
    Ok(report(Some(stats_of(&e, None)), result, checks, trace))
}

fn partition(a: &PartitionArgs) -> Result<RunReport> {
    let (file, e) = load(&a.input)?;
    let props = match (&a.proportions, &file.proportions) {
        (Some(p), _) | (None, Some(p)) => p.clone(),
        (None, None) if a.r > 0 => vec![1.0 / a.r as f64; a.r],
        _ => return Err(Error::BadProportions("need at least one block".into())),
    };
    let res = ks_r_partition(&e, &props)?;
    let r = props.len() as f64;
    let eps = res.epsilon;
    let lifted_bound = (1.0 + (r * eps).sqrt()).powi(2);
    let slack = 2.0 * (r * eps).sqrt() + r * eps;
    let total = e.sum();
    let d = e.dim();
    let mut checks = Vec::new();
    for (k, idx) in res.blocks.iter().enumerate() {
        let part = e.subset_sum(idx);
        checks.push(BoundCheck::new(format!("||sum_(I_{k}) A_i|| <= t_{k} (1 + sqrt(r eps))^2"), part.operator_norm()?, props[k] * lifted_bound, SLACK));
        let margin = total.add(&HermitianMatrix::identity(d).scale(slack)).scale(props[k]).sub(&part).min_eigenvalue()?;
        checks.push(BoundCheck::new(format!("-lambda_min(t_{k} (A + slack I) - sum_(I_{k}) A_i) <= 0"), -margin, 0.0, CERT_TOL));
        checks.push(BoundCheck::new(format!("||sum_(I_{k}) A_i - t_{k} A|| <= 2 sqrt(r eps) + r eps"), part.sub(&total.scale(props[k])).operator_norm()?, slack, SLACK));
    }
    let trace = descent_checks(res.certificate.as_ref(), &mut checks);
    let result = json!({
        "blocks": res.blocks,
        "proportions": props,
        "block_norms": res.block_norms,
        "sharp_two_sided_bounds": res.sharp_two_sided_bounds,
        "completion_size": res.completion_size,
    });
    Ok(report(Some(stats_of(&e, None)), result, checks, trace))
}

fn verify_cmd(a: &VerifyArgs) -> Result<RunReport> {
    let reports = verify::run_suite(&a.suite, a.seed)?;
    let checks = reports
        .iter()
        .map(|r| BoundCheck::new(format!("{} failed checks (of {})", r.suite, r.checks), r.failed as f64, 0.0, 0.0))
        .collect();
    let mut r = report(None, json!({ "suites": reports }), checks, Vec::new());
    r.seed = Some(a.seed);
    Ok(r)
}

fn gen_cmd(a: &GenArgs, out: &mut dyn Write) -> Result<RunReport> {
    let kind: GenKind = a.kind.parse()?;
    let opts = GenOptions { blocks: a.blocks, ..GenOptions::new(kind, a.d, a.m, a.epsilon, a.seed) };
    let file = gen_instance(&opts)?;
    let e = file.ensemble()?;
    let stats = e.stats()?;
    let mut checks = vec![
        BoundCheck::new("max tr A_i <= eps", stats.epsilon, a.epsilon, 0.0),
        BoundCheck::new("lambda_max(sum A_i) <= 1", stats.sum_max_eigenvalue, 1.0, 0.0),
    ];
    if matches!(kind, GenKind::RankOne | GenKind::Ksr) {
        let second = e
            .matrices()
            .iter()
            .map(|m| m.eigenvalues().map(|ev| if ev.len() > 1 { ev[ev.len() - 2].abs() } else { 0.0 }))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        checks.push(BoundCheck::new("second eigenvalue", second, 1e-10, 0.0));
    }
    match &a.output {
        Some(path) => write_ensemble(path, &file)?,
        None => {
            let _ = out.write_all(file.to_json().as_bytes());
        }
    }
    let mut r = report(
        Some(stats_of(&e, None)),
        json!({ "kind": kind.as_str(), "output": a.output.as_ref().map(|p| p.display().to_string()) }),
        checks,
        Vec::new(),
    );
    r.seed = Some(a.seed);
    Ok(r)
}
