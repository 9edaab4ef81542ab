//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line (straight to
//! stderr, so it shows without `--nocapture`) and then asserts it.

use std::io::Write;
use std::time::{Duration, Instant};

use interlace::gen::{random_psd, rng};
use interlace::mixed::mixed_char_poly;
use interlace::verify::{self, SuiteReport};
use interlace::{HermitianMatrix, MatrixEnsemble, RealPolynomial};

const SEED: u64 = 20_240_611;

fn verdict(id: u32, name: &str, passed: bool, detail: &str, elapsed: Duration, budget: Duration) {
    let in_time = elapsed <= budget;
    let status = if passed && in_time { "PASS" } else { "FAIL" };
    let line = format!(
        "criterion {id:>2} {status} {name}: {detail} ({:.3} s, budget {} s{})\n",
        elapsed.as_secs_f64(),
        budget.as_secs_f64(),
        if in_time { "" } else { ", over budget" }
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(passed && in_time, "{}", line.trim_end());
}

fn suite_verdict(id: u32, name: &str, reports: &[SuiteReport], expected: &[usize], budget: Duration, elapsed: Duration) {
    let counts_ok = reports.iter().zip(expected).all(|(r, &n)| r.instances == n);
    let passed = counts_ok && reports.iter().all(|r| r.passed());
    let detail = reports
        .iter()
        .map(|r| {
            let mut s = format!("{}: {} instances, {} checks, {} failed", r.suite, r.instances, r.checks, r.failed);
            if !r.failed_by_check.is_empty() {
                s.push_str(&format!(" {:?}", r.failed_by_check));
            }
            if let Some(first) = r.failures.first() {
                s.push_str(&format!("; first: {first}"));
            }
            s
        })
        .collect::<Vec<_>>()
        .join(" | ");
    verdict(id, name, passed, &detail, elapsed, budget);
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

#[test]
fn criterion_01_exact_small_cases() {
    let mut g = rng(SEED);
    let singles: Vec<HermitianMatrix> = (1..=5).map(|d| random_psd(&mut g, d, d, 0.7 + d as f64 / 10.0)).collect();
    let example = MatrixEnsemble::new(vec![HermitianMatrix::diag(&[1.0, -1.0]), HermitianMatrix::diag(&[-1.0, 1.0])]).unwrap();
    let ((pair, single_polys), elapsed) = timed(|| {
        let pair = mixed_char_poly(&example, &[1.0, 1.0]).unwrap();
        let polys: Vec<RealPolynomial> = singles
            .iter()
            .map(|b| mixed_char_poly(&MatrixEnsemble::new(vec![b.clone()]).unwrap(), &[1.0]).unwrap())
            .collect();
        (pair, polys)
    });
    let mut worst = pair.max_coeff_diff(&RealPolynomial::new(vec![2.0, 0.0, 1.0]));
    for (b, p) in singles.iter().zip(&single_polys) {
        // x^{d-1} (x - tr B)
        let expected = RealPolynomial::new(vec![-b.trace(), 1.0]).shift_up(b.dim() - 1);
        worst = worst.max(p.max_coeff_diff(&expected));
    }
    verdict(
        1,
        "exact small cases",
        worst <= 1e-9,
        &format!("x^2 + 2 and x^(d-1)(x - tr B) for d = 1..5, max coefficient error {worst:.2e}"),
        elapsed,
        Duration::from_millis(1),
    );
}

#[test]
fn criterion_02_oracle_equivalence() {
    let (r, t) = timed(|| verify::oracle_suite(SEED, 200));
    suite_verdict(2, "oracle equivalence (mu, mu_2, expected products)", &[r], &[200], Duration::from_secs(30), t);
}

#[test]
fn criterion_03_four_sigma() {
    let (r, t) = timed(|| verify::kls_suite(SEED, 50));
    suite_verdict(3, "4 sigma discrepancy with monotone descent", &[r], &[50], Duration::from_secs(300), t);
}

#[test]
fn criterion_04_mu2_at_most_four() {
    let (r, t) = timed(|| verify::mu2_bound_suite(SEED, 100));
    suite_verdict(4, "maxroot mu_2 <= 4 under the trace normalization", &[r], &[100], Duration::from_secs(120), t);
}

#[test]
fn criterion_05_mixed_root_bounds() {
    let (r, t) = timed(|| verify::mixed_bound_suite(SEED, 100));
    suite_verdict(5, "maxroot mu <= (1 + sqrt eps)^2 and rank-2/3 bounds", &[r], &[100], Duration::from_secs(120), t);
}

#[test]
fn criterion_06_lyapunov_selection() {
    let (r, t) = timed(|| verify::lyapunov_suite(SEED, 50));
    suite_verdict(6, "2 sqrt(eps) subset selection, eps in {0.05, 0.1, 0.25}", &[r], &[50], Duration::from_secs(300), t);
}

#[test]
fn criterion_07_partition() {
    let (r, t) = timed(|| verify::partition_suite(SEED, 30));
    suite_verdict(7, "KS_r partition bounds and PSD certificate, r in {2, 3}", &[r], &[30], Duration::from_secs(600), t);
}

#[test]
fn criterion_08_eight_sigma() {
    let (r, t) = timed(|| verify::hermitian_suite(SEED, 30));
    suite_verdict(8, "8 sigma hermitian discrepancy", &[r], &[30], Duration::from_secs(180), t);
}

#[test]
fn criterion_09_structural() {
    let (r, t) = timed(|| verify::structural_suite(SEED, 200));
    suite_verdict(9, "structural identities and root inequalities", &[r], &[200], Duration::from_secs(300), t);
}

#[test]
fn criterion_10_barrier() {
    let (r, t) = timed(|| verify::barrier_suite(SEED, 100));
    suite_verdict(10, "barrier derivatives, shape, transfer, corner certificate", &[r], &[100], Duration::from_secs(120), t);
}

#[test]
fn criterion_11_exhaustive_greedy() {
    let (r, t) = timed(|| verify::greedy_suite(SEED, 300));
    suite_verdict(11, "greedy leaf versus full leaf enumeration, m <= 3", &[r], &[300], Duration::from_secs(60), t);
}
