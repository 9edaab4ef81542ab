//! Outcomes of independent scalar random variables with small matrix
//! discrepancy `||sum (s_i - E xi_i) A_i||`.
//!
//! Each variable is centered and divided by `sigma`; the quadratic descent
//! then runs on an instance whose expected polynomial is a quadratic mixed
//! characteristic polynomial with largest root at most 4.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::engine::{greedy_descent_quadratic, DescentCertificate, FiniteDistribution};
use crate::error::{Error, Result};
use crate::linalg::{HermitianMatrix, MatrixEnsemble};

#[derive(Debug, Clone)]
pub struct DiscrepancyInstance {
    pub ensemble: MatrixEnsemble,
    pub dists: Vec<FiniteDistribution>,
}

impl DiscrepancyInstance {
    pub fn new(ensemble: MatrixEnsemble, dists: Vec<FiniteDistribution>) -> Result<Self> {
        if ensemble.len() != dists.len() {
            return Err(Error::DimensionMismatch { expected: ensemble.len(), found: dists.len() });
        }
        ensemble.require_psd()?;
        Ok(DiscrepancyInstance { ensemble, dists })
    }

    /// `sum (s_i - E xi_i) A_i`.
    pub fn deviation(&self, outcome: &[f64]) -> HermitianMatrix {
        let c: Vec<f64> = outcome.iter().zip(&self.dists).map(|(s, d)| s - d.mean()).collect();
        self.ensemble.weighted_sum(&c)
    }

    pub fn discrepancy(&self, outcome: &[f64]) -> Result<f64> {
        self.deviation(outcome).operator_norm()
    }
}

#[derive(Debug, Clone)]
pub struct DiscrepancyResult {
    pub outcome: Vec<f64>,
    /// `||sum (s_i - E xi_i) A_i||`, recomputed from the outcome.
    pub achieved: f64,
    pub sigma: f64,
    /// `4 sigma`.
    pub bound: f64,
    /// Sigma of the instance actually descended on (after reduction).
    pub solved_sigma: f64,
    /// `None` when every variable is deterministic on its matrix.
    pub certificate: Option<DescentCertificate>,
}

impl DiscrepancyResult {
    pub fn within_bound(&self, slack: f64) -> bool {
        self.achieved <= self.bound + slack
    }
}

fn sigma_of(e: &MatrixEnsemble, dists: &[FiniteDistribution]) -> Result<f64> {
    let mut diag_term: f64 = 0.0;
    let mut coeffs = Vec::with_capacity(e.len());
    for (a, d) in e.matrices().iter().zip(dists) {
        let v = d.variance();
        let t = a.trace();
        diag_term = diag_term.max(v * t * t);
        coeffs.push(v * t);
    }
    let sum_term = e.weighted_sum(&coeffs).operator_norm()?;
    Ok(diag_term.max(sum_term).sqrt())
}

/// `sigma^2 = max(max_i var(xi_i) tr(A_i)^2, ||sum_i var(xi_i) tr(A_i) A_i||)`.
pub fn sigma_bound(inst: &DiscrepancyInstance) -> Result<f64> {
    inst.ensemble.require_psd()?;
    sigma_of(&inst.ensemble, &inst.dists)
}

/// Replaces a distribution by one on at most two of its support values with
/// the same mean: the nearest values below and above the mean, or the point
/// mass at the mean when the mean is itself a support value.
pub fn two_point_reduction(d: &FiniteDistribution) -> FiniteDistribution {
    let order = d.support_order();
    let mu = d.mean();
    if let Some(i) = order
        .iter()
        .copied()
        .find(|&i| (d.values()[i] - mu).abs() <= 1e-12 * (1.0 + mu.abs()))
    {
        return FiniteDistribution::point_mass(d.values()[i]);
    }
    if order.len() <= 2 {
        return d.clone();
    }
    let vals = d.values();
    let lo = order.iter().copied().rfind(|&i| vals[i] < mu).map(|i| vals[i]);
    let hi = order.iter().copied().find(|&i| vals[i] > mu).map(|i| vals[i]);
    match (lo, hi) {
        (Some(lo), Some(hi)) => {
            let p_lo = (hi - mu) / (hi - lo);
            FiniteDistribution::new(vec![lo, hi], vec![p_lo, 1.0 - p_lo]).expect("two-point weights are valid")
        }
        // the mean of a distribution lies within its support hull
        _ => d.clone(),
    }
}

/// Finds an outcome with `||sum (s_i - E xi_i) A_i|| <= 4 sigma`.
pub fn solve_kls(inst: &DiscrepancyInstance, reduce: bool) -> Result<DiscrepancyResult> {
    inst.ensemble.require_psd()?;
    let sigma = sigma_of(&inst.ensemble, &inst.dists)?;
    let dists: Vec<FiniteDistribution> = if reduce {
        inst.dists.iter().map(two_point_reduction).collect()
    } else {
        inst.dists.clone()
    };
    let solved_sigma = sigma_of(&inst.ensemble, &dists)?;

    if solved_sigma == 0.0 {
        // every variable is constant on the matrix it multiplies
        let outcome: Vec<f64> = dists
            .iter()
            .map(|d| {
                let mu = d.mean();
                let order = d.support_order();
                let best = order
                    .iter()
                    .copied()
                    .min_by(|&a, &b| (d.values()[a] - mu).abs().total_cmp(&(d.values()[b] - mu).abs()))
                    .unwrap();
                d.values()[best]
            })
            .collect();
        let achieved = inst.discrepancy(&outcome)?;
        return Ok(DiscrepancyResult { outcome, achieved, sigma, bound: 4.0 * sigma, solved_sigma, certificate: None });
    }

    let scaled: Vec<FiniteDistribution> = dists.iter().map(|d| d.affine(1.0 / solved_sigma, -d.mean() / solved_sigma)).collect();
    let cert = greedy_descent_quadratic(&inst.ensemble, &scaled)?;
    let outcome: Vec<f64> = cert.choices.iter().enumerate().map(|(i, &c)| dists[i].values()[c]).collect();
    let achieved = inst.discrepancy(&outcome)?;
    Ok(DiscrepancyResult { outcome, achieved, sigma, bound: 4.0 * sigma, solved_sigma, certificate: Some(cert) })
}

#[derive(Debug, Clone)]
pub struct HermitianResult {
    pub outcome: Vec<f64>,
    /// `||sum (s_i - E xi_i) B_i||`.
    pub achieved: f64,
    /// Sigma computed with `|B_i|`.
    pub sigma: f64,
    /// `8 sigma`.
    pub bound: f64,
    /// The solve on the lifted PSD instance `diag(B_+, B_-)`.
    pub lifted: DiscrepancyResult,
}

/// Hermitian (not necessarily PSD) version with bound `8 sigma`.
pub fn solve_hermitian(matrices: &[HermitianMatrix], dists: &[FiniteDistribution]) -> Result<HermitianResult> {
    solve_hermitian_with(matrices, dists, true)
}

pub fn solve_hermitian_with(matrices: &[HermitianMatrix], dists: &[FiniteDistribution], reduce: bool) -> Result<HermitianResult> {
    let original = MatrixEnsemble::new(matrices.to_vec())?;
    if dists.len() != original.len() {
        return Err(Error::DimensionMismatch { expected: original.len(), found: dists.len() });
    }
    let mut abs = Vec::with_capacity(matrices.len());
    let mut lifted = Vec::with_capacity(matrices.len());
    for b in matrices {
        let (plus, minus) = b.positive_negative_parts()?;
        abs.push(plus.add(&minus));
        lifted.push(HermitianMatrix::block_diagonal(&[&plus, &minus]));
    }
    let sigma = sigma_of(&MatrixEnsemble::new(abs)?, dists)?;
    let inst = DiscrepancyInstance::new(MatrixEnsemble::new(lifted)?, dists.to_vec())?;
    let lifted = solve_kls(&inst, reduce)?;
    let c: Vec<f64> = lifted.outcome.iter().zip(dists).map(|(s, d)| s - d.mean()).collect();
    let achieved = original.weighted_sum(&c).operator_norm()?;
    Ok(HermitianResult { outcome: lifted.outcome.clone(), achieved, sigma, bound: 8.0 * sigma, lifted })
}

/// Discrepancies of `n` independently sampled outcomes, for comparison only.
pub fn random_outcome_discrepancies(inst: &DiscrepancyInstance, n: usize, seed: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let outcome: Vec<f64> = inst
            .dists
            .iter()
            .map(|d| {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let order = d.support_order();
                for &i in &order {
                    acc += d.probs()[i];
                    if u < acc {
                        return d.values()[i];
                    }
                }
                d.values()[*order.last().unwrap()]
            })
            .collect();
        out.push(inst.discrepancy(&outcome)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn ens(ms: Vec<HermitianMatrix>) -> MatrixEnsemble {
        MatrixEnsemble::new(ms).unwrap()
    }

    fn inst(ms: Vec<HermitianMatrix>, dists: Vec<FiniteDistribution>) -> DiscrepancyInstance {
        DiscrepancyInstance::new(ens(ms), dists).unwrap()
    }

    #[test]
    fn sigma_examples() {
        let b = FiniteDistribution::bernoulli(0.5).unwrap();
        let i = inst(vec![HermitianMatrix::diag(&[1.0, 0.0])], vec![b.clone()]);
        assert_abs_diff_eq!(sigma_bound(&i).unwrap(), 0.5, epsilon = 1e-15);

        let i = inst(
            vec![HermitianMatrix::diag(&[0.5, 0.0]), HermitianMatrix::diag(&[0.0, 0.5])],
            vec![b.clone(), b],
        );
        assert_abs_diff_eq!(sigma_bound(&i).unwrap(), 0.25, epsilon = 1e-15);

        let i = inst(
            vec![HermitianMatrix::diag(&[0.5, 0.0]), HermitianMatrix::diag(&[0.0, 0.5])],
            vec![FiniteDistribution::point_mass(3.0), FiniteDistribution::point_mass(-1.0)],
        );
        assert_eq!(sigma_bound(&i).unwrap(), 0.0);
    }

    #[test]
    fn reduction_examples() {
        let d = FiniteDistribution::new(vec![0.0, 3.0], vec![2.0 / 3.0, 1.0 / 3.0]).unwrap();
        assert_eq!(two_point_reduction(&d), d);

        let d = FiniteDistribution::uniform(vec![0.0, 1.0, 3.0]).unwrap();
        let r = two_point_reduction(&d);
        assert_eq!(r.values(), &[1.0, 3.0]);
        assert_abs_diff_eq!(r.probs()[0], 5.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.variance(), 14.0 / 9.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.variance(), 5.0 / 9.0, epsilon = 1e-14);

        let d = FiniteDistribution::uniform(vec![0.0, 1.0, 2.0]).unwrap();
        assert_eq!(two_point_reduction(&d), FiniteDistribution::point_mass(1.0));
    }

    #[test]
    fn solve_examples() {
        let i = inst(
            vec![HermitianMatrix::diag(&[1.0, 0.0]), HermitianMatrix::diag(&[0.0, 1.0])],
            vec![FiniteDistribution::fair_signs(); 2],
        );
        let r = solve_kls(&i, true).unwrap();
        assert_abs_diff_eq!(r.sigma, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.achieved, 1.0, epsilon = 1e-12);
        assert!(r.within_bound(1e-7));

        let i = inst(vec![HermitianMatrix::diag(&[1.0, 0.0])], vec![FiniteDistribution::bernoulli(0.5).unwrap()]);
        let r = solve_kls(&i, true).unwrap();
        assert_abs_diff_eq!(r.sigma, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(r.achieved, 0.5, epsilon = 1e-12);
        assert!(r.outcome[0] == 0.0 || r.outcome[0] == 1.0);

        let i = inst(
            vec![HermitianMatrix::diag(&[1.0, 0.0]), HermitianMatrix::diag(&[0.0, 1.0])],
            vec![FiniteDistribution::point_mass(2.0), FiniteDistribution::point_mass(-1.0)],
        );
        let r = solve_kls(&i, true).unwrap();
        assert_eq!(r.achieved, 0.0);
        assert_eq!(r.outcome, vec![2.0, -1.0]);
        assert!(r.certificate.is_none());
    }

    #[test]
    fn hermitian_examples() {
        let b = HermitianMatrix::diag(&[1.0, -1.0]);
        let r = solve_hermitian(&[b], &[FiniteDistribution::fair_signs()]).unwrap();
        assert_abs_diff_eq!(r.sigma, 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.achieved, 1.0, epsilon = 1e-12);
        assert_eq!(r.bound, 16.0);

        let psd = vec![HermitianMatrix::diag(&[0.5, 0.1]), HermitianMatrix::diag(&[0.2, 0.4])];
        let r = solve_hermitian(&psd, &[FiniteDistribution::fair_signs(), FiniteDistribution::fair_signs()]).unwrap();
        assert!(r.achieved <= r.bound + 1e-7);

        let r = solve_hermitian(
            &[HermitianMatrix::diag(&[1.0, -1.0])],
            &[FiniteDistribution::point_mass(0.3)],
        )
        .unwrap();
        assert_eq!(r.achieved, 0.0);
    }

    #[test]
    fn rejects_non_psd() {
        let r = DiscrepancyInstance::new(ens(vec![HermitianMatrix::diag(&[-1.0])]), vec![FiniteDistribution::fair_signs()]);
        assert!(matches!(r, Err(Error::NotPsd { .. })));
    }

    #[test]
    fn random_comparison_is_reproducible() {
        let i = inst(
            vec![HermitianMatrix::diag(&[1.0, 0.0]), HermitianMatrix::diag(&[0.0, 1.0])],
            vec![FiniteDistribution::fair_signs(); 2],
        );
        let a = random_outcome_discrepancies(&i, 10, 3).unwrap();
        assert_eq!(a, random_outcome_discrepancies(&i, 10, 3).unwrap());
        assert!(a.iter().all(|&x| (x - 1.0).abs() < 1e-12));
    }

    fn rank_one(u: &[f64]) -> HermitianMatrix {
        let v = nalgebra::DVector::from_iterator(u.len(), u.iter().map(|&x| num_complex::Complex64::new(x, 0.0)));
        HermitianMatrix::outer(&v, 1.0)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn reduction_keeps_mean_and_lowers_variance(vals in prop::collection::btree_set(-50i32..50, 1..6), w in prop::collection::vec(0.05f64..1.0, 6)) {
            let values: Vec<f64> = vals.iter().map(|&v| v as f64 / 7.0).collect();
            let total: f64 = w[..values.len()].iter().sum();
            let probs: Vec<f64> = w[..values.len()].iter().map(|x| x / total).collect();
            let sum: f64 = probs.iter().sum();
            let mut probs = probs;
            probs[0] += 1.0 - sum;
            let d = FiniteDistribution::new(values.clone(), probs).unwrap();
            let r = two_point_reduction(&d);
            prop_assert!((r.mean() - d.mean()).abs() <= 1e-12 * (1.0 + d.mean().abs()));
            prop_assert!(r.variance() <= d.variance() + 1e-12);
            prop_assert!(r.values().iter().all(|v| values.contains(v)));
        }

        #[test]
        fn rank_one_sigma_and_bound(d in 1usize..=4, m in 1usize..=5, us in prop::collection::vec(-1.0f64..1.0, 20), ps in prop::collection::vec(0.1f64..0.9, 5)) {
            let ms: Vec<HermitianMatrix> = (0..m).map(|i| rank_one(&us[i * 4..i * 4 + d]).scale(0.5)).collect();
            let dists: Vec<FiniteDistribution> = ps[..m].iter().map(|&p| FiniteDistribution::bernoulli(p).unwrap()).collect();
            let i = inst(ms.clone(), dists.clone());
            let sigma = sigma_bound(&i).unwrap();
            let sq: Vec<HermitianMatrix> = ms.iter().map(|a| HermitianMatrix::symmetrized(a.matrix() * a.matrix())).collect();
            let vars: Vec<f64> = dists.iter().map(|x| x.variance()).collect();
            let alt = ens(sq).weighted_sum(&vars).operator_norm().unwrap();
            let diag = ms.iter().zip(&vars).map(|(a, v)| v * a.trace() * a.trace()).fold(0.0, f64::max);
            prop_assert!((sigma * sigma - alt.max(diag)).abs() <= 1e-10);
            let r = solve_kls(&i, true).unwrap();
            prop_assert!(r.achieved <= 4.0 * sigma + 1e-7);
        }

        #[test]
        fn shift_and_scale_behaviour(d in 1usize..=3, m in 1usize..=4, us in prop::collection::vec(-1.0f64..1.0, 16), shift in -3.0f64..3.0, lambda in 0.2f64..5.0) {
            let ms: Vec<HermitianMatrix> = (0..m).map(|i| rank_one(&us[i * 4..i * 4 + d]).scale(0.5)).collect();
            let dists: Vec<FiniteDistribution> = (0..m).map(|i| FiniteDistribution::new(vec![-1.0, 0.5 + i as f64], vec![0.4, 0.6]).unwrap()).collect();
            let base = solve_kls(&inst(ms.clone(), dists.clone()), true).unwrap();
            let shifted = solve_kls(&inst(ms.clone(), dists.iter().map(|x| x.affine(1.0, shift)).collect()), true).unwrap();
            prop_assert!((base.sigma - shifted.sigma).abs() <= 1e-9);
            prop_assert!((base.achieved - shifted.achieved).abs() <= 1e-9);
            if let (Some(a), Some(b)) = (&base.certificate, &shifted.certificate) {
                for (x, y) in a.maxroots.iter().zip(&b.maxroots) {
                    prop_assert!((x - y).abs() <= 1e-9);
                }
            }
            let scaled = solve_kls(&inst(ms, dists.iter().map(|x| x.affine(lambda, 0.0)).collect()), true).unwrap();
            prop_assert!((scaled.sigma - lambda * base.sigma).abs() <= 1e-9 * lambda * base.sigma.max(1e-300));
            prop_assert!((scaled.achieved - lambda * base.achieved).abs() <= 1e-9 * (lambda * base.achieved).max(1e-12));
        }
    }
}
