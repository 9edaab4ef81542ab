//! Seeded random instance generation.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::engine::FiniteDistribution;
use crate::error::{Error, Result};
use crate::io::EnsembleFile;
use crate::linalg::{HermitianMatrix, MatrixEnsemble};

pub const MAX_GEN_DIM: usize = 10;
pub const MAX_GEN_INDICES: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenKind {
    PsdTraceCapped,
    RankOne,
    Lyapunov,
    Ksr,
}

impl GenKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GenKind::PsdTraceCapped => "psd-trace-capped",
            GenKind::RankOne => "rank-one",
            GenKind::Lyapunov => "lyapunov",
            GenKind::Ksr => "ksr",
        }
    }
}

impl fmt::Display for GenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GenKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [GenKind::PsdTraceCapped, GenKind::RankOne, GenKind::Lyapunov, GenKind::Ksr]
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown instance kind {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenOptions {
    pub kind: GenKind,
    pub d: usize,
    pub m: usize,
    pub epsilon: f64,
    pub seed: u64,
    /// Number of blocks for `ksr` instances.
    pub blocks: usize,
}

impl GenOptions {
    pub fn new(kind: GenKind, d: usize, m: usize, epsilon: f64, seed: u64) -> Self {
        GenOptions { kind, d, m, epsilon, seed, blocks: 2 }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_vector<R: Rng>(rng: &mut R, d: usize) -> DVector<Complex64> {
    DVector::from_fn(d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    })
}

/// Sum of `rank` complex Gaussian outer products, scaled to trace `trace`.
pub fn random_psd<R: Rng>(rng: &mut R, d: usize, rank: usize, trace: f64) -> HermitianMatrix {
    let mut acc = HermitianMatrix::zeros(d);
    for _ in 0..rank {
        acc = acc.add(&HermitianMatrix::outer(&gaussian_vector(rng, d), 1.0));
    }
    let t = acc.trace();
    if t > 0.0 {
        acc.scale(trace / t)
    } else {
        acc
    }
}

/// `(G + G*)/2` with complex Gaussian `G`, scaled to Frobenius norm `norm`.
pub fn random_hermitian<R: Rng>(rng: &mut R, d: usize, norm: f64) -> HermitianMatrix {
    let g = DMatrix::from_fn(d, d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    });
    let h = HermitianMatrix::from_matrix((&g + g.adjoint()).scale(0.5), 1e-12).expect("symmetrized matrix is hermitian");
    let f = h.frobenius_norm();
    if f > 0.0 {
        h.scale(norm / f)
    } else {
        h
    }
}

/// A two-point distribution with distinct values in `[-2, 2]` and a probability in `[0.1, 0.9]`.
pub fn random_two_point<R: Rng>(rng: &mut R) -> FiniteDistribution {
    let a: f64 = rng.random_range(-2.0..2.0);
    let gap: f64 = rng.random_range(0.25..2.0);
    let p: f64 = rng.random_range(0.1..0.9);
    FiniteDistribution::new(vec![a, a + gap], vec![1.0 - p, p]).expect("valid two-point distribution")
}

/// Divides by `max(1, ||sum A||)`; repeats on rounding overshoot so the
/// result satisfies `sum A <= I` as computed.
pub fn normalize_to_contraction(mats: Vec<HermitianMatrix>) -> Result<Vec<HermitianMatrix>> {
    let mut mats = mats;
    for _ in 0..8 {
        let e = MatrixEnsemble::new(mats.clone())?;
        let top = e.sum().max_eigenvalue()?;
        if top <= 1.0 {
            return Ok(mats);
        }
        let s = top * (1.0 + 4.0 * f64::EPSILON);
        mats = mats.iter().map(|a| a.scale(1.0 / s)).collect();
    }
    Err(Error::NumericalFailure("normalization did not converge".into()))
}

/// Scales by the largest `s <= 1` with `max tr(s B_i) <= 1` and
/// `||sum tr(s B_i) s B_i|| <= 1`.
pub fn normalize_qx(mats: Vec<HermitianMatrix>) -> Result<Vec<HermitianMatrix>> {
    let e = MatrixEnsemble::new(mats)?;
    let traces: Vec<f64> = e.matrices().iter().map(|b| b.trace()).collect();
    let max_trace = traces.iter().copied().fold(0.0, f64::max);
    let weighted = e.weighted_sum(&traces).max_eigenvalue()?;
    let mut s: f64 = 1.0;
    if max_trace > 0.0 {
        s = s.min(1.0 / max_trace);
    }
    if weighted > 0.0 {
        s = s.min(1.0 / weighted.sqrt());
    }
    let s = s * (1.0 - 8.0 * f64::EPSILON);
    Ok(e.matrices().iter().map(|b| b.scale(s)).collect())
}

/// Random instance satisfying `A_i >= 0`, `tr A_i <= epsilon`, `sum A_i <= I`.
pub fn gen_instance(opts: &GenOptions) -> Result<EnsembleFile> {
    let GenOptions { kind, d, m, epsilon, seed, blocks } = *opts;
    if d == 0 {
        return Err(Error::EmptyMatrix);
    }
    if m == 0 {
        return Err(Error::EmptyEnsemble);
    }
    if d > MAX_GEN_DIM {
        return Err(Error::SizeGuard { what: "dimension d", value: d, limit: MAX_GEN_DIM });
    }
    if m > MAX_GEN_INDICES {
        return Err(Error::SizeGuard { what: "ensemble size m", value: m, limit: MAX_GEN_INDICES });
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!("epsilon {epsilon} must be positive")));
    }
    if kind == GenKind::Ksr && blocks == 0 {
        return Err(Error::BadProportions("need at least one block".into()));
    }
    let mut rng = rng(seed);
    let mats: Vec<HermitianMatrix> = (0..m)
        .map(|_| {
            let rank = match kind {
                GenKind::RankOne | GenKind::Ksr => 1,
                GenKind::PsdTraceCapped | GenKind::Lyapunov => rng.random_range(1..=d),
            };
            let trace = epsilon * rng.random_range(0.5..1.0);
            random_psd(&mut rng, d, rank, trace)
        })
        .collect();
    let mats = normalize_to_contraction(mats)?;
    let mut file = EnsembleFile::from_ensemble(&MatrixEnsemble::new(mats)?);
    match kind {
        GenKind::PsdTraceCapped | GenKind::RankOne => {
            let dists: Vec<FiniteDistribution> = (0..m).map(|_| random_two_point(&mut rng)).collect();
            file = file.with_distributions(&dists);
        }
        GenKind::Lyapunov => {
            file.weights = Some((0..m).map(|_| rng.random_range(0.0..=1.0)).collect());
        }
        GenKind::Ksr => {
            let raw: Vec<f64> = (0..blocks).map(|_| rng.random_range(0.5..1.5)).collect();
            let total: f64 = raw.iter().sum();
            let mut props: Vec<f64> = raw.iter().map(|x| x / total).collect();
            let head: f64 = props[..blocks - 1].iter().sum();
            props[blocks - 1] = 1.0 - head;
            file.proportions = Some(props);
        }
    }
    Ok(file)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_capped_example() {
        let f = gen_instance(&GenOptions::new(GenKind::PsdTraceCapped, 4, 6, 0.25, 1)).unwrap();
        let stats = f.ensemble().unwrap().stats().unwrap();
        assert!(stats.epsilon <= 0.25);
        assert!(stats.sum_max_eigenvalue <= 1.0);
        assert!(stats.all_psd);
        assert_eq!(f.dists().unwrap().unwrap().len(), 6);
    }

    #[test]
    fn rank_one_instances_have_rank_one() {
        let f = gen_instance(&GenOptions::new(GenKind::RankOne, 5, 8, 0.5, 3)).unwrap();
        for a in f.ensemble().unwrap().matrices() {
            let ev = a.eigenvalues().unwrap();
            assert!(ev[ev.len() - 2].abs() <= 1e-10, "{ev:?}");
        }
    }

    #[test]
    fn repeated_seed_is_byte_identical() {
        for kind in [GenKind::PsdTraceCapped, GenKind::RankOne, GenKind::Lyapunov, GenKind::Ksr] {
            let o = GenOptions { blocks: 3, ..GenOptions::new(kind, 3, 5, 0.3, 42) };
            let a = gen_instance(&o).unwrap().to_json();
            assert_eq!(a, gen_instance(&o).unwrap().to_json());
            let back = EnsembleFile::from_json(&a).unwrap();
            assert_eq!(back.to_json(), a);
            assert_ne!(a, gen_instance(&GenOptions { seed: 43, ..o }).unwrap().to_json());
        }
    }

    #[test]
    fn ksr_proportions_sum_to_one() {
        let f = gen_instance(&GenOptions { blocks: 3, ..GenOptions::new(GenKind::Ksr, 4, 6, 0.2, 9) }).unwrap();
        let p = f.proportions.unwrap();
        assert_eq!(p.len(), 3);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn size_guard() {
        assert!(matches!(
            gen_instance(&GenOptions::new(GenKind::RankOne, 11, 2, 0.1, 0)),
            Err(Error::SizeGuard { .. })
        ));
        assert!(matches!(
            gen_instance(&GenOptions::new(GenKind::RankOne, 2, 15, 0.1, 0)),
            Err(Error::SizeGuard { .. })
        ));
        assert!("nope".parse::<GenKind>().is_err());
        assert_eq!("ksr".parse::<GenKind>().unwrap(), GenKind::Ksr);
    }
}
