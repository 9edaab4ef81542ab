//! Greedy descent over an interlacing family.
//!
//! Level `k` fixes the `k`-th random index to each of its admissible values in
//! turn, evaluates the conditional expected polynomial (earlier indices fixed
//! to their chosen values, later indices still random), and keeps a branch of
//! smallest largest root. For an interlacing family that root never exceeds
//! the parent's, which the certificate records level by level.

use crate::error::{Error, Result};
use crate::linalg::{HermitianMatrix, MatrixEnsemble};
use crate::mixed::{mixed_char_poly_of, DerivativeSpec, SubsetDerivativeTable};
use crate::poly::RealPolynomial;

pub const MAXROOT_TOL: f64 = 1e-10;
pub const TIE_TOL: f64 = 1e-9;
pub const REAL_ROOT_TOL: f64 = 1e-7;
pub const DESCENT_SLACK: f64 = 1e-7;

const PROB_SUM_TOL: f64 = 1e-12;
const ENVELOPE_ULPS: f64 = 4.0;

/// Finite-support real random variable.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteDistribution {
    values: Vec<f64>,
    probs: Vec<f64>,
}

impl FiniteDistribution {
    pub fn new(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        Self::validated(values, probs, 0)
    }

    /// As [`Self::new`], tagging errors with the variable's index.
    pub fn validated(values: Vec<f64>, probs: Vec<f64>, index: usize) -> Result<Self> {
        let bad = |reason: String| Error::InvalidDistribution { index, reason };
        if values.is_empty() {
            return Err(bad("empty support".into()));
        }
        if values.len() != probs.len() {
            return Err(bad(format!("{} values but {} probabilities", values.len(), probs.len())));
        }
        if values.iter().chain(&probs).any(|x| !x.is_finite()) {
            return Err(bad("non-finite entry".into()));
        }
        if probs.iter().any(|&p| p < 0.0) {
            return Err(bad("negative probability".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(bad(format!("probabilities sum to {total}")));
        }
        for i in 0..values.len() {
            for j in i + 1..values.len() {
                if values[i] == values[j] {
                    return Err(bad(format!("repeated value {}", values[i])));
                }
            }
        }
        Ok(FiniteDistribution { values, probs })
    }

    pub fn point_mass(v: f64) -> Self {
        FiniteDistribution { values: vec![v], probs: vec![1.0] }
    }

    /// Values `{0, 1}` with `P(1) = t`.
    pub fn bernoulli(t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidDistribution { index: 0, reason: format!("Bernoulli parameter {t}") });
        }
        if t == 0.0 {
            return Ok(Self::point_mass(0.0));
        }
        if t == 1.0 {
            return Ok(Self::point_mass(1.0));
        }
        Ok(FiniteDistribution { values: vec![0.0, 1.0], probs: vec![1.0 - t, t] })
    }

    pub fn fair_signs() -> Self {
        FiniteDistribution { values: vec![-1.0, 1.0], probs: vec![0.5, 0.5] }
    }

    pub fn uniform(values: Vec<f64>) -> Result<Self> {
        let p = 1.0 / values.len() as f64;
        let n = values.len();
        Self::new(values, vec![p; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().zip(&self.probs).map(|(v, p)| v * p).sum()
    }

    pub fn second_moment(&self) -> f64 {
        self.values.iter().zip(&self.probs).map(|(v, p)| v * v * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        self.values.iter().zip(&self.probs).map(|(v, p)| p * (v - mu) * (v - mu)).sum()
    }

    /// Indices of positive-probability values, sorted by value.
    pub fn support_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.values.len()).filter(|&i| self.probs[i] > 0.0).collect();
        idx.sort_by(|&a, &b| self.values[a].total_cmp(&self.values[b]));
        idx
    }

    pub fn is_point_mass(&self) -> bool {
        self.support_order().len() == 1
    }

    /// Position of `v` among the positive-probability values.
    pub fn position_of(&self, v: f64) -> Option<usize> {
        self.support_order()
            .into_iter()
            .find(|&i| (self.values[i] - v).abs() <= 1e-12 * (1.0 + v.abs()))
    }

    /// Distribution of `alpha * xi + beta`.
    pub fn affine(&self, alpha: f64, beta: f64) -> Self {
        FiniteDistribution {
            values: self.values.iter().map(|v| alpha * v + beta).collect(),
            probs: self.probs.clone(),
        }
    }
}

/// Audit trail of a descent.
#[derive(Debug, Clone, PartialEq)]
pub struct DescentCertificate {
    /// Chosen option per level (position in that level's value list).
    pub choices: Vec<usize>,
    /// Chosen scalar values (scalar descents only; empty otherwise).
    pub values: Vec<f64>,
    /// Largest root of the root polynomial, then of each chosen branch.
    pub maxroots: Vec<f64>,
    /// `max(0, maxroots[k+1] - maxroots[k])`.
    pub residuals: Vec<f64>,
    /// Largest root of every candidate branch, per level.
    pub branch_maxroots: Vec<Vec<(usize, f64)>>,
    pub final_poly: RealPolynomial,
}

impl DescentCertificate {
    pub fn root_maxroot(&self) -> f64 {
        self.maxroots[0]
    }

    pub fn leaf_maxroot(&self) -> f64 {
        *self.maxroots.last().unwrap()
    }

    /// Checks `maxroots[k+1] <= maxroots[k] + slack` for every level.
    pub fn is_monotone(&self, slack: f64) -> bool {
        self.maxroots.windows(2).all(|w| w[1] <= w[0] + slack)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DescentOptions {
    pub maxroot_tol: f64,
    pub tie_tol: f64,
    pub real_tol: f64,
    pub slack: f64,
}

impl Default for DescentOptions {
    fn default() -> Self {
        DescentOptions { maxroot_tol: MAXROOT_TOL, tie_tol: TIE_TOL, real_tol: REAL_ROOT_TOL, slack: DESCENT_SLACK }
    }
}

/// Generic descent. `candidates[k]` lists the admissible options at level `k`
/// in tie-break order; `eval(prefix)` returns the conditional expected
/// polynomial with levels `0..prefix.len()` fixed to the given options.
pub fn descend<F>(candidates: &[Vec<usize>], mut eval: F, opts: &DescentOptions) -> Result<DescentCertificate>
where
    F: FnMut(&[usize]) -> Result<RealPolynomial>,
{
    descend_scored(
        candidates,
        |prefix| {
            let poly = eval(prefix)?;
            Ok((poly.maxroot_certified_with(opts.maxroot_tol, opts.real_tol)?, poly))
        },
        opts,
    )
}

/// As [`descend`], with `score(prefix)` supplying the largest root alongside
/// the polynomial, for callers that bound roots without going through the
/// coefficient vector.
pub fn descend_scored<F>(candidates: &[Vec<usize>], mut score: F, opts: &DescentOptions) -> Result<DescentCertificate>
where
    F: FnMut(&[usize]) -> Result<(f64, RealPolynomial)>,
{
    let (root_max, root) = score(&[])?;
    let mut maxroots = vec![root_max];
    let mut residuals = Vec::with_capacity(candidates.len());
    let mut branch_maxroots = Vec::with_capacity(candidates.len());
    let mut prefix: Vec<usize> = Vec::with_capacity(candidates.len());
    let mut final_poly = root;
    for (level, opts_k) in candidates.iter().enumerate() {
        if opts_k.is_empty() {
            return Err(Error::InvalidArgument(format!("level {level} has no admissible option")));
        }
        let mut evaluated = Vec::with_capacity(opts_k.len());
        for &c in opts_k {
            prefix.push(c);
            let (r, poly) = score(&prefix)?;
            prefix.pop();
            evaluated.push((c, r, poly));
        }
        let best = evaluated.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
        let pick = evaluated.iter().position(|e| e.1 <= best + opts.tie_tol).unwrap();
        let parent = *maxroots.last().unwrap();
        let (choice, chosen, poly) = evaluated.swap_remove(pick);
        let excess = chosen - parent;
        if excess > opts.slack {
            return Err(Error::DescentIncrease { level, parent, child: chosen });
        }
        residuals.push(excess.max(0.0));
        let mut listing: Vec<(usize, f64)> = evaluated.iter().map(|e| (e.0, e.1)).collect();
        listing.push((choice, chosen));
        listing.sort_by_key(|e| e.0);
        branch_maxroots.push(listing);
        maxroots.push(chosen);
        prefix.push(choice);
        final_poly = poly;
    }
    Ok(DescentCertificate { choices: prefix, values: Vec::new(), maxroots, residuals, branch_maxroots, final_poly })
}

/// Operator coefficients for a partial assignment: fixed `s` gives
/// `(-s, s, -s^2)`, a free index gives `(-E xi, E xi, -E xi^2)`.
pub fn conditional_spec_quadratic(dists: &[FiniteDistribution], fixed: &[Option<f64>]) -> Result<DerivativeSpec> {
    if dists.len() != fixed.len() {
        return Err(Error::DimensionMismatch { expected: dists.len(), found: fixed.len() });
    }
    let mut spec = DerivativeSpec::quadratic(dists.len());
    for (i, (d, f)) in dists.iter().zip(fixed).enumerate() {
        match f {
            Some(s) => {
                if d.position_of(*s).is_none() {
                    return Err(Error::ValueNotInSupport { index: i, value: *s });
                }
                spec.set_fixed(i, *s);
            }
            None => spec.set_free(i, d.mean(), d.second_moment()),
        }
    }
    Ok(spec)
}

/// Descent on `E[mu[xi_1 A_1, ...] mu[-xi_1 A_1, ...]]`.
pub fn greedy_descent_quadratic(e: &MatrixEnsemble, dists: &[FiniteDistribution]) -> Result<DescentCertificate> {
    greedy_descent_quadratic_with(e, dists, &DescentOptions::default())
}

pub fn greedy_descent_quadratic_with(
    e: &MatrixEnsemble,
    dists: &[FiniteDistribution],
    opts: &DescentOptions,
) -> Result<DescentCertificate> {
    if dists.len() != e.len() {
        return Err(Error::DimensionMismatch { expected: e.len(), found: dists.len() });
    }
    e.require_psd()?;
    let table = SubsetDerivativeTable::new(e)?;
    let candidates: Vec<Vec<usize>> = dists.iter().map(|d| d.support_order()).collect();
    let base = conditional_spec_quadratic(dists, &vec![None; dists.len()])?;
    // coefficients within rounding of their term magnitudes are exact zeros
    let rel = ENVELOPE_ULPS * (2 * e.len() + 3 * e.dim() + 4) as f64 * f64::EPSILON;
    let eval = |prefix: &[usize]| -> Result<RealPolynomial> {
        let mut spec = base.clone();
        for (i, &c) in prefix.iter().enumerate() {
            spec.set_fixed(i, dists[i].values()[c]);
        }
        let (poly, env) = table.expected_product_with_envelope(&spec);
        Ok(poly.chop_with_envelope(&env, rel))
    };
    let mut cert = descend(&candidates, eval, opts)?;
    cert.values = cert.choices.iter().enumerate().map(|(i, &c)| dists[i].values()[c]).collect();
    Ok(cert)
}

/// One random matrix: finitely many PSD values with probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixChoice {
    values: Vec<HermitianMatrix>,
    probs: Vec<f64>,
}

impl MatrixChoice {
    pub fn new(values: Vec<HermitianMatrix>, probs: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.len() != probs.len() {
            return Err(Error::InvalidArgument("matrix choice needs matching nonempty values and probabilities".into()));
        }
        if probs.iter().any(|&p| !(p >= 0.0)) || (probs.iter().sum::<f64>() - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidArgument("matrix choice probabilities must be nonnegative and sum to 1".into()));
        }
        Ok(MatrixChoice { values, probs })
    }

    pub fn deterministic(value: HermitianMatrix) -> Self {
        MatrixChoice { values: vec![value], probs: vec![1.0] }
    }

    pub fn values(&self) -> &[HermitianMatrix] {
        &self.values
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn mean(&self) -> HermitianMatrix {
        let refs: Vec<&HermitianMatrix> = self.values.iter().collect();
        HermitianMatrix::linear_combination(self.values[0].dim(), &refs, &self.probs)
    }
}

/// Descent on `mu[X_1, ..., X_m]` for independent random PSD matrices,
/// with undecided indices replaced by their means.
pub fn greedy_descent_linear(choices: &[MatrixChoice]) -> Result<DescentCertificate> {
    let first = choices.first().ok_or(Error::EmptyEnsemble)?;
    let d = first.values[0].dim();
    for c in choices {
        for (i, v) in c.values.iter().enumerate() {
            if v.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, found: v.dim() });
            }
            if !v.is_psd()? {
                return Err(Error::NotPsd { index: i, min_eigenvalue: v.min_eigenvalue()? });
            }
        }
    }
    let means: Vec<HermitianMatrix> = choices.iter().map(|c| c.mean()).collect();
    let candidates: Vec<Vec<usize>> = choices
        .iter()
        .map(|c| (0..c.values.len()).filter(|&j| c.probs[j] > 0.0).collect())
        .collect();
    let eval = |prefix: &[usize]| -> Result<RealPolynomial> {
        let mats: Vec<&HermitianMatrix> = (0..choices.len())
            .map(|i| if i < prefix.len() { &choices[i].values[prefix[i]] } else { &means[i] })
            .collect();
        mixed_char_poly_of(&mats, d)
    };
    descend(&candidates, eval, &DescentOptions::default())
}

/// Ensemble of the chosen matrices of a linear descent.
pub fn chosen_matrices(choices: &[MatrixChoice], cert: &DescentCertificate) -> Result<MatrixEnsemble> {
    MatrixEnsemble::new(cert.choices.iter().enumerate().map(|(i, &c)| choices[i].values[c].clone()).collect())
}
