//! Subset selection and proportional partitioning of PSD ensembles.
//!
//! `lyapunov_select` is a discrepancy solve with Bernoulli weights.
//! `ks_r_partition` runs the linear descent on `dr x dr` block-diagonal
//! random matrices without materialising them: every matrix involved is
//! block diagonal, so the mixed characteristic polynomial factors over the
//! `r` diagonal blocks (see [`KsrEvaluator`]).

use nalgebra::linalg::Hessenberg;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::discrepancy::{solve_kls, DiscrepancyInstance, DiscrepancyResult};
use crate::engine::{descend_scored, DescentCertificate, DescentOptions, FiniteDistribution};
use crate::error::{Error, Result};
use crate::linalg::{HermitianMatrix, MatrixEnsemble};
use crate::poly::{taylor_shift, RealPolynomial};
use crate::sum::CompensatedPoly;

/// Largest `d * r` accepted by [`ks_r_partition`].
pub const MAX_LIFTED_DIM: usize = 48;
pub const MAX_PARTITION_INDICES: usize = 14;
/// Tolerance on `sum A_i + sum B_j = I` before descending.
pub const RECONSTRUCTION_TOL: f64 = 1e-8;
pub const PROPORTION_TOL: f64 = 1e-9;
pub const CERT_TOL: f64 = 1e-7;
const RANGE_TOL: f64 = 1e-10;
const MAX_NEWTON_STEPS: usize = 500;
const NEWTON_STEP_TOL: f64 = 1e-15;
const NEWTON_RESIDUAL_TOL: f64 = 1e-8;
const START_MARGIN: f64 = 1e-12;

fn require_contraction(e: &MatrixEnsemble) -> Result<f64> {
    e.require_psd()?;
    let stats = e.stats()?;
    if !stats.sum_leq_identity {
        return Err(Error::SumExceedsIdentity { max_eigenvalue: stats.sum_max_eigenvalue });
    }
    Ok(stats.epsilon.max(0.0))
}

#[derive(Debug, Clone)]
pub struct LyapunovInstance {
    pub ensemble: MatrixEnsemble,
    pub weights: Vec<f64>,
    pub epsilon: f64,
}

impl LyapunovInstance {
    pub fn new(ensemble: MatrixEnsemble, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != ensemble.len() {
            return Err(Error::DimensionMismatch { expected: ensemble.len(), found: weights.len() });
        }
        if let Some((i, &w)) = weights.iter().enumerate().find(|(_, w)| !(0.0..=1.0).contains(*w)) {
            return Err(Error::WeightOutOfRange { index: i, value: w });
        }
        let epsilon = require_contraction(&ensemble)?;
        Ok(LyapunovInstance { ensemble, weights, epsilon })
    }
}

#[derive(Debug, Clone)]
pub struct SelectionResult {
    /// Selected indices, ascending.
    pub indices: Vec<usize>,
    /// `||sum_{I_0} T_i - sum t_i T_i||`.
    pub achieved: f64,
    /// `2 sqrt(eps)`.
    pub bound: f64,
    pub solve: DiscrepancyResult,
}

/// Finds `I_0` with `||sum_{I_0} T_i - sum t_i T_i|| <= 2 sqrt(eps)`.
pub fn lyapunov_select(inst: &LyapunovInstance) -> Result<SelectionResult> {
    let dists = inst
        .weights
        .iter()
        .enumerate()
        .map(|(i, &t)| FiniteDistribution::bernoulli(t).map_err(|_| Error::WeightOutOfRange { index: i, value: t }))
        .collect::<Result<Vec<_>>>()?;
    let solve = solve_kls(&DiscrepancyInstance::new(inst.ensemble.clone(), dists)?, true)?;
    let indices: Vec<usize> = solve.outcome.iter().enumerate().filter(|(_, &s)| s == 1.0).map(|(i, _)| i).collect();
    let coeffs: Vec<f64> = (0..inst.ensemble.len())
        .map(|i| if indices.contains(&i) { 1.0 } else { 0.0 } - inst.weights[i])
        .collect();
    let achieved = inst.ensemble.weighted_sum(&coeffs).operator_norm()?;
    Ok(SelectionResult { indices, achieved, bound: 2.0 * inst.epsilon.sqrt(), solve })
}

#[derive(Debug, Clone)]
pub struct WeightedApproxResult {
    pub selection: SelectionResult,
    /// `2 sqrt(eps)`.
    pub direct_bound: f64,
    /// `2 sqrt(2 eps) + 2 eps`.
    pub partition_bound: f64,
    /// The smaller of the two.
    pub bound: f64,
}

/// Approximates `t * sum T_i` by a subsum, `0 < t < 1`.
pub fn weighted_approx(ensemble: &MatrixEnsemble, t: f64) -> Result<WeightedApproxResult> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::WeightOutOfRange { index: 0, value: t });
    }
    let inst = LyapunovInstance::new(ensemble.clone(), vec![t; ensemble.len()])?;
    let eps = inst.epsilon;
    let selection = lyapunov_select(&inst)?;
    let direct_bound = 2.0 * eps.sqrt();
    let partition_bound = 2.0 * (2.0 * eps).sqrt() + 2.0 * eps;
    Ok(WeightedApproxResult { selection, direct_bound, partition_bound, bound: direct_bound.min(partition_bound) })
}

/// Reference largest-root bound for `mu[A_1, ..., A_m]` under `sum A_i <= I`,
/// `tr A_i <= eps`: `(1 + sqrt eps)^2`, or with all ranks at most `k`,
/// `(sqrt(1 - eps/(k-1)) + sqrt eps)^2` for `0 < eps <= (k-1)^2/k`.
pub fn mixed_bound_reference(ensemble: &MatrixEnsemble, rank_cap: Option<usize>) -> Result<f64> {
    let eps = require_contraction(ensemble)?;
    let Some(k) = rank_cap else {
        return Ok((1.0 + eps.sqrt()).powi(2));
    };
    let upper = if k == 0 { 0.0 } else { (k as f64 - 1.0).powi(2) / k as f64 };
    if !(eps > 0.0 && eps <= upper) {
        return Err(Error::EpsilonOutOfRange { epsilon: eps, rank_cap: k, upper });
    }
    for (i, a) in ensemble.matrices().iter().enumerate() {
        let ev = a.eigenvalues()?;
        let top = ev.last().copied().unwrap_or(0.0).max(0.0);
        let rank = ev.iter().filter(|&&v| v > 1e-10 * top.max(1.0)).count();
        if rank > k {
            return Err(Error::InvalidArgument(format!("matrix {i} has rank {rank} > {k}")));
        }
    }
    Ok(((1.0 - eps / (k as f64 - 1.0)).sqrt() + eps.sqrt()).powi(2))
}

/// `det(xI - M)` for a square complex matrix, ascending coefficients.
fn char_poly_complex(m: DMatrix<Complex64>) -> Vec<Complex64> {
    let n = m.nrows();
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let h = Hessenberg::new(m).h();
    let mut p: Vec<Vec<Complex64>> = vec![vec![one]];
    for k in 0..n {
        let mut next = vec![zero; k + 2];
        for (a, &c) in p[k].iter().enumerate() {
            next[a + 1] += c;
            next[a] -= h[(k, k)] * c;
        }
        let mut sub = one;
        for i in (0..k).rev() {
            sub *= h[(i + 1, i)];
            let coef = h[(i, k)] * sub;
            for (a, &c) in p[i].iter().enumerate() {
                next[a] -= coef * c;
            }
        }
        p.push(next);
    }
    p.pop().unwrap()
}

/// `D^C_T = [z^T] det(xI - C + sum_{i in T} z_i A_i)` for every subset `T`,
/// indexed by bitmask, each of length `d + 1` (zero when `|T| > d`).
///
/// For each subset sum `A_U`, `det(xI - C + lambda A_U)` is recovered in
/// `lambda` from `d + 1` roots of unity; `D^C_T` is then the alternating sum
/// over `U subset T` of the `lambda^{|T|}` coefficients.
pub fn base_derivative_table(base: &HermitianMatrix, mats: &[HermitianMatrix]) -> Result<Vec<Vec<f64>>> {
    let d = base.dim();
    let m = mats.len();
    if m > MAX_PARTITION_INDICES {
        return Err(Error::SizeGuard { what: "ensemble size m", value: m, limit: MAX_PARTITION_INDICES });
    }
    if let Some(a) = mats.iter().find(|a| a.dim() != d) {
        return Err(Error::DimensionMismatch { expected: d, found: a.dim() });
    }
    let n = d + 1;
    let nodes: Vec<Complex64> = (0..n).map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64)).collect();
    let full = 1usize << m;
    // lam[U][j][a]: coefficient of lambda^j x^a
    let mut lam = vec![vec![vec![0.0; n]; n]; full];
    for (u, slot) in lam.iter_mut().enumerate() {
        let mut au = DMatrix::<Complex64>::zeros(d, d);
        for (i, a) in mats.iter().enumerate() {
            if u >> i & 1 == 1 {
                au += a.matrix();
            }
        }
        let samples: Vec<Vec<Complex64>> = nodes.iter().map(|&w| char_poly_complex(base.matrix() - &au * w)).collect();
        for (j, row) in slot.iter_mut().enumerate() {
            for (a, out) in row.iter_mut().enumerate() {
                let mut s = Complex64::new(0.0, 0.0);
                for (k, sample) in samples.iter().enumerate() {
                    s += sample[a] * nodes[(n * n - j * k) % n];
                }
                *out = s.re / n as f64;
            }
        }
    }
    let mut table = vec![vec![0.0; n]; full];
    for (t, out) in table.iter_mut().enumerate() {
        let size = t.count_ones() as usize;
        if size > d {
            continue;
        }
        let mut acc = CompensatedPoly::new(n);
        let mut u = t;
        loop {
            let sign = if (size - u.count_ones() as usize).is_multiple_of(2) { 1.0 } else { -1.0 };
            acc.add_scaled(&lam[u][size], sign);
            if u == 0 {
                break;
            }
            u = (u - 1) & t;
        }
        *out = acc.values();
    }
    Ok(table)
}

fn all_rank_one(mats: &[HermitianMatrix]) -> Result<bool> {
    for a in mats {
        let vals = a.eigenvalues()?;
        let top = vals.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if vals.iter().filter(|v| v.abs() > RANGE_TOL * top).count() > 1 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Eigenvalues of `base + scale * sum_{i in J} A_i` for every mask `J`.
fn subset_spectra(base: &HermitianMatrix, mats: &[HermitianMatrix], scale: f64) -> Result<Vec<Vec<f64>>> {
    let full = 1usize << mats.len();
    let mut sums: Vec<HermitianMatrix> = Vec::with_capacity(full);
    sums.push(base.clone());
    for j in 1..full {
        let low = j.trailing_zeros() as usize;
        let next = sums[j & (j - 1)].add(&mats[low].scale(scale));
        sums.push(next);
    }
    sums.iter().map(|s| s.eigenvalues()).collect()
}

/// Restricts `base` and `mats` to the range of `sum mats` when `base` is the
/// identity on its orthogonal complement. Returns the number of dropped
/// dimensions alongside the compressed matrices.
fn compress_to_range(
    base: &HermitianMatrix,
    mats: &[HermitianMatrix],
) -> Result<Option<(HermitianMatrix, Vec<HermitianMatrix>, usize)>> {
    let d = base.dim();
    let refs: Vec<&HermitianMatrix> = mats.iter().collect();
    let total = HermitianMatrix::linear_combination(d, &refs, &vec![1.0; mats.len()]);
    let (vals, vecs) = total.eigh()?;
    let top = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let keep: Vec<usize> = (0..d).filter(|&i| vals[i] > RANGE_TOL * top).collect();
    if keep.is_empty() || keep.len() == d {
        return Ok(None);
    }
    let drop: Vec<usize> = (0..d).filter(|i| !keep.contains(i)).collect();
    let q = vecs.select_columns(keep.iter());
    let p = vecs.select_columns(drop.iter());
    let id = DMatrix::<Complex64>::identity(drop.len(), drop.len());
    let on_complement = (p.adjoint() * base.matrix() * &p - id).norm();
    let coupling = (q.adjoint() * base.matrix() * &p).norm();
    if on_complement > RANGE_TOL || coupling > RANGE_TOL {
        return Ok(None);
    }
    let project = |a: &HermitianMatrix| HermitianMatrix::from_matrix(q.adjoint() * a.matrix() * &q, 1e-9);
    let cb = project(base)?;
    let cm = mats.iter().map(project).collect::<Result<Vec<_>>>()?;
    Ok(Some((cb, cm, drop.len())))
}

/// Conditional expected mixed characteristic polynomial of the lifted
/// partition instance.
///
/// Index `i` takes the value `t_k^{-1} A_i` in block `k` with probability
/// `t_k`; the rank-one pieces of `C = I - sum A_i` sit in every block and are
/// absorbed into the base, since `(1 - d/dz) det(M + z uu*) = det(M - uu*)`.
/// With every index assigned to a block (`J_b` the indices in block `b`) the
/// polynomial is `prod_b H_b[J_b]`, `H_b[J] = sum_{T subset J} (-1/t_b)^{|T|} D^C_T`.
/// Undecided indices are averaged over blocks, which turns the expectation
/// into an `r`-fold subset convolution.
#[derive(Debug, Clone, Copy)]
enum Basis {
    Monomial,
    Taylor(f64),
    TaylorAbs(f64),
}

#[derive(Debug, Clone)]
pub struct KsrEvaluator {
    m: usize,
    t: Vec<f64>,
    h: Vec<Vec<Vec<f64>>>,
    /// Spectra of `base + t_b^{-1} A_J` when every `A_i` has rank at most one;
    /// then `H_b[J]` is the characteristic polynomial of that matrix.
    spectra: Option<Vec<Vec<Vec<f64>>>>,
    /// Upper bound on the roots of each `H_b[J]`.
    bounds: Vec<Vec<f64>>,
    /// Multiplicity of the factor `x - 1` split off before tabulating.
    unit_roots: usize,
}

impl KsrEvaluator {
    pub fn new(base: &HermitianMatrix, mats: &[HermitianMatrix], proportions: &[f64]) -> Result<Self> {
        Self::build(base, mats, proportions, true)
    }

    fn build(base: &HermitianMatrix, mats: &[HermitianMatrix], proportions: &[f64], spectral: bool) -> Result<Self> {
        // Off the range of sum A_i the base is the identity when it is I - sum A_i;
        // every block then carries an exact (x - 1)^(d - k) that would otherwise
        // be a noise-sensitive multiple root.
        let (base, mats, dropped) = match compress_to_range(base, mats)? {
            Some((b, ms, dropped)) => (b, ms, dropped),
            None => (base.clone(), mats.to_vec(), 0),
        };
        let (base, mats) = (&base, &mats[..]);
        let unit_roots = dropped * proportions.len();
        if spectral && all_rank_one(mats)? {
            let spectra = proportions
                .iter()
                .map(|&tb| subset_spectra(base, mats, 1.0 / tb))
                .collect::<Result<Vec<_>>>()?;
            let h = spectra
                .iter()
                .map(|sb| sb.iter().map(|lam| RealPolynomial::from_roots(lam).coeffs().to_vec()).collect())
                .collect();
            let bounds = spectra
                .iter()
                .map(|sb| sb.iter().map(|lam| lam.iter().copied().fold(f64::NEG_INFINITY, f64::max)).collect())
                .collect();
            return Ok(KsrEvaluator {
                m: mats.len(),
                t: proportions.to_vec(),
                h,
                spectra: Some(spectra),
                bounds,
                unit_roots,
            });
        }
        let table = base_derivative_table(base, mats)?;
        let m = mats.len();
        let n = base.dim() + 1;
        let full = 1usize << m;
        let h: Vec<Vec<Vec<f64>>> = proportions
            .iter()
            .map(|&tb| {
                let g = -1.0 / tb;
                (0..full)
                    .map(|j| {
                        let mut acc = CompensatedPoly::new(n);
                        let mut t = j;
                        loop {
                            acc.add_scaled(&table[t], g.powi(t.count_ones() as i32));
                            if t == 0 {
                                break;
                            }
                            t = (t - 1) & j;
                        }
                        acc.values()
                    })
                    .collect()
            })
            .collect();
        let bounds = h
            .iter()
            .map(|hb: &Vec<Vec<f64>>| hb.iter().map(|p| RealPolynomial::new(p.clone()).root_upper_bound(1e-12)).collect())
            .collect();
        Ok(KsrEvaluator { m, t: proportions.to_vec(), h, spectra: None, bounds, unit_roots })
    }

    /// Expected polynomial with indices `0..prefix.len()` placed in blocks `prefix`.
    pub fn eval(&self, prefix: &[usize]) -> RealPolynomial {
        let reduced = RealPolynomial::new(self.combine(prefix, Basis::Monomial, usize::MAX));
        if self.unit_roots == 0 {
            return reduced;
        }
        reduced.mul(&RealPolynomial::from_roots(&vec![1.0; self.unit_roots]))
    }

    /// Largest root of [`Self::eval`] for `prefix`.
    ///
    /// The coefficient vector of a degree `d r` product loses the top root
    /// to cancellation, so the search works with Taylor coefficients at the
    /// trial point. Each degree `d` block factor is shifted first; above the
    /// roots the shifted factors have positive coefficients and products and
    /// averages of them stay accurate. The start lies above the roots of every
    /// factor that carries weight, hence above the roots of the mixture, and
    /// Newton's method from above is monotone for real-rooted polynomials, so
    /// every iterate is an upper bound.
    pub fn maxroot(&self, prefix: &[usize]) -> Result<f64> {
        let reduced = self.reduced_maxroot(prefix)?;
        Ok(if self.unit_roots > 0 { reduced.max(1.0) } else { reduced })
    }

    fn reduced_maxroot(&self, prefix: &[usize]) -> Result<f64> {
        let top = self.start_point(prefix);
        let mut x = top + START_MARGIN * (1.0 + top.abs());
        let mut settled = false;
        for _ in 0..MAX_NEWTON_STEPS {
            let t = self.combine(prefix, Basis::Taylor(x), 2);
            if t.len() < 2 || t[1] <= 0.0 || t[0] <= 0.0 {
                break;
            }
            let step = t[0] / t[1];
            if step <= NEWTON_STEP_TOL * (1.0 + x.abs()) {
                settled = true;
                break;
            }
            let next = x - step;
            let tn = self.combine(prefix, Basis::Taylor(next), 1).first().copied().unwrap_or(0.0);
            if tn == 0.0 {
                x = next;
            }
            if tn <= 0.0 {
                // landed on the root, or rounding moved the iterate past it
                settled = true;
                break;
            }
            x = next;
        }
        if !settled {
            let t = self.combine(prefix, Basis::Taylor(x), 1);
            let mag = self.combine(prefix, Basis::TaylorAbs(x), 1);
            let (t0, m0) = (t.first().copied().unwrap_or(0.0), mag.first().copied().unwrap_or(0.0));
            if t0.abs() > NEWTON_RESIDUAL_TOL * m0 {
                return Err(Error::NotRealRooted { residual: t0.abs() / m0.max(f64::MIN_POSITIVE), tolerance: NEWTON_RESIDUAL_TOL });
            }
        }
        Ok(x)
    }

    /// Largest root bound over the block factors with nonzero weight.
    fn start_point(&self, prefix: &[usize]) -> f64 {
        let full = 1usize << self.m;
        let mut top = f64::NEG_INFINITY;
        for (b, bounds) in self.bounds.iter().enumerate() {
            let mut allowed = 0usize;
            for i in 0..self.m {
                if prefix.get(i).is_none_or(|&k| k == b) {
                    allowed |= 1 << i;
                }
            }
            for (j, &v) in bounds.iter().enumerate().take(full) {
                if j & !allowed == 0 {
                    top = top.max(v);
                }
            }
        }
        top
    }

    /// Coefficients of `H_b[J]` in `basis`, truncated to `out.len()`.
    fn block_into(&self, b: usize, j: usize, basis: Basis, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        match basis {
            Basis::Monomial => {
                for (o, &c) in out.iter_mut().zip(&self.h[b][j]) {
                    *o = c;
                }
            }
            Basis::Taylor(x) => {
                if let Some(spectra) = &self.spectra {
                    // prod_k (y + x - lambda_k), low-order terms only
                    out[0] = 1.0;
                    for (deg, &lam) in spectra[b][j].iter().enumerate() {
                        let a = x - lam;
                        let top = (deg + 1).min(out.len() - 1);
                        for i in (1..=top).rev() {
                            out[i] = out[i] * a + out[i - 1];
                        }
                        out[0] *= a;
                    }
                } else {
                    for (o, c) in out.iter_mut().zip(taylor_shift(&self.h[b][j], x)) {
                        *o = c;
                    }
                }
            }
            Basis::TaylorAbs(x) => {
                let a: Vec<f64> = self.h[b][j].iter().map(|c| c.abs()).collect();
                for (o, c) in out.iter_mut().zip(taylor_shift(&a, x.abs())) {
                    *o = c;
                }
            }
        }
    }

    /// Weighted `r`-fold subset convolution of the block polynomials in
    /// `basis`, truncated to `len` coefficients. Only undecided indices are
    /// convolved over; decided ones sit in their block's mask.
    fn combine(&self, prefix: &[usize], basis: Basis, len: usize) -> Vec<f64> {
        let r = self.t.len();
        let deg = self.h[0][0].len() - 1;
        let width = len.min(r * deg + 1);
        let free: Vec<usize> = (prefix.len()..self.m).collect();
        let f = free.len();
        let subsets = 1usize << f;
        let mut fixed = vec![0usize; r];
        for (i, &k) in prefix.iter().enumerate() {
            fixed[k] |= 1 << i;
        }
        let mut spread = vec![0usize; subsets];
        for s in 1..subsets {
            let low = s.trailing_zeros() as usize;
            spread[s] = spread[s & (s - 1)] | 1 << free[low];
        }

        let block_table = |b: usize| -> Vec<f64> {
            let mut g = vec![0.0; subsets * width];
            let mut wpow = vec![1.0; f + 1];
            for k in 1..=f {
                wpow[k] = wpow[k - 1] * self.t[b];
            }
            for s in 0..subsets {
                let slot = &mut g[s * width..(s + 1) * width];
                self.block_into(b, fixed[b] | spread[s], basis, slot);
                let w = wpow[s.count_ones() as usize];
                slot.iter_mut().for_each(|v| *v *= w);
            }
            g
        };

        let mut conv = block_table(0);
        let mut tmp = vec![0.0; width];
        for b in 1..r {
            let g = block_table(b);
            let last = b + 1 == r;
            let mut next = vec![0.0; if last { width } else { subsets * width }];
            let targets = if last { subsets - 1..subsets } else { 0..subsets };
            for u in targets {
                tmp.iter_mut().for_each(|v| *v = 0.0);
                let mut s = u;
                loop {
                    let gs = &g[s * width..(s + 1) * width];
                    let rest = &conv[(u & !s) * width..((u & !s) + 1) * width];
                    for (i, &x) in rest.iter().enumerate() {
                        if x == 0.0 {
                            continue;
                        }
                        for (k, &y) in gs.iter().enumerate().take(width - i) {
                            tmp[i + k] += x * y;
                        }
                    }
                    if s == 0 {
                        break;
                    }
                    s = (s - 1) & u;
                }
                let at = if last { 0 } else { u * width };
                next[at..at + width].copy_from_slice(&tmp);
            }
            conv = next;
        }
        let at = if r == 1 { (subsets - 1) * width } else { 0 };
        conv[at..at + width].to_vec()
    }
}

#[derive(Debug, Clone)]
pub struct PartitionResult {
    /// `blocks[k]` lists the indices placed in block `k`, ascending.
    pub blocks: Vec<Vec<usize>>,
    pub proportions: Vec<f64>,
    pub epsilon: f64,
    /// `||sum_{I_k} A_i||`.
    pub block_norms: Vec<f64>,
    /// `t_k (1 + sqrt(r eps))^2`.
    pub bounds: Vec<f64>,
    /// Smallest eigenvalue of `t_k (A + (2 sqrt(r eps) + r eps) I) - sum_{I_k} A_i`.
    pub upper_margins: Vec<f64>,
    /// `upper_margins[k] >= -1e-7`.
    pub upper_cert: Vec<bool>,
    /// `||sum_{I_k} A_i - t_k A||`.
    pub two_sided_norms: Vec<f64>,
    /// `2 sqrt(r eps) + r eps`.
    pub two_sided_bound: f64,
    /// `max(t_k, 1 - t_k) (2 sqrt(r eps) + r eps)`.
    pub sharp_two_sided_bounds: Vec<f64>,
    /// Number of rank-one pieces in the completion of `I - A`.
    pub completion_size: usize,
    /// Norm of the lifted outcome, `max_k ||t_k^{-1} sum_{I_k} A_i + I - A||`.
    pub lifted_norm: f64,
    /// `(1 + sqrt(r eps))^2`.
    pub lifted_bound: f64,
    /// `None` when every matrix is zero.
    pub certificate: Option<DescentCertificate>,
}

impl PartitionResult {
    pub fn all_within_bounds(&self) -> bool {
        self.upper_cert.iter().all(|&c| c)
            && self.block_norms.iter().zip(&self.bounds).all(|(n, b)| *n <= b + CERT_TOL)
            && self.two_sided_norms.iter().all(|&n| n <= self.two_sided_bound + CERT_TOL)
    }
}

fn check_proportions(t: &[f64]) -> Result<()> {
    if t.is_empty() {
        return Err(Error::BadProportions("need at least one block".into()));
    }
    if let Some(x) = t.iter().find(|&&x| !(x > 0.0)) {
        return Err(Error::BadProportions(format!("proportion {x} is not positive")));
    }
    let s: f64 = t.iter().sum();
    if (s - 1.0).abs() > PROPORTION_TOL {
        return Err(Error::BadProportions(format!("proportions sum to {s}, not 1")));
    }
    Ok(())
}

/// Partitions `[m]` into `r` blocks with `||sum_{I_k} A_i|| <= t_k (1 + sqrt(r eps))^2`.
pub fn ks_r_partition(ensemble: &MatrixEnsemble, proportions: &[f64]) -> Result<PartitionResult> {
    check_proportions(proportions)?;
    let eps = require_contraction(ensemble)?;
    let (d, m, r) = (ensemble.dim(), ensemble.len(), proportions.len());
    if d * r > MAX_LIFTED_DIM {
        return Err(Error::SizeGuard { what: "lifted dimension d*r", value: d * r, limit: MAX_LIFTED_DIM });
    }
    if m > MAX_PARTITION_INDICES {
        return Err(Error::SizeGuard { what: "ensemble size m", value: m, limit: MAX_PARTITION_INDICES });
    }
    let total = ensemble.sum();
    let lifted_bound = (1.0 + (r as f64 * eps).sqrt()).powi(2);

    let (choices, completion_size, certificate, base) = if eps > 0.0 {
        let pieces = total.rank_one_completion(eps)?;
        let refs: Vec<&HermitianMatrix> = pieces.iter().collect();
        let base = HermitianMatrix::linear_combination(d, &refs, &vec![1.0; pieces.len()]);
        let recon = total.add(&base).sub(&HermitianMatrix::identity(d)).operator_norm()?;
        if recon > RECONSTRUCTION_TOL {
            return Err(Error::NumericalFailure(format!("completion reconstruction error {recon:.3e}")));
        }
        let eval = KsrEvaluator::new(&base, ensemble.matrices(), proportions)?;
        let candidates = vec![(0..r).collect::<Vec<_>>(); m];
        let score = |p: &[usize]| Ok((eval.maxroot(p)?, eval.eval(p)));
        let cert = descend_scored(&candidates, score, &DescentOptions::default())?;
        (cert.choices.clone(), pieces.len(), Some(cert), base)
    } else {
        (vec![0; m], 0, None, HermitianMatrix::identity(d).sub(&total))
    };

    let mut blocks = vec![Vec::new(); r];
    for (i, &k) in choices.iter().enumerate() {
        blocks[k].push(i);
    }
    let slack = 2.0 * (r as f64 * eps).sqrt() + r as f64 * eps;
    let mut block_norms = Vec::with_capacity(r);
    let mut upper_margins = Vec::with_capacity(r);
    let mut two_sided_norms = Vec::with_capacity(r);
    let mut lifted_norm: f64 = 0.0;
    for (k, idx) in blocks.iter().enumerate() {
        let tk = proportions[k];
        let part = ensemble.subset_sum(idx);
        block_norms.push(part.operator_norm()?);
        let gap = total.add(&HermitianMatrix::identity(d).scale(slack)).scale(tk).sub(&part);
        upper_margins.push(gap.min_eigenvalue()?);
        two_sided_norms.push(part.sub(&total.scale(tk)).operator_norm()?);
        lifted_norm = lifted_norm.max(part.scale(1.0 / tk).add(&base).operator_norm()?);
    }
    Ok(PartitionResult {
        upper_cert: upper_margins.iter().map(|&x| x >= -CERT_TOL).collect(),
        bounds: proportions.iter().map(|&t| t * lifted_bound).collect(),
        sharp_two_sided_bounds: proportions.iter().map(|&t| t.max(1.0 - t) * slack).collect(),
        blocks,
        proportions: proportions.to_vec(),
        epsilon: eps,
        block_norms,
        upper_margins,
        two_sided_norms,
        two_sided_bound: slack,
        completion_size,
        lifted_norm,
        lifted_bound,
        certificate,
    })
}

/// Explicit `dr x dr` random matrices of the lifted instance: the ensemble's
/// slot lifts followed by every block lift of every completion piece.
pub fn lifted_choices(ensemble: &MatrixEnsemble, proportions: &[f64]) -> Result<Vec<crate::engine::MatrixChoice>> {
    use crate::engine::MatrixChoice;
    check_proportions(proportions)?;
    let eps = require_contraction(ensemble)?;
    let r = proportions.len();
    let mut out = Vec::new();
    for a in ensemble.matrices() {
        let vals = (0..r).map(|k| a.block_diagonal_lift(r, k + 1, 1.0 / proportions[k])).collect::<Result<Vec<_>>>()?;
        out.push(MatrixChoice::new(vals, proportions.to_vec())?);
    }
    for piece in ensemble.sum().rank_one_completion(eps)? {
        for k in 0..r {
            out.push(MatrixChoice::deterministic(piece.block_diagonal_lift(r, k + 1, 1.0)?));
        }
    }
    Ok(out)
}
