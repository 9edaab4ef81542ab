//! Univariate real polynomials and their roots.
//!
//! Roots come from the eigenvalues of a scaled companion matrix followed by a
//! Newton step. Near-multiple roots are grouped into clusters whose spread is
//! consistent with the coefficient rounding level; a polynomial is reported
//! real-rooted when every cluster centroid is real within tolerance.
//! [`RealPolynomial::maxroot_certified`] then brackets the largest root with a
//! bisection on the signs of the Taylor coefficients.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub const DEFAULT_ROOT_TOL: f64 = 1e-9;

/// Relative coefficient noise assumed when deciding whether nearby computed
/// roots are one perturbed multiple root.
const CLUSTER_NOISE: f64 = 1e-10;
const CLUSTER_FACTOR: f64 = 4.0;
/// Low-order coefficients this small relative to their natural size are
/// treated as exact zeros (roots at the origin).
const ZERO_COEFF_TOL: f64 = 1e-13;
/// Cluster members with imaginary part below this (relative) count as real.
const REAL_MEMBER_TOL: f64 = 1e-12;
const MIN_CLUSTER_FACTOR: f64 = 1e-3;
const MONIC_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct RealPolynomial {
    coeffs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootReport {
    pub maxroot: f64,
    pub minroot: f64,
    pub real_rooted: bool,
    /// Largest `|Im|` over cluster centroids, divided by `1 + max|root|`.
    pub max_imag_residual: f64,
    pub roots: Vec<Complex64>,
}

impl RealPolynomial {
    /// Coefficients in ascending order; trailing zeros are trimmed.
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        RealPolynomial { coeffs }
    }

    pub fn zero() -> Self {
        RealPolynomial { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// `x^k`.
    pub fn monomial(k: usize) -> Self {
        let mut c = vec![0.0; k + 1];
        c[k] = 1.0;
        RealPolynomial { coeffs: c }
    }

    /// Monic polynomial with the given real roots.
    pub fn from_roots(roots: &[f64]) -> Self {
        roots
            .iter()
            .fold(Self::constant(1.0), |acc, &r| acc.mul(&Self::new(vec![-r, 1.0])))
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Degree, with `-1` for the zero polynomial.
    pub fn degree(&self) -> isize {
        self.coeffs.len() as isize - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> f64 {
        self.coeffs.last().copied().unwrap_or(0.0)
    }

    pub fn is_monic(&self) -> bool {
        (self.leading() - 1.0).abs() <= MONIC_TOL
    }

    /// Coefficient of `x^k` (zero beyond the degree).
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(self.coeffs.iter().enumerate().skip(1).map(|(i, &c)| i as f64 * c).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|i| self.coeff(i) - other.coeff(i)).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn scale(&self, t: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * t).collect())
    }

    /// `x^k * p(x)`.
    pub fn shift_up(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut c = vec![0.0; k];
        c.extend_from_slice(&self.coeffs);
        RealPolynomial { coeffs: c }
    }

    /// `p(alpha * x + beta)`.
    pub fn compose_affine(&self, alpha: f64, beta: f64) -> Self {
        let lin = Self::new(vec![beta, alpha]);
        self.coeffs
            .iter()
            .rev()
            .fold(Self::zero(), |acc, &c| acc.mul(&lin).add(&Self::constant(c)))
    }

    /// `(-1)^d p(-x)`.
    pub fn reflect(&self) -> Self {
        let d = self.coeffs.len().saturating_sub(1);
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, &c)| if (d + i).is_multiple_of(2) { c } else { -c })
                .collect(),
        )
    }

    /// `t^d p(x / t)` for monic `p`; multiplies every root by `t`.
    pub fn root_scaling(&self, t: f64) -> Result<Self> {
        if !self.is_monic() {
            return Err(Error::NotMonic { leading: self.leading() });
        }
        if !(t > 0.0) {
            return Err(Error::InvalidArgument(format!("scaling factor must be positive, got {t}")));
        }
        let d = self.coeffs.len() - 1;
        Ok(Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, &c)| c * t.powi((d - i) as i32))
                .collect(),
        ))
    }

    /// Largest absolute coefficient difference.
    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n).map(|i| (self.coeff(i) - other.coeff(i)).abs()).fold(0.0, f64::max)
    }

    /// Largest coefficient difference relative to the larger coefficient vector.
    pub fn rel_coeff_diff(&self, other: &Self) -> f64 {
        let scale = self
            .coeffs
            .iter()
            .chain(other.coeffs.iter())
            .map(|c| c.abs())
            .fold(0.0, f64::max);
        if scale == 0.0 {
            0.0
        } else {
            self.max_coeff_diff(other) / scale
        }
    }

    /// Zeroes every coefficient with `|c_k| <= rel * envelope[k]`, where
    /// `envelope[k]` bounds the magnitude of the terms summed into `c_k`.
    pub fn chop_with_envelope(&self, envelope: &[f64], rel: f64) -> Self {
        let c = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| if c.abs() <= rel * envelope.get(k).copied().unwrap_or(0.0) { 0.0 } else { c })
            .collect();
        RealPolynomial::new(c)
    }

    /// Taylor coefficients at `x`: `p(x + y) = sum_j t_j y^j`.
    pub fn taylor_at(&self, x: f64) -> Vec<f64> {
        taylor_shift(&self.coeffs, x)
    }

    /// All roots (with multiplicity). Roots at the origin come first.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        Ok(self.root_data()?.roots)
    }

    fn root_data(&self) -> Result<RootData> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        if self.coeffs.len() == 1 {
            return Err(Error::ConstantPolynomial);
        }
        if self.coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NumericalFailure("non-finite coefficient".into()));
        }
        let lead = self.leading();
        let b: Vec<f64> = self.coeffs.iter().map(|c| c / lead).collect();
        let rho = fujiwara_bound(&b);

        // The Fujiwara bound overestimates the root radius by up to 2x, which
        // compounds with the degree; candidates are re-tested at the radius of
        // the computed roots.
        let mut zeros = negligible_tail(&b, rho);
        if zeros > 0 {
            let radius = companion_roots(&b)?.iter().map(|z| z.norm()).fold(0.0, f64::max);
            zeros = negligible_tail(&b, radius);
        }
        let q: Vec<f64> = b[zeros..].to_vec();
        let mut roots = vec![Complex64::new(0.0, 0.0); zeros];
        let nq = q.len() - 1;
        let qroots = if nq == 0 { Vec::new() } else { refine_roots(&q, &companion_roots(&q)?) };
        let clusters = cluster_roots(&q, &qroots);
        roots.extend(qroots.iter().copied());
        let mut centroids: Vec<(Complex64, usize)> = Vec::new();
        let mut extents: Vec<(f64, f64)> = Vec::new();
        if zeros > 0 {
            centroids.push((Complex64::new(0.0, 0.0), zeros));
            extents.push((0.0, 0.0));
        }
        for cl in clusters {
            let c = cl.iter().map(|&i| qroots[i]).sum::<Complex64>() / cl.len() as f64;
            let c = if cl.len() > 1 { refine_multiple(&q, c, cl.len()) } else { c };
            centroids.push((c, cl.len()));
            // a cluster of real roots may be distinct close roots: keep its ends
            let real = cl.iter().all(|&i| qroots[i].im.abs() <= REAL_MEMBER_TOL * (1.0 + qroots[i].norm()));
            if cl.len() > 1 && real {
                let res = cl.iter().map(|&i| qroots[i].re);
                extents.push((res.clone().fold(f64::INFINITY, f64::min), res.fold(f64::NEG_INFINITY, f64::max)));
            } else {
                extents.push((c.re, c.re));
            }
        }
        Ok(RootData { roots, centroids, extents })
    }

    /// Roots and real-rootedness at relative tolerance `tol`.
    pub fn root_report(&self, tol: f64) -> Result<RootReport> {
        let data = self.root_data()?;
        let max_abs = data.roots.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let max_imag = data.centroids.iter().map(|(c, _)| c.im.abs()).fold(0.0, f64::max);
        let max_imag_residual = max_imag / (1.0 + max_abs);
        let maxroot = data.extents.iter().map(|e| e.1).fold(f64::NEG_INFINITY, f64::max);
        let minroot = data.extents.iter().map(|e| e.0).fold(f64::INFINITY, f64::min);
        Ok(RootReport {
            maxroot,
            minroot,
            real_rooted: max_imag_residual <= tol,
            max_imag_residual,
            roots: data.roots,
        })
    }

    /// Largest root bracketed by bisection to width `tol`; real-rootedness is
    /// checked at the default tolerance.
    pub fn maxroot_certified(&self, tol: f64) -> Result<f64> {
        self.maxroot_certified_with(tol, DEFAULT_ROOT_TOL)
    }

    /// As [`Self::maxroot_certified`] with an explicit real-rootedness tolerance.
    /// The returned point lies above every root (up to rounding in the Taylor
    /// coefficients) and within `tol` of the largest one.
    pub fn maxroot_certified_with(&self, tol: f64, real_tol: f64) -> Result<f64> {
        let report = self.root_report(real_tol)?;
        if !report.real_rooted {
            return Err(Error::NotRealRooted { residual: report.max_imag_residual, tolerance: real_tol });
        }
        Ok(self.bisect_maxroot(report.maxroot, tol))
    }

    /// Point above every root (up to rounding), within `tol` of the largest
    /// real one; no real-rootedness check.
    pub fn root_upper_bound(&self, tol: f64) -> f64 {
        if self.degree() < 1 {
            return f64::NEG_INFINITY;
        }
        let lead = self.leading();
        let b: Vec<f64> = self.coeffs.iter().map(|c| c / lead).collect();
        self.bisect_maxroot(fujiwara_bound(&b), tol)
    }

    fn bisect_maxroot(&self, guess: f64, tol: f64) -> f64 {
        let lead = self.leading();
        let b: Vec<f64> = self.coeffs.iter().map(|c| c / lead).collect();
        let n = b.len() - 1;
        let cauchy = 1.0 + b[..n].iter().map(|c| c.abs()).fold(0.0, f64::max);
        let mut hi = cauchy.max(guess + tol);
        while !above_roots(&b, hi) {
            hi = 2.0 * hi.abs() + 1.0;
        }
        let mut lo = (guess - 1.0).min(hi);
        let mut step = 1.0;
        while above_roots(&b, lo) && step < 1e12 {
            hi = lo;
            step *= 2.0;
            lo -= step;
        }
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if above_roots(&b, mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }
}

struct RootData {
    roots: Vec<Complex64>,
    centroids: Vec<(Complex64, usize)>,
    /// Smallest and largest real part represented by each centroid.
    extents: Vec<(f64, f64)>,
}

/// `2 max |b_{n-k}|^{1/k}` for monic `b`, with the last term halved.
/// Number of leading low-order coefficients that are negligible against the
/// size of the remaining terms on the disk of the given radius.
fn negligible_tail(b: &[f64], radius: f64) -> usize {
    let n = b.len() - 1;
    let mut zeros = 0;
    while zeros < n {
        let natural: f64 = (zeros + 1..=n).map(|j| b[j].abs() * radius.powi((j - zeros) as i32)).sum();
        if b[zeros].abs() <= ZERO_COEFF_TOL * natural {
            zeros += 1;
        } else {
            break;
        }
    }
    zeros
}

fn fujiwara_bound(b: &[f64]) -> f64 {
    let n = b.len() - 1;
    let mut m: f64 = 0.0;
    for k in 1..=n {
        let c = if k == n { b[0].abs() / 2.0 } else { b[n - k].abs() };
        m = m.max(c.powf(1.0 / k as f64));
    }
    2.0 * m
}

fn companion_roots(b: &[f64]) -> Result<Vec<Complex64>> {
    let n = b.len() - 1;
    if n == 1 {
        return Ok(vec![Complex64::new(-b[0], 0.0)]);
    }
    // The QR iteration occasionally stalls on symmetric root patterns such as
    // (x^2 - 1)^2; a shift of origin breaks the symmetry.
    let rho = fujiwara_bound(b).max(1e-300);
    for shift in [0.0, 0.1234567 * rho, -0.2718282 * rho] {
        let shifted = if shift == 0.0 { b.to_vec() } else { taylor_shift(b, shift) };
        if let Some(roots) = companion_eigenvalues(&shifted) {
            return Ok(roots.into_iter().map(|z| z + shift).collect());
        }
    }
    aberth(b).ok_or_else(|| Error::NumericalFailure("root iteration did not converge".into()))
}

fn companion_eigenvalues(b: &[f64]) -> Option<Vec<Complex64>> {
    let n = b.len() - 1;
    // scale by a power of two near the root magnitude bound
    let rho = fujiwara_bound(b);
    let s = if rho > 0.0 { 2f64.powi(rho.log2().round() as i32) } else { 1.0 };
    let c: Vec<f64> = (0..n).map(|i| b[i] * s.powi(i as i32 - n as i32)).collect();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        m[(i, n - 1)] = -c[i];
    }
    balance(&mut m);
    let schur = Schur::try_new(m, f64::EPSILON, 1000 * n)?;
    let roots: Vec<Complex64> = schur.complex_eigenvalues().iter().map(|z| z * s).collect();
    if roots.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return None;
    }
    Some(roots)
}

/// Parlett-Reinsch balancing by powers of two.
fn balance(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    loop {
        let mut done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].abs();
                    r += m[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut cc = c;
            while cc < r / 2.0 {
                cc *= 2.0;
                f *= 2.0;
            }
            while cc >= r * 2.0 {
                cc /= 2.0;
                f /= 2.0;
            }
            if (c * f + r / f) < 0.95 * s {
                done = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
        if done {
            break;
        }
    }
}

/// Aberth-Ehrlich simultaneous iteration from points on a circle.
fn aberth(b: &[f64]) -> Option<Vec<Complex64>> {
    let n = b.len() - 1;
    let rho = fujiwara_bound(b).max(1e-12);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(rho, std::f64::consts::TAU * (k as f64 + 0.25) / n as f64))
        .collect();
    if aberth_iterate(b, &mut z, 2000) {
        Some(z)
    } else {
        None
    }
}

/// Runs Aberth-Ehrlich sweeps in place; returns whether the iterates settled.
fn aberth_iterate(b: &[f64], z: &mut [Complex64], max_sweeps: usize) -> bool {
    let n = z.len();
    for _ in 0..max_sweeps {
        let mut moved: f64 = 0.0;
        for k in 0..n {
            let (p, dp) = eval_with_derivative(b, z[k]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let sum: Complex64 = (0..n).filter(|&j| j != k).map(|j| 1.0 / (z[k] - z[j])).sum();
            let w = ratio / (1.0 - ratio * sum);
            if !w.re.is_finite() || !w.im.is_finite() {
                continue;
            }
            z[k] -= w;
            moved = moved.max(w.norm() / (1.0 + z[k].norm()));
        }
        if moved < 4.0 * f64::EPSILON {
            return true;
        }
    }
    false
}

/// Aberth sweeps started from eigenvalue estimates. Clustered roots from the
/// companion QR can be off by far more than their conditioning warrants.
fn refine_roots(b: &[f64], init: &[Complex64]) -> Vec<Complex64> {
    let mut z = init.to_vec();
    // nudge coincident starting points apart
    for k in 1..z.len() {
        for j in 0..k {
            if z[k] == z[j] {
                let bump = Complex64::new(0.0, 1e-9 * (1.0 + z[j].norm()));
                z[k] += bump;
            }
        }
    }
    aberth_iterate(b, &mut z, 200);
    if z.iter().any(|w| !w.re.is_finite() || !w.im.is_finite()) {
        return init.iter().map(|&w| newton_polish(b, w)).collect();
    }
    z
}

fn eval_with_derivative(b: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in b.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

fn newton_polish(b: &[f64], z: Complex64) -> Complex64 {
    let (p, dp) = eval_with_derivative(b, z);
    if dp.norm() == 0.0 {
        return z;
    }
    let next = z - p / dp;
    let (pn, _) = eval_with_derivative(b, next);
    if pn.norm() < p.norm() {
        next
    } else {
        z
    }
}

/// Complex Taylor coefficient `p^{(k)}(c) / k!`.
/// All Taylor coefficients of `b` at a complex point.
fn taylor_coeffs_complex(b: &[f64], c: Complex64) -> Vec<Complex64> {
    let mut work: Vec<Complex64> = b.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let n = work.len() - 1;
    for j in 0..n {
        for i in (j..n).rev() {
            let t = work[i + 1] * c;
            work[i] += t;
        }
    }
    work
}

/// A `k`-fold root is a simple root of the `(k-1)`-th derivative; a few
/// Newton steps there sharpen the cluster centroid.
fn refine_multiple(b: &[f64], c: Complex64, k: usize) -> Complex64 {
    let mut d = b.to_vec();
    for _ in 0..k - 1 {
        d = d.iter().enumerate().skip(1).map(|(i, &x)| i as f64 * x).collect();
    }
    let mut z = c;
    let (mut f, _) = eval_with_derivative(&d, z);
    for _ in 0..8 {
        let (_, df) = eval_with_derivative(&d, z);
        if df.norm() == 0.0 {
            break;
        }
        let next = z - f / df;
        let (fn_, _) = eval_with_derivative(&d, next);
        if fn_.norm() < f.norm() {
            z = next;
            f = fn_;
        } else {
            break;
        }
    }
    // keep the refinement only while it stays inside the cluster's neighbourhood
    if (z - c).norm() <= 1e-2 * (1.0 + c.norm()) {
        z
    } else {
        c
    }
}

/// Groups roots whose spread is explained by coefficient noise around a
/// multiple root: a set of `k` roots with centroid `c` merges when its radius
/// is at most `CLUSTER_FACTOR * (eta(c) / |p^{(k)}(c)/k!|)^{1/k}`.
fn cluster_roots(b: &[f64], roots: &[Complex64]) -> Vec<Vec<usize>> {
    let all: Vec<usize> = (0..roots.len()).collect();
    split_clusters(b, roots, &all, CLUSTER_FACTOR)
}

/// Groups `members` geometrically, then keeps only groups that behave like a
/// multiple root; the rest are regrouped at half the radius.
fn split_clusters(b: &[f64], roots: &[Complex64], members: &[usize], factor: f64) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for cl in agglomerate(b, roots, members, factor) {
        if cl.len() == 1 || cluster_consistent(b, roots, &cl) {
            out.push(cl);
        } else if factor < MIN_CLUSTER_FACTOR {
            out.extend(cl.into_iter().map(|i| vec![i]));
        } else {
            out.extend(split_clusters(b, roots, &cl, factor / 2.0));
        }
    }
    out
}

fn centroid_of(roots: &[Complex64], cl: &[usize]) -> Complex64 {
    cl.iter().map(|&i| roots[i]).sum::<Complex64>() / cl.len() as f64
}

/// Merges clusters while the merged spread stays within the distance a
/// `k`-fold root moves under coefficient noise, `factor * (eta / |t_k(c)|)^(1/k)`.
fn agglomerate(b: &[f64], roots: &[Complex64], members: &[usize], factor: f64) -> Vec<Vec<usize>> {
    let mut clusters: Vec<Vec<usize>> = members.iter().map(|&i| vec![i]).collect();
    loop {
        let cents: Vec<Complex64> = clusters.iter().map(|c| centroid_of(roots, c)).collect();
        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for a in 0..clusters.len() {
            for bb in a + 1..clusters.len() {
                pairs.push(((cents[a] - cents[bb]).norm(), a, bb));
            }
        }
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
        let mut merged = None;
        for &(_, a, bb) in &pairs {
            let mut cand = clusters[a].clone();
            cand.extend_from_slice(&clusters[bb]);
            let c = centroid_of(roots, &cand);
            let spread = cand.iter().map(|&i| (roots[i] - c).norm()).fold(0.0, f64::max);
            let k = cand.len();
            let eta = CLUSTER_NOISE * b.iter().enumerate().map(|(i, x)| x.abs() * c.norm().powi(i as i32)).sum::<f64>();
            let tk = taylor_coeffs_complex(b, c)[k].norm();
            let radius = if tk == 0.0 { f64::INFINITY } else { factor * (eta / tk).powf(1.0 / k as f64) };
            if spread <= radius {
                merged = Some((a, bb));
                break;
            }
        }
        match merged {
            Some((a, bb)) => {
                let moved = clusters.remove(bb);
                clusters[a].extend(moved);
            }
            None => return clusters,
        }
    }
}

/// A `k`-cluster is accepted when the Taylor coefficients `t_0..t_{k-1}` at
/// its refined centre are at the coefficient noise level.
fn cluster_consistent(b: &[f64], roots: &[Complex64], cl: &[usize]) -> bool {
    let k = cl.len();
    let c = refine_multiple(b, centroid_of(roots, cl), k);
    let t = taylor_coeffs_complex(b, c);
    let abs_b: Vec<f64> = b.iter().map(|x| x.abs()).collect();
    let mag = taylor_shift(&abs_b, c.norm());
    (0..k).all(|j| t[j].norm() <= CLUSTER_FACTOR * CLUSTER_NOISE * mag[j])
}

pub(crate) fn taylor_shift(b: &[f64], x: f64) -> Vec<f64> {
    let mut w = b.to_vec();
    let n = w.len().saturating_sub(1);
    for j in 0..n {
        for i in (j..n).rev() {
            w[i] += w[i + 1] * x;
        }
    }
    w
}

/// True when every Taylor coefficient of monic `b` at `x` is nonnegative up
/// to its rounding error, so `b` has no root above `x`.
fn above_roots(b: &[f64], x: f64) -> bool {
    let n = b.len() - 1;
    let t = taylor_shift(b, x);
    let abs_b: Vec<f64> = b.iter().map(|c| c.abs()).collect();
    let mag = taylor_shift(&abs_b, x.abs());
    let gamma = 2.0 * (n as f64 + 1.0) * f64::EPSILON;
    t.iter().zip(&mag).all(|(&tj, &mj)| tj >= -gamma * mj)
}
