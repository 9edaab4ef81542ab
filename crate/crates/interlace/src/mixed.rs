//! Mixed characteristic polynomials and expected product polynomials.
//!
//! Everything is expanded in the multilinear derivatives
//! `D_S(x) = (prod_{i in S} d/dz_i) det(xI + sum_i z_i A_i) |_{z=0}`.
//! For hermitian `A_i` each `D_S` is a single monomial `c_S x^{d-|S|}`, and the
//! scalar `c_S` is recovered from the characteristic polynomials of the
//! subset sums `A_T`, `T ⊆ S`, by inclusion-exclusion:
//! `c_S = sum_{T ⊆ S} (-1)^{|S|-|T|} e_{|S|}(A_T)`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{HermitianMatrix, MatrixEnsemble};
use crate::poly::RealPolynomial;
use crate::sum::{CompensatedPoly, CompensatedSum};

pub const MAX_INDICES: usize = 14;
pub const MAX_DIM: usize = 10;

/// Per-index coefficients of `1 + a_i d/dz_i + b_i d/dw_i + c_i d^2/dz_i dw_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeSpec {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl DerivativeSpec {
    pub fn new(a: Vec<f64>, b: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() || a.len() != c.len() {
            return Err(Error::InvalidArgument("spec vectors differ in length".into()));
        }
        Ok(DerivativeSpec { a, b, c })
    }

    /// The operator `prod (1 - d/dz_i d/dw_i)`.
    pub fn quadratic(m: usize) -> Self {
        DerivativeSpec { a: vec![0.0; m], b: vec![0.0; m], c: vec![-1.0; m] }
    }

    /// Every index fixed at the given value `s_i`, i.e. `(-s, s, -s^2)`.
    pub fn fixed(values: &[f64]) -> Self {
        DerivativeSpec {
            a: values.iter().map(|s| -s).collect(),
            b: values.to_vec(),
            c: values.iter().map(|s| -s * s).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn set_fixed(&mut self, i: usize, s: f64) {
        self.a[i] = -s;
        self.b[i] = s;
        self.c[i] = -s * s;
    }

    /// `(-E xi, E xi, -E xi^2)` for a free variable with the given moments.
    pub fn set_free(&mut self, i: usize, mean: f64, second_moment: f64) {
        self.a[i] = -mean;
        self.b[i] = mean;
        self.c[i] = -second_moment;
    }

    /// Per index: whether `a_i = -t, b_i = t` with `t^2 <= -c_i`. Recorded only.
    pub fn stability_safe(&self) -> Vec<bool> {
        (0..self.len())
            .map(|i| {
                let t = self.b[i];
                (self.a[i] + t).abs() <= 1e-12 * (1.0 + t.abs()) && t * t <= -self.c[i] + 1e-12 * (1.0 + t * t)
            })
            .collect()
    }
}

/// `c_S` for every subset `S` (bitmask), with `D_S(x) = c_S x^{d-|S|}`.
#[derive(Debug, Clone)]
pub struct SubsetDerivativeTable {
    dim: usize,
    m: usize,
    values: Vec<f64>,
}

pub fn check_size(d: usize, m: usize) -> Result<()> {
    if m > MAX_INDICES {
        return Err(Error::SizeGuard { what: "ensemble size m", value: m, limit: MAX_INDICES });
    }
    if d > MAX_DIM {
        return Err(Error::SizeGuard { what: "dimension d", value: d, limit: MAX_DIM });
    }
    Ok(())
}

/// `e_0..e_d` of the eigenvalues.
pub(crate) fn elementary_symmetric(eigs: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; eigs.len() + 1];
    e[0] = 1.0;
    for (n, &l) in eigs.iter().enumerate() {
        for k in (1..=n + 1).rev() {
            e[k] += l * e[k - 1];
        }
    }
    e
}

/// `e_k(A_T)` for every subset `T`, indexed `[mask][k]`.
fn subset_elementary(matrices: &[&HermitianMatrix], d: usize) -> Result<Vec<Vec<f64>>> {
    let m = matrices.len();
    let mut sums: Vec<DMatrix<Complex64>> = Vec::with_capacity(1 << m);
    let mut out = Vec::with_capacity(1 << m);
    sums.push(DMatrix::zeros(d, d));
    out.push({
        let mut e = vec![0.0; d + 1];
        e[0] = 1.0;
        e
    });
    for mask in 1usize..(1 << m) {
        let low = mask.trailing_zeros() as usize;
        let s = &sums[mask & (mask - 1)] + matrices[low].matrix();
        let h = HermitianMatrix::symmetrized(s.clone());
        out.push(elementary_symmetric(&h.eigenvalues()?));
        sums.push(s);
    }
    Ok(out)
}

impl SubsetDerivativeTable {
    pub fn new(e: &MatrixEnsemble) -> Result<Self> {
        check_size(e.dim(), e.len())?;
        let refs: Vec<&HermitianMatrix> = e.matrices().iter().collect();
        Self::from_matrices(&refs, e.dim())
    }

    pub(crate) fn from_matrices(mats: &[&HermitianMatrix], d: usize) -> Result<Self> {
        let m = mats.len();
        check_size(d, m)?;
        let es = subset_elementary(mats, d)?;
        let mut values = vec![0.0; 1 << m];
        for (s, v) in values.iter_mut().enumerate() {
            let k = s.count_ones() as usize;
            if k > d {
                continue;
            }
            if k == 0 {
                *v = 1.0;
                continue;
            }
            // sum over submasks t of s, sign (-1)^{k-|t|}
            let mut acc = CompensatedSum::new();
            let mut t = s;
            loop {
                let sign = if (k - t.count_ones() as usize).is_multiple_of(2) { 1.0 } else { -1.0 };
                acc.add(sign * es[t][k]);
                if t == 0 {
                    break;
                }
                t = (t - 1) & s;
            }
            *v = acc.value();
        }
        Ok(SubsetDerivativeTable { dim: d, m, values })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    /// `c_S` for the bitmask `S`.
    pub fn scalar(&self, mask: usize) -> f64 {
        self.values[mask]
    }

    /// `D_S(x)` for the bitmask `S`.
    pub fn poly(&self, mask: usize) -> RealPolynomial {
        let k = mask.count_ones() as usize;
        if k > self.dim {
            return RealPolynomial::zero();
        }
        RealPolynomial::constant(self.values[mask]).shift_up(self.dim - k)
    }

    /// `sum_S (prod_{i in S} w_i) D_S(x)`, i.e. the linear operator
    /// `prod (1 + w_i d/dz_i)` applied at zero.
    pub fn linear_combination(&self, weights: &[f64]) -> RealPolynomial {
        assert_eq!(weights.len(), self.m);
        let d = self.dim;
        let mut acc: Vec<CompensatedSum> = vec![CompensatedSum::new(); d + 1];
        for mask in 0..(1usize << self.m) {
            let k = mask.count_ones() as usize;
            if k > d {
                continue;
            }
            let mut w = 1.0;
            let mut bits = mask;
            while bits != 0 {
                w *= weights[bits.trailing_zeros() as usize];
                bits &= bits - 1;
            }
            if w == 0.0 {
                continue;
            }
            acc[d - k].add(w * self.values[mask]);
        }
        RealPolynomial::new(acc.iter().map(|a| a.value()).collect())
    }

    /// `sum_{S,T} prod_{S∩T} c prod_{S\T} a prod_{T\S} b D_S D_T`.
    pub fn expected_product(&self, spec: &DerivativeSpec) -> RealPolynomial {
        assert_eq!(spec.len(), self.m);
        let d = self.dim;
        let polys: Vec<Vec<f64>> = (0..(1usize << self.m))
            .map(|mask| {
                let mut v = vec![0.0; d + 1];
                let k = mask.count_ones() as usize;
                if k <= d {
                    v[d - k] = self.values[mask];
                }
                v
            })
            .collect();
        expected_product_of(&polys, &polys, spec, 2 * d + 1)
    }

    /// [`Self::expected_product`] together with a bound on the magnitude of
    /// the terms behind each coefficient (same contraction on absolute values).
    pub fn expected_product_with_envelope(&self, spec: &DerivativeSpec) -> (RealPolynomial, Vec<f64>) {
        let abs = |v: &[f64]| v.iter().map(|x| x.abs()).collect::<Vec<_>>();
        let abs_spec = DerivativeSpec { a: abs(&spec.a), b: abs(&spec.b), c: abs(&spec.c) };
        let abs_table = SubsetDerivativeTable { dim: self.dim, m: self.m, values: abs(&self.values) };
        let mut env = abs_table.expected_product(&abs_spec).coeffs().to_vec();
        env.resize(2 * self.dim + 1, 0.0);
        (self.expected_product(spec), env)
    }
}

/// Generic `(S,T)` contraction: `F = (⊗_i G_i) D` over `S`, then `sum_T F(T) D'(T)`.
/// `G_i` maps `(u, v) = (D(S), D(S+i))` to `(u + a v, b u + c v)`.
pub(crate) fn expected_product_of(
    left: &[Vec<f64>],
    right: &[Vec<f64>],
    spec: &DerivativeSpec,
    out_len: usize,
) -> RealPolynomial {
    let m = spec.len();
    let mut f: Vec<Vec<f64>> = left.to_vec();
    for i in 0..m {
        let bit = 1usize << i;
        let (a, b, c) = (spec.a[i], spec.b[i], spec.c[i]);
        for mask in 0..(1usize << m) {
            if mask & bit != 0 {
                continue;
            }
            let hi = mask | bit;
            let (u, v) = (f[mask].clone(), f[hi].clone());
            for k in 0..u.len() {
                f[mask][k] = u[k] + if a != 0.0 { a * v[k] } else { 0.0 };
                f[hi][k] = if b != 0.0 { b * u[k] } else { 0.0 } + if c != 0.0 { c * v[k] } else { 0.0 };
            }
        }
    }
    let mut acc = CompensatedPoly::new(out_len);
    for (t, rt) in right.iter().enumerate() {
        if rt.iter().all(|&x| x == 0.0) || f[t].iter().all(|&x| x == 0.0) {
            continue;
        }
        let prod = RealPolynomial::new(f[t].clone()).mul(&RealPolynomial::new(rt.clone()));
        acc.add_scaled(prod.coeffs(), 1.0);
    }
    RealPolynomial::new(acc.values())
}

/// `D_S(x)` for an explicit list of indices.
pub fn subset_derivative(e: &MatrixEnsemble, subset: &[usize]) -> Result<RealPolynomial> {
    let mut sel = Vec::new();
    for &i in subset {
        if i >= e.len() {
            return Err(Error::InvalidArgument(format!("index {i} out of range")));
        }
        if !sel.contains(&i) {
            sel.push(i);
        }
    }
    sel.sort_unstable();
    let mats: Vec<&HermitianMatrix> = sel.iter().map(|&i| e.get(i)).collect();
    let table = SubsetDerivativeTable::from_matrices(&mats, e.dim())?;
    Ok(table.poly((1usize << sel.len()) - 1))
}

/// `D_S(x)` by expanding the determinant over injective column assignments:
/// `x^{d-|S|} sum_phi det M_phi`, with `M_phi[r][i] = A_i[phi(S)_r, phi(i)]`.
/// Cost grows like `d!/(d-|S|)!`; intended for cross-checks on small cases.
pub fn subset_derivative_by_columns(e: &MatrixEnsemble, subset: &[usize]) -> Result<RealPolynomial> {
    let d = e.dim();
    let k = subset.len();
    if k > d {
        return Ok(RealPolynomial::zero());
    }
    if d > 8 {
        return Err(Error::SizeGuard { what: "dimension d", value: d, limit: 8 });
    }
    let mut acc = CompensatedSum::new();
    let mut phi = vec![0usize; k];
    let mut used = vec![false; d];
    fn rec(
        pos: usize,
        phi: &mut Vec<usize>,
        used: &mut Vec<bool>,
        e: &MatrixEnsemble,
        subset: &[usize],
        acc: &mut CompensatedSum,
    ) {
        let k = subset.len();
        if pos == k {
            let m = DMatrix::from_fn(k, k, |r, c| e.get(subset[c]).entry(phi[r], phi[c]));
            acc.add(m.determinant().re);
            return;
        }
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                phi[pos] = j;
                rec(pos + 1, phi, used, e, subset, acc);
                used[j] = false;
            }
        }
    }
    rec(0, &mut phi, &mut used, e, subset, &mut acc);
    Ok(RealPolynomial::constant(acc.value()).shift_up(d - k))
}

/// `mu[eps_1 A_1, ..., eps_m A_m](x) = sum_S prod_{i in S}(-eps_i) D_S(x)`.
pub fn mixed_char_poly(e: &MatrixEnsemble, scalars: &[f64]) -> Result<RealPolynomial> {
    if scalars.len() != e.len() {
        return Err(Error::DimensionMismatch { expected: e.len(), found: scalars.len() });
    }
    let table = SubsetDerivativeTable::new(e)?;
    let w: Vec<f64> = scalars.iter().map(|s| -s).collect();
    Ok(table.linear_combination(&w))
}

/// Mixed characteristic polynomial of an arbitrary list of hermitian matrices.
pub fn mixed_char_poly_of(mats: &[&HermitianMatrix], d: usize) -> Result<RealPolynomial> {
    let table = SubsetDerivativeTable::from_matrices(mats, d)?;
    Ok(table.linear_combination(&vec![-1.0; mats.len()]))
}

pub fn expected_product_poly(e: &MatrixEnsemble, spec: &DerivativeSpec) -> Result<RealPolynomial> {
    if spec.len() != e.len() {
        return Err(Error::DimensionMismatch { expected: e.len(), found: spec.len() });
    }
    Ok(SubsetDerivativeTable::new(e)?.expected_product(spec))
}

/// `mu_2[A_1..A_m](x) = prod (1 - d/dz_i d/dw_i) det(xI + sum z_i A_i) det(xI + sum w_i A_i) |_0`.
pub fn quadratic_mixed_char_poly(e: &MatrixEnsemble) -> Result<RealPolynomial> {
    expected_product_poly(e, &DerivativeSpec::quadratic(e.len()))
}

/// Single-matrix comparison polynomials: `(1 - d/dz d/dw)` versus
/// `(1 - (1/2) d^2/dz^2)` on the diagonal `z = w`, both applied to
/// `det(xI + zB) det(xI + wB)` at zero. Returns `(mixed, diagonal)`.
pub fn single_matrix_restrictions(b: &HermitianMatrix) -> Result<(RealPolynomial, RealPolynomial)> {
    let d = b.dim();
    let e = elementary_symmetric(&b.eigenvalues()?);
    // q(x, z) = sum_k e_k x^{d-k} z^k
    let q = |k: usize| RealPolynomial::constant(e[k]).shift_up(d - k);
    let q0 = q(0);
    let q1 = if d >= 1 { q(1) } else { RealPolynomial::zero() };
    let q2 = if d >= 2 { q(2) } else { RealPolynomial::zero() };
    let mixed = q0.mul(&q0).sub(&q1.mul(&q1));
    // [z^2] q(x,z)^2 = 2 q0 q2 + q1^2
    let diag = q0.mul(&q0).sub(&q0.mul(&q2).scale(2.0).add(&q1.mul(&q1)));
    Ok((mixed, diag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{truncated_ring_oracle, OracleMode};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn ens(ms: Vec<HermitianMatrix>) -> MatrixEnsemble {
        MatrixEnsemble::new(ms).unwrap()
    }

    fn p(c: &[f64]) -> RealPolynomial {
        RealPolynomial::new(c.to_vec())
    }

    fn close(a: &RealPolynomial, b: &RealPolynomial, tol: f64) -> bool {
        a.max_coeff_diff(b) <= tol
    }

    fn example_29() -> MatrixEnsemble {
        ens(vec![HermitianMatrix::diag(&[1.0, -1.0]), HermitianMatrix::diag(&[-1.0, 1.0])])
    }

    fn coordinate_pair() -> MatrixEnsemble {
        ens(vec![HermitianMatrix::diag(&[1.0, 0.0]), HermitianMatrix::diag(&[0.0, 1.0])])
    }

    #[test]
    fn subset_derivative_examples() {
        let e = ens(vec![HermitianMatrix::diag(&[0.3, 1.7])]);
        assert_eq!(subset_derivative(&e, &[]).unwrap(), RealPolynomial::monomial(2));
        assert!(close(&subset_derivative(&e, &[0]).unwrap(), &p(&[0.0, 2.0]), 1e-14));
        let c = coordinate_pair();
        assert!(close(&subset_derivative(&c, &[0, 1]).unwrap(), &p(&[1.0]), 1e-14));
    }

    #[test]
    fn subset_derivative_beyond_dim_is_zero() {
        let e = ens(vec![HermitianMatrix::diag(&[1.0]), HermitianMatrix::diag(&[2.0])]);
        assert!(subset_derivative(&e, &[0, 1]).unwrap().is_zero());
    }

    #[test]
    fn mixed_char_poly_examples() {
        assert!(close(&mixed_char_poly(&example_29(), &[1.0, 1.0]).unwrap(), &p(&[2.0, 0.0, 1.0]), 1e-12));
        assert!(close(&mixed_char_poly(&ens(vec![HermitianMatrix::diag(&[2.0])]), &[1.0]).unwrap(), &p(&[-2.0, 1.0]), 1e-14));
        assert!(close(&mixed_char_poly(&coordinate_pair(), &[1.0, 1.0]).unwrap(), &p(&[1.0, -2.0, 1.0]), 1e-14));
    }

    #[test]
    fn expected_product_examples() {
        let one = ens(vec![HermitianMatrix::diag(&[1.0])]);
        let q = expected_product_poly(&one, &DerivativeSpec::new(vec![0.0], vec![0.0], vec![-1.0]).unwrap()).unwrap();
        assert!(close(&q, &p(&[-1.0, 0.0, 1.0]), 1e-14));
        let i2 = ens(vec![HermitianMatrix::identity(2)]);
        let q = expected_product_poly(&i2, &DerivativeSpec::quadratic(1)).unwrap();
        assert!(close(&q, &p(&[0.0, 0.0, -4.0, 0.0, 1.0]), 1e-13));
        let q = expected_product_poly(&one, &DerivativeSpec::fixed(&[1.0])).unwrap();
        assert!(close(&q, &p(&[-1.0, 0.0, 1.0]), 1e-14));
    }

    #[test]
    fn quadratic_examples() {
        let q = quadratic_mixed_char_poly(&ens(vec![HermitianMatrix::diag(&[1.0])])).unwrap();
        assert!(close(&q, &p(&[-1.0, 0.0, 1.0]), 1e-14));
        assert!(q.maxroot_certified(1e-10).unwrap() <= 4.0);
        let q = quadratic_mixed_char_poly(&ens(vec![HermitianMatrix::identity(2)])).unwrap();
        assert_abs_diff_eq!(q.maxroot_certified(1e-12).unwrap(), 2.0, epsilon = 1e-9);
        let q = quadratic_mixed_char_poly(&ens(vec![HermitianMatrix::zeros(2)])).unwrap();
        assert_eq!(q, RealPolynomial::monomial(4));
    }

    #[test]
    fn size_guards() {
        let big = ens(vec![HermitianMatrix::zeros(1); 15]);
        assert!(matches!(mixed_char_poly(&big, &[1.0; 15]), Err(Error::SizeGuard { .. })));
        let wide = ens(vec![HermitianMatrix::zeros(11)]);
        assert!(matches!(quadratic_mixed_char_poly(&wide), Err(Error::SizeGuard { .. })));
    }

    #[test]
    fn stability_flag() {
        let s = DerivativeSpec::fixed(&[0.5, -2.0]);
        assert_eq!(s.stability_safe(), vec![true, true]);
        let q = DerivativeSpec::quadratic(1);
        assert_eq!(q.stability_safe(), vec![true]);
        let bad = DerivativeSpec::new(vec![-2.0], vec![2.0], vec![-1.0]).unwrap();
        assert_eq!(bad.stability_safe(), vec![false]);
    }

    #[test]
    fn single_matrix_comparison() {
        let b = HermitianMatrix::diag(&[0.5, 0.3, 0.2]);
        let (mixed, diag) = single_matrix_restrictions(&b).unwrap();
        let mr = mixed.maxroot_certified(1e-12).unwrap();
        let dr = diag.maxroot_certified(1e-12).unwrap();
        assert_abs_diff_eq!(mr, 1.0, epsilon = 1e-9);
        assert!(mr <= dr + 1e-7);
    }

    fn random_psd(d: usize, vals: &[f64], rank: usize) -> HermitianMatrix {
        let mut it = vals.iter().cycle();
        let g = DMatrix::from_fn(d, rank, |_, _| Complex64::new(*it.next().unwrap(), *it.next().unwrap()));
        HermitianMatrix::symmetrized(&g * g.adjoint())
    }

    fn random_ensemble(d: usize, m: usize, vals: &[f64]) -> MatrixEnsemble {
        let ms = (0..m)
            .map(|i| {
                let shifted: Vec<f64> = vals.iter().skip(3 * i + 1).chain(vals.iter()).cloned().collect();
                random_psd(d, &shifted, 1 + (i % d)).scale(1.0 / (m as f64))
            })
            .collect();
        ens(ms)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn polarization_matches_column_expansion(d in 1usize..=4, m in 1usize..=4, vals in prop::collection::vec(-1.0f64..1.0, 24..48)) {
            let e = random_ensemble(d, m, &vals);
            for mask in 0..(1usize << m) {
                let s: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
                let a = subset_derivative(&e, &s).unwrap();
                let b = subset_derivative_by_columns(&e, &s).unwrap();
                prop_assert!(a.max_coeff_diff(&b) <= 1e-10, "{:?} {:?}", a, b);
            }
        }

        #[test]
        fn fast_path_matches_oracle(d in 1usize..=4, m in 1usize..=4, vals in prop::collection::vec(-1.0f64..1.0, 24..48), signs in prop::collection::vec(prop::bool::ANY, 4)) {
            let e = random_ensemble(d, m, &vals);
            let eps: Vec<f64> = signs[..m].iter().map(|&s| if s { 1.0 } else { -1.0 }).collect();
            let fast = mixed_char_poly(&e, &eps).unwrap();
            let slow = truncated_ring_oracle(&e, &OracleMode::Linear(eps.clone())).unwrap();
            prop_assert!(fast.rel_coeff_diff(&slow) <= 1e-8);
            let spec = DerivativeSpec::new(
                vals[..m].to_vec(),
                vals[4..4 + m].to_vec(),
                vals[8..8 + m].iter().map(|v| -v * v).collect(),
            ).unwrap();
            let fast = expected_product_poly(&e, &spec).unwrap();
            let slow = truncated_ring_oracle(&e, &OracleMode::Product(spec)).unwrap();
            prop_assert!(fast.rel_coeff_diff(&slow) <= 1e-8);
        }

        #[test]
        fn multi_affine_and_symmetric(d in 1usize..=4, m in 2usize..=4, vals in prop::collection::vec(-1.0f64..1.0, 24..48), lambda in 0.0f64..1.0) {
            let e = random_ensemble(d, m, &vals);
            let alt = random_psd(d, &vals[5..], d);
            let mut mixed = e.matrices().to_vec();
            mixed[0] = e.get(0).scale(lambda).add(&alt.scale(1.0 - lambda));
            let mut other = e.matrices().to_vec();
            other[0] = alt;
            let ones = vec![1.0; m];
            let lhs = mixed_char_poly(&ens(mixed), &ones).unwrap();
            let rhs = mixed_char_poly(&e, &ones).unwrap().scale(lambda)
                .add(&mixed_char_poly(&ens(other), &ones).unwrap().scale(1.0 - lambda));
            prop_assert!(lhs.max_coeff_diff(&rhs) <= 1e-8);
            let mut rev = e.matrices().to_vec();
            rev.reverse();
            let a = mixed_char_poly(&e, &ones).unwrap();
            let b = mixed_char_poly(&ens(rev), &ones).unwrap();
            prop_assert!(a.max_coeff_diff(&b) <= 1e-10);
        }

        #[test]
        fn scaling_identity(d in 1usize..=5, m in 1usize..=5, vals in prop::collection::vec(-1.0f64..1.0, 24..48), t in 0.1f64..5.0) {
            let e = random_ensemble(d, m, &vals);
            let scaled = ens(e.matrices().iter().map(|a| a.scale(t)).collect());
            let ones = vec![1.0; m];
            let lhs = mixed_char_poly(&scaled, &ones).unwrap();
            let rhs = mixed_char_poly(&e, &ones).unwrap().root_scaling(t).unwrap();
            prop_assert!(lhs.rel_coeff_diff(&rhs) <= 1e-8);
        }

        #[test]
        fn trace_identity(d in 1usize..=6, vals in prop::collection::vec(-1.0f64..1.0, 24..48)) {
            let b = random_psd(d, &vals, d);
            let q = mixed_char_poly(&ens(vec![b.clone()]), &[1.0]).unwrap();
            let top = q.maxroot_certified(1e-12).unwrap();
            prop_assert!((top - b.trace()).abs() <= 1e-8 * (1.0 + b.trace()));
        }
    }
}
