//! Brute-force reference for mixed and expected product polynomials.
//!
//! Determinants are expanded by cofactors over the ring of polynomials in `x`
//! and multilinear monomials in `z` (with `z_i^2 = 0`), with no division. The
//! differential operator is then applied coefficient by coefficient.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::MatrixEnsemble;
use crate::mixed::DerivativeSpec;
use crate::poly::RealPolynomial;

pub const ORACLE_MAX_DIM: usize = 4;
pub const ORACLE_MAX_INDICES: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub enum OracleMode {
    /// `prod (1 - eps_i d/dz_i)` on `det(xI + sum z_i A_i)`.
    Linear(Vec<f64>),
    /// The quadratic operator on `det(xI + sum z_i A_i) det(xI + sum w_i A_i)`.
    Product(DerivativeSpec),
}

/// Ring element: monomial mask -> coefficients of a polynomial in `x`.
type Elem = BTreeMap<u32, Vec<Complex64>>;

fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_add_into(acc: &mut Vec<Complex64>, p: &[Complex64], sign: f64) {
    if acc.len() < p.len() {
        acc.resize(p.len(), Complex64::new(0.0, 0.0));
    }
    for (a, x) in acc.iter_mut().zip(p) {
        *a += x * sign;
    }
}

fn ring_mul(a: &Elem, b: &Elem) -> Elem {
    let mut out = Elem::new();
    for (&ma, pa) in a {
        for (&mb, pb) in b {
            if ma & mb != 0 {
                continue;
            }
            let prod = poly_mul(pa, pb);
            poly_add_into(out.entry(ma | mb).or_default(), &prod, 1.0);
        }
    }
    out
}

fn ring_add_into(acc: &mut Elem, e: &Elem, sign: f64) {
    for (&m, p) in e {
        poly_add_into(acc.entry(m).or_default(), p, sign);
    }
}

/// Cofactor expansion of rows `row..d` against the columns in `cols`.
fn det_rec(entries: &[Vec<Elem>], row: usize, cols: &[usize]) -> Elem {
    if cols.is_empty() {
        let mut one = Elem::new();
        one.insert(0, vec![Complex64::new(1.0, 0.0)]);
        return one;
    }
    let mut acc = Elem::new();
    for (pos, &c) in cols.iter().enumerate() {
        let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
        let minor = det_rec(entries, row + 1, &rest);
        let term = ring_mul(&entries[row][c], &minor);
        ring_add_into(&mut acc, &term, if pos % 2 == 0 { 1.0 } else { -1.0 });
    }
    acc
}

fn symbolic_det(e: &MatrixEnsemble) -> Elem {
    let d = e.dim();
    let entries: Vec<Vec<Elem>> = (0..d)
        .map(|j| {
            (0..d)
                .map(|k| {
                    let mut el = Elem::new();
                    if j == k {
                        el.insert(0, vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]);
                    }
                    for (i, a) in e.matrices().iter().enumerate() {
                        let v = a.entry(j, k);
                        if v != Complex64::new(0.0, 0.0) {
                            el.insert(1 << i, vec![v]);
                        }
                    }
                    el
                })
                .collect()
        })
        .collect();
    let cols: Vec<usize> = (0..d).collect();
    det_rec(&entries, 0, &cols)
}

fn to_real(p: &[Complex64]) -> Result<RealPolynomial> {
    let scale = p.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let imag = p.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if imag > 1e-9 * (1.0 + scale) {
        return Err(Error::NumericalFailure(format!("oracle produced imaginary coefficient {imag:.3e}")));
    }
    Ok(RealPolynomial::new(p.iter().map(|z| z.re).collect()))
}

pub fn truncated_ring_oracle(e: &MatrixEnsemble, mode: &OracleMode) -> Result<RealPolynomial> {
    if e.dim() > ORACLE_MAX_DIM {
        return Err(Error::SizeGuard { what: "oracle dimension d", value: e.dim(), limit: ORACLE_MAX_DIM });
    }
    if e.len() > ORACLE_MAX_INDICES {
        return Err(Error::SizeGuard { what: "oracle ensemble size m", value: e.len(), limit: ORACLE_MAX_INDICES });
    }
    let det = symbolic_det(e);
    let zero = Complex64::new(0.0, 0.0);
    match mode {
        OracleMode::Linear(eps) => {
            if eps.len() != e.len() {
                return Err(Error::DimensionMismatch { expected: e.len(), found: eps.len() });
            }
            let mut acc = vec![zero; e.dim() + 1];
            for (&mask, p) in &det {
                let w: f64 = (0..e.len()).filter(|i| mask >> i & 1 == 1).map(|i| -eps[i]).product();
                poly_add_into(&mut acc, p, w);
            }
            to_real(&acc)
        }
        OracleMode::Product(spec) => {
            if spec.len() != e.len() {
                return Err(Error::DimensionMismatch { expected: e.len(), found: spec.len() });
            }
            let mut acc = vec![zero; 2 * e.dim() + 1];
            for (&s, ps) in &det {
                for (&t, pt) in &det {
                    let mut w = 1.0;
                    for i in 0..e.len() {
                        w *= match (s >> i & 1, t >> i & 1) {
                            (1, 1) => spec.c[i],
                            (1, 0) => spec.a[i],
                            (0, 1) => spec.b[i],
                            _ => 1.0,
                        };
                    }
                    if w != 0.0 {
                        poly_add_into(&mut acc, &poly_mul(ps, pt), w);
                    }
                }
            }
            to_real(&acc)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::HermitianMatrix;

    fn ens(ms: Vec<HermitianMatrix>) -> MatrixEnsemble {
        MatrixEnsemble::new(ms).unwrap()
    }

    #[test]
    fn oracle_examples() {
        let e = ens(vec![HermitianMatrix::diag(&[1.0, -1.0]), HermitianMatrix::diag(&[-1.0, 1.0])]);
        let q = truncated_ring_oracle(&e, &OracleMode::Linear(vec![1.0, 1.0])).unwrap();
        assert_eq!(q, RealPolynomial::new(vec![2.0, 0.0, 1.0]));

        let e = ens(vec![HermitianMatrix::diag(&[1.0, 0.0]), HermitianMatrix::diag(&[0.0, 1.0])]);
        let q = truncated_ring_oracle(&e, &OracleMode::Linear(vec![1.0, 1.0])).unwrap();
        assert_eq!(q, RealPolynomial::new(vec![1.0, -2.0, 1.0]));

        let e = ens(vec![HermitianMatrix::diag(&[1.0])]);
        let q = truncated_ring_oracle(&e, &OracleMode::Product(DerivativeSpec::quadratic(1))).unwrap();
        assert_eq!(q, RealPolynomial::new(vec![-1.0, 0.0, 1.0]));
    }

    #[test]
    fn oracle_handles_complex_entries() {
        // Pauli-Y: det(xI + zY) = x^2 - z^2, so mu[Y] = x^2
        let y = HermitianMatrix::make_hermitian(
            &[
                vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, -1.0)],
                vec![Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0)],
            ],
            1e-12,
        )
        .unwrap();
        let q = truncated_ring_oracle(&ens(vec![y]), &OracleMode::Linear(vec![1.0])).unwrap();
        assert_eq!(q, RealPolynomial::monomial(2));
    }

    #[test]
    fn oracle_guard() {
        let e = ens(vec![HermitianMatrix::zeros(5)]);
        assert!(matches!(
            truncated_ring_oracle(&e, &OracleMode::Linear(vec![1.0])),
            Err(Error::SizeGuard { .. })
        ));
        let e = ens(vec![HermitianMatrix::zeros(1); 5]);
        assert!(matches!(
            truncated_ring_oracle(&e, &OracleMode::Linear(vec![1.0; 5])),
            Err(Error::SizeGuard { .. })
        ));
    }
}
