//! Barrier functions of determinantal pencils and the above-the-roots
//! certificates built from them.
//!
//! For PSD coefficient matrices, `det(xI + sum z_i A_i)` is positive at every
//! point `(x, z) + t` with `t >= 0` exactly when the pencil is positive
//! definite at `(x, z)`, so all checks here reduce to eigenvalue tests.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{HermitianMatrix, MatrixEnsemble};
use crate::poly::RealPolynomial;

pub const SHAPE_TOL: f64 = 1e-9;
pub const DEFAULT_GRID: [f64; 6] = [0.0, 0.5, 1.0, 2.0, 4.0, 8.0];
pub const QX_ALPHA: f64 = 4.0;
pub const QX_T: f64 = 2.0;
const QX_TOL: f64 = 1e-9;
const TRANSFER_TOL: f64 = 1e-9;

/// A point `(x, z_1, ..., z_m)` for the pencil `xI + sum z_i A_i`.
#[derive(Debug, Clone)]
pub struct BarrierPoint<'a> {
    ensemble: &'a MatrixEnsemble,
    pub x: f64,
    pub shifts: Vec<f64>,
}

impl<'a> BarrierPoint<'a> {
    /// Rejects non-PSD ensembles: positive definiteness of the pencil only
    /// decides the above-roots question when every `A_i` is PSD.
    pub fn new(ensemble: &'a MatrixEnsemble, x: f64, shifts: Vec<f64>) -> Result<Self> {
        if shifts.len() != ensemble.len() {
            return Err(Error::DimensionMismatch { expected: ensemble.len(), found: shifts.len() });
        }
        ensemble.require_psd()?;
        Ok(BarrierPoint { ensemble, x, shifts })
    }

    pub fn ensemble(&self) -> &MatrixEnsemble {
        self.ensemble
    }

    pub fn pencil(&self) -> HermitianMatrix {
        let d = self.ensemble.dim();
        HermitianMatrix::identity(d).scale(self.x).add(&self.ensemble.weighted_sum(&self.shifts))
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        self.pencil().min_eigenvalue()
    }

    pub fn is_above_roots(&self) -> Result<bool> {
        Ok(self.min_eigenvalue()? > 0.0)
    }

    /// The same point moved by `t` along `z_j`.
    pub fn moved(&self, j: usize, t: f64) -> Self {
        let mut shifts = self.shifts.clone();
        shifts[j] += t;
        BarrierPoint { ensemble: self.ensemble, x: self.x, shifts }
    }

    /// `log det` of the pencil; requires the point to be above the roots.
    pub fn log_det(&self) -> Result<f64> {
        let ev = self.pencil().eigenvalues()?;
        if ev[0] <= 0.0 {
            return Err(Error::NotAboveRoots { min_eigenvalue: ev[0] });
        }
        Ok(ev.iter().map(|v| v.ln()).sum())
    }

    fn require_above(&self) -> Result<DMatrix<Complex64>> {
        let pencil = self.pencil();
        let min = pencil.min_eigenvalue()?;
        if min <= 0.0 {
            return Err(Error::NotAboveRoots { min_eigenvalue: min });
        }
        Ok(pencil.matrix().clone())
    }
}

fn check_index(pt: &BarrierPoint<'_>, j: usize) -> Result<()> {
    if j >= pt.ensemble.len() {
        return Err(Error::InvalidArgument(format!("index {j} out of range for {} matrices", pt.ensemble.len())));
    }
    Ok(())
}

/// `tr(M^{-1} A_j)` with `M = xI + sum z_i A_i`, the logarithmic derivative
/// of `det M` in `z_j`.
pub fn barrier_value(pt: &BarrierPoint<'_>, j: usize) -> Result<f64> {
    check_index(pt, j)?;
    let m = pt.require_above()?;
    resolvent_trace(m, pt.ensemble.get(j))
}

fn resolvent_trace(m: DMatrix<Complex64>, a: &HermitianMatrix) -> Result<f64> {
    let chol = m
        .cholesky()
        .ok_or_else(|| Error::NumericalFailure("pencil lost positive definiteness".into()))?;
    let x = chol.solve(a.matrix());
    Ok(x.trace().re)
}

/// Central difference of `log det` in `z_j` with step `h`.
pub fn finite_difference_barrier(pt: &BarrierPoint<'_>, j: usize, h: f64) -> Result<f64> {
    check_index(pt, j)?;
    let plus = pt.moved(j, h).log_det()?;
    let minus = pt.moved(j, -h).log_det()?;
    Ok((plus - minus) / (2.0 * h))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeReport {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub nonnegative: bool,
    pub non_increasing: bool,
    pub convex: bool,
}

impl ShapeReport {
    pub fn passed(&self) -> bool {
        self.nonnegative && self.non_increasing && self.convex
    }
}

/// Samples `t -> Phi^j(pt + t e_j)` on an ascending grid of nonnegative
/// offsets and checks sign, monotonicity and convexity (divided differences).
pub fn barrier_shape_check(pt: &BarrierPoint<'_>, j: usize, grid: &[f64]) -> Result<ShapeReport> {
    check_index(pt, j)?;
    pt.require_above()?;
    if grid.iter().any(|&t| !(t >= 0.0)) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("grid must be ascending and nonnegative".into()));
    }
    let values = grid.iter().map(|&t| barrier_value(&pt.moved(j, t), j)).collect::<Result<Vec<_>>>()?;
    let nonnegative = values.iter().all(|&v| v >= -SHAPE_TOL);
    let non_increasing = values.windows(2).all(|w| w[1] <= w[0] + SHAPE_TOL);
    let slopes: Vec<f64> =
        grid.windows(2).zip(values.windows(2)).map(|(g, v)| (v[1] - v[0]) / (g[1] - g[0])).collect();
    let convex = slopes.windows(2).all(|s| s[1] - s[0] >= -SHAPE_TOL);
    Ok(ShapeReport { grid: grid.to_vec(), values, nonnegative, non_increasing, convex })
}

/// `c^2 (2 phi / delta + phi^2) <= 1`.
pub fn ag_condition(phi: f64, c: f64, delta: f64) -> Result<bool> {
    if !(delta > 0.0) {
        return Err(Error::BadDelta(delta));
    }
    if !(c >= 0.0) || !(phi >= 0.0) {
        return Err(Error::InvalidArgument(format!("need c >= 0 and phi >= 0, got c = {c}, phi = {phi}")));
    }
    Ok(c * c * (2.0 * phi / delta + phi * phi) <= 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QxReport {
    /// `delta_j = 2 tr(B_j)`.
    pub deltas: Vec<f64>,
    /// Smallest eigenvalue of `4I - sum delta_i B_i`.
    pub corner_min_eigenvalue: f64,
    /// `corner_min_eigenvalue >= 2`.
    pub corner_above: bool,
    /// Barrier value of the two-determinant product at the corner, `2 tr(M^{-1} B_j)`.
    pub phis: Vec<f64>,
    /// `2 tr(B_j) / (alpha - t) = tr(B_j)`.
    pub phi_bounds: Vec<f64>,
    pub phi_within: Vec<bool>,
    /// `phi_j / delta_j + phi_j^2 / 2` (zero when `B_j = 0`).
    pub conditions: Vec<f64>,
    pub condition_holds: Vec<bool>,
}

impl QxReport {
    pub fn passed(&self) -> bool {
        self.corner_above && self.phi_within.iter().all(|&b| b) && self.condition_holds.iter().all(|&b| b)
    }
}

/// Corner certificate with `alpha = 4`, `t = 2`: the point `x = 4`,
/// `z_i = w_i = -2 tr(B_i)` is above the roots of the product of the two
/// determinants and satisfies the shift condition for every index.
pub fn qx_certificate(ensemble: &MatrixEnsemble) -> Result<QxReport> {
    ensemble.require_psd()?;
    let traces: Vec<f64> = ensemble.matrices().iter().map(|b| b.trace()).collect();
    let max_trace = traces.iter().copied().fold(0.0, f64::max);
    if max_trace > 1.0 + QX_TOL {
        return Err(Error::QxNormalizationViolated(format!("max trace {max_trace} exceeds 1")));
    }
    let weighted = ensemble.weighted_sum(&traces).max_eigenvalue()?;
    if weighted > 1.0 + QX_TOL {
        return Err(Error::QxNormalizationViolated(format!("||sum tr(B_i) B_i|| = {weighted} exceeds 1")));
    }
    let d = ensemble.dim();
    let deltas: Vec<f64> = traces.iter().map(|tr| QX_T * tr).collect();
    let neg: Vec<f64> = deltas.iter().map(|v| -v).collect();
    let corner = HermitianMatrix::identity(d).scale(QX_ALPHA).add(&ensemble.weighted_sum(&neg));
    let corner_min_eigenvalue = corner.min_eigenvalue()?;
    let corner_above = corner_min_eigenvalue >= QX_ALPHA - QX_T - QX_TOL;
    if corner_min_eigenvalue <= 0.0 {
        return Err(Error::NotAboveRoots { min_eigenvalue: corner_min_eigenvalue });
    }
    let mut phis = Vec::with_capacity(ensemble.len());
    for b in ensemble.matrices() {
        phis.push(2.0 * resolvent_trace(corner.matrix().clone(), b)?);
    }
    let phi_bounds: Vec<f64> = traces.iter().map(|tr| 2.0 * tr / (QX_ALPHA - QX_T)).collect();
    let phi_within: Vec<bool> = phis.iter().zip(&phi_bounds).map(|(p, b)| *p <= b + QX_TOL).collect();
    let conditions: Vec<f64> = phis
        .iter()
        .zip(&deltas)
        .map(|(&p, &dl)| if dl > 0.0 { p / dl + 0.5 * p * p } else { 0.0 })
        .collect();
    let condition_holds = conditions.iter().map(|&c| c <= 1.0 + QX_TOL).collect();
    Ok(QxReport { deltas, corner_min_eigenvalue, corner_above, phis, phi_bounds, phi_within, conditions, condition_holds })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferReport {
    /// Largest root of `q + c q'`.
    pub x0: f64,
    /// Largest root of `q`.
    pub top: f64,
    /// `x0 + c >= top`.
    pub holds: bool,
}

/// A point above the roots of `(1 + c d/dx) q` moves above the roots of `q`
/// after adding `c`.
pub fn transfer_check(q: &RealPolynomial, c: f64) -> Result<TransferReport> {
    let shifted = q.add(&q.derivative().scale(c));
    let x0 = shifted.maxroot_certified(1e-12)?;
    let top = q.maxroot_certified(1e-12)?;
    Ok(TransferReport { x0, top, holds: x0 + c >= top - TRANSFER_TOL * (1.0 + top.abs()) })
}
