//! Dense kernels: eigensolvers, CG, finite-difference HVPs and the scalar
//! Hessian-inverse estimate.

pub mod cg;
pub mod dg;
pub mod eigen;
pub mod hvp;

pub use cg::{cg_solve_spd, hessianfr_rhs_cg, squared_system_cg, CgParams, CgSolution};
pub use dg::{dg_update, DgState};
pub use eigen::{eig_sym, eigenvalues, spectral_norm, spectral_radius, SymEigen};
pub use hvp::{default_fd_alpha, fd_hvp_yx, fd_hvp_yx_dir};

use crate::error::{Error, Result};
use crate::Matrix;

/// Tolerance used for the structural checks on Hessian blocks.
pub const BLOCK_SYMMETRY_TOL: f64 = 1e-10;

/// `∇²f = [[H_xx, H_xy], [H_yx, H_yy]]` at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct HessianBlocks {
    pub hxx: Matrix,
    pub hxy: Matrix,
    pub hyx: Matrix,
    pub hyy: Matrix,
}

impl HessianBlocks {
    /// Validates shapes, symmetry of the diagonal blocks and `H_yx = H_xyᵀ`.
    pub fn new(hxx: Matrix, hxy: Matrix, hyx: Matrix, hyy: Matrix) -> Result<Self> {
        let (d1, d2) = (hxx.nrows(), hyy.nrows());
        if hxx.shape() != (d1, d1)
            || hyy.shape() != (d2, d2)
            || hxy.shape() != (d1, d2)
            || hyx.shape() != (d2, d1)
        {
            return Err(Error::Dimension(format!(
                "inconsistent block shapes {:?} {:?} {:?} {:?}",
                hxx.shape(),
                hxy.shape(),
                hyx.shape(),
                hyy.shape()
            )));
        }
        let asym = max_abs_diff(&hxx, &hxx.transpose())
            .max(max_abs_diff(&hyy, &hyy.transpose()))
            .max(max_abs_diff(&hyx, &hxy.transpose()));
        if asym > BLOCK_SYMMETRY_TOL {
            return Err(Error::NotSymmetric(asym));
        }
        Ok(Self { hxx, hxy, hyx, hyy })
    }

    /// Builds blocks with `H_xy` and its transpose.
    pub fn from_parts(hxx: Matrix, hxy: Matrix, hyy: Matrix) -> Result<Self> {
        let hyx = hxy.transpose();
        Self::new(hxx, hxy, hyx, hyy)
    }

    /// Splits a full `(d1+d2)²` Hessian.
    pub fn from_full(h: &Matrix, d1: usize) -> Self {
        let n = h.nrows();
        let d2 = n - d1;
        Self {
            hxx: h.view((0, 0), (d1, d1)).into_owned(),
            hxy: h.view((0, d1), (d1, d2)).into_owned(),
            hyx: h.view((d1, 0), (d2, d1)).into_owned(),
            hyy: h.view((d1, d1), (d2, d2)).into_owned(),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.hxx.nrows(), self.hyy.nrows())
    }

    pub fn full(&self) -> Matrix {
        let (d1, d2) = self.dims();
        let mut h = Matrix::zeros(d1 + d2, d1 + d2);
        h.view_mut((0, 0), (d1, d1)).copy_from(&self.hxx);
        h.view_mut((0, d1), (d1, d2)).copy_from(&self.hxy);
        h.view_mut((d1, 0), (d2, d1)).copy_from(&self.hyx);
        h.view_mut((d1, d1), (d2, d2)).copy_from(&self.hyy);
        h
    }

    /// `H_yy⁻¹` by LU; singular (or numerically singular) → error.
    pub fn hyy_inverse(&self) -> Result<Matrix> {
        invert(&self.hyy)
    }

    /// `H_xx − H_xy H_yy⁻¹ H_yx`, symmetrised.
    pub fn schur(&self) -> Result<Matrix> {
        let hyy_inv = self.hyy_inverse()?;
        let s = &self.hxx - &self.hxy * hyy_inv * &self.hyx;
        Ok((&s + s.transpose()) * 0.5)
    }
}

pub(crate) fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(u, v)| (u - v).abs())
        .fold(0.0, f64::max)
}

/// LU inverse that also rejects numerically singular input.
pub(crate) fn invert(a: &Matrix) -> Result<Matrix> {
    let inv = a
        .clone()
        .lu()
        .try_inverse()
        .ok_or(Error::SingularFollowerHessian)?;
    // Reject inverses whose condition estimate is beyond double precision.
    let cond = a.norm() * inv.norm();
    if !cond.is_finite() || cond > 1e15 {
        return Err(Error::SingularFollowerHessian);
    }
    Ok(inv)
}

/// Solves `a x = b` by LU with the same singularity policy as [`invert`].
pub(crate) fn solve(a: &Matrix, b: &crate::Vector) -> Result<crate::Vector> {
    let lu = a.clone().lu();
    let piv = lu.u().diagonal().map(f64::abs);
    if piv.min() <= 1e-14 * piv.max() {
        return Err(Error::SingularFollowerHessian);
    }
    let x = lu.solve(b).ok_or(Error::SingularFollowerHessian)?;
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::SingularFollowerHessian);
    }
    Ok(x)
}
