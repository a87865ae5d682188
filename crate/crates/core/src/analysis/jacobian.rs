//! Linearisations of the update maps at a critical point.
//!
//! For the ridge methods the Jacobian `J = I − η K H` is built densely and
//! its spectrum computed with the general eigensolver. The block-triangular
//! matrix `M` it is similar to is built alongside; its spectrum is the union
//! of two symmetric spectra, so it is computed exactly and offers an
//! independent check on `ρ(J)`.

use crate::error::{Error, Result};
use crate::linalg::{eig_sym, eigenvalues, HessianBlocks};
use crate::optim::Algorithm;
use crate::{Matrix, Vector};

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralReport {
    pub algorithm: Algorithm,
    pub jacobian: Matrix,
    /// Spectrum of `jacobian` as `(re, im)` pairs.
    pub eigenvalues: Vec<(f64, f64)>,
    pub spectral_radius: f64,
    pub converges: bool,
    /// Block-triangular similar matrix, for the ridge methods.
    pub similar: Option<Matrix>,
    pub similar_radius: Option<f64>,
}

impl SpectralReport {
    fn new(algorithm: Algorithm, jacobian: Matrix, similar: Option<(Matrix, f64)>) -> Result<Self> {
        if !jacobian.iter().all(|v| v.is_finite()) {
            return Err(Error::NumericalDivergence("non-finite Jacobian".into()));
        }
        let eigenvalues = eigenvalues(&jacobian)?;
        let spectral_radius = eigenvalues
            .iter()
            .map(|(re, im)| re.hypot(*im))
            .fold(0.0, f64::max);
        let (similar, similar_radius) = match similar {
            Some((m, r)) => (Some(m), Some(r)),
            None => (None, None),
        };
        Ok(Self {
            algorithm,
            jacobian,
            eigenvalues,
            spectral_radius,
            converges: spectral_radius < 1.0,
            similar,
            similar_radius,
        })
    }

    /// `|ρ(J) − ρ(M)| / max(1, ρ(M))`, when `M` was built.
    pub fn similarity_gap(&self) -> Option<f64> {
        self.similar_radius
            .map(|r| (self.spectral_radius - r).abs() / r.max(1.0))
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if eta >= 0.0 && eta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("step size must be ≥ 0, got {eta}")))
    }
}

fn check_coefficients(c1: f64, c2: f64) -> Result<()> {
    if c1 >= 0.0 && c2 >= 0.0 && c1.is_finite() && c2.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "need c1, c2 ≥ 0, got c1 = {c1}, c2 = {c2}"
        )))
    }
}

fn stack(a: &Matrix, b: &Matrix, c: &Matrix, d: &Matrix) -> Matrix {
    let (d1, d2) = (a.nrows(), d.nrows());
    let mut m = Matrix::zeros(d1 + d2, d1 + d2);
    m.view_mut((0, 0), (d1, d1)).copy_from(a);
    m.view_mut((0, d1), (d1, d2)).copy_from(b);
    m.view_mut((d1, 0), (d2, d1)).copy_from(c);
    m.view_mut((d1, d1), (d2, d2)).copy_from(d);
    m
}

fn sym(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

/// `max |1 − η λ|` over the eigenvalues of a symmetric matrix.
fn contraction(m: &Matrix, eta: f64) -> Result<f64> {
    Ok(eig_sym(&sym(m))?
        .values
        .iter()
        .map(|l| (1.0 - eta * l).abs())
        .fold(0.0, f64::max))
}

/// HessianFR at a critical point, with `c₁ = η_y1/η_x` and `c₂ = η_y2/η_x`.
///
/// `J = I − η_x [[I, 0], [−H_yy⁻¹H_yx, −c₁I + c₂H_yy⁻¹]] H`, similar to
/// `M = I − η_x [[S, H_xy], [0, −c₁H_yy + c₂I]]` with `S` the Schur
/// complement.
pub fn jacobian_hessianfr(h: &HessianBlocks, eta_x: f64, c1: f64, c2: f64) -> Result<SpectralReport> {
    let alg = if c2 == 0.0 { Algorithm::Fr } else { Algorithm::HessianFr };
    ridge_jacobian(alg, h, eta_x, c1, c2, None)
}

/// FR: HessianFR with `c₂ = 0`.
pub fn jacobian_fr(h: &HessianBlocks, eta_x: f64, c1: f64) -> Result<SpectralReport> {
    ridge_jacobian(Algorithm::Fr, h, eta_x, c1, 0.0, None)
}

/// GDN: HessianFR with `c₁ = 0`, `c₂ = 1/η_x`.
pub fn jacobian_gdn(h: &HessianBlocks, eta_x: f64) -> Result<SpectralReport> {
    if !(eta_x > 0.0) {
        return Err(Error::InvalidParameter("GDN Jacobian needs η_x > 0".into()));
    }
    ridge_jacobian(Algorithm::Gdn, h, eta_x, 0.0, 1.0 / eta_x, None)
}

fn ridge_jacobian(
    alg: Algorithm,
    h: &HessianBlocks,
    eta_x: f64,
    c1: f64,
    c2: f64,
    precond: Option<(&Vector, &Vector)>,
) -> Result<SpectralReport> {
    check_eta(eta_x)?;
    check_coefficients(c1, c2)?;
    let (d1, d2) = h.dims();
    let hyy_inv = h.hyy_inverse()?;
    let schur = h.schur()?;
    let (p1, p2) = match precond {
        Some((p1, p2)) => (Matrix::from_diagonal(p1), Matrix::from_diagonal(p2)),
        None => (Matrix::identity(d1, d1), Matrix::identity(d2, d2)),
    };
    let follower = Matrix::identity(d2, d2) * -c1 + &hyy_inv * c2;
    let k = stack(
        &Matrix::identity(d1, d1),
        &Matrix::zeros(d1, d2),
        &(-&hyy_inv * &h.hyx),
        &follower,
    );
    let p = stack(&p1, &Matrix::zeros(d1, d2), &Matrix::zeros(d2, d1), &p2);
    let n = d1 + d2;
    let j = Matrix::identity(n, n) - k * p * h.full() * eta_x;

    let top = &p1 * &schur;
    let bottom = &follower * &p2 * &h.hyy;
    let m = Matrix::identity(n, n)
        - stack(&top, &(&p1 * &h.hxy), &Matrix::zeros(d2, d1), &bottom) * eta_x;
    // Both diagonal blocks are similar to symmetric matrices:
    // P₁S ~ P₁^{1/2} S P₁^{1/2} and (−c₁I + c₂H_yy⁻¹)P₂H_yy ~
    // P₂^{1/2}(−c₁H_yy + c₂I)P₂^{1/2}.
    let (sq1, sq2) = (p1.map(f64::sqrt), p2.map(f64::sqrt));
    let d = Matrix::identity(d2, d2) * c2 - &h.hyy * c1;
    let m_radius = contraction(&(&sq1 * &schur * &sq1), eta_x)?
        .max(contraction(&(&sq2 * d * &sq2), eta_x)?);
    SpectralReport::new(alg, j, Some((m, m_radius)))
}

/// `U = [[H_xx, H_xy], [−cH_yx, −cH_yy]]`, the simultaneous-gradient field
/// scaled by the time-scale ratio `c = η_y/η_x`.
pub fn gda_matrix(h: &HessianBlocks, c: f64) -> Matrix {
    stack(&h.hxx, &h.hxy, &(&h.hyx * -c), &(&h.hyy * -c))
}

/// Two time-scale GDA: `J = I − η_x U`.
pub fn jacobian_ttsgda(h: &HessianBlocks, eta_x: f64, c: f64) -> Result<SpectralReport> {
    check_eta(eta_x)?;
    let u = gda_matrix(h, c);
    let n = u.nrows();
    SpectralReport::new(Algorithm::Ttsgda, Matrix::identity(n, n) - u * eta_x, None)
}

/// Extra-gradient: `J = I − η_x U + η_x² U²`.
pub fn jacobian_eg(h: &HessianBlocks, eta_x: f64, c: f64) -> Result<SpectralReport> {
    check_eta(eta_x)?;
    SpectralReport::new(Algorithm::Eg, eg_polynomial(&gda_matrix(h, c), eta_x), None)
}

/// `I − ηU + η²U²` for an arbitrary square `U`.
pub fn eg_polynomial(u: &Matrix, eta: f64) -> Matrix {
    let n = u.nrows();
    let su = u * eta;
    Matrix::identity(n, n) - &su + &su * &su
}

#[derive(Clone, Debug, PartialEq)]
pub struct PreconditionedReport {
    pub spectral: SpectralReport,
    /// Smallest eigenvalue of `P₁^{1/2} S P₁^{1/2}`.
    pub leader_min_eig: f64,
    /// Smallest eigenvalue of `P₂^{1/2}(−c₁H_yy + c₂I)P₂^{1/2}`.
    pub follower_min_eig: f64,
    /// `2 / max(λ_max(P₁S), λ_max((−c₁I + c₂H_yy⁻¹)P₂H_yy))`.
    pub eta_x_max: f64,
}

impl PreconditionedReport {
    /// Both diagonal blocks of `M` have real positive spectra.
    pub fn blocks_positive(&self) -> bool {
        self.leader_min_eig > 0.0 && self.follower_min_eig > 0.0
    }
}

/// HessianFR with fixed diagonal preconditioners `P₁`, `P₂` (entries > 0).
/// With both equal to ones this is exactly [`jacobian_hessianfr`].
pub fn jacobian_hessianfr_preconditioned(
    h: &HessianBlocks,
    eta_x: f64,
    c1: f64,
    c2: f64,
    p1: &Vector,
    p2: &Vector,
) -> Result<PreconditionedReport> {
    let (d1, d2) = h.dims();
    if p1.len() != d1 || p2.len() != d2 {
        return Err(Error::Dimension(format!(
            "preconditioner lengths ({}, {}) vs blocks ({d1}, {d2})",
            p1.len(),
            p2.len()
        )));
    }
    if !p1.iter().chain(p2.iter()).all(|&v| v > 0.0 && v.is_finite()) {
        return Err(Error::InvalidParameter("preconditioner entries must be > 0".into()));
    }
    let alg = if c2 == 0.0 { Algorithm::Fr } else { Algorithm::HessianFr };
    let spectral = ridge_jacobian(alg, h, eta_x, c1, c2, Some((p1, p2)))?;
    let sq1 = Matrix::from_diagonal(&p1.map(f64::sqrt));
    let sq2 = Matrix::from_diagonal(&p2.map(f64::sqrt));
    let d = Matrix::identity(d2, d2) * c2 - &h.hyy * c1;
    let e1 = eig_sym(&sym(&(&sq1 * h.schur()? * &sq1)))?;
    let e2 = eig_sym(&sym(&(&sq2 * d * &sq2)))?;
    Ok(PreconditionedReport {
        spectral,
        leader_min_eig: e1.min(),
        follower_min_eig: e2.min(),
        eta_x_max: 2.0 / e1.max().max(e2.max()),
    })
}
