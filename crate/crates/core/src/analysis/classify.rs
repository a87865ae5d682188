//! Second-order tests for local Nash equilibria and local minimax points.

use crate::error::{Error, Result};
use crate::linalg::{eig_sym, spectral_norm, HessianBlocks};
use crate::problem::{fd_hessian, MinimaxProblem, PointXY};
use crate::Vector;

/// Outcome of a second-order test.
///
/// `No` wins over `Degenerate`: one eigenvalue with the wrong sign beyond
/// the margin settles the question even if another one is near zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Strict,
    No,
    Degenerate,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Strict => "strict",
            Verdict::No => "no",
            Verdict::Degenerate => "degenerate",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassifyOptions {
    /// Gradient norm below which a point counts as critical.
    pub crit_tol: f64,
    /// Eigenvalue margin; `None` means [`default_tau`].
    pub tau: Option<f64>,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            crit_tol: 1e-8,
            tau: None,
        }
    }
}

/// `1e-8 (1 + ‖H‖₂)`.
pub fn default_tau(h: &HessianBlocks) -> Result<f64> {
    Ok(1e-8 * (1.0 + spectral_norm(&h.full())?))
}

fn resolve_tau(h: &HessianBlocks, opts: &ClassifyOptions) -> Result<f64> {
    match opts.tau {
        Some(t) if t >= 0.0 && t.is_finite() => Ok(t),
        Some(t) => Err(Error::InvalidParameter(format!("tau must be ≥ 0, got {t}"))),
        None => default_tau(h),
    }
}

fn check_critical(gx: &Vector, gy: &Vector, tol: f64) -> Result<()> {
    let g = gx.norm().max(gy.norm());
    if g > tol || !g.is_finite() {
        return Err(Error::NotCritical(g));
    }
    Ok(())
}

/// Sign test for a spectrum that should be positive (`sign = 1`) or
/// negative (`sign = −1`).
fn sign_verdict(values: &[f64], sign: f64, tau: f64) -> Verdict {
    if values.iter().any(|&v| sign * v < -tau) {
        Verdict::No
    } else if values.iter().any(|&v| v.abs() <= tau) {
        Verdict::Degenerate
    } else {
        Verdict::Strict
    }
}

fn combine(a: Verdict, b: Verdict) -> Verdict {
    match (a, b) {
        (Verdict::No, _) | (_, Verdict::No) => Verdict::No,
        (Verdict::Degenerate, _) | (_, Verdict::Degenerate) => Verdict::Degenerate,
        _ => Verdict::Strict,
    }
}

fn spectrum(m: &crate::Matrix) -> Result<Vec<f64>> {
    Ok(eig_sym(m)?.values.iter().copied().collect())
}

/// Local Nash test: `H_xx ≻ 0` and `H_yy ≺ 0`.
pub fn classify_nash(
    h: &HessianBlocks,
    grads: (&Vector, &Vector),
    opts: &ClassifyOptions,
) -> Result<Verdict> {
    check_critical(grads.0, grads.1, opts.crit_tol)?;
    let tau = resolve_tau(h, opts)?;
    Ok(nash_verdict(&spectrum(&h.hxx)?, &spectrum(&h.hyy)?, tau))
}

fn nash_verdict(exx: &[f64], eyy: &[f64], tau: f64) -> Verdict {
    combine(sign_verdict(exx, 1.0, tau), sign_verdict(eyy, -1.0, tau))
}

/// Local minimax test: `H_yy ≺ 0` and `H_xx − H_xy H_yy⁻¹ H_yx ≻ 0`.
pub fn classify_minimax(
    h: &HessianBlocks,
    grads: (&Vector, &Vector),
    opts: &ClassifyOptions,
) -> Result<Verdict> {
    check_critical(grads.0, grads.1, opts.crit_tol)?;
    let tau = resolve_tau(h, opts)?;
    let eyy = spectrum(&h.hyy)?;
    let schur = schur_spectrum(h, &eyy, tau)?;
    Ok(minimax_verdict(&eyy, schur.as_deref(), tau))
}

/// Schur eigenvalues, or `None` when `H_yy` is too close to singular.
fn schur_spectrum(h: &HessianBlocks, eyy: &[f64], tau: f64) -> Result<Option<Vec<f64>>> {
    if eyy.iter().any(|v| v.abs() <= tau) {
        return Ok(None);
    }
    match h.schur() {
        Ok(s) => Ok(Some(spectrum(&s)?)),
        Err(Error::SingularFollowerHessian) => Ok(None),
        Err(e) => Err(e),
    }
}

fn minimax_verdict(eyy: &[f64], schur: Option<&[f64]>, tau: f64) -> Verdict {
    let follower = sign_verdict(eyy, -1.0, tau);
    match (follower, schur) {
        (Verdict::No, _) => Verdict::No,
        (_, None) => Verdict::Degenerate,
        (f, Some(s)) => combine(f, sign_verdict(s, 1.0, tau)),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenEvidence {
    pub hxx: Vec<f64>,
    pub hyy: Vec<f64>,
    /// Absent when `H_yy` is singular within the margin.
    pub schur: Option<Vec<f64>>,
    pub tau: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriticalPointReport {
    pub is_critical: bool,
    pub grad_norm_x: f64,
    pub grad_norm_y: f64,
    /// `None` at non-critical points.
    pub nash: Option<Verdict>,
    pub minimax: Option<Verdict>,
    pub eigen_evidence: EigenEvidence,
}

/// Both tests at `point`, with analytic Hessian blocks if the problem has
/// them and a central-difference Hessian otherwise.
pub fn classify_point(
    problem: &dyn MinimaxProblem,
    point: &PointXY,
    opts: &ClassifyOptions,
) -> Result<CriticalPointReport> {
    point.check_dims(problem.dims())?;
    let h = match problem.hessian_blocks(point) {
        Some(h) => h,
        None => fd_hessian(problem, point, 1e-5 * (1.0 + point.norm())),
    };
    let (gx, gy) = problem.grads(point);
    classify_blocks(&h, (&gx, &gy), opts)
}

/// Report for given blocks and gradients.
pub fn classify_blocks(
    h: &HessianBlocks,
    grads: (&Vector, &Vector),
    opts: &ClassifyOptions,
) -> Result<CriticalPointReport> {
    let tau = resolve_tau(h, opts)?;
    let exx = spectrum(&h.hxx)?;
    let eyy = spectrum(&h.hyy)?;
    let schur = schur_spectrum(h, &eyy, tau)?;
    let (nx, ny) = (grads.0.norm(), grads.1.norm());
    let is_critical = nx.max(ny) <= opts.crit_tol;
    let (nash, minimax) = if is_critical {
        (
            Some(nash_verdict(&exx, &eyy, tau)),
            Some(minimax_verdict(&eyy, schur.as_deref(), tau)),
        )
    } else {
        (None, None)
    };
    Ok(CriticalPointReport {
        is_critical,
        grad_norm_x: nx,
        grad_norm_y: ny,
        nash,
        minimax,
        eigen_evidence: EigenEvidence {
            hxx: exx,
            hyy: eyy,
            schur,
            tau,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Matrix;

    fn blocks(hxx: f64, hxy: f64, hyy: f64) -> HessianBlocks {
        HessianBlocks::from_parts(
            Matrix::from_element(1, 1, hxx),
            Matrix::from_element(1, 1, hxy),
            Matrix::from_element(1, 1, hyy),
        )
        .unwrap()
    }

    fn zero() -> Vector {
        Vector::zeros(1)
    }

    #[test]
    fn saddle_is_strict_nash() {
        let h = blocks(2.0, 0.0, -2.0);
        let o = ClassifyOptions::default();
        assert_eq!(classify_nash(&h, (&zero(), &zero()), &o).unwrap(), Verdict::Strict);
        assert_eq!(classify_minimax(&h, (&zero(), &zero()), &o).unwrap(), Verdict::Strict);
    }

    #[test]
    fn flat_follower_is_degenerate() {
        let h = blocks(2.0, 0.0, 0.0);
        let o = ClassifyOptions::default();
        assert_eq!(classify_nash(&h, (&zero(), &zero()), &o).unwrap(), Verdict::Degenerate);
        assert_eq!(classify_minimax(&h, (&zero(), &zero()), &o).unwrap(), Verdict::Degenerate);
    }

    #[test]
    fn non_critical_rejected() {
        let h = blocks(2.0, 0.0, -2.0);
        let g = Vector::from_element(1, 1.0);
        let err = classify_nash(&h, (&g, &zero()), &ClassifyOptions::default()).unwrap_err();
        assert!(matches!(err, Error::NotCritical(_)));
    }

    #[test]
    fn wrong_sign_beats_near_zero() {
        let h = HessianBlocks::from_parts(
            Matrix::from_diagonal(&Vector::from_vec(vec![-1.0, 0.0])),
            Matrix::zeros(2, 1),
            Matrix::from_element(1, 1, -1.0),
        )
        .unwrap();
        let g = (Vector::zeros(2), Vector::zeros(1));
        assert_eq!(
            classify_nash(&h, (&g.0, &g.1), &ClassifyOptions::default()).unwrap(),
            Verdict::No
        );
    }
}
