//! Condition-number style rate constants for the ridge methods.
//!
//! All three methods share the block-triangular linearisation with diagonal
//! blocks `S` (the Schur complement) and `D = −c₁H_yy + c₂I`. Every
//! eigenvalue of the Jacobian is `1 − η_x λ` for some `λ` in
//! `spec(S) ∪ spec(D)`, so with `κ = min λ / max λ`:
//!
//! * at `η_x = 1/λ_max` the radius is exactly `1 − κ`;
//! * the best radius over all `η_x` is `(1 − κ)/(1 + κ)`, at
//!   `η_x = 2/(λ_min + λ_max)`.
//!
//! A larger `κ` is therefore a strictly better attainable rate.

use crate::analysis::classify::{classify_minimax, ClassifyOptions, Verdict};
use crate::error::{Error, Result};
use crate::linalg::{eig_sym, HessianBlocks};
use crate::{Matrix, Vector};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateBounds {
    pub kappa_hfr: f64,
    /// Zero when `c₁ = 0`: the FR follower block vanishes.
    pub kappa_fr: f64,
    pub kappa_gdn: f64,
    /// Supremum of stable HessianFR leader step sizes.
    pub eta_x_max_hfr: f64,
}

/// Extreme eigenvalues `(λ_min, λ_max)` of a symmetric matrix.
fn extremes(m: &Matrix) -> Result<(f64, f64)> {
    let e = eig_sym(&((m + m.transpose()) * 0.5))?;
    Ok((e.min(), e.max()))
}

fn kappa(a: (f64, f64), b: (f64, f64)) -> f64 {
    a.0.min(b.0) / a.1.max(b.1)
}

fn follower_block(h: &HessianBlocks, c1: f64, c2: f64) -> Matrix {
    let d2 = h.dims().1;
    Matrix::identity(d2, d2) * c2 - &h.hyy * c1
}

fn require_strict_minimax(h: &HessianBlocks) -> Result<()> {
    let (d1, d2) = h.dims();
    let opts = ClassifyOptions {
        crit_tol: f64::INFINITY,
        tau: None,
    };
    match classify_minimax(h, (&Vector::zeros(d1), &Vector::zeros(d2)), &opts)? {
        Verdict::Strict => Ok(()),
        v => Err(Error::NotStrictMinimax(format!("second-order test gives {v}"))),
    }
}

/// `κ_HFR`, `κ_FR`, `κ_GDN` and the HessianFR step-size bound for
/// coefficients `c₁, c₂ ≥ 0`, not both zero. `h` must be a strict local
/// minimax.
pub fn rate_bounds(h: &HessianBlocks, c1: f64, c2: f64) -> Result<RateBounds> {
    if !(c1 >= 0.0 && c2 >= 0.0 && c1.is_finite() && c2.is_finite()) || c1 + c2 == 0.0 {
        return Err(Error::InvalidParameter(format!(
            "need c1, c2 ≥ 0 and not both zero, got ({c1}, {c2})"
        )));
    }
    require_strict_minimax(h)?;
    let s = extremes(&h.schur()?)?;
    let d = extremes(&follower_block(h, c1, c2))?;
    let kappa_fr = if c1 > 0.0 {
        kappa(s, extremes(&(&h.hyy * -c1))?)
    } else {
        0.0
    };
    Ok(RateBounds {
        kappa_hfr: kappa(s, d),
        kappa_fr,
        kappa_gdn: s.0 / s.1,
        eta_x_max_hfr: 2.0 / s.1.max(d.1),
    })
}

/// Result of [`match_gdn_rate`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateMatch {
    pub c1: f64,
    pub c2: f64,
    pub kappa_hfr: f64,
    pub kappa_gdn: f64,
}

/// Numeric search for `(c₁, c₂)` making `κ_HFR` as close to `κ_GDN` as
/// possible.
///
/// `κ_HFR ≤ κ_GDN` always, with equality iff `spec(D)` lies inside
/// `[λ_min(S), λ_max(S)]`. The search scans `c₁` on a log grid; for each
/// `c₁` it tries `c₂ = 0` and the shift that puts `λ_min(D)` on `λ_min(S)`,
/// keeping the best `κ_HFR`.
pub fn match_gdn_rate(h: &HessianBlocks, grid: usize) -> Result<RateMatch> {
    if grid < 2 {
        return Err(Error::InvalidParameter("grid needs at least 2 points".into()));
    }
    require_strict_minimax(h)?;
    let s = extremes(&h.schur()?)?;
    let f = extremes(&(-&h.hyy))?;
    let span = (s.1 / f.0).log10().ceil() + 2.0;
    let mut best: Option<RateMatch> = None;
    for i in 0..grid {
        let c1 = 10f64.powf(span - 12.0 * i as f64 / (grid - 1) as f64);
        for c2 in [0.0, (s.0 - c1 * f.0).max(0.0)] {
            let d = (c1 * f.0 + c2, c1 * f.1 + c2);
            let k = kappa(s, d);
            if best.map_or(true, |b| k > b.kappa_hfr) {
                best = Some(RateMatch {
                    c1,
                    c2,
                    kappa_hfr: k,
                    kappa_gdn: s.0 / s.1,
                });
            }
        }
    }
    Ok(best.expect("grid is non-empty"))
}

/// `max |1 − η λ|` over the two diagonal blocks: the exact spectral radius
/// of the ridge-method Jacobian for coefficients `c₁, c₂`.
pub fn ridge_radius(h: &HessianBlocks, eta_x: f64, c1: f64, c2: f64) -> Result<f64> {
    let s = extremes(&h.schur()?)?;
    let d = extremes(&follower_block(h, c1, c2))?;
    Ok([s.0, s.1, d.0, d.1]
        .iter()
        .map(|l| (1.0 - eta_x * l).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ill() -> HessianBlocks {
        // H_xy = 0 so the Schur complement is H_xx itself.
        HessianBlocks::from_parts(
            Matrix::identity(2, 2),
            Matrix::zeros(2, 2),
            Matrix::from_diagonal(&Vector::from_vec(vec![-1.0, -100.0])),
        )
        .unwrap()
    }

    #[test]
    fn ill_conditioned_kappas() {
        let fr = rate_bounds(&ill(), 1.0, 0.0).unwrap();
        assert!((fr.kappa_fr - 0.01).abs() < 1e-15);
        assert_eq!(fr.kappa_hfr, fr.kappa_fr);
        let hfr = rate_bounds(&ill(), 0.0, 1.0).unwrap();
        assert!((hfr.kappa_hfr - 1.0).abs() < 1e-15);
        assert_eq!(hfr.kappa_fr, 0.0);
        assert!((hfr.kappa_gdn - 1.0).abs() < 1e-15);
    }

    #[test]
    fn non_minimax_rejected() {
        let h = HessianBlocks::from_parts(
            Matrix::from_element(1, 1, 2.0),
            Matrix::zeros(1, 1),
            Matrix::from_element(1, 1, 2.0),
        )
        .unwrap();
        assert!(matches!(rate_bounds(&h, 1.0, 0.0), Err(Error::NotStrictMinimax(_))));
    }

    #[test]
    fn search_reaches_gdn() {
        let m = match_gdn_rate(&ill(), 200).unwrap();
        assert!(m.kappa_hfr <= m.kappa_gdn);
        assert!(m.kappa_gdn - m.kappa_hfr < 1e-7);
    }
}
