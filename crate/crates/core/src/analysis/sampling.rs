//! Minibatch sizes from matrix and vector Hoeffding inequalities.
//!
//! All logarithms are natural. Bounds are rounded up to the next integer,
//! except that values within `1e-9` (relative) of an integer round to it so
//! that e.g. `16 · ln e` gives 16 rather than 17.

use crate::error::{Error, Result};
use crate::linalg::spectral_norm;
use crate::optim::MinibatchSampler;
use crate::problem::{fd_hessian, BatchView, FiniteSumProblem, MinimaxProblem, PointXY};

/// Norm bounds on the components plus the accuracy request.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleSizeInputs {
    pub rho_x: f64,
    pub rho_y: f64,
    pub rho_xy: f64,
    pub rho_yy: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub d1: usize,
    pub d2: usize,
    /// Number of steps the guarantee must hold for.
    pub horizon: usize,
}

impl SampleSizeInputs {
    pub fn validate(&self) -> Result<()> {
        let rhos = [self.rho_x, self.rho_y, self.rho_xy, self.rho_yy];
        if !rhos.iter().all(|r| *r >= 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter("norm bounds must be finite and ≥ 0".into()));
        }
        check_eps_delta(self.epsilon, self.delta)?;
        if self.d1 == 0 || self.d2 == 0 || self.horizon == 0 {
            return Err(Error::InvalidParameter("d1, d2 and the horizon must be ≥ 1".into()));
        }
        if self.epsilon > self.rho_xy {
            return Err(Error::RectangularBoundInapplicable {
                epsilon: self.epsilon,
                rho_xy: self.rho_xy,
            });
        }
        Ok(())
    }
}

fn check_eps_delta(epsilon: f64, delta: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParameter(format!("epsilon must be > 0, got {epsilon}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0, 1), got {delta}")));
    }
    Ok(())
}

fn check_rho(rho: f64) -> Result<()> {
    if rho >= 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("norm bound must be ≥ 0, got {rho}")))
    }
}

fn ceil_count(v: f64) -> Result<u64> {
    if !v.is_finite() || v < 0.0 || v > u64::MAX as f64 {
        return Err(Error::InvalidParameter(format!("sample size {v} out of range")));
    }
    let r = v.round();
    let c = if (v - r).abs() <= 1e-9 * r.max(1.0) { r } else { v.ceil() };
    Ok(c as u64)
}

/// The four real-valued terms of the horizon bound, in order: follower
/// Hessian, cross Hessian, leader gradient, follower gradient.
pub fn sample_size_terms(inp: &SampleSizeInputs) -> Result<[f64; 4]> {
    inp.validate()?;
    let e2 = inp.epsilon * inp.epsilon;
    let t = inp.horizon as f64;
    let (d1, d2) = (inp.d1 as f64, inp.d2 as f64);
    let vec_log = 0.25 + (4.0 * t).ln() - inp.delta.ln();
    Ok([
        16.0 * inp.rho_yy.powi(2) / e2 * (8.0 * d2 * t / inp.delta).ln(),
        16.0 * inp.rho_xy.powi(2) / e2 * (4.0 * (d1 + d2) * t / inp.delta).ln(),
        32.0 * inp.rho_x.powi(2) / e2 * vec_log,
        32.0 * inp.rho_y.powi(2) / e2 * vec_log,
    ])
}

/// Minimum batch size so that, with probability `1 − δ`, every gradient and
/// Hessian block estimate over `horizon` steps is `ε`-accurate.
pub fn sample_size_bound(inp: &SampleSizeInputs) -> Result<u64> {
    let terms = sample_size_terms(inp)?;
    ceil_count(terms.iter().copied().fold(0.0, f64::max))
}

/// Single-estimate bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LemmaKind {
    /// Symmetric `d × d` block with component norm `rho`.
    Hermitian { rho: f64, d: usize },
    /// `d1 × d2` block with component norm `rho`; requires `ε ≤ rho`.
    Rectangular { rho: f64, d1: usize, d2: usize },
    /// Gradient with component norm `rho`.
    Vector { rho: f64 },
}

impl LemmaKind {
    fn validate(&self, epsilon: f64, delta: f64) -> Result<()> {
        check_eps_delta(epsilon, delta)?;
        match *self {
            LemmaKind::Hermitian { rho, d } => {
                check_rho(rho)?;
                check_unit_eps(epsilon)?;
                if d == 0 {
                    return Err(Error::InvalidParameter("dimension must be ≥ 1".into()));
                }
            }
            LemmaKind::Rectangular { rho, d1, d2 } => {
                check_rho(rho)?;
                if d1 == 0 || d2 == 0 {
                    return Err(Error::InvalidParameter("dimensions must be ≥ 1".into()));
                }
                if epsilon > rho {
                    return Err(Error::RectangularBoundInapplicable { epsilon, rho_xy: rho });
                }
            }
            LemmaKind::Vector { rho } => {
                check_rho(rho)?;
                check_unit_eps(epsilon)?;
            }
        }
        Ok(())
    }

    /// `log` factor multiplying `c ρ²/ε²`, and the constant `c`.
    fn factors(&self, delta: f64) -> (f64, f64, f64) {
        match *self {
            LemmaKind::Hermitian { rho, d } => (16.0, rho, (2.0 * d as f64 / delta).ln()),
            LemmaKind::Rectangular { rho, d1, d2 } => {
                (16.0, rho, ((d1 + d2) as f64 / delta).ln())
            }
            LemmaKind::Vector { rho } => (32.0, rho, 0.25 - delta.ln()),
        }
    }
}

fn check_unit_eps(epsilon: f64) -> Result<()> {
    if epsilon > 1.0 {
        return Err(Error::InvalidParameter(format!("epsilon must be ≤ 1, got {epsilon}")));
    }
    Ok(())
}

pub fn lemma_bounds(kind: LemmaKind, epsilon: f64, delta: f64) -> Result<u64> {
    kind.validate(epsilon, delta)?;
    let (c, rho, log) = kind.factors(delta);
    ceil_count(c * rho * rho / (epsilon * epsilon) * log)
}

/// The accuracy a batch of `batch` components guarantees with probability
/// `1 − δ`: the lemma bound solved for `ε`. No range check on `ε` is made.
pub fn lemma_epsilon(kind: LemmaKind, batch: usize, delta: f64) -> Result<f64> {
    if batch == 0 {
        return Err(Error::InvalidParameter("batch must be ≥ 1".into()));
    }
    check_eps_delta(1.0, delta)?;
    let (c, rho, log) = kind.factors(delta);
    Ok(rho * (c * log / batch as f64).sqrt())
}

/// Per-trial deviations of batch estimates from the full average.
#[derive(Clone, Debug, PartialEq)]
pub struct ConcentrationReport {
    pub batch_size: usize,
    /// `‖∇_x f̂ − ∇_x f‖₂`.
    pub grad_x: Vec<f64>,
    /// `‖∇_y f̂ − ∇_y f‖₂`.
    pub grad_y: Vec<f64>,
    /// `‖Ĥ_xy − H_xy‖₂`.
    pub hxy: Vec<f64>,
    /// `‖Ĥ_yy − H_yy‖₂`.
    pub hyy: Vec<f64>,
}

impl ConcentrationReport {
    /// Largest deviation across trials and quantities.
    pub fn max_deviation(&self) -> f64 {
        [&self.grad_x, &self.grad_y, &self.hxy, &self.hyy]
            .iter()
            .flat_map(|v| v.iter())
            .copied()
            .fold(0.0, f64::max)
    }

    /// Fraction of trials whose deviation is at most `eps`.
    pub fn fraction_within(values: &[f64], eps: f64) -> f64 {
        if values.is_empty() {
            return 1.0;
        }
        values.iter().filter(|&&v| v <= eps).count() as f64 / values.len() as f64
    }
}

/// Draws `trials` batches (uniform, without replacement) and measures how
/// far each batch estimate lands from the full average at `point`.
///
/// Hessians are taken from the problem when available, else by central
/// differences; the latter is only sensible for small dimensions.
pub fn empirical_concentration_check(
    fs: &dyn FiniteSumProblem,
    point: &PointXY,
    batch_size: usize,
    trials: usize,
    seed: u64,
) -> Result<ConcentrationReport> {
    point.check_dims(fs.dims())?;
    let full = BatchView::full(fs);
    let (gx, gy) = full.grads(point);
    let hess = |v: &BatchView| {
        v.hessian_blocks(point)
            .unwrap_or_else(|| fd_hessian(v, point, 1e-5 * (1.0 + point.norm())))
    };
    let h = hess(&full);
    let mut sampler = MinibatchSampler::new(fs.num_components(), batch_size, seed)?;
    let mut rep = ConcentrationReport {
        batch_size,
        grad_x: Vec::with_capacity(trials),
        grad_y: Vec::with_capacity(trials),
        hxy: Vec::with_capacity(trials),
        hyy: Vec::with_capacity(trials),
    };
    for _ in 0..trials {
        let view = BatchView::new(fs, sampler.sample())?;
        let (bx, by) = view.grads(point);
        let bh = hess(&view);
        rep.grad_x.push((bx - &gx).norm());
        rep.grad_y.push((by - &gy).norm());
        rep.hxy.push(spectral_norm(&(bh.hxy - &h.hxy))?);
        rep.hyy.push(spectral_norm(&(bh.hyy - &h.hyy))?);
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermitian_unit_log() {
        let k = LemmaKind::Hermitian { rho: 1.0, d: 1 };
        assert_eq!(lemma_bounds(k, 1.0, 2.0 / std::f64::consts::E).unwrap(), 16);
    }

    #[test]
    fn vector_unit_log() {
        let k = LemmaKind::Vector { rho: 1.0 };
        assert_eq!(lemma_bounds(k, 1.0, (-0.75f64).exp()).unwrap(), 32);
    }

    #[test]
    fn rectangular_edge() {
        let k = LemmaKind::Rectangular { rho: 0.5, d1: 2, d2: 3 };
        assert!(lemma_bounds(k, 0.5, 0.1).is_ok());
        assert!(matches!(
            lemma_bounds(k, 0.5 + 1e-12, 0.1),
            Err(Error::RectangularBoundInapplicable { .. })
        ));
    }

    #[test]
    fn inversion_round_trip() {
        let k = LemmaKind::Hermitian { rho: 2.0, d: 4 };
        let eps = lemma_epsilon(k, 500, 0.05).unwrap();
        assert_eq!(lemma_bounds(k, eps.min(1.0), 0.05).unwrap(), 500);
    }
}
