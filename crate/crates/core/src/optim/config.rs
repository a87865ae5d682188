use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::CgParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Two time-scale gradient descent ascent.
    Ttsgda,
    /// `k` follower ascent steps per leader step.
    GdaK,
    /// Extra-gradient.
    Eg,
    /// Optimistic GDA.
    Ogda,
    /// Symplectic gradient adjustment.
    Sga,
    /// Consensus optimization.
    Co,
    /// Follow-the-ridge.
    Fr,
    HessianFr,
    /// Gradient descent Newton.
    Gdn,
}

impl Algorithm {
    pub const ALL: [Algorithm; 9] = [
        Algorithm::Ttsgda,
        Algorithm::GdaK,
        Algorithm::Eg,
        Algorithm::Ogda,
        Algorithm::Sga,
        Algorithm::Co,
        Algorithm::Fr,
        Algorithm::HessianFr,
        Algorithm::Gdn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ttsgda => "ttsgda",
            Algorithm::GdaK => "gda_k",
            Algorithm::Eg => "eg",
            Algorithm::Ogda => "ogda",
            Algorithm::Sga => "sga",
            Algorithm::Co => "co",
            Algorithm::Fr => "fr",
            Algorithm::HessianFr => "hessianfr",
            Algorithm::Gdn => "gdn",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace('-', "_");
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == norm)
            .or(match norm.as_str() {
                "gda" | "tts_gda" => Some(Algorithm::Ttsgda),
                "gdak" => Some(Algorithm::GdaK),
                "hfr" => Some(Algorithm::HessianFr),
                _ => None,
            })
            .ok_or_else(|| Error::InvalidParameter(format!("unknown algorithm '{s}'")))
    }
}

/// How `H_yy⁻¹(·)` is applied by FR, HessianFR and GDN.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HessInvMode {
    /// Dense blocks and one LU solve.
    Exact,
    /// CG on the squared follower system.
    Cg(CgParams),
    /// Scalar secant estimate.
    Dg,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Precondition {
    Off,
    Adam { beta1: f64, beta2: f64, eps: f64 },
}

impl Precondition {
    pub fn adam_default() -> Self {
        Precondition::Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimizerConfig {
    pub algorithm: Algorithm,
    pub eta_x: f64,
    /// Follower step for the GDA family, EG, OGDA, SGA and CO.
    pub eta_y: f64,
    /// Gradient-ascent part of the follower step (FR, HessianFR).
    pub eta_y1: f64,
    /// Newton part of the follower step (HessianFR).
    pub eta_y2: f64,
    /// Finite-difference step for `H_yx·v`; `None` picks it adaptively.
    pub fd_alpha: Option<f64>,
    pub hess_inv_mode: HessInvMode,
    pub precondition: Precondition,
    pub k_inner: usize,
    pub sga_lambda: f64,
    pub co_gamma: f64,
}

impl OptimizerConfig {
    fn base(algorithm: Algorithm, eta_x: f64) -> Self {
        Self {
            algorithm,
            eta_x,
            eta_y: 0.0,
            eta_y1: 0.0,
            eta_y2: 0.0,
            fd_alpha: None,
            hess_inv_mode: HessInvMode::Exact,
            precondition: Precondition::Off,
            k_inner: 1,
            sga_lambda: 0.0,
            co_gamma: 0.0,
        }
    }

    pub fn ttsgda(eta_x: f64, eta_y: f64) -> Self {
        Self {
            eta_y,
            ..Self::base(Algorithm::Ttsgda, eta_x)
        }
    }

    pub fn gda_k(eta_x: f64, eta_y: f64, k: usize) -> Self {
        Self {
            eta_y,
            k_inner: k,
            ..Self::base(Algorithm::GdaK, eta_x)
        }
    }

    pub fn eg(eta_x: f64, eta_y: f64) -> Self {
        Self {
            eta_y,
            ..Self::base(Algorithm::Eg, eta_x)
        }
    }

    pub fn ogda(eta_x: f64, eta_y: f64) -> Self {
        Self {
            eta_y,
            ..Self::base(Algorithm::Ogda, eta_x)
        }
    }

    pub fn sga(eta_x: f64, eta_y: f64, lambda: f64) -> Self {
        Self {
            eta_y,
            sga_lambda: lambda,
            ..Self::base(Algorithm::Sga, eta_x)
        }
    }

    pub fn co(eta_x: f64, eta_y: f64, gamma: f64) -> Self {
        Self {
            eta_y,
            co_gamma: gamma,
            ..Self::base(Algorithm::Co, eta_x)
        }
    }

    pub fn fr(eta_x: f64, eta_y1: f64, mode: HessInvMode) -> Self {
        Self {
            eta_y1,
            hess_inv_mode: mode,
            ..Self::base(Algorithm::Fr, eta_x)
        }
    }

    pub fn hessianfr(eta_x: f64, eta_y1: f64, eta_y2: f64, mode: HessInvMode) -> Self {
        Self {
            eta_y1,
            eta_y2,
            hess_inv_mode: mode,
            ..Self::base(Algorithm::HessianFr, eta_x)
        }
    }

    pub fn gdn(eta_x: f64, mode: HessInvMode) -> Self {
        Self {
            hess_inv_mode: mode,
            ..Self::base(Algorithm::Gdn, eta_x)
        }
    }

    pub fn with_precondition(mut self, p: Precondition) -> Self {
        self.precondition = p;
        self
    }

    pub fn with_fd_alpha(mut self, alpha: f64) -> Self {
        self.fd_alpha = Some(alpha);
        self
    }

    /// `c₁ = η_y1/η_x`.
    pub fn c1(&self) -> f64 {
        self.eta_y1 / self.eta_x
    }

    /// `c₂ = η_y2/η_x`.
    pub fn c2(&self) -> f64 {
        self.eta_y2 / self.eta_x
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(format!("{}: {m}", self.algorithm)));
        if !(self.eta_x > 0.0 && self.eta_x.is_finite()) {
            return bad("eta_x must be > 0");
        }
        if let Some(a) = self.fd_alpha {
            if !(a > 0.0 && a.is_finite()) {
                return bad("fd_alpha must be > 0");
            }
        }
        if let HessInvMode::Cg(p) = self.hess_inv_mode {
            p.validate()?;
        }
        if let Precondition::Adam { beta1, beta2, eps } = self.precondition {
            if !((0.0..1.0).contains(&beta1) && (0.0..1.0).contains(&beta2) && eps > 0.0) {
                return bad("adam needs 0 ≤ beta1, beta2 < 1 and eps > 0");
            }
            if !matches!(
                self.algorithm,
                Algorithm::Ttsgda | Algorithm::Fr | Algorithm::HessianFr
            ) {
                return bad("preconditioning is supported for ttsgda, fr and hessianfr");
            }
        }
        match self.algorithm {
            Algorithm::Ttsgda | Algorithm::Eg | Algorithm::Ogda | Algorithm::GdaK | Algorithm::Sga | Algorithm::Co => {
                if !(self.eta_y > 0.0 && self.eta_y.is_finite()) {
                    return bad("eta_y must be > 0");
                }
                if self.algorithm == Algorithm::GdaK && self.k_inner == 0 {
                    return bad("k_inner must be ≥ 1");
                }
                if !(self.sga_lambda.is_finite() && self.co_gamma >= 0.0 && self.co_gamma.is_finite()) {
                    return bad("sga_lambda finite and co_gamma ≥ 0 required");
                }
            }
            Algorithm::Fr | Algorithm::HessianFr => {
                if !(self.eta_y1 >= 0.0 && self.eta_y2 >= 0.0) {
                    return bad("eta_y1, eta_y2 must be ≥ 0");
                }
                if self.algorithm == Algorithm::Fr && self.eta_y2 != 0.0 {
                    return bad("fr has no eta_y2");
                }
                let (c1, c2) = (self.c1(), self.c2());
                if !(c1.is_finite() && c2.is_finite()) {
                    return bad("step-size ratios must be finite");
                }
                if !(c1 > 0.0 || c2 > 0.0) {
                    return bad("need c1 > 0 or c2 > 0");
                }
            }
            Algorithm::Gdn => {}
        }
        Ok(())
    }
}
