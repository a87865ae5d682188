//! One-step update rules.
//!
//! Every rule reads the problem only through an [`Oracle`], so operation
//! counts are exact. Per-run state (secant pair, Adam moments, OGDA history)
//! lives in [`Optimizer`] and is never shared between runs.

use crate::error::Result;
use crate::linalg::{dg_update, solve, DgState};
use crate::optim::config::{Algorithm, HessInvMode, OptimizerConfig, Precondition};
use crate::optim::oracle::Oracle;
use crate::optim::precond::{precondition_apply, PreconditionerState};
use crate::problem::PointXY;
use crate::Vector;

#[derive(Clone, Debug)]
pub struct Optimizer {
    config: OptimizerConfig,
    dg: DgState,
    precond: Option<PreconditionerState>,
    ogda_prev: Option<(Vector, Vector)>,
}

impl Optimizer {
    pub fn new(config: OptimizerConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            dg: DgState::default(),
            precond: None,
            ogda_prev: None,
        })
    }

    pub fn config(&self) -> &OptimizerConfig {
        &self.config
    }

    /// Current secant estimate (meaningful in DG mode).
    pub fn dg_state(&self) -> &DgState {
        &self.dg
    }

    /// Drops all per-run state.
    pub fn reset(&mut self) {
        self.dg = DgState::default();
        self.precond = None;
        self.ogda_prev = None;
    }

    pub fn step(&mut self, o: &mut Oracle, p: &PointXY) -> Result<PointXY> {
        p.check_dims(o.problem().dims())?;
        let next = match self.config.algorithm {
            Algorithm::Ttsgda => self.ttsgda(o, p),
            Algorithm::GdaK => self.gda_k(o, p),
            Algorithm::Eg => self.eg(o, p),
            Algorithm::Ogda => self.ogda(o, p),
            Algorithm::Sga => self.sga(o, p),
            Algorithm::Co => self.co(o, p),
            // FR is HessianFR with η_y2 = 0 and shares its code path.
            Algorithm::Fr | Algorithm::HessianFr => self.hessianfr(o, p),
            Algorithm::Gdn => self.gdn(o, p),
        }?;
        o.count_step();
        Ok(next)
    }

    fn precondition(&mut self, gx: &Vector, gy: &Vector) -> (Vector, Vector) {
        if matches!(self.config.precondition, Precondition::Off) {
            return (gx.clone(), gy.clone());
        }
        let st = self
            .precond
            .get_or_insert_with(|| PreconditionerState::new(self.config.precondition, gx.len(), gy.len()));
        precondition_apply(st, gx, gy)
    }

    fn ttsgda(&mut self, o: &mut Oracle, p: &PointXY) -> Result<PointXY> {
        let c = self.config;
        let (gx, gy) = o.grads(p)?;
        let (px, py) = self.precondition(&gx, &gy);
        Ok(PointXY {
            x: &p.x - &px * c.eta_x,
            y: &p.y + &py * c.eta_y,
        })
    }

    fn gda_k(&mut self, o: &mut Oracle, p: &PointXY) -> Result<PointXY> {
        let c = self.config;
        let (gx, gy) = o.grads(p)?;
        let mut y = &p.y + &gy * c.eta_y;
        for _ in 1..c.k_inner {
            let q = PointXY {
                x: p.x.clone(),
                y,
            };
            let g = o.grad_y(&q)?;
            y = &q.y + &g * c.eta_y;
        }
        Ok(PointXY {
            x: &p.x - &gx * c.eta_x,
            y,
        })
    }

    fn eg(&mut self, o: &mut Oracle, p: &PointXY) -> Result<PointXY> {
        let c = self.config;
        let (gx, gy) = o.grads(p)?;
        let half = PointXY {
            x: &p.x - &gx * c.eta_x,
            y: &p.y + &gy * c.eta_y,
        };
        let (hx, hy) = o.grads(&half)?;
        Ok(PointXY {
            x: &p.x - &hx * c.eta_x,
            y: &p.y + &hy * c.eta_y,
        })
    }

    fn ogda(&mut self, o: &mut Oracle, p: &PointXY) -> Result<PointXY> {
        let c = self.config;
        let (gx, gy) = o.grads(p)?;
        let next = match &self.ogda_prev {
            None => PointXY {
                x: &p.x - &gx * c.eta_x,
                y: &p.y + &gy * c.eta_y,
            },
            Some((px, py)) => PointXY {
                x: &p.x - (&gx * 2.0 - px) * c.eta_x,
                y: &p.y + (&gy * 2.0 - py) * c.eta_y,
            },
        };
        self.ogda_prev = Some((gx, gy));
        Ok(next)
    }

    fn sga(&mut self, o: &mut Oracle, p: &PointXY) -> Result<PointXY> {
        let c = self.config;
        let (gx, gy) = o.grads(p)?;
        if c.sga_lambda == 0.0 {
            return Ok(PointXY {
                x: &p.x - &gx * c.eta_x,
                y: &p.y + &gy * c.eta_y,
            });
        }
        let (d1, d2) = p.dims();
        // Aᵀξ = (H_xy ∇_y f, H_yx ∇_x f) for ξ = (∇_x f, −∇_y f).
        let hxy_gy = o.hvp(p, &Vector::zeros(d1), &gy)?.0;
        let hyx_gx = o.hvp(p, &gx, &Vector::zeros(d2))?.1;
        Ok(PointXY {
            x: &p.x - (&gx + hxy_gy * c.sga_lambda) * c.eta_x,
            y: &p.y + (&gy - hyx_gx * c.sga_lambda) * c.eta_y,
        })
    }

    fn co(&mut self, o: &mut Oracle, p: &PointXY) -> Result<PointXY> {
        let c = self.config;
        let (gx, gy) = o.grads(p)?;
        if c.co_gamma == 0.0 {
            return Ok(PointXY {
                x: &p.x - &gx * c.eta_x,
                y: &p.y + &gy * c.eta_y,
            });
        }
        // ∇(½‖ξ‖²) = Jᵀξ = H (∇_x f, ∇_y f).
        let (jx, jy) = o.hvp(p, &gx, &gy)?;
        Ok(PointXY {
            x: &p.x - (&gx + jx * c.co_gamma) * c.eta_x,
            y: &p.y - (-&gy + jy * c.co_gamma) * c.eta_y,
        })
    }

    /// Re-anchors the secant pair at the current leader: the previous
    /// follower gradient is evaluated at `(x_t, y_{t−1})`.
    fn refresh_dg(&mut self, o: &mut Oracle, p: &PointXY, gy: &Vector) -> Result<f64> {
        let mut state = self.dg.clone();
        if let Some(prev_y) = &state.prev_y {
            let anchor = PointXY {
                x: p.x.clone(),
                y: prev_y.clone(),
            };
            state.prev_grad_y = Some(o.grad_y(&anchor)?);
        }
        self.dg = dg_update(&state, gy, &p.y);
        Ok(self.dg.scale)
    }

    /// `b = c₂ H_yy⁻¹ dir_y − H_yy⁻¹ H_yx dir_x`, one solve.
    fn hfr_correction(
        &mut self,
        o: &mut Oracle,
        p: &PointXY,
        dir_x: &Vector,
        gy: &Vector,
        dir_y: &Vector,
        c2: f64,
    ) -> Result<Vector> {
        match self.config.hess_inv_mode {
            HessInvMode::Exact => {
                let h = o.blocks(p)?;
                let w = dir_y * c2 - &h.hyx * dir_x;
                solve(&h.hyy, &w)
            }
            HessInvMode::Cg(params) => {
                let hyx = o.fd_hvp_yx(p, dir_x, gy, self.config.fd_alpha)?;
                let w = dir_y * c2 - hyx;
                Ok(o.squared_cg(p, &w, &params)?.solution)
            }
            HessInvMode::Dg => {
                let scale = self.refresh_dg(o, p, gy)?;
                let hyx = o.fd_hvp_yx(p, dir_x, gy, self.config.fd_alpha)?;
                let w = dir_y * c2 - hyx;
                Ok(w * scale)
            }
        }
    }

    fn hessianfr(&mut self, o: &mut Oracle, p: &PointXY) -> Result<PointXY> {
        let c = self.config;
        let (gx, gy) = o.grads(p)?;
        let (px, py) = self.precondition(&gx, &gy);
        let b = self.hfr_correction(o, p, &px, &gy, &py, c.c2())?;
        Ok(PointXY {
            x: &p.x - &px * c.eta_x,
            y: &p.y + &py * c.eta_y1 - b * c.eta_x,
        })
    }

    fn gdn(&mut self, o: &mut Oracle, p: &PointXY) -> Result<PointXY> {
        let c = self.config;
        let gx = o.grad_x(p)?;
        let x = &p.x - &gx * c.eta_x;
        let q = PointXY { x, y: p.y.clone() };
        let g = o.grad_y(&q)?;
        let d = match c.hess_inv_mode {
            HessInvMode::Exact => {
                let h = o.blocks(&q)?;
                solve(&h.hyy, &g)?
            }
            HessInvMode::Cg(params) => o.squared_cg(&q, &g, &params)?.solution,
            HessInvMode::Dg => {
                let scale = self.refresh_dg(o, &q, &g)?;
                &g * scale
            }
        };
        Ok(PointXY {
            y: &q.y - d,
            x: q.x,
        })
    }
}
