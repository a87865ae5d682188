//! Counting facade over a problem.

use std::ops::AddAssign;

use crate::error::{Error, Result};
use crate::linalg::{fd_hvp_yx_dir, squared_system_cg, CgParams, CgSolution, HessianBlocks};
use crate::problem::{MinimaxProblem, PointXY};
use crate::Vector;

/// Abstract operation counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Cost {
    pub grad_x: u64,
    pub grad_y: u64,
    /// Hessian-vector products (analytic or finite-difference alike).
    pub hvp: u64,
    pub cg_iters: u64,
    /// Dense Hessian-block evaluations.
    pub hessians: u64,
    pub steps: u64,
}

impl Cost {
    pub fn gradient_evals(&self) -> u64 {
        self.grad_x + self.grad_y
    }
}

impl AddAssign for Cost {
    fn add_assign(&mut self, o: Cost) {
        self.grad_x += o.grad_x;
        self.grad_y += o.grad_y;
        self.hvp += o.hvp;
        self.cg_iters += o.cg_iters;
        self.hessians += o.hessians;
        self.steps += o.steps;
    }
}

fn finite(v: &Vector) -> bool {
    v.iter().all(|x| x.is_finite())
}

fn check(v: Vector, what: &str) -> Result<Vector> {
    if finite(&v) {
        Ok(v)
    } else {
        Err(Error::NumericalDivergence(format!("non-finite {what}")))
    }
}

/// Wraps a problem and counts every call a stepper makes.
pub struct Oracle<'a> {
    problem: &'a dyn MinimaxProblem,
    cost: &'a mut Cost,
}

impl<'a> Oracle<'a> {
    pub fn new(problem: &'a dyn MinimaxProblem, cost: &'a mut Cost) -> Self {
        Self { problem, cost }
    }

    pub fn problem(&self) -> &dyn MinimaxProblem {
        self.problem
    }

    pub fn cost(&self) -> Cost {
        *self.cost
    }

    pub fn count_step(&mut self) {
        self.cost.steps += 1;
    }

    pub fn grads(&mut self, p: &PointXY) -> Result<(Vector, Vector)> {
        self.cost.grad_x += 1;
        self.cost.grad_y += 1;
        let (gx, gy) = self.problem.grads(p);
        Ok((check(gx, "gradient")?, check(gy, "gradient")?))
    }

    pub fn grad_x(&mut self, p: &PointXY) -> Result<Vector> {
        self.cost.grad_x += 1;
        check(self.problem.grad_x(p), "gradient")
    }

    pub fn grad_y(&mut self, p: &PointXY) -> Result<Vector> {
        self.cost.grad_y += 1;
        check(self.problem.grad_y(p), "gradient")
    }

    pub fn hvp_yy(&mut self, p: &PointXY, v: &Vector) -> Result<Vector> {
        self.cost.hvp += 1;
        check(self.problem.hvp_yy(p, v), "Hessian-vector product")
    }

    pub fn hvp(&mut self, p: &PointXY, u: &Vector, v: &Vector) -> Result<(Vector, Vector)> {
        self.cost.hvp += 1;
        let (a, b) = self.problem.hvp(p, u, v);
        Ok((check(a, "Hessian-vector product")?, check(b, "Hessian-vector product")?))
    }

    /// Forward-difference `H_yx·dir` reusing `base = ∇_y f(p)`; one HVP.
    pub fn fd_hvp_yx(&mut self, p: &PointXY, dir: &Vector, base: &Vector, alpha: Option<f64>) -> Result<Vector> {
        self.cost.hvp += 1;
        fd_hvp_yx_dir(self.problem, p, dir, Some(base), alpha)
    }

    pub fn blocks(&mut self, p: &PointXY) -> Result<HessianBlocks> {
        self.cost.hessians += 1;
        self.problem.hessian_blocks(p).ok_or(Error::HessianUnavailable)
    }

    /// `(H_yy² + λI) b = H_yy w` at `p`, counting products and iterations.
    pub fn squared_cg(&mut self, p: &PointXY, w: &Vector, params: &CgParams) -> Result<CgSolution> {
        let problem = self.problem;
        let sol = squared_system_cg(
            |v| check(problem.hvp_yy(p, v), "Hessian-vector product"),
            w,
            params,
        )?;
        self.cost.hvp += sol.applications as u64;
        self.cost.cg_iters += sol.iters as u64;
        Ok(sol)
    }
}
