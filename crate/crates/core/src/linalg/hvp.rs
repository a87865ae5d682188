//! Finite-difference Hessian-vector products.

use crate::error::{Error, Result};
use crate::problem::{MinimaxProblem, PointXY};
use crate::Vector;

/// `α = 1e-6 (1 + ‖y‖) / (1 + ‖dir‖)`.
pub fn default_fd_alpha(y: &Vector, dir: &Vector) -> f64 {
    1e-6 * (1.0 + y.norm()) / (1.0 + dir.norm())
}

/// `(∇_y f(x + α·dir, y) − ∇_y f(x, y)) / α ≈ H_yx·dir`.
///
/// `base` may carry an already computed `∇_y f(x, y)`; `alpha = None`
/// selects [`default_fd_alpha`].
pub fn fd_hvp_yx_dir(
    problem: &dyn MinimaxProblem,
    point: &PointXY,
    dir: &Vector,
    base: Option<&Vector>,
    alpha: Option<f64>,
) -> Result<Vector> {
    point.check_dims(problem.dims())?;
    if dir.len() != point.x.len() {
        return Err(Error::Dimension(format!(
            "direction has length {}, leader has {}",
            dir.len(),
            point.x.len()
        )));
    }
    let alpha = alpha.unwrap_or_else(|| default_fd_alpha(&point.y, dir));
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!("fd alpha={alpha} must be > 0")));
    }
    if dir.iter().all(|&v| v == 0.0) {
        return Ok(Vector::zeros(point.y.len()));
    }
    let probe = PointXY {
        x: &point.x + dir * alpha,
        y: point.y.clone(),
    };
    let shifted = problem.grad_y(&probe);
    let out = match base {
        Some(b) => (shifted - b) / alpha,
        None => (shifted - problem.grad_y(point)) / alpha,
    };
    if !out.iter().all(|v| v.is_finite()) {
        return Err(Error::NonEvaluable("finite-difference probe not finite".into()));
    }
    Ok(out)
}

/// `H_yx ∇_x f` at `point` via the forward difference along `∇_x f`.
pub fn fd_hvp_yx(problem: &dyn MinimaxProblem, point: &PointXY, alpha: Option<f64>) -> Result<Vector> {
    point.check_dims(problem.dims())?;
    let (gx, gy) = problem.grads(point);
    fd_hvp_yx_dir(problem, point, &gx, Some(&gy), alpha)
}
