//! Conjugate gradient, including the squared follower system
//! `(H_yy² + λI) b = H_yy w` used by HessianFR.

use crate::error::{Error, Result};
use crate::linalg::hvp::fd_hvp_yx_dir;
use crate::problem::{MinimaxProblem, PointXY};
use crate::Vector;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CgParams {
    pub max_iters: usize,
    /// Relative to the norm of the right-hand side.
    pub residual_tol: f64,
    /// `λ ≥ 0` added to the operator as `λI`.
    pub damping: f64,
}

impl Default for CgParams {
    fn default() -> Self {
        Self {
            max_iters: 5,
            residual_tol: 1e-10,
            damping: 0.0,
        }
    }
}

impl CgParams {
    pub fn new(max_iters: usize, residual_tol: f64, damping: f64) -> Result<Self> {
        let p = Self {
            max_iters,
            residual_tol,
            damping,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("cg max_iters must be ≥ 1".into()));
        }
        if !(self.residual_tol > 0.0 && self.residual_tol.is_finite()) {
            return Err(Error::InvalidParameter("cg residual_tol must be > 0".into()));
        }
        if !(self.damping >= 0.0 && self.damping.is_finite()) {
            return Err(Error::InvalidParameter("cg damping must be ≥ 0".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CgSolution {
    pub solution: Vector,
    pub iters: usize,
    /// Norm of the recurrence residual at exit.
    pub residual: f64,
    /// Operator applications performed.
    pub applications: usize,
}

fn finite(v: &Vector) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Plain CG for `(A + λI) x = b` from `x₀ = 0`. `A` must be SPD.
pub fn cg_solve_spd(
    mut apply_a: impl FnMut(&Vector) -> Vector,
    b: &Vector,
    params: &CgParams,
) -> Result<CgSolution> {
    params.validate()?;
    let n = b.len();
    let mut x = Vector::zeros(n);
    let mut r = b.clone();
    let bnorm = b.norm();
    let target = params.residual_tol * bnorm;
    let mut rs = r.norm_squared();
    if rs.sqrt() <= target || bnorm == 0.0 {
        return Ok(CgSolution {
            solution: x,
            iters: 0,
            residual: rs.sqrt(),
            applications: 0,
        });
    }
    let mut p = r.clone();
    let mut applications = 0;
    for k in 1..=params.max_iters {
        let mut ap = apply_a(&p);
        applications += 1;
        if params.damping > 0.0 {
            ap.axpy(params.damping, &p, 1.0);
        }
        let pap = p.dot(&ap);
        if !pap.is_finite() {
            return Err(Error::NumericalDivergence("non-finite curvature in CG".into()));
        }
        if pap <= 0.0 {
            return Err(Error::NotPositiveDefinite(pap));
        }
        let alpha = rs / pap;
        x.axpy(alpha, &p, 1.0);
        r.axpy(-alpha, &ap, 1.0);
        if !finite(&x) || !finite(&r) {
            return Err(Error::NumericalDivergence("non-finite CG iterate".into()));
        }
        let rs_new = r.norm_squared();
        if rs_new.sqrt() <= target || k == params.max_iters {
            return Ok(CgSolution {
                solution: x,
                iters: k,
                residual: rs_new.sqrt(),
                applications,
            });
        }
        p = &r + &p * (rs_new / rs);
        rs = rs_new;
    }
    unreachable!("loop returns at max_iters")
}

/// Solves `(H² + λI) b = H w` for symmetric `H` given only `v ↦ Hv`.
///
/// Runs CG on the least-squares form `min ‖Hb − w‖² + λ‖b‖²`, whose normal
/// equations are exactly the system above and whose iterates coincide with
/// CG on `H² + λI`. The arrangement needs one product for the initial
/// residual and two per iteration, minus the residual update after the last
/// allowed iteration: `2k` products for `k` iterations when the budget is
/// exhausted.
pub fn squared_system_cg(
    mut apply_h: impl FnMut(&Vector) -> Result<Vector>,
    w: &Vector,
    params: &CgParams,
) -> Result<CgSolution> {
    params.validate()?;
    let lambda = params.damping;
    let n = w.len();
    let mut x = Vector::zeros(n);
    if w.iter().all(|&v| v == 0.0) {
        return Ok(CgSolution {
            solution: x,
            iters: 0,
            residual: 0.0,
            applications: 0,
        });
    }
    let mut r = w.clone();
    let mut s = apply_h(&r)?;
    let mut applications = 1;
    let s0 = s.norm();
    let target = params.residual_tol * s0;
    if s0 == 0.0 {
        return Ok(CgSolution {
            solution: x,
            iters: 0,
            residual: 0.0,
            applications,
        });
    }
    let mut gamma = s.norm_squared();
    let mut p = s.clone();
    let mut residual = s0;
    for k in 1..=params.max_iters {
        let q = apply_h(&p)?;
        applications += 1;
        let delta = q.norm_squared() + lambda * p.norm_squared();
        if !delta.is_finite() {
            return Err(Error::NumericalDivergence("non-finite curvature in CG".into()));
        }
        if delta <= 0.0 {
            return Err(Error::NotPositiveDefinite(delta));
        }
        let alpha = gamma / delta;
        x.axpy(alpha, &p, 1.0);
        r.axpy(-alpha, &q, 1.0);
        if !finite(&x) || !finite(&r) {
            return Err(Error::NumericalDivergence("non-finite CG iterate".into()));
        }
        if k == params.max_iters {
            return Ok(CgSolution {
                solution: x,
                iters: k,
                residual,
                applications,
            });
        }
        s = apply_h(&r)?;
        applications += 1;
        if lambda > 0.0 {
            s.axpy(-lambda, &x, 1.0);
        }
        let gamma_new = s.norm_squared();
        residual = gamma_new.sqrt();
        if residual <= target {
            return Ok(CgSolution {
                solution: x,
                iters: k,
                residual,
                applications,
            });
        }
        p = &s + &p * (gamma_new / gamma);
        gamma = gamma_new;
    }
    unreachable!("loop returns at max_iters")
}

/// `b ≈ c₂ H_yy⁻¹ ∇_y f − H_yy⁻¹ H_yx ∇_x f` via the squared system.
///
/// `H_yx ∇_x f` is a forward difference of `∇_y f` (step `alpha`, default
/// [`default_fd_alpha`](crate::linalg::default_fd_alpha)); `H_yy` products
/// come from the problem.
pub fn hessianfr_rhs_cg(
    problem: &dyn MinimaxProblem,
    point: &PointXY,
    c2: f64,
    params: &CgParams,
    alpha: Option<f64>,
) -> Result<Vector> {
    point.check_dims(problem.dims())?;
    let (gx, gy) = problem.grads(point);
    let hyx_gx = fd_hvp_yx_dir(problem, point, &gx, Some(&gy), alpha)?;
    let w = &gy * c2 - hyx_gx;
    Ok(squared_system_cg(|v| Ok(problem.hvp_yy(point, v)), &w, params)?.solution)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Matrix;

    #[test]
    fn identity_one_iteration() {
        let b = Vector::from_vec(vec![1.0, 2.0, 3.0]);
        let sol = cg_solve_spd(|v| v.clone(), &b, &CgParams::default()).unwrap();
        assert_eq!(sol.iters, 1);
        assert!((sol.solution - &b).norm() < 1e-15);
    }

    #[test]
    fn diagonal_two_iterations() {
        let a = Matrix::from_diagonal(&Vector::from_vec(vec![2.0, 4.0]));
        let b = Vector::from_vec(vec![2.0, 4.0]);
        let sol = cg_solve_spd(|v| &a * v, &b, &CgParams::new(2, 1e-14, 0.0).unwrap()).unwrap();
        assert!(sol.iters <= 2);
        assert!(sol.residual < 1e-12);
        assert!((sol.solution - Vector::from_vec(vec![1.0, 1.0])).norm() < 1e-12);
    }

    #[test]
    fn indefinite_detected() {
        let b = Vector::from_vec(vec![1.0]);
        let err = cg_solve_spd(|v| -v, &b, &CgParams::default()).unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite(_)));
    }

    #[test]
    fn squared_scalar_system() {
        // H = −2, w = 8 → b = H⁻¹w = −4.
        let sol = squared_system_cg(
            |v| Ok(v * -2.0),
            &Vector::from_element(1, 8.0),
            &CgParams::default(),
        )
        .unwrap();
        assert!((sol.solution[0] + 4.0).abs() < 1e-14);
    }

    #[test]
    fn squared_budget_uses_two_products_per_iteration() {
        let h = Matrix::from_diagonal(&Vector::from_vec(vec![-1.0, -2.0, -3.0, -5.0]));
        let w = Vector::from_vec(vec![1.0, 1.0, 1.0, 1.0]);
        for k in 1..=3 {
            let sol = squared_system_cg(|v| Ok(&h * v), &w, &CgParams::new(k, 1e-14, 0.0).unwrap()).unwrap();
            assert_eq!(sol.applications, 2 * k);
            assert_eq!(sol.iters, k);
        }
    }
}
