//! `f = ½xᵀAx + xᵀBy + ½yᵀCy (+ lxᵀx + lyᵀy)`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{max_abs_diff, HessianBlocks, BLOCK_SYMMETRY_TOL};
use crate::problem::{MinimaxProblem, PointXY};
use crate::{Matrix, Vector};

#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticGame {
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
    /// Optional linear terms (zero unless set with [`with_linear`](Self::with_linear)).
    pub lx: Vector,
    pub ly: Vector,
}

/// Validates shapes and symmetry of `A` and `C`.
pub fn make_quadratic(a: Matrix, b: Matrix, c: Matrix) -> Result<QuadraticGame> {
    QuadraticGame::new(a, b, c)
}

impl QuadraticGame {
    pub fn new(a: Matrix, b: Matrix, c: Matrix) -> Result<Self> {
        let (d1, d2) = (a.nrows(), c.nrows());
        if d1 == 0 || d2 == 0 || a.shape() != (d1, d1) || c.shape() != (d2, d2) || b.shape() != (d1, d2) {
            return Err(Error::Dimension(format!(
                "A {:?}, B {:?}, C {:?}",
                a.shape(),
                b.shape(),
                c.shape()
            )));
        }
        let asym = max_abs_diff(&a, &a.transpose()).max(max_abs_diff(&c, &c.transpose()));
        if asym > BLOCK_SYMMETRY_TOL {
            return Err(Error::NotSymmetric(asym));
        }
        Ok(Self {
            a,
            b,
            c,
            lx: Vector::zeros(d1),
            ly: Vector::zeros(d2),
        })
    }

    pub fn with_linear(mut self, lx: Vector, ly: Vector) -> Result<Self> {
        if lx.len() != self.a.nrows() || ly.len() != self.c.nrows() {
            return Err(Error::Dimension("linear term lengths".into()));
        }
        self.lx = lx;
        self.ly = ly;
        Ok(self)
    }

    /// Game whose Hessian equals the given blocks.
    pub fn from_blocks(h: &HessianBlocks) -> Result<Self> {
        Self::new(h.hxx.clone(), h.hxy.clone(), h.hyy.clone())
    }

    pub fn blocks(&self) -> HessianBlocks {
        HessianBlocks {
            hxx: self.a.clone(),
            hxy: self.b.clone(),
            hyx: self.b.transpose(),
            hyy: self.c.clone(),
        }
    }
}

impl MinimaxProblem for QuadraticGame {
    fn dims(&self) -> (usize, usize) {
        (self.a.nrows(), self.c.nrows())
    }

    fn value(&self, p: &PointXY) -> f64 {
        0.5 * p.x.dot(&(&self.a * &p.x))
            + p.x.dot(&(&self.b * &p.y))
            + 0.5 * p.y.dot(&(&self.c * &p.y))
            + self.lx.dot(&p.x)
            + self.ly.dot(&p.y)
    }

    fn grads(&self, p: &PointXY) -> (Vector, Vector) {
        (self.grad_x(p), self.grad_y(p))
    }

    fn grad_x(&self, p: &PointXY) -> Vector {
        &self.a * &p.x + &self.b * &p.y + &self.lx
    }

    fn grad_y(&self, p: &PointXY) -> Vector {
        self.b.tr_mul(&p.x) + &self.c * &p.y + &self.ly
    }

    fn hessian_blocks(&self, _p: &PointXY) -> Option<HessianBlocks> {
        Some(self.blocks())
    }
}

/// Haar-ish random orthogonal matrix (QR of a Gaussian matrix, sign-fixed).
pub fn random_orthogonal(n: usize, rng: &mut impl Rng) -> Matrix {
    let g = Matrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Symmetric matrix `Q diag(λ) Qᵀ` with eigenvalues drawn uniformly from `range`.
pub fn random_spd(n: usize, range: (f64, f64), rng: &mut impl Rng) -> Matrix {
    let q = random_orthogonal(n, rng);
    let lam = Vector::from_fn(n, |_, _| rng.random_range(range.0..=range.1));
    let m = &q * Matrix::from_diagonal(&lam) * q.transpose();
    (&m + m.transpose()) * 0.5
}

/// Quadratic game with a strict local minimax at the origin: the Schur
/// complement has spectrum in `schur_range`, `−C` in `neg_hyy_range`, and
/// the coupling `B` has standard-normal entries scaled by `coupling`.
pub fn random_strict_minimax(
    d1: usize,
    d2: usize,
    schur_range: (f64, f64),
    neg_hyy_range: (f64, f64),
    coupling: f64,
    rng: &mut impl Rng,
) -> QuadraticGame {
    let s = random_spd(d1, schur_range, rng);
    let c = -random_spd(d2, neg_hyy_range, rng);
    let b = Matrix::from_fn(d1, d2, |_, _| coupling * rng.sample::<f64, _>(StandardNormal));
    let c_inv = c.clone().try_inverse().expect("negative definite by construction");
    let a = &s + &b * c_inv * b.transpose();
    let a = (&a + a.transpose()) * 0.5;
    QuadraticGame::new(a, b, c).expect("valid by construction")
}
