//! Problem abstraction: points, payoffs, finite sums and trajectories.

use crate::error::{Error, Result};
use crate::linalg::HessianBlocks;
use crate::{Matrix, Vector};

/// A joint iterate `z = (x, y)`; `x` is the leader (minimiser), `y` the
/// follower (maximiser).
#[derive(Clone, Debug, PartialEq)]
pub struct PointXY {
    pub x: Vector,
    pub y: Vector,
}

impl PointXY {
    /// Validating constructor: both blocks non-empty and finite.
    pub fn new(x: Vector, y: Vector) -> Result<Self> {
        if x.is_empty() || y.is_empty() {
            return Err(Error::InvalidPoint(format!(
                "empty block (d1={}, d2={})",
                x.len(),
                y.len()
            )));
        }
        if !x.iter().chain(y.iter()).all(|v| v.is_finite()) {
            return Err(Error::InvalidPoint("non-finite entry".into()));
        }
        Ok(Self { x, y })
    }

    pub fn from_slices(x: &[f64], y: &[f64]) -> Result<Self> {
        Self::new(Vector::from_column_slice(x), Vector::from_column_slice(y))
    }

    /// Splits a concatenated `z` after the first `d1` entries.
    pub fn from_z(z: &[f64], d1: usize) -> Result<Self> {
        if d1 == 0 || d1 >= z.len() {
            return Err(Error::Dimension(format!(
                "cannot split length {} at d1={d1}",
                z.len()
            )));
        }
        Self::from_slices(&z[..d1], &z[d1..])
    }

    pub fn zeros(d1: usize, d2: usize) -> Self {
        Self {
            x: Vector::zeros(d1),
            y: Vector::zeros(d2),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.x.len(), self.y.len())
    }

    pub fn z(&self) -> Vector {
        concat(&self.x, &self.y)
    }

    /// Euclidean norm of `z`.
    pub fn norm(&self) -> f64 {
        (self.x.norm_squared() + self.y.norm_squared()).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(self.y.iter()).all(|v| v.is_finite())
    }

    pub fn distance(&self, other: &PointXY) -> f64 {
        ((&self.x - &other.x).norm_squared() + (&self.y - &other.y).norm_squared()).sqrt()
    }

    pub(crate) fn check_dims(&self, dims: (usize, usize)) -> Result<()> {
        if self.dims() != dims {
            return Err(Error::Dimension(format!(
                "point has dims {:?}, problem expects {:?}",
                self.dims(),
                dims
            )));
        }
        Ok(())
    }
}

/// A twice-differentiable payoff `f(x, y)`.
///
/// Only [`value`](Self::value), [`grads`](Self::grads) and
/// [`dims`](Self::dims) are required. Hessian-vector products default to
/// the dense blocks when the problem provides them and to central finite
/// differences of the gradient otherwise.
pub trait MinimaxProblem: Send + Sync {
    fn dims(&self) -> (usize, usize);

    fn value(&self, p: &PointXY) -> f64;

    /// `(∇_x f, ∇_y f)`.
    fn grads(&self, p: &PointXY) -> (Vector, Vector);

    fn grad_x(&self, p: &PointXY) -> Vector {
        self.grads(p).0
    }

    fn grad_y(&self, p: &PointXY) -> Vector {
        self.grads(p).1
    }

    /// Dense Hessian blocks, for problems small enough to form them.
    fn hessian_blocks(&self, _p: &PointXY) -> Option<HessianBlocks> {
        None
    }

    /// `H_yy v`.
    fn hvp_yy(&self, p: &PointXY, v: &Vector) -> Vector {
        if let Some(h) = self.hessian_blocks(p) {
            return &h.hyy * v;
        }
        let d1 = p.x.len();
        central_difference(p, &Vector::zeros(d1), v, |q| self.grad_y(q))
    }

    /// `H_yx u`.
    fn hvp_yx(&self, p: &PointXY, u: &Vector) -> Vector {
        if let Some(h) = self.hessian_blocks(p) {
            return &h.hyx * u;
        }
        let d2 = p.y.len();
        central_difference(p, u, &Vector::zeros(d2), |q| self.grad_y(q))
    }

    /// Full product `H (u, v) = (H_xx u + H_xy v, H_yx u + H_yy v)`.
    fn hvp(&self, p: &PointXY, u: &Vector, v: &Vector) -> (Vector, Vector) {
        if let Some(h) = self.hessian_blocks(p) {
            return (&h.hxx * u + &h.hxy * v, &h.hyx * u + &h.hyy * v);
        }
        let d1 = p.x.len();
        let z = central_difference(p, u, v, |q| {
            let (gx, gy) = self.grads(q);
            concat(&gx, &gy)
        });
        (z.rows(0, d1).into_owned(), z.rows(d1, z.len() - d1).into_owned())
    }
}

/// Central difference of `g` along the direction `(u, v)`.
fn central_difference(
    p: &PointXY,
    u: &Vector,
    v: &Vector,
    g: impl Fn(&PointXY) -> Vector,
) -> Vector {
    let dn = (u.norm_squared() + v.norm_squared()).sqrt();
    if dn == 0.0 {
        return g(p) * 0.0;
    }
    let h = 1e-5 * (1.0 + p.norm()) / dn;
    let plus = PointXY {
        x: &p.x + u * h,
        y: &p.y + v * h,
    };
    let minus = PointXY {
        x: &p.x - u * h,
        y: &p.y - v * h,
    };
    (g(&plus) - g(&minus)) / (2.0 * h)
}

impl<T: MinimaxProblem + ?Sized> MinimaxProblem for &T {
    fn dims(&self) -> (usize, usize) {
        (**self).dims()
    }
    fn value(&self, p: &PointXY) -> f64 {
        (**self).value(p)
    }
    fn grads(&self, p: &PointXY) -> (Vector, Vector) {
        (**self).grads(p)
    }
    fn grad_x(&self, p: &PointXY) -> Vector {
        (**self).grad_x(p)
    }
    fn grad_y(&self, p: &PointXY) -> Vector {
        (**self).grad_y(p)
    }
    fn hessian_blocks(&self, p: &PointXY) -> Option<HessianBlocks> {
        (**self).hessian_blocks(p)
    }
    fn hvp_yy(&self, p: &PointXY, v: &Vector) -> Vector {
        (**self).hvp_yy(p, v)
    }
    fn hvp_yx(&self, p: &PointXY, u: &Vector) -> Vector {
        (**self).hvp_yx(p, u)
    }
    fn hvp(&self, p: &PointXY, u: &Vector, v: &Vector) -> (Vector, Vector) {
        (**self).hvp(p, u, v)
    }
}

/// `f = (1/n) Σ_i f_i`, evaluated over index batches.
///
/// Batches are ascending index lists (no repeats); implementations must sum
/// in ascending index order so that a batch covering `0..n` reproduces the
/// full objective bit for bit.
pub trait FiniteSumProblem: Send + Sync {
    fn num_components(&self) -> usize;

    fn dims(&self) -> (usize, usize);

    fn batch_value(&self, batch: &[usize], p: &PointXY) -> f64;

    fn batch_grads(&self, batch: &[usize], p: &PointXY) -> (Vector, Vector);

    fn batch_grad_x(&self, batch: &[usize], p: &PointXY) -> Vector {
        self.batch_grads(batch, p).0
    }

    fn batch_grad_y(&self, batch: &[usize], p: &PointXY) -> Vector {
        self.batch_grads(batch, p).1
    }

    fn batch_hessian_blocks(&self, _batch: &[usize], _p: &PointXY) -> Option<HessianBlocks> {
        None
    }

    /// The averaged objective computed through its own route (e.g. from
    /// averaged coefficients), used to cross-check batch evaluation.
    fn mean_problem(&self) -> Box<dyn MinimaxProblem + '_>;
}

/// `f̂ = (1/|S|) Σ_{i∈S} f_i` as a stand-alone [`MinimaxProblem`].
pub struct BatchView<'a> {
    fs: &'a dyn FiniteSumProblem,
    batch: Vec<usize>,
}

impl<'a> BatchView<'a> {
    /// Sorts and de-duplicates `batch`; rejects empty or out-of-range sets.
    pub fn new(fs: &'a dyn FiniteSumProblem, mut batch: Vec<usize>) -> Result<Self> {
        batch.sort_unstable();
        batch.dedup();
        let n = fs.num_components();
        if batch.is_empty() {
            return Err(Error::InvalidParameter("empty batch".into()));
        }
        if let Some(&last) = batch.last() {
            if last >= n {
                return Err(Error::InvalidParameter(format!(
                    "batch index {last} out of range for n={n}"
                )));
            }
        }
        Ok(Self { fs, batch })
    }

    pub fn full(fs: &'a dyn FiniteSumProblem) -> Self {
        Self {
            fs,
            batch: (0..fs.num_components()).collect(),
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.batch
    }
}

impl MinimaxProblem for BatchView<'_> {
    fn dims(&self) -> (usize, usize) {
        self.fs.dims()
    }
    fn value(&self, p: &PointXY) -> f64 {
        self.fs.batch_value(&self.batch, p)
    }
    fn grads(&self, p: &PointXY) -> (Vector, Vector) {
        self.fs.batch_grads(&self.batch, p)
    }
    fn grad_x(&self, p: &PointXY) -> Vector {
        self.fs.batch_grad_x(&self.batch, p)
    }
    fn grad_y(&self, p: &PointXY) -> Vector {
        self.fs.batch_grad_y(&self.batch, p)
    }
    fn hessian_blocks(&self, p: &PointXY) -> Option<HessianBlocks> {
        self.fs.batch_hessian_blocks(&self.batch, p)
    }
}

/// One sampled iterate.
#[derive(Clone, Debug, PartialEq)]
pub struct Record {
    pub step: usize,
    pub point: PointXY,
    pub grad_norm_x: f64,
    pub grad_norm_y: f64,
    /// Seconds since the start of the run.
    pub wall_time: f64,
}

/// Iterates in strictly increasing step order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub records: Vec<Record>,
}

impl Trajectory {
    pub fn push(&mut self, rec: Record) {
        if let Some(last) = self.records.last() {
            debug_assert!(rec.step > last.step, "steps must increase");
            debug_assert!(rec.wall_time >= last.wall_time, "time must not go back");
        }
        self.records.push(rec);
    }

    pub fn last(&self) -> Option<&Record> {
        self.records.last()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Result of [`grad_check`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradCheckReport {
    /// max over coordinates of `|analytic − fd| / (1 + |analytic|)`.
    pub max_rel_error: f64,
    /// Flat coordinate index (x first, then y) where it occurred.
    pub worst_coordinate: usize,
}

/// Compares analytic gradients against central differences of `value`.
pub fn grad_check(
    problem: &dyn MinimaxProblem,
    point: &PointXY,
    h: f64,
) -> Result<GradCheckReport> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!("step h={h} must be > 0")));
    }
    if !point.is_finite() {
        return Err(Error::InvalidPoint("non-finite entry".into()));
    }
    point.check_dims(problem.dims())?;
    let (gx, gy) = problem.grads(point);
    let d1 = point.x.len();
    let analytic: Vec<f64> = gx.iter().chain(gy.iter()).copied().collect();
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst_coordinate: 0,
    };
    for (i, &a) in analytic.iter().enumerate() {
        let probe = |delta: f64| {
            let mut q = point.clone();
            if i < d1 {
                q.x[i] += delta;
            } else {
                q.y[i - d1] += delta;
            }
            problem.value(&q)
        };
        let (fp, fm) = (probe(h), probe(-h));
        if !(fp.is_finite() && fm.is_finite()) {
            return Err(Error::NonEvaluable(format!("payoff not finite near coordinate {i}")));
        }
        let fd = (fp - fm) / (2.0 * h);
        let err = (a - fd).abs() / (1.0 + a.abs());
        if !err.is_finite() {
            return Err(Error::NonEvaluable(format!("gradient not finite at coordinate {i}")));
        }
        if err > report.max_rel_error {
            report = GradCheckReport {
                max_rel_error: err,
                worst_coordinate: i,
            };
        }
    }
    Ok(report)
}

fn close_rel(a: &Vector, b: &Vector, tol: f64) -> bool {
    let scale = a.norm().max(b.norm());
    (a - b).norm() <= tol * scale
}

/// True iff the full-index batch view agrees with the independently
/// averaged problem (value and both gradients) to `1e-12` relative.
pub fn full_batch_equivalence(fs: &dyn FiniteSumProblem, point: &PointXY) -> bool {
    let view = BatchView::full(fs);
    let mean = fs.mean_problem();
    let (va, vb) = (view.value(point), mean.value(point));
    let value_ok = (va - vb).abs() <= 1e-12 * va.abs().max(vb.abs());
    let (gxa, gya) = view.grads(point);
    let (gxb, gyb) = mean.grads(point);
    value_ok && close_rel(&gxa, &gxb, 1e-12) && close_rel(&gya, &gyb, 1e-12)
}

/// Dense Hessian by central differences of the gradient; used to validate
/// analytic blocks.
pub fn fd_hessian(problem: &dyn MinimaxProblem, p: &PointXY, h: f64) -> HessianBlocks {
    let (d1, d2) = p.dims();
    let n = d1 + d2;
    let mut full = Matrix::zeros(n, n);
    for j in 0..n {
        let shifted = |delta: f64| {
            let mut q = p.clone();
            if j < d1 {
                q.x[j] += delta;
            } else {
                q.y[j - d1] += delta;
            }
            let (gx, gy) = problem.grads(&q);
            concat(&gx, &gy)
        };
        let col = (shifted(h) - shifted(-h)) / (2.0 * h);
        full.set_column(j, &col);
    }
    let sym = (&full + full.transpose()) * 0.5;
    HessianBlocks::from_full(&sym, d1)
}

/// `(a, b)` stacked into one vector.
pub fn concat(a: &Vector, b: &Vector) -> Vector {
    Vector::from_iterator(a.len() + b.len(), a.iter().chain(b.iter()).copied())
}
