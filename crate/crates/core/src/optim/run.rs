//! Run loop with stopping rules and trajectory recording.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::optim::oracle::{Cost, Oracle};
use crate::optim::steppers::Optimizer;
use crate::problem::{BatchView, FiniteSumProblem, MinimaxProblem, PointXY, Record, Trajectory};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StopCriteria {
    pub max_iters: usize,
    /// Stop once `max(‖∇_x f‖, ‖∇_y f‖) ≤ grad_tol`.
    pub grad_tol: f64,
    /// Abort once `‖z‖` exceeds this.
    pub divergence_bound: f64,
    /// Record (and test the stopping rule) every `record_stride` steps; the
    /// final iterate is always recorded.
    pub record_stride: usize,
    /// When false, wall times are written as zero (reproducible output).
    pub record_time: bool,
}

impl StopCriteria {
    pub fn new(max_iters: usize, grad_tol: f64) -> Self {
        Self {
            max_iters,
            grad_tol,
            divergence_bound: 1e6,
            record_stride: 1,
            record_time: true,
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.record_stride = stride;
        self
    }

    pub fn without_time(mut self) -> Self {
        self.record_time = false;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || self.record_stride == 0 {
            return Err(Error::InvalidParameter("max_iters and record_stride must be ≥ 1".into()));
        }
        if !(self.grad_tol >= 0.0) || !(self.divergence_bound > 0.0) {
            return Err(Error::InvalidParameter("grad_tol ≥ 0 and divergence_bound > 0 required".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RunStatus {
    Converged,
    MaxIters,
    Diverged,
    /// A step failed; the trajectory up to the failure is kept.
    Failed(Error),
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub trajectory: Trajectory,
    pub status: RunStatus,
    /// Operations spent by the optimizer (monitoring is not counted).
    pub cost: Cost,
    pub final_point: PointXY,
    /// Steps actually taken.
    pub iterations: usize,
}

impl RunOutcome {
    pub fn final_grad_norm(&self) -> f64 {
        self.trajectory
            .last()
            .map(|r| r.grad_norm_x.max(r.grad_norm_y))
            .unwrap_or(f64::NAN)
    }
}

fn record(monitor: &dyn MinimaxProblem, step: usize, p: &PointXY, t0: Instant, stop: &StopCriteria) -> Record {
    let (gx, gy) = if p.is_finite() {
        monitor.grads(p)
    } else {
        (p.x.map(|_| f64::NAN), p.y.map(|_| f64::NAN))
    };
    Record {
        step,
        point: p.clone(),
        grad_norm_x: gx.norm(),
        grad_norm_y: gy.norm(),
        wall_time: if stop.record_time { t0.elapsed().as_secs_f64() } else { 0.0 },
    }
}

fn drive(
    monitor: &dyn MinimaxProblem,
    initial: &PointXY,
    stop: &StopCriteria,
    mut step: impl FnMut(&PointXY, &mut Cost) -> Result<PointXY>,
) -> Result<RunOutcome> {
    stop.validate()?;
    initial.check_dims(monitor.dims())?;
    let t0 = Instant::now();
    let mut traj = Trajectory::default();
    let mut cost = Cost::default();
    let first = record(monitor, 0, initial, t0, stop);
    let converged = |r: &Record| r.grad_norm_x.max(r.grad_norm_y) <= stop.grad_tol;
    let done = converged(&first);
    traj.push(first);
    let mut point = initial.clone();
    if done {
        return Ok(RunOutcome {
            trajectory: traj,
            status: RunStatus::Converged,
            cost,
            final_point: point,
            iterations: 0,
        });
    }
    let mut status = RunStatus::MaxIters;
    let mut iterations = 0;
    for t in 1..=stop.max_iters {
        match step(&point, &mut cost) {
            Ok(next) => point = next,
            Err(e) => {
                status = RunStatus::Failed(e);
                break;
            }
        }
        iterations = t;
        if !point.is_finite() || point.norm() > stop.divergence_bound {
            traj.push(record(monitor, t, &point, t0, stop));
            status = RunStatus::Diverged;
            break;
        }
        if t % stop.record_stride == 0 || t == stop.max_iters {
            let r = record(monitor, t, &point, t0, stop);
            let done = converged(&r);
            traj.push(r);
            if done {
                status = RunStatus::Converged;
                break;
            }
        }
    }
    Ok(RunOutcome {
        trajectory: traj,
        status,
        cost,
        final_point: point,
        iterations,
    })
}

/// Deterministic run. Configuration errors are returned as `Err`; step
/// failures end the run with [`RunStatus::Failed`].
pub fn run(
    problem: &dyn MinimaxProblem,
    initial: &PointXY,
    optimizer: &mut Optimizer,
    stop: &StopCriteria,
) -> Result<RunOutcome> {
    drive(problem, initial, stop, |p, cost| {
        let mut o = Oracle::new(problem, cost);
        optimizer.step(&mut o, p)
    })
}

/// Seeded minibatch sampler (without replacement, ascending indices).
#[derive(Clone, Debug)]
pub struct MinibatchSampler {
    n: usize,
    batch: usize,
    rng: ChaCha20Rng,
}

impl MinibatchSampler {
    pub fn new(n: usize, batch: usize, seed: u64) -> Result<Self> {
        if n == 0 || batch == 0 {
            return Err(Error::InvalidParameter("n and batch size must be ≥ 1".into()));
        }
        Ok(Self {
            n,
            batch,
            rng: ChaCha20Rng::seed_from_u64(seed),
        })
    }

    pub fn sample(&mut self) -> Vec<usize> {
        if self.batch >= self.n {
            return (0..self.n).collect();
        }
        let mut idx = rand::seq::index::sample(&mut self.rng, self.n, self.batch).into_vec();
        idx.sort_unstable();
        idx
    }
}

/// Stochastic run: each step draws a batch and applies the optimizer to the
/// batch objective. Gradient norms are recorded on the full objective.
pub fn run_stochastic(
    fs: &dyn FiniteSumProblem,
    sampler: &mut MinibatchSampler,
    initial: &PointXY,
    optimizer: &mut Optimizer,
    stop: &StopCriteria,
) -> Result<RunOutcome> {
    let monitor = BatchView::full(fs);
    drive(&monitor, initial, stop, |p, cost| {
        let view = BatchView::new(fs, sampler.sample())?;
        let mut o = Oracle::new(&view, cost);
        optimizer.step(&mut o, p)
    })
}
