//! Problem construction and the comparison runner.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use hessianfr::optim::{
    run, run_stochastic, MinibatchSampler, Optimizer, OptimizerConfig, RunOutcome, RunStatus,
    StopCriteria,
};
use hessianfr::problems::{
    make_finite_sum_quadratic, make_mixture_gan, make_quadratic, FiniteSumQuadratic, GanArch,
    MixtureGan, QuadraticGame, ToyTag,
};
use hessianfr::problems::finite_sum::FiniteSumSpec;
use hessianfr::problems::quadratic::random_strict_minimax;
use hessianfr::problems::toy::ToyProblem;
use hessianfr::{BatchView, FiniteSumProblem, Matrix, MinimaxProblem, PointXY, Trajectory, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde_json::{json, Value};

use crate::config::{ConfigError, ExperimentConfig, InitialSpec, ProblemSpec};
use crate::NumericalFailure;

/// Coordinates go into the CSV only up to this total dimension.
pub const MAX_CSV_COORDS: usize = 8;

pub enum Problem {
    Plain(Box<dyn MinimaxProblem>),
    FiniteSum(FiniteSumQuadratic),
    Gan(MixtureGan),
}

impl Problem {
    pub fn kind(&self) -> &'static str {
        match self {
            Problem::Plain(_) => "deterministic",
            Problem::FiniteSum(_) => "finite_sum_quadratic",
            Problem::Gan(_) => "mixture_gan",
        }
    }

    pub fn finite_sum(&self) -> Option<&dyn FiniteSumProblem> {
        match self {
            Problem::Plain(_) => None,
            Problem::FiniteSum(f) => Some(f),
            Problem::Gan(g) => Some(g),
        }
    }

    /// Calls `f` with the full objective.
    pub fn with_objective<R>(&self, f: impl FnOnce(&dyn MinimaxProblem) -> R) -> R {
        match self {
            Problem::Plain(p) => f(p.as_ref()),
            Problem::FiniteSum(fs) => f(&BatchView::full(fs)),
            Problem::Gan(g) => f(&BatchView::full(g)),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        match self {
            Problem::Plain(p) => p.dims(),
            Problem::FiniteSum(fs) => fs.dims(),
            Problem::Gan(g) => FiniteSumProblem::dims(g),
        }
    }
}

fn rows(name: &str, m: &[Vec<f64>]) -> Result<Matrix, ConfigError> {
    let r = m.len();
    let c = m.first().map_or(0, Vec::len);
    if r == 0 || c == 0 || m.iter().any(|row| row.len() != c) {
        return Err(ConfigError::Invalid(format!("matrix '{name}' must be non-empty and rectangular")));
    }
    Ok(Matrix::from_row_iterator(r, c, m.iter().flatten().copied()))
}

pub fn build_problem(cfg: &ExperimentConfig) -> Result<Problem, ConfigError> {
    let bad = |e: hessianfr::Error| ConfigError::Invalid(format!("problem: {e}"));
    let seed = cfg.problem_seed();
    Ok(match &cfg.problem {
        ProblemSpec::Toy { tag } => {
            let tag: ToyTag = tag.parse().map_err(bad)?;
            Problem::Plain(Box::new(ToyProblem { tag }))
        }
        ProblemSpec::Quadratic { a, b, c, lx, ly } => {
            let mut q = make_quadratic(rows("a", a)?, rows("b", b)?, rows("c", c)?).map_err(bad)?;
            if lx.is_some() || ly.is_some() {
                let (d1, d2) = q.dims();
                let lx = lx.clone().map_or(Vector::zeros(d1), Vector::from_vec);
                let ly = ly.clone().map_or(Vector::zeros(d2), Vector::from_vec);
                q = q.with_linear(lx, ly).map_err(bad)?;
            }
            Problem::Plain(Box::new(q))
        }
        ProblemSpec::RandomQuadratic {
            d1,
            d2,
            schur_range,
            neg_hyy_range,
            coupling,
            seed: own,
        } => {
            let ok = |r: &[f64; 2]| r[0] > 0.0 && r[0] <= r[1] && r[1].is_finite();
            if *d1 == 0 || *d2 == 0 || !ok(schur_range) || !ok(neg_hyy_range) || !coupling.is_finite() {
                return Err(ConfigError::Invalid(
                    "random_quadratic needs d1, d2 ≥ 1 and ranges 0 < lo ≤ hi".into(),
                ));
            }
            let mut rng = ChaCha20Rng::seed_from_u64(own.unwrap_or(seed));
            let q: QuadraticGame = random_strict_minimax(
                *d1,
                *d2,
                (schur_range[0], schur_range[1]),
                (neg_hyy_range[0], neg_hyy_range[1]),
                *coupling,
                &mut rng,
            );
            Problem::Plain(Box::new(q))
        }
        ProblemSpec::FiniteSumQuadratic {
            n,
            d1,
            d2,
            conditioning,
            perturbation,
            linear_noise,
            seed: own,
        } => Problem::FiniteSum(
            make_finite_sum_quadratic(FiniteSumSpec {
                n: *n,
                d1: *d1,
                d2: *d2,
                seed: own.unwrap_or(seed),
                conditioning: *conditioning,
                perturbation: *perturbation,
                linear_noise: *linear_noise,
            })
            .map_err(bad)?,
        ),
        ProblemSpec::MixtureGan {
            n_data,
            m_noise,
            l2_reg,
            noise_dim,
            gen_hidden,
            disc_hidden,
            seed: own,
        } => {
            let arch = GanArch {
                noise_dim: *noise_dim,
                gen_hidden: gen_hidden.clone(),
                disc_hidden: disc_hidden.clone(),
            };
            Problem::Gan(make_mixture_gan(arch, *n_data, *m_noise, own.unwrap_or(seed), *l2_reg).map_err(bad)?)
        }
    })
}

/// The configured starting point, before any pretraining.
pub fn initial_point(cfg: &ExperimentConfig, problem: &Problem) -> Result<PointXY, ConfigError> {
    let (d1, d2) = problem.dims();
    let p = match &cfg.initial {
        InitialSpec::Origin => PointXY::zeros(d1, d2),
        InitialSpec::Explicit { x, y } => {
            PointXY::from_slices(x, y).map_err(|e| ConfigError::Invalid(format!("initial: {e}")))?
        }
        InitialSpec::RandomBall { center, radius, seed } => {
            if !(*radius >= 0.0 && radius.is_finite()) {
                return Err(ConfigError::Invalid("initial.radius must be ≥ 0".into()));
            }
            let n = d1 + d2;
            let c = center.clone().unwrap_or_else(|| vec![0.0; n]);
            if c.len() != n {
                return Err(ConfigError::Invalid(format!("initial.center needs {n} entries")));
            }
            let mut rng = ChaCha20Rng::seed_from_u64(seed.unwrap_or(cfg.initial_seed()));
            let dir = Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
            let r = radius * rng.random::<f64>().powf(1.0 / n as f64);
            let z = Vector::from_vec(c) + dir.normalize() * r;
            PointXY::from_z(z.as_slice(), d1).map_err(|e| ConfigError::Invalid(e.to_string()))?
        }
        InitialSpec::GanInit { seed } => match problem {
            Problem::Gan(g) => g.initial_point(seed.unwrap_or(cfg.initial_seed())),
            _ => return Err(ConfigError::Invalid("gan_init needs a mixture_gan problem".into())),
        },
    };
    if p.dims() != (d1, d2) {
        return Err(ConfigError::Invalid(format!(
            "initial point has dims {:?}, problem has ({d1}, {d2})",
            p.dims()
        )));
    }
    Ok(p)
}

/// Parses a flat `z = (x, y)` list such as `0.5,-0.25`.
pub fn parse_point(text: &str, dims: (usize, usize)) -> Result<PointXY, ConfigError> {
    let z: Vec<f64> = text
        .split([',', ' '])
        .filter(|s| !s.is_empty())
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| ConfigError::Invalid(format!("--point: {e}")))?;
    if z.len() != dims.0 + dims.1 {
        return Err(ConfigError::Invalid(format!(
            "--point needs {} coordinates, got {}",
            dims.0 + dims.1,
            z.len()
        )));
    }
    PointXY::from_z(&z, dims.0).map_err(|e| ConfigError::Invalid(e.to_string()))
}

pub fn stop_criteria(cfg: &ExperimentConfig) -> StopCriteria {
    let s = &cfg.stop;
    StopCriteria {
        max_iters: s.max_iters,
        grad_tol: s.grad_tol,
        divergence_bound: s.divergence_bound,
        record_stride: s.record_stride,
        record_time: s.record_time,
    }
}

/// One run with fresh optimizer state; stochastic when `batch` is given.
pub fn run_one(
    problem: &Problem,
    start: &PointXY,
    config: OptimizerConfig,
    stop: &StopCriteria,
    batch: Option<(usize, u64)>,
) -> hessianfr::Result<RunOutcome> {
    let mut opt = Optimizer::new(config)?;
    match (batch, problem.finite_sum()) {
        (Some((size, seed)), Some(fs)) => {
            let mut sampler = MinibatchSampler::new(fs.num_components(), size, seed)?;
            run_stochastic(fs, &mut sampler, start, &mut opt, stop)
        }
        _ => problem.with_objective(|f| run(f, start, &mut opt, stop)),
    }
}

/// Shared starting point: the configured initial point, pretrained if asked.
pub fn starting_point(cfg: &ExperimentConfig, problem: &Problem) -> Result<(PointXY, Option<Value>)> {
    let init = initial_point(cfg, problem)?;
    let Some(pre) = &cfg.pretrain else {
        return Ok((init, None));
    };
    let opt = pre.algorithm.to_optimizer()?;
    let stop = StopCriteria::new(pre.iters, 0.0)
        .with_stride(pre.iters)
        .without_time();
    let batch = cfg
        .stochastic
        .as_ref()
        .map(|s| (s.batch_size, cfg.pretrain_sampler_seed()));
    let out = run_one(problem, &init, opt, &stop, batch)
        .map_err(|e| NumericalFailure::new(format!("pretraining: {e}")))?;
    if !matches!(out.status, RunStatus::MaxIters | RunStatus::Converged) {
        return Err(NumericalFailure::new(format!("pretraining ended with {}", status_name(&out.status))).into());
    }
    let info = json!({
        "algorithm": opt.algorithm.name(),
        "iters": out.iterations,
        "final_grad_norm": out.final_grad_norm(),
    });
    Ok((out.final_point, Some(info)))
}

pub fn status_name(s: &RunStatus) -> &'static str {
    match s {
        RunStatus::Converged => "converged",
        RunStatus::MaxIters => "max_iters",
        RunStatus::Diverged => "diverged",
        RunStatus::Failed(_) => "failed",
    }
}

pub fn write_csv(path: &Path, traj: &Trajectory, dims: (usize, usize)) -> std::io::Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    let coords = dims.0 + dims.1 <= MAX_CSV_COORDS;
    write!(w, "step,wall_time_s,grad_norm_x,grad_norm_y")?;
    if coords {
        for i in 0..dims.0 {
            write!(w, ",x{i}")?;
        }
        for i in 0..dims.1 {
            write!(w, ",y{i}")?;
        }
    }
    writeln!(w)?;
    for r in &traj.records {
        write!(w, "{},{:e},{:e},{:e}", r.step, r.wall_time, r.grad_norm_x, r.grad_norm_y)?;
        if coords {
            for v in r.point.x.iter().chain(r.point.y.iter()) {
                write!(w, ",{v:e}")?;
            }
        }
        writeln!(w)?;
    }
    w.flush()
}

/// Result of [`run_experiment`].
pub struct ExperimentReport {
    pub summary: Value,
    /// Labels of runs that stopped on a numerical error.
    pub failed: Vec<String>,
}

fn iterations_to_tol(traj: &Trajectory, tol: f64) -> Option<usize> {
    if tol <= 0.0 {
        return None;
    }
    traj.records
        .iter()
        .find(|r| r.grad_norm_x.max(r.grad_norm_y) <= tol)
        .map(|r| r.step)
}

fn create_out_dir(dir: &Path) -> Result<(), ConfigError> {
    fs::create_dir_all(dir)
        .map_err(|e| ConfigError::Invalid(format!("cannot create output dir {}: {e}", dir.display())))?;
    let probe = dir.join(".write-test");
    fs::write(&probe, b"")
        .and_then(|_| fs::remove_file(&probe))
        .map_err(|e| ConfigError::Invalid(format!("output dir {} not writable: {e}", dir.display())))
}

/// Runs every algorithm from the same start, in parallel, and writes one CSV
/// per algorithm plus `summary.json` into `out_dir`.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<ExperimentReport> {
    let problem = build_problem(cfg)?;
    let configs = cfg
        .algorithms
        .iter()
        .map(|a| Ok((a.label(), a.to_optimizer()?)))
        .collect::<Result<Vec<_>, ConfigError>>()?;
    create_out_dir(out_dir)?;
    let (start, pretrain) = starting_point(cfg, &problem)?;
    let stop = stop_criteria(cfg);
    let batch = cfg.stochastic.as_ref().map(|s| (s.batch_size, cfg.sampler_seed()));

    let results: Vec<(hessianfr::Result<RunOutcome>, f64)> = std::thread::scope(|s| {
        let handles: Vec<_> = configs
            .iter()
            .map(|(_, oc)| {
                let (problem, start, stop) = (&problem, &start, &stop);
                s.spawn(move || {
                    let t0 = Instant::now();
                    let r = run_one(problem, start, *oc, stop, batch);
                    (r, t0.elapsed().as_secs_f64())
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("run thread panicked"))
            .collect()
    });

    let dims = problem.dims();
    let mut entries = Vec::new();
    let mut failed = Vec::new();
    for ((label, oc), (res, secs)) in configs.iter().zip(results) {
        let entry = match res {
            Ok(out) => {
                let path = out_dir.join(format!("{label}.csv"));
                write_csv(&path, &out.trajectory, dims)
                    .with_context(|| format!("writing {}", path.display()))?;
                let error = match &out.status {
                    RunStatus::Failed(e) => {
                        failed.push(label.clone());
                        Some(e.to_string())
                    }
                    _ => None,
                };
                let last = out.trajectory.last();
                json!({
                    "label": label,
                    "algorithm": oc.algorithm.name(),
                    "status": status_name(&out.status),
                    "error": error,
                    "diverged": out.status == RunStatus::Diverged,
                    "iterations": out.iterations,
                    "final_grad_norm_x": last.map(|r| r.grad_norm_x),
                    "final_grad_norm_y": last.map(|r| r.grad_norm_y),
                    "final_grad_norm": out.final_grad_norm(),
                    "final_norm": out.final_point.norm(),
                    "iterations_to_tol": iterations_to_tol(&out.trajectory, stop.grad_tol),
                    "wall_time_s": secs,
                    "csv": path.file_name().map(|f| f.to_string_lossy().into_owned()),
                    "cost": cost_json(&out.cost),
                })
            }
            Err(e) => {
                failed.push(label.clone());
                json!({
                    "label": label,
                    "algorithm": oc.algorithm.name(),
                    "status": "failed",
                    "error": e.to_string(),
                })
            }
        };
        entries.push(entry);
    }
    let summary = json!({
        "seed": cfg.seed,
        "problem": problem.kind(),
        "dims": [dims.0, dims.1],
        "start_norm": start.norm(),
        "pretrain": pretrain,
        "max_iters": stop.max_iters,
        "record_stride": stop.record_stride,
        "grad_tol": stop.grad_tol,
        "algorithms": entries,
    });
    let path = out_dir.join("summary.json");
    fs::write(&path, serde_json::to_string_pretty(&summary)? + "\n")
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(ExperimentReport { summary, failed })
}

pub fn cost_json(c: &hessianfr::optim::Cost) -> Value {
    json!({
        "grad_x": c.grad_x,
        "grad_y": c.grad_y,
        "hvp": c.hvp,
        "cg_iters": c.cg_iters,
        "hessians": c.hessians,
        "steps": c.steps,
    })
}
