//! JSON reports for `classify`, `spectrum` and `bench`.

use std::time::Instant;

use anyhow::Result;
use hessianfr::analysis::{
    classify_point, jacobian_eg, jacobian_fr, jacobian_gdn, jacobian_hessianfr, jacobian_ttsgda,
    rate_bounds, ClassifyOptions, CriticalPointReport, SpectralReport,
};
use hessianfr::optim::{Algorithm, Precondition, StopCriteria};
use hessianfr::problem::fd_hessian;
use hessianfr::{HessianBlocks, Matrix, PointXY};
use serde_json::{json, Value};

use crate::config::{ConfigError, ExperimentConfig};
use crate::runner::{build_problem, cost_json, initial_point, parse_point, run_one, status_name, Problem};
use crate::NumericalFailure;

fn point_json(p: &PointXY) -> Value {
    json!({ "x": p.x.as_slice(), "y": p.y.as_slice() })
}

fn matrix_rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// `--point` if given, else the configured initial point.
fn resolve_point(cfg: &ExperimentConfig, problem: &Problem, point: Option<&str>) -> Result<PointXY, ConfigError> {
    match point {
        Some(t) => parse_point(t, problem.dims()),
        None => initial_point(cfg, problem),
    }
}

pub fn report_json(point: &PointXY, r: &CriticalPointReport) -> Value {
    let e = &r.eigen_evidence;
    json!({
        "point": point_json(point),
        "is_critical": r.is_critical,
        "grad_norm_x": r.grad_norm_x,
        "grad_norm_y": r.grad_norm_y,
        "nash": r.nash.map(|v| v.name()),
        "minimax": r.minimax.map(|v| v.name()),
        "eigenvalues": {
            "hxx": e.hxx,
            "hyy": e.hyy,
            "schur": e.schur,
            "tau": e.tau,
        },
    })
}

/// Second-order classification. A non-critical point is a numerical
/// failure carrying the report as its diagnostic.
pub fn classify(cfg: &ExperimentConfig, point: Option<&str>, opts: &ClassifyOptions) -> Result<Value> {
    let problem = build_problem(cfg)?;
    let p = resolve_point(cfg, &problem, point)?;
    let r = problem
        .with_objective(|f| classify_point(f, &p, opts))
        .map_err(|e| NumericalFailure::new(e.to_string()))?;
    let out = report_json(&p, &r);
    if !r.is_critical {
        let g = r.grad_norm_x.max(r.grad_norm_y);
        let mut diag = json!({
            "error": "not_critical",
            "message": format!("gradient norm {g:e} exceeds crit_tol {:e}", opts.crit_tol),
        });
        diag["report"] = out;
        return Err(NumericalFailure::with_diagnostic(format!("not a critical point (gradient norm {g:e})"), diag).into());
    }
    Ok(out)
}

fn blocks_at(problem: &Problem, p: &PointXY) -> HessianBlocks {
    problem.with_objective(|f| {
        f.hessian_blocks(p)
            .unwrap_or_else(|| fd_hessian(f, p, 1e-5 * (1.0 + p.norm())))
    })
}

fn spectral_json(r: &SpectralReport) -> Value {
    json!({
        "spectral_radius": r.spectral_radius,
        "converges": r.converges,
        "eigenvalues": r.eigenvalues.iter().map(|(re, im)| [*re, *im]).collect::<Vec<_>>(),
        "similar_radius": r.similar_radius,
        "similarity_gap": r.similarity_gap(),
        "jacobian": matrix_rows(&r.jacobian),
    })
}

/// Linearisation of one configured algorithm at a point.
pub fn spectrum(cfg: &ExperimentConfig, alg: &str, point: Option<&str>) -> Result<Value> {
    let spec = cfg
        .find_algorithm(alg)
        .ok_or_else(|| ConfigError::Invalid(format!("no algorithm '{alg}' in config")))?;
    let oc = spec.to_optimizer()?;
    if oc.precondition != Precondition::Off {
        return Err(ConfigError::Invalid("spectrum does not model preconditioning".into()).into());
    }
    let problem = build_problem(cfg)?;
    let p = resolve_point(cfg, &problem, point)?;
    let h = blocks_at(&problem, &p);
    let eta = oc.eta_x;
    let numerical = |e: hessianfr::Error| NumericalFailure::new(e.to_string());
    let (report, coeffs) = match oc.algorithm {
        Algorithm::Ttsgda => (jacobian_ttsgda(&h, eta, oc.eta_y / eta), None),
        Algorithm::Eg => (jacobian_eg(&h, eta, oc.eta_y / eta), None),
        Algorithm::Fr => (jacobian_fr(&h, eta, oc.c1()), Some((oc.c1(), 0.0))),
        Algorithm::HessianFr => (jacobian_hessianfr(&h, eta, oc.c1(), oc.c2()), Some((oc.c1(), oc.c2()))),
        Algorithm::Gdn => (jacobian_gdn(&h, eta), Some((0.0, 1.0 / eta))),
        other => {
            return Err(ConfigError::Invalid(format!("no Jacobian model for '{other}'")).into());
        }
    };
    let report = report.map_err(numerical)?;
    let mut out = json!({
        "label": spec.label(),
        "algorithm": oc.algorithm.name(),
        "point": point_json(&p),
        "eta_x": eta,
    });
    if let Value::Object(m) = spectral_json(&report) {
        out.as_object_mut().expect("object").extend(m);
    }
    if let Some((c1, c2)) = coeffs {
        out["c1"] = json!(c1);
        out["c2"] = json!(c2);
        // Only defined at a strict local minimax.
        out["rate_bounds"] = match rate_bounds(&h, c1, c2) {
            Ok(b) => json!({
                "kappa_hfr": b.kappa_hfr,
                "kappa_fr": b.kappa_fr,
                "kappa_gdn": b.kappa_gdn,
                "eta_x_max_hfr": b.eta_x_max_hfr,
            }),
            Err(_) => Value::Null,
        };
    }
    Ok(out)
}

/// Operation counts and timing over `iters` steps for every algorithm,
/// from the configured initial point (pretraining is skipped).
pub fn bench(cfg: &ExperimentConfig, iters: usize) -> Result<Value> {
    if iters == 0 {
        return Err(ConfigError::Invalid("bench needs iters ≥ 1".into()).into());
    }
    let problem = build_problem(cfg)?;
    let start = initial_point(cfg, &problem)?;
    // Record only the endpoints so monitoring does not dominate the timing.
    let stop = StopCriteria {
        divergence_bound: cfg.stop.divergence_bound,
        ..StopCriteria::new(iters, 0.0).with_stride(iters)
    };
    let batch = cfg.stochastic.as_ref().map(|s| (s.batch_size, cfg.sampler_seed()));
    let mut rows = Vec::new();
    for spec in &cfg.algorithms {
        let oc = spec.to_optimizer()?;
        let t0 = Instant::now();
        let out = run_one(&problem, &start, oc, &stop, batch).map_err(|e| NumericalFailure::new(e.to_string()))?;
        let secs = t0.elapsed().as_secs_f64();
        let c = out.cost;
        let steps = c.steps.max(1) as f64;
        let per = |v: u64| v as f64 / steps;
        rows.push(json!({
            "label": spec.label(),
            "algorithm": oc.algorithm.name(),
            "status": status_name(&out.status),
            "steps": c.steps,
            "per_step": {
                "gradient_evals": per(c.gradient_evals()),
                "grad_x": per(c.grad_x),
                "grad_y": per(c.grad_y),
                "hvp": per(c.hvp),
                "cg_iters": per(c.cg_iters),
                "hessians": per(c.hessians),
            },
            "totals": cost_json(&c),
            "seconds_per_100_iters": secs / steps * 100.0,
        }));
    }
    Ok(json!({ "iters": iters, "algorithms": rows }))
}

/// Plain-text rendering of [`bench`] output.
pub fn bench_table(v: &Value) -> String {
    let mut s = format!(
        "{:<16} {:<10} {:>8} {:>10} {:>8} {:>9} {:>12}\n",
        "label", "status", "steps", "grads/step", "hvp/step", "cg/step", "s/100 iters"
    );
    for r in v["algorithms"].as_array().into_iter().flatten() {
        let ps = &r["per_step"];
        s += &format!(
            "{:<16} {:<10} {:>8} {:>10.3} {:>8.3} {:>9.3} {:>12.4}\n",
            r["label"].as_str().unwrap_or(""),
            r["status"].as_str().unwrap_or(""),
            r["steps"],
            ps["gradient_evals"].as_f64().unwrap_or(f64::NAN),
            ps["hvp"].as_f64().unwrap_or(f64::NAN),
            ps["cg_iters"].as_f64().unwrap_or(f64::NAN),
            r["seconds_per_100_iters"].as_f64().unwrap_or(f64::NAN),
        );
    }
    s
}
