//! Adam-style diagonal preconditioning.

use crate::optim::config::Precondition;
use crate::Vector;

#[derive(Clone, Debug, PartialEq)]
pub struct PreconditionerState {
    pub mode: Precondition,
    pub m_x: Vector,
    pub v_x: Vector,
    pub m_y: Vector,
    pub v_y: Vector,
    pub step: u64,
}

impl PreconditionerState {
    pub fn new(mode: Precondition, d1: usize, d2: usize) -> Self {
        Self {
            mode,
            m_x: Vector::zeros(d1),
            v_x: Vector::zeros(d1),
            m_y: Vector::zeros(d2),
            v_y: Vector::zeros(d2),
            step: 0,
        }
    }
}

fn adam(m: &mut Vector, v: &mut Vector, g: &Vector, b1: f64, b2: f64, eps: f64, t: i32) -> Vector {
    let c1 = 1.0 - b1.powi(t);
    let c2 = 1.0 - b2.powi(t);
    let mut out = Vector::zeros(g.len());
    for i in 0..g.len() {
        m[i] = b1 * m[i] + (1.0 - b1) * g[i];
        v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
        let mhat = m[i] / c1;
        let vhat = v[i] / c2;
        out[i] = mhat / (vhat.sqrt() + eps);
    }
    out
}

/// Advances the moments and returns `(P₁∇_x f, P₂∇_y f)`; identity when off.
pub fn precondition_apply(state: &mut PreconditionerState, gx: &Vector, gy: &Vector) -> (Vector, Vector) {
    match state.mode {
        Precondition::Off => (gx.clone(), gy.clone()),
        Precondition::Adam { beta1, beta2, eps } => {
            state.step += 1;
            let t = state.step.min(i32::MAX as u64) as i32;
            let px = adam(&mut state.m_x, &mut state.v_x, gx, beta1, beta2, eps, t);
            let py = adam(&mut state.m_y, &mut state.v_y, gy, beta1, beta2, eps, t);
            (px, py)
        }
    }
}
