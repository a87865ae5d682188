//! Scalar secant estimate of `H_yy⁻¹`.

use crate::Vector;

/// Below this `‖Δg‖²` the secant pair is ignored.
pub const DG_MIN_DELTA_SQ: f64 = 1e-24;

#[derive(Clone, Debug, PartialEq)]
pub struct DgState {
    pub prev_grad_y: Option<Vector>,
    pub prev_y: Option<Vector>,
    /// Current estimate `s` with `H_yy⁻¹ ≈ s·I`.
    pub scale: f64,
}

impl Default for DgState {
    fn default() -> Self {
        Self {
            prev_grad_y: None,
            prev_y: None,
            scale: 1.0,
        }
    }
}

/// `s = ⟨Δg, Δy⟩ / ‖Δg‖²` from the stored pair and the current one.
///
/// The first call (no stored pair) yields `s = 1`; a vanishing `Δg` keeps
/// the previous scale.
pub fn dg_update(state: &DgState, grad_y_now: &Vector, y_now: &Vector) -> DgState {
    let scale = match (&state.prev_grad_y, &state.prev_y) {
        (Some(g0), Some(y0)) => {
            let dg = grad_y_now - g0;
            let dy = y_now - y0;
            let den = dg.norm_squared();
            let s = dg.dot(&dy) / den;
            if den < DG_MIN_DELTA_SQ || !s.is_finite() {
                state.scale
            } else {
                s
            }
        }
        _ => 1.0,
    };
    DgState {
        prev_grad_y: Some(grad_y_now.clone()),
        prev_y: Some(y_now.clone()),
        scale,
    }
}
