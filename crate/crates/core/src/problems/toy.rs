//! The three two-dimensional test payoffs.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::linalg::HessianBlocks;
use crate::problem::{MinimaxProblem, PointXY};
use crate::{Matrix, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ToyTag {
    /// `−3x² − y² + 4xy`: origin is a local minimax but not Nash.
    G1,
    /// `3x² + y² + 4xy`: origin is not a local minimax.
    G2,
    /// `(4x² − (y − 3x + 0.05x³)² − 0.1y⁴)·e^{−0.01(x²+y²)}`.
    G3,
}

impl fmt::Display for ToyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ToyTag::G1 => "g1",
            ToyTag::G2 => "g2",
            ToyTag::G3 => "g3",
        })
    }
}

impl FromStr for ToyTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "g1" => Ok(ToyTag::G1),
            "g2" => Ok(ToyTag::G2),
            "g3" => Ok(ToyTag::G3),
            other => Err(Error::InvalidParameter(format!("unknown toy problem '{other}'"))),
        }
    }
}

/// Scalar `x`, scalar `y`, closed-form derivatives.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ToyProblem {
    pub tag: ToyTag,
}

pub fn make_g1() -> ToyProblem {
    ToyProblem { tag: ToyTag::G1 }
}
pub fn make_g2() -> ToyProblem {
    ToyProblem { tag: ToyTag::G2 }
}
pub fn make_g3() -> ToyProblem {
    ToyProblem { tag: ToyTag::G3 }
}

/// Value, gradient and Hessian `(f, fx, fy, fxx, fxy, fyy)`.
fn eval(tag: ToyTag, x: f64, y: f64) -> [f64; 6] {
    match tag {
        ToyTag::G1 => [
            -3.0 * x * x - y * y + 4.0 * x * y,
            -6.0 * x + 4.0 * y,
            -2.0 * y + 4.0 * x,
            -6.0,
            4.0,
            -2.0,
        ],
        ToyTag::G2 => [
            3.0 * x * x + y * y + 4.0 * x * y,
            6.0 * x + 4.0 * y,
            2.0 * y + 4.0 * x,
            6.0,
            4.0,
            2.0,
        ],
        ToyTag::G3 => g3(x, y),
    }
}

// f = p·e with p = 4x² − u² − 0.1y⁴, u = y − 3x + 0.05x³, e = exp(−0.01(x²+y²)).
fn g3(x: f64, y: f64) -> [f64; 6] {
    let u = y - 3.0 * x + 0.05 * x.powi(3);
    let ux = -3.0 + 0.15 * x * x;
    let uxx = 0.3 * x;
    let p = 4.0 * x * x - u * u - 0.1 * y.powi(4);
    let px = 8.0 * x - 2.0 * u * ux;
    let py = -2.0 * u - 0.4 * y.powi(3);
    let pxx = 8.0 - 2.0 * ux * ux - 2.0 * u * uxx;
    let pxy = -2.0 * ux;
    let pyy = -2.0 - 1.2 * y * y;
    let e = (-0.01 * (x * x + y * y)).exp();
    // ∂e/∂x = −0.02x·e, ∂e/∂y = −0.02y·e.
    let ax = px - 0.02 * x * p;
    let ay = py - 0.02 * y * p;
    [
        p * e,
        e * ax,
        e * ay,
        e * (-0.02 * x * ax + pxx - 0.02 * p - 0.02 * x * px),
        e * (-0.02 * y * ax + pxy - 0.02 * x * py),
        e * (-0.02 * y * ay + pyy - 0.02 * p - 0.02 * y * py),
    ]
}

impl MinimaxProblem for ToyProblem {
    fn dims(&self) -> (usize, usize) {
        (1, 1)
    }

    fn value(&self, p: &PointXY) -> f64 {
        eval(self.tag, p.x[0], p.y[0])[0]
    }

    fn grads(&self, p: &PointXY) -> (Vector, Vector) {
        let r = eval(self.tag, p.x[0], p.y[0]);
        (Vector::from_element(1, r[1]), Vector::from_element(1, r[2]))
    }

    fn hessian_blocks(&self, p: &PointXY) -> Option<HessianBlocks> {
        let r = eval(self.tag, p.x[0], p.y[0]);
        let m = |v: f64| Matrix::from_element(1, 1, v);
        Some(HessianBlocks {
            hxx: m(r[3]),
            hxy: m(r[4]),
            hyx: m(r[4]),
            hyy: m(r[5]),
        })
    }
}
