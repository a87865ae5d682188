//! HessianFR and companion first/second-order methods for sequential
//! (min-max) games, plus the spectral machinery used to analyse them.
//!
//! The leader `x` minimises and the follower `y` maximises a payoff
//! `f(x, y)`. Problems expose gradients and Hessian-vector products; the
//! optimizers in [`optim`] consume only those, while [`analysis`] works on
//! dense [`HessianBlocks`] at a point.

pub mod analysis;
pub mod error;
pub mod linalg;
pub mod optim;
pub mod problem;
pub mod problems;

pub use error::{Error, Result};
pub use linalg::HessianBlocks;
pub use problem::{
    BatchView, FiniteSumProblem, MinimaxProblem, PointXY, Record, Trajectory,
};

pub type Vector = nalgebra::DVector<f64>;
pub type Matrix = nalgebra::DMatrix<f64>;
