//! Concrete payoffs.

pub mod finite_sum;
pub mod gan;
pub mod quadratic;
pub mod toy;

pub use finite_sum::{make_finite_sum_quadratic, AssumptionConstants, FiniteSumQuadratic};
pub use gan::{make_mixture_gan, GanArch, MixtureGan};
pub use quadratic::{make_quadratic, QuadraticGame};
pub use toy::{make_g1, make_g2, make_g3, ToyProblem, ToyTag};
