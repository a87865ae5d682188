//! Finite sums of quadratic games around a designed average.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{spectral_norm, HessianBlocks};
use crate::problem::{FiniteSumProblem, MinimaxProblem, PointXY};
use crate::problems::quadratic::{random_strict_minimax, QuadraticGame};
use crate::{Matrix, Vector};

/// Construction parameters for [`make_finite_sum_quadratic`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FiniteSumSpec {
    pub n: usize,
    pub d1: usize,
    pub d2: usize,
    pub seed: u64,
    /// Ratio `λ_max/λ_min` of the average game's Schur and `−H_yy` blocks.
    pub conditioning: f64,
    /// Scale of the zero-mean per-component Hessian perturbations.
    pub perturbation: f64,
    /// Scale of the zero-mean per-component linear terms.
    pub linear_noise: f64,
}

impl Default for FiniteSumSpec {
    fn default() -> Self {
        Self {
            n: 64,
            d1: 3,
            d2: 3,
            seed: 0,
            conditioning: 4.0,
            perturbation: 0.3,
            linear_noise: 0.5,
        }
    }
}

/// Per-component bounds `ρ_x, ρ_y, ρ_xy, ρ_yy` at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AssumptionConstants {
    pub rho_x: f64,
    pub rho_y: f64,
    pub rho_xy: f64,
    pub rho_yy: f64,
}

#[derive(Clone, Debug)]
pub struct FiniteSumQuadratic {
    pub components: Vec<QuadraticGame>,
}

/// `n` quadratic games whose average has a strict local minimax at the
/// origin. Perturbations are centred so they cancel in the average (up to
/// rounding); with zero perturbation and noise all components coincide.
pub fn make_finite_sum_quadratic(spec: FiniteSumSpec) -> Result<FiniteSumQuadratic> {
    if spec.n == 0 || spec.d1 == 0 || spec.d2 == 0 {
        return Err(Error::InvalidParameter("n, d1, d2 must be ≥ 1".into()));
    }
    if !(spec.conditioning >= 1.0) || !(spec.perturbation >= 0.0) || !(spec.linear_noise >= 0.0) {
        return Err(Error::InvalidParameter(
            "conditioning ≥ 1 and non-negative noise scales required".into(),
        ));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let range = (1.0, spec.conditioning);
    let base = random_strict_minimax(spec.d1, spec.d2, range, range, 0.5, &mut rng);
    let (d1, d2, n) = (spec.d1, spec.d2, spec.n);

    let mut gauss = |r: usize, c: usize, scale: f64| {
        Matrix::from_fn(r, c, |_, _| scale * rng.sample::<f64, _>(StandardNormal))
    };
    let mut pa: Vec<Matrix> = Vec::with_capacity(n);
    let mut pb = Vec::with_capacity(n);
    let mut pc = Vec::with_capacity(n);
    let mut lx = Vec::with_capacity(n);
    let mut ly = Vec::with_capacity(n);
    for _ in 0..n {
        let a = gauss(d1, d1, spec.perturbation);
        pa.push((&a + a.transpose()) * 0.5);
        pb.push(gauss(d1, d2, spec.perturbation));
        let c = gauss(d2, d2, spec.perturbation);
        pc.push((&c + c.transpose()) * 0.5);
        lx.push(gauss(d1, 1, spec.linear_noise));
        ly.push(gauss(d2, 1, spec.linear_noise));
    }
    let centre = |v: &mut Vec<Matrix>| {
        let mean = v.iter().fold(Matrix::zeros(v[0].nrows(), v[0].ncols()), |acc, m| acc + m) / n as f64;
        for m in v.iter_mut() {
            *m -= &mean;
        }
    };
    if n > 1 {
        centre(&mut pa);
        centre(&mut pb);
        centre(&mut pc);
        centre(&mut lx);
        centre(&mut ly);
    } else {
        for v in [&mut pa, &mut pb, &mut pc, &mut lx, &mut ly] {
            for m in v.iter_mut() {
                m.fill(0.0);
            }
        }
    }
    let components = (0..n)
        .map(|i| {
            let a = &base.a + &pa[i];
            let g = QuadraticGame::new((&a + a.transpose()) * 0.5, &base.b + &pb[i], {
                let c = &base.c + &pc[i];
                (&c + c.transpose()) * 0.5
            })?;
            g.with_linear(lx[i].column(0).into_owned(), ly[i].column(0).into_owned())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FiniteSumQuadratic { components })
}

impl FiniteSumQuadratic {
    /// Builds directly from components (all of equal dimensions).
    pub fn new(components: Vec<QuadraticGame>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidParameter("need at least one component".into()))?;
        let dims = first.dims();
        if components.iter().any(|c| c.dims() != dims) {
            return Err(Error::Dimension("components differ in dimension".into()));
        }
        Ok(Self { components })
    }

    /// The averaged game, formed from averaged coefficients.
    pub fn mean_game(&self) -> QuadraticGame {
        let n = self.components.len() as f64;
        let first = &self.components[0];
        let mut g = QuadraticGame {
            a: first.a.clone() * 0.0,
            b: first.b.clone() * 0.0,
            c: first.c.clone() * 0.0,
            lx: first.lx.clone() * 0.0,
            ly: first.ly.clone() * 0.0,
        };
        for c in &self.components {
            g.a += &c.a;
            g.b += &c.b;
            g.c += &c.c;
            g.lx += &c.lx;
            g.ly += &c.ly;
        }
        g.a /= n;
        g.b /= n;
        g.c /= n;
        g.lx /= n;
        g.ly /= n;
        g
    }

    pub fn assumption_constants(&self, p: &PointXY) -> Result<AssumptionConstants> {
        let mut k = AssumptionConstants {
            rho_x: 0.0,
            rho_y: 0.0,
            rho_xy: 0.0,
            rho_yy: 0.0,
        };
        for c in &self.components {
            let (gx, gy) = c.grads(p);
            k.rho_x = k.rho_x.max(gx.norm());
            k.rho_y = k.rho_y.max(gy.norm());
            k.rho_xy = k.rho_xy.max(spectral_norm(&c.b)?);
            k.rho_yy = k.rho_yy.max(spectral_norm(&c.c)?);
        }
        Ok(k)
    }
}

impl FiniteSumProblem for FiniteSumQuadratic {
    fn num_components(&self) -> usize {
        self.components.len()
    }

    fn dims(&self) -> (usize, usize) {
        self.components[0].dims()
    }

    fn batch_value(&self, batch: &[usize], p: &PointXY) -> f64 {
        let mut s = 0.0;
        for &i in batch {
            s += self.components[i].value(p);
        }
        s / batch.len() as f64
    }

    fn batch_grads(&self, batch: &[usize], p: &PointXY) -> (Vector, Vector) {
        (self.batch_grad_x(batch, p), self.batch_grad_y(batch, p))
    }

    fn batch_grad_x(&self, batch: &[usize], p: &PointXY) -> Vector {
        let mut g = Vector::zeros(p.x.len());
        for &i in batch {
            g += self.components[i].grad_x(p);
        }
        g / batch.len() as f64
    }

    fn batch_grad_y(&self, batch: &[usize], p: &PointXY) -> Vector {
        let mut g = Vector::zeros(p.y.len());
        for &i in batch {
            g += self.components[i].grad_y(p);
        }
        g / batch.len() as f64
    }

    fn batch_hessian_blocks(&self, batch: &[usize], _p: &PointXY) -> Option<HessianBlocks> {
        let (d1, d2) = self.dims();
        let mut h = HessianBlocks {
            hxx: Matrix::zeros(d1, d1),
            hxy: Matrix::zeros(d1, d2),
            hyx: Matrix::zeros(d2, d1),
            hyy: Matrix::zeros(d2, d2),
        };
        for &i in batch {
            let c = &self.components[i];
            h.hxx += &c.a;
            h.hxy += &c.b;
            h.hyx += c.b.transpose();
            h.hyy += &c.c;
        }
        let n = batch.len() as f64;
        h.hxx /= n;
        h.hxy /= n;
        h.hyx /= n;
        h.hyy /= n;
        Some(h)
    }

    fn mean_problem(&self) -> Box<dyn MinimaxProblem + '_> {
        Box::new(self.mean_game())
    }
}
