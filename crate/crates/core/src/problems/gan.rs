//! Desk-scale JS-GAN on a three-mode 1-D Gaussian mixture.
//!
//! Generator `G: ℝ^noise_dim → ℝ` (parameters = leader `x`), discriminator
//! `D: ℝ → ℝ` producing a logit (parameters = follower `y`). The payoff is
//!
//! ```text
//! f(x, y) = mean_k log σ(D(X_k)) + mean_j log(1 − σ(D(G(Z_j)))) − ρ‖y‖²
//! ```
//!
//! with fixed data `X_k` and noise `Z_j`. Component `i = j·n_data + k`
//! pairs noise draw `j` with data point `k`, so averaging the components
//! over all pairs gives `f`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::{Error, Result};
use crate::problem::{FiniteSumProblem, MinimaxProblem, PointXY};
use crate::Vector;

/// Layer widths; both networks use tanh hidden units and a linear output.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GanArch {
    pub noise_dim: usize,
    pub gen_hidden: Vec<usize>,
    pub disc_hidden: Vec<usize>,
}

impl Default for GanArch {
    fn default() -> Self {
        Self {
            noise_dim: 3,
            gen_hidden: vec![16, 16],
            disc_hidden: vec![16, 16],
        }
    }
}

/// Fully connected tanh network with scalar output.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Mlp {
    sizes: Vec<usize>,
}

impl Mlp {
    fn new(input: usize, hidden: &[usize]) -> Self {
        let mut sizes = vec![input];
        sizes.extend_from_slice(hidden);
        sizes.push(1);
        Self { sizes }
    }

    fn num_params(&self) -> usize {
        self.sizes.windows(2).map(|w| w[1] * w[0] + w[1]).sum()
    }

    fn cache(&self) -> Vec<Vec<f64>> {
        self.sizes.iter().map(|&s| vec![0.0; s]).collect()
    }

    /// Fills `acts` (inputs, hidden activations, output) and returns the output.
    fn forward(&self, params: &[f64], input: &[f64], acts: &mut [Vec<f64>]) -> f64 {
        acts[0].copy_from_slice(input);
        let last = self.sizes.len() - 2;
        let mut off = 0;
        for l in 0..=last {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let (w, rest) = params[off..].split_at(n_out * n_in);
            let b = &rest[..n_out];
            let (prev, next) = acts.split_at_mut(l + 1);
            let a_in = &prev[l];
            let a_out = &mut next[0];
            for o in 0..n_out {
                let row = &w[o * n_in..(o + 1) * n_in];
                let mut s = b[o];
                for (wi, ai) in row.iter().zip(a_in.iter()) {
                    s += wi * ai;
                }
                a_out[o] = if l == last { s } else { s.tanh() };
            }
            off += n_out * n_in + n_out;
        }
        acts[last + 1][0]
    }

    /// Adds `dout · ∂out/∂params` into `grad` (if given) and returns
    /// `dout · ∂out/∂input`, using activations from the last `forward`.
    fn backward(
        &self,
        params: &[f64],
        acts: &[Vec<f64>],
        dout: f64,
        mut grad: Option<&mut [f64]>,
        want_input: bool,
    ) -> Vec<f64> {
        let nl = self.sizes.len() - 1;
        let mut offsets = Vec::with_capacity(nl);
        let mut off = 0;
        for l in 0..nl {
            offsets.push(off);
            off += self.sizes[l + 1] * self.sizes[l] + self.sizes[l + 1];
        }
        let mut delta = vec![dout];
        for l in (0..nl).rev() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let w = &params[offsets[l]..offsets[l] + n_out * n_in];
            let a_in = &acts[l];
            if let Some(g) = grad.as_deref_mut() {
                let (gw, gb) = g[offsets[l]..offsets[l] + n_out * n_in + n_out].split_at_mut(n_out * n_in);
                for o in 0..n_out {
                    let d = delta[o];
                    if d == 0.0 {
                        continue;
                    }
                    for (gwi, ai) in gw[o * n_in..(o + 1) * n_in].iter_mut().zip(a_in.iter()) {
                        *gwi += d * ai;
                    }
                    gb[o] += d;
                }
            }
            if l == 0 && !want_input {
                break;
            }
            let mut prev = vec![0.0; n_in];
            for o in 0..n_out {
                let d = delta[o];
                for (pi, wi) in prev.iter_mut().zip(&w[o * n_in..(o + 1) * n_in]) {
                    *pi += d * wi;
                }
            }
            if l > 0 {
                for (pi, ai) in prev.iter_mut().zip(a_in.iter()) {
                    *pi *= 1.0 - ai * ai;
                }
            }
            delta = prev;
        }
        delta
    }
}

/// `log σ(t)`, stable for large `|t|`.
fn log_sigmoid(t: f64) -> f64 {
    -((-t).max(0.0) + (-t.abs()).exp().ln_1p())
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

#[derive(Clone, Debug)]
pub struct MixtureGan {
    pub arch: GanArch,
    gen: Mlp,
    disc: Mlp,
    /// Real samples `X_k`.
    pub data: Vec<f64>,
    /// Noise bank, row `j` is `Z_j`.
    pub noise: Vec<Vec<f64>>,
    pub l2_reg: f64,
}

/// Centres and standard deviation of the target mixture.
pub const MIXTURE_MEANS: [f64; 3] = [-4.0, 0.0, 4.0];
pub const MIXTURE_STD: f64 = 0.3;

/// Samples the data and noise banks from `seed`.
pub fn make_mixture_gan(
    arch: GanArch,
    n_data: usize,
    m_noise: usize,
    seed: u64,
    l2_reg: f64,
) -> Result<MixtureGan> {
    if n_data == 0 || m_noise == 0 || arch.noise_dim == 0 {
        return Err(Error::InvalidParameter("n_data, m_noise and noise_dim must be ≥ 1".into()));
    }
    if arch.gen_hidden.contains(&0) || arch.disc_hidden.contains(&0) {
        return Err(Error::InvalidParameter("hidden widths must be ≥ 1".into()));
    }
    if !(l2_reg >= 0.0 && l2_reg.is_finite()) {
        return Err(Error::InvalidParameter("l2_reg must be ≥ 0".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mode = Normal::new(0.0, MIXTURE_STD).expect("positive std");
    let data = (0..n_data)
        .map(|_| MIXTURE_MEANS[rng.random_range(0..3)] + mode.sample(&mut rng))
        .collect();
    let noise = (0..m_noise)
        .map(|_| (0..arch.noise_dim).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    let gen = Mlp::new(arch.noise_dim, &arch.gen_hidden);
    let disc = Mlp::new(1, &arch.disc_hidden);
    Ok(MixtureGan {
        arch,
        gen,
        disc,
        data,
        noise,
        l2_reg,
    })
}

impl MixtureGan {
    pub fn n_data(&self) -> usize {
        self.data.len()
    }

    pub fn m_noise(&self) -> usize {
        self.noise.len()
    }

    pub fn generator_params(&self) -> usize {
        self.gen.num_params()
    }

    pub fn discriminator_params(&self) -> usize {
        self.disc.num_params()
    }

    /// Glorot-uniform weights, zero biases.
    pub fn initial_point(&self, seed: u64) -> PointXY {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut init = |net: &Mlp| {
            let mut v = Vec::with_capacity(net.num_params());
            for w in net.sizes.windows(2) {
                let bound = (6.0 / (w[0] + w[1]) as f64).sqrt();
                for _ in 0..w[0] * w[1] {
                    v.push(rng.random_range(-bound..bound));
                }
                v.extend(std::iter::repeat_n(0.0, w[1]));
            }
            Vector::from_vec(v)
        };
        let x = init(&self.gen);
        let y = init(&self.disc);
        PointXY { x, y }
    }

    /// Generator output for every noise draw.
    pub fn generate(&self, x: &Vector) -> Vec<f64> {
        let mut acts = self.gen.cache();
        self.noise
            .iter()
            .map(|z| self.gen.forward(x.as_slice(), z, &mut acts))
            .collect()
    }

    /// Discriminator logit at `u`.
    pub fn discriminate(&self, y: &Vector, u: f64) -> f64 {
        let mut acts = self.disc.cache();
        self.disc.forward(y.as_slice(), &[u], &mut acts)
    }

    /// Weighted evaluation: `real` and `fake` list `(index, weight)` pairs
    /// in ascending index order.
    fn eval(
        &self,
        real: &[(usize, f64)],
        fake: &[(usize, f64)],
        p: &PointXY,
        want: Want,
    ) -> (f64, Vector, Vector) {
        let (x, y) = (p.x.as_slice(), p.y.as_slice());
        let mut value = 0.0;
        let mut gx = vec![0.0; if want.gx { x.len() } else { 0 }];
        let mut gy = vec![0.0; if want.gy { y.len() } else { 0 }];
        let mut dacts = self.disc.cache();
        let mut gacts = self.gen.cache();

        if want.value || want.gy {
            for &(k, w) in real {
                let t = self.disc.forward(y, &[self.data[k]], &mut dacts);
                if want.value {
                    value += w * log_sigmoid(t);
                }
                if want.gy {
                    // d/dt log σ(t) = σ(−t)
                    self.disc.backward(y, &dacts, w * sigmoid(-t), Some(&mut gy), false);
                }
            }
        }
        for &(j, w) in fake {
            let g = self.gen.forward(x, &self.noise[j], &mut gacts);
            let t = self.disc.forward(y, &[g], &mut dacts);
            if want.value {
                value += w * log_sigmoid(-t);
            }
            if want.gx || want.gy {
                // d/dt log(1 − σ(t)) = −σ(t)
                let dt = -w * sigmoid(t);
                let gyr = if want.gy { Some(gy.as_mut_slice()) } else { None };
                let dg = self.disc.backward(y, &dacts, dt, gyr, want.gx);
                if want.gx {
                    self.gen.backward(x, &gacts, dg[0], Some(&mut gx), false);
                }
            }
        }
        if want.value {
            value -= self.l2_reg * p.y.norm_squared();
        }
        if want.gy {
            for (g, yi) in gy.iter_mut().zip(y) {
                *g -= 2.0 * self.l2_reg * yi;
            }
        }
        (value, Vector::from_vec(gx), Vector::from_vec(gy))
    }

    fn full_weights(&self) -> (Vec<(usize, f64)>, Vec<(usize, f64)>) {
        let wr = 1.0 / self.n_data() as f64;
        let wf = 1.0 / self.m_noise() as f64;
        (
            (0..self.n_data()).map(|k| (k, wr)).collect(),
            (0..self.m_noise()).map(|j| (j, wf)).collect(),
        )
    }

    /// Multiplicity weights of a pair batch.
    fn batch_weights(&self, batch: &[usize]) -> (Vec<(usize, f64)>, Vec<(usize, f64)>) {
        let n = self.n_data();
        let mut real = vec![0usize; n];
        let mut fake = vec![0usize; self.m_noise()];
        for &i in batch {
            fake[i / n] += 1;
            real[i % n] += 1;
        }
        let total = batch.len() as f64;
        let pick = |counts: Vec<usize>| {
            counts
                .into_iter()
                .enumerate()
                .filter(|(_, c)| *c > 0)
                .map(|(i, c)| (i, c as f64 / total))
                .collect()
        };
        (pick(real), pick(fake))
    }
}

#[derive(Clone, Copy)]
struct Want {
    value: bool,
    gx: bool,
    gy: bool,
}

const VALUE: Want = Want {
    value: true,
    gx: false,
    gy: false,
};
const GRADS: Want = Want {
    value: false,
    gx: true,
    gy: true,
};
const GX: Want = Want {
    value: false,
    gx: true,
    gy: false,
};
const GY: Want = Want {
    value: false,
    gx: false,
    gy: true,
};

impl MinimaxProblem for MixtureGan {
    fn dims(&self) -> (usize, usize) {
        (self.gen.num_params(), self.disc.num_params())
    }
    fn value(&self, p: &PointXY) -> f64 {
        let (r, f) = self.full_weights();
        self.eval(&r, &f, p, VALUE).0
    }
    fn grads(&self, p: &PointXY) -> (Vector, Vector) {
        let (r, f) = self.full_weights();
        let (_, gx, gy) = self.eval(&r, &f, p, GRADS);
        (gx, gy)
    }
    fn grad_x(&self, p: &PointXY) -> Vector {
        let (r, f) = self.full_weights();
        self.eval(&r, &f, p, GX).1
    }
    fn grad_y(&self, p: &PointXY) -> Vector {
        let (r, f) = self.full_weights();
        self.eval(&r, &f, p, GY).2
    }
}

impl FiniteSumProblem for MixtureGan {
    fn num_components(&self) -> usize {
        self.n_data() * self.m_noise()
    }
    fn dims(&self) -> (usize, usize) {
        MinimaxProblem::dims(self)
    }
    fn batch_value(&self, batch: &[usize], p: &PointXY) -> f64 {
        let (r, f) = self.batch_weights(batch);
        self.eval(&r, &f, p, VALUE).0
    }
    fn batch_grads(&self, batch: &[usize], p: &PointXY) -> (Vector, Vector) {
        let (r, f) = self.batch_weights(batch);
        let (_, gx, gy) = self.eval(&r, &f, p, GRADS);
        (gx, gy)
    }
    fn batch_grad_x(&self, batch: &[usize], p: &PointXY) -> Vector {
        let (r, f) = self.batch_weights(batch);
        self.eval(&r, &f, p, GX).1
    }
    fn batch_grad_y(&self, batch: &[usize], p: &PointXY) -> Vector {
        let (r, f) = self.batch_weights(batch);
        self.eval(&r, &f, p, GY).2
    }
    fn mean_problem(&self) -> Box<dyn MinimaxProblem + '_> {
        Box::new(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_parameter_count() {
        let g = make_mixture_gan(GanArch::default(), 8, 8, 0, 1e-4).unwrap();
        assert_eq!(g.generator_params(), 353);
        assert_eq!(g.discriminator_params(), 321);
    }

    #[test]
    fn log_sigmoid_stable() {
        assert!((log_sigmoid(0.0) + std::f64::consts::LN_2).abs() < 1e-15);
        assert!((log_sigmoid(-800.0) + 800.0).abs() < 1e-9);
        assert!(log_sigmoid(800.0).abs() < 1e-300);
    }
}
