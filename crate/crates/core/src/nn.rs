//! Dense ReLU networks with hand-written backpropagation, Adam, and Polyak
//! averaging. Parameters live in one flat vector, layer by layer, each layer
//! stored as its `out × in` weight matrix (row-major) followed by its bias.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{check_len, Error, Result};
use crate::math::sqrt;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseNet {
    sizes: Vec<usize>,
    params: Vec<f64>,
}

/// Cached per-layer outputs of a batched forward pass.
#[derive(Debug, Clone)]
pub struct Activations {
    batch: usize,
    /// `layers[0]` is the input; the last entry is the network output.
    layers: Vec<Vec<f64>>,
}

impl Activations {
    pub fn batch(&self) -> usize {
        self.batch
    }

    pub fn output(&self) -> &[f64] {
        self.layers.last().map_or(&[], |v| &v[..])
    }
}

#[derive(Debug, Clone)]
pub struct Gradients {
    pub params: Vec<f64>,
    pub input: Vec<f64>,
}

fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

/// `c (m×n) = a (m×k) · b (k×n)` + `beta·c`, with explicit strides.
#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    (rsa, csa): (isize, isize),
    b: &[f64],
    (rsb, csb): (isize, isize),
    beta: f64,
    c: &mut [f64],
) {
    if m == 0 || n == 0 {
        return;
    }
    let a_span = (m - 1) * rsa as usize + k.saturating_sub(1) * csa as usize;
    let b_span = k.saturating_sub(1) * rsb as usize + (n - 1) * csb as usize;
    assert!(k == 0 || (a.len() > a_span && b.len() > b_span));
    assert!(c.len() >= m * n);
    // SAFETY: the asserts above bound every index touched through the given
    // strides; `c` is a distinct, dense row-major m×n buffer.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

impl DenseNet {
    /// Uniform initialisation in `±1/√fan_in` for weights and biases.
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Result<Self> {
        let mut net = Self::zeros(sizes)?;
        let mut offset = 0;
        for w in sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bound = 1.0 / sqrt(fan_in as f64);
            for p in &mut net.params[offset..offset + fan_in * fan_out + fan_out] {
                *p = rng.random_range(-bound..bound);
            }
            offset += fan_in * fan_out + fan_out;
        }
        Ok(net)
    }

    pub fn zeros(sizes: &[usize]) -> Result<Self> {
        if sizes.len() < 2 {
            return Err(Error::ZeroDimension("network layer count"));
        }
        if sizes.contains(&0) {
            return Err(Error::ZeroDimension("layer width"));
        }
        Ok(Self {
            sizes: sizes.to_vec(),
            params: vec![0.0; param_count(sizes)],
        })
    }

    pub fn from_parameters(sizes: &[usize], params: Vec<f64>) -> Result<Self> {
        let net = Self::zeros(sizes)?;
        check_len("network parameters", net.params.len(), params.len())?;
        Ok(Self {
            sizes: net.sizes,
            params,
        })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        self.sizes[self.sizes.len() - 1]
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    fn layer_offsets(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let mut offset = 0;
        self.sizes.windows(2).map(move |w| {
            let o = offset;
            offset += w[0] * w[1] + w[1];
            (o, w[0], w[1])
        })
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        Ok(self
            .forward_batch(input, 1)?
            .layers
            .pop()
            .unwrap_or_default())
    }

    /// Forward pass over `batch` row-major samples.
    pub fn forward_batch(&self, input: &[f64], batch: usize) -> Result<Activations> {
        check_len("network input", self.input_dim() * batch, input.len())?;
        let n_layers = self.sizes.len() - 1;
        let mut layers = Vec::with_capacity(n_layers + 1);
        layers.push(input.to_vec());
        for (l, (off, fan_in, fan_out)) in self.layer_offsets().enumerate() {
            let w = &self.params[off..off + fan_in * fan_out];
            let b = &self.params[off + fan_in * fan_out..off + fan_in * fan_out + fan_out];
            let mut out = Vec::with_capacity(batch * fan_out);
            for _ in 0..batch {
                out.extend_from_slice(b);
            }
            // out (batch×out) += x (batch×in) · Wᵀ (in×out)
            gemm(
                batch,
                fan_in,
                fan_out,
                &layers[l],
                (fan_in as isize, 1),
                w,
                (1, fan_in as isize),
                1.0,
                &mut out,
            );
            if l + 1 < n_layers {
                for v in &mut out {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
            }
            layers.push(out);
        }
        Ok(Activations { batch, layers })
    }

    /// Reverse pass from `grad_output` (batch × output). Returns parameter and
    /// input gradients of the scalar whose output gradient is given.
    pub fn backward(&self, acts: &Activations, grad_output: &[f64]) -> Gradients {
        self.backward_impl(acts, grad_output, true)
    }

    /// Input gradient only; parameter gradients are skipped.
    pub fn input_gradient(&self, acts: &Activations, grad_output: &[f64]) -> Vec<f64> {
        self.backward_impl(acts, grad_output, false).input
    }

    fn backward_impl(
        &self,
        acts: &Activations,
        grad_output: &[f64],
        with_params: bool,
    ) -> Gradients {
        let batch = acts.batch;
        assert_eq!(grad_output.len(), batch * self.output_dim());
        let offsets: Vec<_> = self.layer_offsets().collect();
        let mut grads = if with_params {
            vec![0.0; self.params.len()]
        } else {
            Vec::new()
        };
        let mut delta = grad_output.to_vec();
        for l in (0..offsets.len()).rev() {
            let (off, fan_in, fan_out) = offsets[l];
            if l + 1 < offsets.len() {
                for (d, a) in delta.iter_mut().zip(&acts.layers[l + 1]) {
                    if *a <= 0.0 {
                        *d = 0.0;
                    }
                }
            }
            if with_params {
                let (gw, gb) =
                    grads[off..off + fan_in * fan_out + fan_out].split_at_mut(fan_in * fan_out);
                // dW (out×in) = δᵀ (out×batch) · x (batch×in)
                gemm(
                    fan_out,
                    batch,
                    fan_in,
                    &delta,
                    (1, fan_out as isize),
                    &acts.layers[l],
                    (fan_in as isize, 1),
                    0.0,
                    gw,
                );
                for row in delta.chunks_exact(fan_out) {
                    for (g, d) in gb.iter_mut().zip(row) {
                        *g += d;
                    }
                }
            }
            let w = &self.params[off..off + fan_in * fan_out];
            // dx (batch×in) = δ (batch×out) · W (out×in)
            let mut dx = vec![0.0; batch * fan_in];
            gemm(
                batch,
                fan_out,
                fan_in,
                &delta,
                (fan_out as isize, 1),
                w,
                (fan_in as isize, 1),
                0.0,
                &mut dx,
            );
            delta = dx;
        }
        Gradients {
            params: grads,
            input: delta,
        }
    }
}

/// Adam with bias correction.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    pub fn new(num_params: usize, learning_rate: f64) -> Self {
        Self {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step: 0,
            m: vec![0.0; num_params],
            v: vec![0.0; num_params],
        }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        assert_eq!(params.len(), self.m.len());
        assert_eq!(grads.len(), self.m.len());
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - libm::pow(self.beta1, t as f64);
        let c2 = 1.0 - libm::pow(self.beta2, t as f64);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= self.learning_rate * m_hat / (sqrt(v_hat) + self.epsilon);
        }
    }
}

/// `target ← τ·online + (1 − τ)·target`.
pub fn soft_update(target: &mut [f64], online: &[f64], tau: f64) {
    assert_eq!(target.len(), online.len());
    for (t, o) in target.iter_mut().zip(online) {
        *t = tau * o + (1.0 - tau) * *t;
    }
}
