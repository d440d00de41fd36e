//! Two-layer perceptron (linear → ReLU → linear) over feature vectors,
//! with hand-rolled backprop for the action-masked squared-error loss.

use rand::Rng;

/// Fully connected net: `input_dim → hidden_dim (ReLU) → output_dim`.
///
/// Parameters flatten in the order `w1, b1, w2, b2` with weight matrices
/// row-major (`w1[h * input_dim + i]`, `w2[a * hidden_dim + h]`); the
/// checkpoint format and the finite-difference tests both rely on that
/// layout.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub output_dim: usize,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

impl Mlp {
    /// Weights drawn uniformly from `[-1/sqrt(fan_in), +1/sqrt(fan_in)]`,
    /// biases zero, so initial outputs sit near zero.
    pub fn new<R: Rng>(input_dim: usize, hidden_dim: usize, output_dim: usize, rng: &mut R) -> Self {
        assert!(input_dim > 0 && hidden_dim > 0 && output_dim > 0);
        let lim1 = 1.0 / (input_dim as f64).sqrt();
        let lim2 = 1.0 / (hidden_dim as f64).sqrt();
        let w1 = (0..hidden_dim * input_dim)
            .map(|_| rng.random_range(-lim1..=lim1))
            .collect();
        let w2 = (0..output_dim * hidden_dim)
            .map(|_| rng.random_range(-lim2..=lim2))
            .collect();
        Mlp {
            input_dim,
            hidden_dim,
            output_dim,
            w1,
            b1: vec![0.0; hidden_dim],
            w2,
            b2: vec![0.0; output_dim],
        }
    }

    pub fn zeroed(input_dim: usize, hidden_dim: usize, output_dim: usize) -> Self {
        Mlp {
            input_dim,
            hidden_dim,
            output_dim,
            w1: vec![0.0; hidden_dim * input_dim],
            b1: vec![0.0; hidden_dim],
            w2: vec![0.0; output_dim * hidden_dim],
            b2: vec![0.0; output_dim],
        }
    }

    pub fn param_count(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len()
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.param_count());
        flat.extend_from_slice(&self.w1);
        flat.extend_from_slice(&self.b1);
        flat.extend_from_slice(&self.w2);
        flat.extend_from_slice(&self.b2);
        flat
    }

    pub fn from_flat(
        input_dim: usize,
        hidden_dim: usize,
        output_dim: usize,
        flat: &[f64],
    ) -> Option<Self> {
        let mut net = Mlp::zeroed(input_dim, hidden_dim, output_dim);
        if flat.len() != net.param_count() {
            return None;
        }
        let (w1, rest) = flat.split_at(net.w1.len());
        let (b1, rest) = rest.split_at(net.b1.len());
        let (w2, b2) = rest.split_at(net.w2.len());
        net.w1.copy_from_slice(w1);
        net.b1.copy_from_slice(b1);
        net.w2.copy_from_slice(w2);
        net.b2.copy_from_slice(b2);
        Some(net)
    }

    /// Forward pass writing hidden pre-activations into `hidden_pre` and the
    /// rectified values into `hidden_post`; returns the output vector in
    /// `out`. Buffers are resized as needed.
    fn forward_into(
        &self,
        state: &[f64],
        hidden_pre: &mut Vec<f64>,
        hidden_post: &mut Vec<f64>,
        out: &mut Vec<f64>,
    ) {
        assert_eq!(
            state.len(),
            self.input_dim,
            "state dimension {} does not match network input {}",
            state.len(),
            self.input_dim
        );
        hidden_pre.resize(self.hidden_dim, 0.0);
        hidden_post.resize(self.hidden_dim, 0.0);
        out.resize(self.output_dim, 0.0);
        for h in 0..self.hidden_dim {
            let row = &self.w1[h * self.input_dim..(h + 1) * self.input_dim];
            let mut acc = self.b1[h];
            for (w, x) in row.iter().zip(state) {
                acc += w * x;
            }
            hidden_pre[h] = acc;
            hidden_post[h] = acc.max(0.0);
        }
        for a in 0..self.output_dim {
            let row = &self.w2[a * self.hidden_dim..(a + 1) * self.hidden_dim];
            let mut acc = self.b2[a];
            for (w, hval) in row.iter().zip(hidden_post.iter()) {
                acc += w * hval;
            }
            out[a] = acc;
        }
    }

    pub fn forward(&self, state: &[f64]) -> Vec<f64> {
        let mut pre = Vec::new();
        let mut post = Vec::new();
        let mut out = Vec::new();
        self.forward_into(state, &mut pre, &mut post, &mut out);
        out
    }

    /// One SGD step on the mean over the batch of `(y - Q(s, a))^2`, with
    /// gradient flowing only through each sample's taken action. Returns the
    /// pre-update loss.
    pub fn sgd_step(&mut self, batch: &[(&[f64], usize, f64)], lr: f64) -> f64 {
        assert!(!batch.is_empty());
        let inv_batch = 1.0 / batch.len() as f64;
        let mut grad_w1 = vec![0.0; self.w1.len()];
        let mut grad_b1 = vec![0.0; self.b1.len()];
        let mut grad_w2 = vec![0.0; self.w2.len()];
        let mut grad_b2 = vec![0.0; self.b2.len()];
        let mut pre = Vec::new();
        let mut post = Vec::new();
        let mut out = Vec::new();
        let mut loss = 0.0;
        for &(state, action, target) in batch {
            self.forward_into(state, &mut pre, &mut post, &mut out);
            let err = target - out[action];
            loss += err * err * inv_batch;
            // dL/d out[action] for the mean-squared-error reduction
            let g_out = -2.0 * err * inv_batch;
            grad_b2[action] += g_out;
            let w2_row = &self.w2[action * self.hidden_dim..(action + 1) * self.hidden_dim];
            for h in 0..self.hidden_dim {
                grad_w2[action * self.hidden_dim + h] += g_out * post[h];
                if pre[h] > 0.0 {
                    let g_h = g_out * w2_row[h];
                    grad_b1[h] += g_h;
                    for (i, x) in state.iter().enumerate() {
                        grad_w1[h * self.input_dim + i] += g_h * x;
                    }
                }
            }
        }
        for (w, g) in self.w1.iter_mut().zip(&grad_w1) {
            *w -= lr * g;
        }
        for (b, g) in self.b1.iter_mut().zip(&grad_b1) {
            *b -= lr * g;
        }
        for (w, g) in self.w2.iter_mut().zip(&grad_w2) {
            *w -= lr * g;
        }
        for (b, g) in self.b2.iter_mut().zip(&grad_b2) {
            *b -= lr * g;
        }
        loss
    }
}
