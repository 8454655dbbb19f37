//! Dense rectifier network with manual backpropagation.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis, Zip};
use rand::Rng;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Dense {
    /// `fan_in x fan_out`
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Network {
    pub layers: Vec<Dense>,
}

/// Gradients with the same shapes as the network parameters.
pub(crate) type Grads = Vec<(Array2<f64>, Array1<f64>)>;

impl Network {
    /// Uniform initialization in `±sqrt(6 / (fan_in + fan_out))`, zero biases.
    pub fn init(sizes: &[usize], rng: &mut impl Rng) -> Self {
        let layers = sizes
            .windows(2)
            .map(|pair| {
                let (fan_in, fan_out) = (pair[0], pair[1]);
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let w = Array2::from_shape_simple_fn((fan_in, fan_out), || rng.random_range(-limit..limit));
                Dense {
                    w,
                    b: Array1::zeros(fan_out),
                }
            })
            .collect();
        Network { layers }
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![self.layers[0].w.nrows()];
        s.extend(self.layers.iter().map(|l| l.w.ncols()));
        s
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    /// Flat parameter addressing: each layer's weights (row-major) then biases.
    pub fn param_mut(&mut self, mut index: usize) -> &mut f64 {
        for layer in &mut self.layers {
            let nw = layer.w.len();
            if index < nw {
                let cols = layer.w.ncols();
                return &mut layer.w[[index / cols, index % cols]];
            }
            index -= nw;
            if index < layer.b.len() {
                return &mut layer.b[index];
            }
            index -= layer.b.len();
        }
        panic!("parameter index out of range");
    }

    pub fn grad_at(grads: &Grads, mut index: usize) -> f64 {
        for (gw, gb) in grads {
            if index < gw.len() {
                let cols = gw.ncols();
                return gw[[index / cols, index % cols]];
            }
            index -= gw.len();
            if index < gb.len() {
                return gb[index];
            }
            index -= gb.len();
        }
        panic!("parameter index out of range");
    }

    pub fn forward(&self, x: ArrayView2<'_, f64>) -> Array1<f64> {
        let mut a = x.to_owned();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            a = a.dot(&layer.w) + &layer.b;
            if i != last {
                a.mapv_inplace(|v| v.max(0.0));
            }
        }
        a.index_axis_move(Axis(1), 0)
    }

    /// Weighted mean squared error `sum w (out - y)^2 / sum w` and its gradient.
    pub fn loss_and_grad(
        &self,
        x: ArrayView2<'_, f64>,
        y: ArrayView1<'_, f64>,
        weights: ArrayView1<'_, f64>,
    ) -> (f64, Grads) {
        let last = self.layers.len() - 1;
        // inputs[l] is the input of layer l
        let mut inputs: Vec<Array2<f64>> = Vec::with_capacity(self.layers.len());
        let mut a = x.to_owned();
        for (i, layer) in self.layers.iter().enumerate() {
            let z = a.dot(&layer.w) + &layer.b;
            inputs.push(a);
            a = if i != last { z.mapv(|v| v.max(0.0)) } else { z };
        }
        let out = a.column(0);
        let wsum = weights.sum();
        let resid = &out - &y;
        let loss = (&resid * &resid * weights).sum() / wsum;

        let mut delta = (&resid * &weights * (2.0 / wsum)).insert_axis(Axis(1));
        let mut grads: Grads = Vec::with_capacity(self.layers.len());
        for l in (0..self.layers.len()).rev() {
            let input = &inputs[l];
            let gw = input.t().dot(&delta);
            let gb = delta.sum_axis(Axis(0));
            if l > 0 {
                let mut back = delta.dot(&self.layers[l].w.t());
                // input of layer l is relu(z) of layer l-1; relu'(z) = [relu(z) > 0]
                Zip::from(&mut back).and(input).for_each(|d, &act| {
                    if act <= 0.0 {
                        *d = 0.0;
                    }
                });
                delta = back;
            }
            grads.push((gw, gb));
        }
        grads.reverse();
        (loss, grads)
    }
}

/// Adaptive-moment optimizer state.
pub(crate) struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    step: i32,
    m: Grads,
    v: Grads,
}

impl Adam {
    pub fn new(net: &Network, lr: f64, beta1: f64, beta2: f64, eps: f64) -> Self {
        let zeros: Grads = net
            .layers
            .iter()
            .map(|l| (Array2::zeros(l.w.raw_dim()), Array1::zeros(l.b.len())))
            .collect();
        Adam {
            lr,
            beta1,
            beta2,
            eps,
            step: 0,
            m: zeros.clone(),
            v: zeros,
        }
    }

    pub fn update(&mut self, net: &mut Network, grads: &Grads) {
        self.step += 1;
        let (b1, b2, eps) = (self.beta1, self.beta2, self.eps);
        let c1 = 1.0 - b1.powi(self.step);
        let c2 = 1.0 - b2.powi(self.step);
        let lr = self.lr;
        for (((layer, (gw, gb)), (mw, mb)), (vw, vb)) in net
            .layers
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut())
            .zip(self.v.iter_mut())
        {
            Zip::from(&mut layer.w).and(gw).and(mw).and(vw).for_each(|p, &g, m, v| {
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
            });
            Zip::from(&mut layer.b).and(gb).and(mb).and(vb).for_each(|p, &g, m, v| {
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
            });
        }
    }
}
