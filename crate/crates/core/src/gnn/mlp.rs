//! Fully connected networks with batched forward and reverse passes.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::GnnError;
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Hidden-layer nonlinearity. Output layers are always affine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Relu,
    Softplus,
    Tanh,
}

impl Activation {
    #[inline]
    pub fn apply<T: Scalar>(self, z: T) -> T {
        match self {
            Activation::Relu => z.max(T::zero()),
            Activation::Softplus => {
                if z > T::lit(30.0) {
                    z
                } else {
                    z.exp().ln_1p()
                }
            }
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative at pre-activation `z` whose image is `a`.
    #[inline]
    pub fn derivative<T: Scalar>(self, z: T, a: T) -> T {
        match self {
            Activation::Relu => {
                if z > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Activation::Softplus => T::one() / (T::one() + (-z).exp()),
            Activation::Tanh => T::one() - a * a,
        }
    }
}

/// Multilayer perceptron. Layer `l` maps `sizes[l]` inputs to
/// `sizes[l + 1]` outputs; its weights are stored output-major
/// (`W[o][i]`) followed by the biases, layers in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Mlp<T: Scalar> {
    sizes: Vec<usize>,
    activation: Activation,
    params: Vec<T>,
}

/// Values retained by a batched forward pass.
#[derive(Debug, Clone)]
pub struct MlpCache<T> {
    /// Input to every layer; `inputs[0]` is the network input.
    inputs: Vec<Matrix<T>>,
    /// Pre-activations of the hidden layers.
    pre: Vec<Matrix<T>>,
}

impl<T: Scalar> MlpCache<T> {
    pub fn input(&self) -> &Matrix<T> {
        &self.inputs[0]
    }
}

pub fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

impl<T: Scalar> Mlp<T> {
    pub fn zeros(sizes: Vec<usize>, activation: Activation) -> Result<Self, GnnError> {
        let n = checked_count(&sizes)?;
        Ok(Self {
            sizes,
            activation,
            params: vec![T::zero(); n],
        })
    }

    /// Uniform Glorot weights, zero biases.
    pub fn init<R: Rng + ?Sized>(
        sizes: Vec<usize>,
        activation: Activation,
        rng: &mut R,
    ) -> Result<Self, GnnError> {
        let mut mlp = Self::zeros(sizes, activation)?;
        let mut offset = 0;
        for l in 0..mlp.layers() {
            let (fan_in, fan_out) = (mlp.sizes[l], mlp.sizes[l + 1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for w in &mut mlp.params[offset..offset + fan_in * fan_out] {
                *w = T::lit(rng.gen_range(-bound..bound));
            }
            offset += fan_in * fan_out + fan_out;
        }
        Ok(mlp)
    }

    pub fn from_params(
        sizes: Vec<usize>,
        activation: Activation,
        params: Vec<T>,
    ) -> Result<Self, GnnError> {
        let n = checked_count(&sizes)?;
        if params.len() != n {
            return Err(GnnError::DimensionMismatch {
                what: "parameter vector",
                expected: n,
                found: params.len(),
            });
        }
        Ok(Self {
            sizes,
            activation,
            params,
        })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn layers(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().expect("at least two sizes")
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [T] {
        &mut self.params
    }

    fn layer_offset(&self, layer: usize) -> usize {
        param_count(&self.sizes[..=layer])
    }

    /// Weights of `layer`, `sizes[l + 1]` rows of `sizes[l]` entries.
    pub fn weights(&self, layer: usize) -> &[T] {
        let o = self.layer_offset(layer);
        &self.params[o..o + self.sizes[layer] * self.sizes[layer + 1]]
    }

    pub fn biases(&self, layer: usize) -> &[T] {
        let o = self.layer_offset(layer) + self.sizes[layer] * self.sizes[layer + 1];
        &self.params[o..o + self.sizes[layer + 1]]
    }

    pub fn forward(&self, x: &[T]) -> Result<Vec<T>, GnnError> {
        let input = Matrix::from_vec(1, x.len(), x.to_vec()).expect("sized");
        let (out, _) = self.forward_batch(&input)?;
        Ok(out.into_vec())
    }

    /// Applies the network to every row of `x`.
    pub fn forward_batch(&self, x: &Matrix<T>) -> Result<(Matrix<T>, MlpCache<T>), GnnError> {
        if x.cols() != self.input_dim() {
            return Err(GnnError::DimensionMismatch {
                what: "network input",
                expected: self.input_dim(),
                found: x.cols(),
            });
        }
        let rows = x.rows();
        let mut inputs = Vec::with_capacity(self.layers());
        let mut pre = Vec::with_capacity(self.layers() - 1);
        let mut current = x.clone();
        for l in 0..self.layers() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let w = self.weights(l);
            let b = self.biases(l);
            let mut z = Matrix::zeros(rows, n_out);
            for r in 0..rows {
                let xr = current.row(r);
                let zr = z.row_mut(r);
                for ((zo, wo), &bo) in zr.iter_mut().zip(w.chunks_exact(n_in)).zip(b) {
                    *zo = bo + dot(wo, xr);
                }
            }
            inputs.push(current);
            if l + 1 == self.layers() {
                current = z;
            } else {
                let mut a = z.clone();
                for v in a.as_mut_slice() {
                    *v = self.activation.apply(*v);
                }
                pre.push(z);
                current = a;
            }
        }
        Ok((current, MlpCache { inputs, pre }))
    }

    /// Accumulates parameter gradients into `grad` (laid out like the
    /// parameters) and returns the gradient with respect to the input when
    /// `want_input` is set.
    pub fn backward_batch(
        &self,
        cache: &MlpCache<T>,
        upstream: &Matrix<T>,
        grad: &mut [T],
        want_input: bool,
    ) -> Result<Option<Matrix<T>>, GnnError> {
        let rows = cache.inputs[0].rows();
        if cache.inputs.len() != self.layers()
            || upstream.rows() != rows
            || upstream.cols() != self.output_dim()
            || grad.len() != self.param_count()
        {
            return Err(GnnError::TapeMismatch(
                "network cache does not match its parameters".into(),
            ));
        }
        let mut delta = upstream.clone();
        for l in (0..self.layers()).rev() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            if l + 1 < self.layers() {
                let z = &cache.pre[l];
                let a = &cache.inputs[l + 1];
                for ((d, &zv), &av) in delta
                    .as_mut_slice()
                    .iter_mut()
                    .zip(z.as_slice())
                    .zip(a.as_slice())
                {
                    *d *= self.activation.derivative(zv, av);
                }
            }
            let a_in = &cache.inputs[l];
            let offset = self.layer_offset(l);
            let (gw, rest) = grad[offset..].split_at_mut(n_in * n_out);
            let gb = &mut rest[..n_out];
            for r in 0..rows {
                let dr = delta.row(r);
                let ar = a_in.row(r);
                for ((&d, go), gbo) in dr.iter().zip(gw.chunks_exact_mut(n_in)).zip(gb.iter_mut()) {
                    if d == T::zero() {
                        continue;
                    }
                    *gbo += d;
                    axpy(d, ar, go);
                }
            }
            if l == 0 && !want_input {
                return Ok(None);
            }
            let w = self.weights(l);
            let mut next = Matrix::zeros(rows, n_in);
            for r in 0..rows {
                let dr = delta.row(r);
                let nr = next.row_mut(r);
                for (&d, wo) in dr.iter().zip(w.chunks_exact(n_in)) {
                    if d == T::zero() {
                        continue;
                    }
                    axpy(d, wo, nr);
                }
            }
            delta = next;
        }
        Ok(Some(delta))
    }

    pub fn cast<U: Scalar>(&self) -> Mlp<U> {
        Mlp {
            sizes: self.sizes.clone(),
            activation: self.activation,
            params: self.params.iter().map(|v| U::lit(v.as_f64())).collect(),
        }
    }
}

#[inline]
fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut acc = [T::zero(); 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut tail = T::zero();
    for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
        tail += *x * *y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn checked_count(sizes: &[usize]) -> Result<usize, GnnError> {
    if sizes.len() < 2 || sizes.contains(&0) {
        return Err(GnnError::InvalidArchitecture(format!(
            "layer sizes {sizes:?} need at least two positive entries"
        )));
    }
    Ok(param_count(sizes))
}
