//! Two-layer tanh perceptron with softmax cross-entropy, the toy model for
//! the continual-learning demo. The first weight matrix is the one adapters
//! attach to.

use std::ops::Range;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::matrix::DenseMatrix;
use crate::penalty::{ewc_lora_penalty, ewc_lora_penalty_grad, FisherDiag, LoraAdapter, Objective};
use crate::EwcError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: Vec<f64>,
    pub label: usize,
}

/// Parameter layout: `W1 (hidden × inputs)`, `b1`, `W2 (classes × hidden)`, `b2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToyMlp {
    pub inputs: usize,
    pub hidden: usize,
    pub classes: usize,
}

impl ToyMlp {
    pub fn new(inputs: usize, hidden: usize, classes: usize) -> Self {
        ToyMlp { inputs, hidden, classes }
    }

    /// Indices of `W1` in the flat parameter vector.
    pub fn w1_range(&self) -> Range<usize> {
        0..self.hidden * self.inputs
    }

    fn b1_range(&self) -> Range<usize> {
        let s = self.hidden * self.inputs;
        s..s + self.hidden
    }

    fn w2_range(&self) -> Range<usize> {
        let s = self.b1_range().end;
        s..s + self.classes * self.hidden
    }

    fn b2_range(&self) -> Range<usize> {
        let s = self.w2_range().end;
        s..s + self.classes
    }

    pub fn init(&self, rng: &mut impl Rng) -> Vec<f64> {
        let mut theta = vec![0.0; self.n_params()];
        let n1 = Normal::new(0.0, 1.0 / (self.inputs as f64).sqrt()).expect("positive std");
        let n2 = Normal::new(0.0, 1.0 / (self.hidden as f64).sqrt()).expect("positive std");
        for v in &mut theta[self.w1_range()] {
            *v = n1.sample(rng);
        }
        for v in &mut theta[self.w2_range()] {
            *v = n2.sample(rng);
        }
        theta
    }

    fn hidden_act(&self, theta: &[f64], x: &[f64]) -> Vec<f64> {
        let w1 = &theta[self.w1_range()];
        let b1 = &theta[self.b1_range()];
        (0..self.hidden)
            .map(|j| {
                let row = &w1[j * self.inputs..(j + 1) * self.inputs];
                (row.iter().zip(x).map(|(w, x)| w * x).sum::<f64>() + b1[j]).tanh()
            })
            .collect()
    }

    /// Class probabilities for one input.
    pub fn predict(&self, theta: &[f64], x: &[f64]) -> Vec<f64> {
        let a = self.hidden_act(theta, x);
        let w2 = &theta[self.w2_range()];
        let b2 = &theta[self.b2_range()];
        let logits: Vec<f64> = (0..self.classes)
            .map(|c| w2[c * self.hidden..(c + 1) * self.hidden].iter().zip(&a).map(|(w, a)| w * a).sum::<f64>() + b2[c])
            .collect();
        let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
        let z: f64 = e.iter().sum();
        e.into_iter().map(|v| v / z).collect()
    }

    pub fn accuracy(&self, theta: &[f64], data: &[Sample]) -> f64 {
        let hits = data
            .iter()
            .filter(|s| {
                let p = self.predict(theta, &s.x);
                let best = (0..p.len()).max_by(|&a, &b| p[a].total_cmp(&p[b]).then(b.cmp(&a))).unwrap_or(0);
                best == s.label
            })
            .count();
        hits as f64 / data.len().max(1) as f64
    }

    pub fn loss(&self, theta: &[f64], data: &[Sample]) -> f64 {
        self.loss_and_grad(theta, data).0
    }

    /// `theta` with `delta` (hidden × inputs) added to `W1`.
    pub fn with_w1_delta(&self, theta: &[f64], delta: &DenseMatrix) -> Result<Vec<f64>, EwcError> {
        if delta.shape() != (self.hidden, self.inputs) {
            return Err(EwcError::Shape(format!("delta {:?}, W1 {:?}", delta.shape(), (self.hidden, self.inputs))));
        }
        let mut out = theta.to_vec();
        for (w, h) in out[self.w1_range()].iter_mut().zip(delta.as_slice()) {
            *w += h;
        }
        Ok(out)
    }
}

impl Objective for ToyMlp {
    type Sample = Sample;

    fn n_params(&self) -> usize {
        self.hidden * self.inputs + self.hidden + self.classes * self.hidden + self.classes
    }

    fn loss_and_grad(&self, theta: &[f64], batch: &[Sample]) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; self.n_params()];
        let mut loss = 0.0;
        let (w1r, b1r, w2r, b2r) = (self.w1_range(), self.b1_range(), self.w2_range(), self.b2_range());
        for s in batch {
            let a = self.hidden_act(theta, &s.x);
            let p = self.predict(theta, &s.x);
            loss -= p[s.label].ln();
            let dz2: Vec<f64> = p.iter().enumerate().map(|(c, p)| p - f64::from(u8::from(c == s.label))).collect();
            let w2 = &theta[w2r.clone()];
            let mut da = vec![0.0; self.hidden];
            for (c, d) in dz2.iter().enumerate() {
                grad[b2r.start + c] += d;
                for j in 0..self.hidden {
                    grad[w2r.start + c * self.hidden + j] += d * a[j];
                    da[j] += w2[c * self.hidden + j] * d;
                }
            }
            for j in 0..self.hidden {
                let dz1 = da[j] * (1.0 - a[j] * a[j]);
                grad[b1r.start + j] += dz1;
                for (i, x) in s.x.iter().enumerate() {
                    grad[w1r.start + j * self.inputs + i] += dz1 * x;
                }
            }
        }
        let n = batch.len().max(1) as f64;
        grad.iter_mut().for_each(|g| *g /= n);
        (loss / n, grad)
    }
}

/// Loss and adapter gradients of the regularized objective.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularizedOutput {
    pub loss: f64,
    pub task_loss: f64,
    pub penalty: f64,
    pub grad_b: DenseMatrix,
    pub grad_a: DenseMatrix,
}

/// Task loss of the adapted model (`W1 = W1* + scaling·BA`, everything else
/// frozen at `base`) plus the EWC penalty on the adapter product, with
/// gradients for `B` and `A` only. `fisher` covers `W1`.
pub fn regularized_loss_and_grad(
    model: &ToyMlp,
    base: &[f64],
    adapter: &LoraAdapter,
    fisher: &FisherDiag,
    lambda: f64,
    batch: &[Sample],
) -> Result<RegularizedOutput, EwcError> {
    if base.len() != model.n_params() {
        return Err(EwcError::Shape(format!("base has {} entries, model {}", base.len(), model.n_params())));
    }
    let theta = model.with_w1_delta(base, &adapter.delta())?;
    let (task_loss, g) = model.loss_and_grad(&theta, batch);
    let gw1 = DenseMatrix::from_vec(model.hidden, model.inputs, g[model.w1_range()].to_vec())?;
    let s = adapter.scaling;
    let penalty = ewc_lora_penalty(adapter, fisher, lambda)?;
    let (pb, pa) = ewc_lora_penalty_grad(adapter, fisher, lambda)?;
    let grad_b = gw1.matmul(&adapter.a.transpose())?.scaled(s).add(&pb)?;
    let grad_a = adapter.b.transpose().matmul(&gw1)?.scaled(s).add(&pa)?;
    Ok(RegularizedOutput { loss: task_loss + penalty, task_loss, penalty, grad_b, grad_a })
}

/// Isotropic Gaussian clusters, `per_class` points around each center; the
/// class of a point is the index of its center.
pub fn gaussian_clusters(centers: &[Vec<f64>], per_class: usize, std: f64, rng: &mut impl Rng) -> Vec<Sample> {
    let noise = Normal::new(0.0, std).expect("non-negative std");
    let mut out = Vec::with_capacity(centers.len() * per_class);
    for _ in 0..per_class {
        for (label, c) in centers.iter().enumerate() {
            out.push(Sample { x: c.iter().map(|m| m + noise.sample(rng)).collect(), label });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn layout_and_probabilities() {
        let m = ToyMlp::new(3, 4, 2);
        assert_eq!(m.n_params(), 12 + 4 + 8 + 2);
        let theta = m.init(&mut ChaCha8Rng::seed_from_u64(0));
        let p = m.predict(&theta, &[0.1, -0.2, 0.3]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_lambda_is_plain_adapter_loss() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = ToyMlp::new(3, 5, 2);
        let base = m.init(&mut rng);
        let data = gaussian_clusters(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]], 4, 0.3, &mut rng);
        let mut ad = LoraAdapter::init(5, 3, 2, 4.0, &mut rng).unwrap();
        ad.b = DenseMatrix::random_normal(5, 2, 0.1, &mut rng);
        let f = FisherDiag::identity(15);
        let out = regularized_loss_and_grad(&m, &base, &ad, &f, 0.0, &data).unwrap();
        let theta = m.with_w1_delta(&base, &ad.delta()).unwrap();
        assert_eq!(out.loss, m.loss(&theta, &data));
        assert_eq!(out.penalty, 0.0);
    }
}
