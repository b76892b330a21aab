use serde::{Deserialize, Serialize};

use crate::matrix::DenseMatrix;
use crate::EwcError;

/// A loss with an analytic gradient over a flat parameter vector.
pub trait Objective {
    type Sample;

    fn n_params(&self) -> usize;

    /// Mean loss over `batch` and its gradient with respect to `theta`.
    fn loss_and_grad(&self, theta: &[f64], batch: &[Self::Sample]) -> (f64, Vec<f64>);
}

/// Diagonal of the empirical Fisher information.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FisherDiag {
    values: Vec<f64>,
    samples: usize,
}

impl FisherDiag {
    pub fn new(values: Vec<f64>, samples: usize) -> Result<Self, EwcError> {
        if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(EwcError::NonFinite(format!("Fisher entry {i} is {}", values[i])));
        }
        Ok(FisherDiag { values, samples })
    }

    /// All-ones diagonal, turning the penalty into a squared distance.
    pub fn identity(len: usize) -> Self {
        FisherDiag { values: vec![1.0; len], samples: 0 }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    /// Entries `range` of the diagonal, e.g. the block of one weight matrix.
    pub fn restrict(&self, range: std::ops::Range<usize>) -> Result<FisherDiag, EwcError> {
        let slice = self
            .values
            .get(range.clone())
            .ok_or_else(|| EwcError::Shape(format!("range {range:?} outside {} entries", self.len())))?;
        Ok(FisherDiag { values: slice.to_vec(), samples: self.samples })
    }

    /// Fisher entries reshaped to `rows × cols`.
    pub fn as_matrix(&self, rows: usize, cols: usize) -> Result<DenseMatrix, EwcError> {
        DenseMatrix::from_vec(rows, cols, self.values.clone())
    }
}

/// Mean of squared per-sample gradients, `F_ii = (1/N) Σ_j g_ji²`.
///
/// Squares are summed per coordinate after sorting them, so the result does
/// not depend on the order of the samples.
pub fn fisher_from_gradients(grads: &[Vec<f64>]) -> Result<FisherDiag, EwcError> {
    let n = grads.len();
    if n == 0 {
        return Err(EwcError::NoSamples);
    }
    let dim = grads[0].len();
    if let Some(g) = grads.iter().find(|g| g.len() != dim) {
        return Err(EwcError::Shape(format!("gradient of length {} among length {dim}", g.len())));
    }
    let mut squares = vec![0.0; n];
    let mut values = Vec::with_capacity(dim);
    for i in 0..dim {
        for (s, g) in squares.iter_mut().zip(grads) {
            *s = g[i] * g[i];
        }
        squares.sort_by(f64::total_cmp);
        values.push(squares.iter().sum::<f64>() / n as f64);
    }
    FisherDiag::new(values, n)
}

/// Empirical Fisher of `model` at `theta_star` over the first `n` samples.
pub fn fisher_diag<M: Objective>(
    model: &M,
    theta_star: &[f64],
    data: &[M::Sample],
    n: usize,
) -> Result<FisherDiag, EwcError> {
    if n == 0 {
        return Err(EwcError::NoSamples);
    }
    if n > data.len() {
        return Err(EwcError::Shape(format!("asked for {n} samples, have {}", data.len())));
    }
    if theta_star.len() != model.n_params() {
        return Err(EwcError::Shape(format!("theta has {} entries, model {}", theta_star.len(), model.n_params())));
    }
    let grads: Vec<Vec<f64>> = data[..n].chunks(1).map(|s| model.loss_and_grad(theta_star, s).1).collect();
    fisher_from_gradients(&grads)
}

fn check_lambda(lambda: f64) -> Result<(), EwcError> {
    if lambda.is_finite() && lambda >= 0.0 {
        Ok(())
    } else {
        Err(EwcError::Lambda(lambda))
    }
}

/// `λ Σ_i F_ii (θ_i − θ*_i)²`.
pub fn ewc_penalty(theta: &[f64], theta_star: &[f64], fisher: &FisherDiag, lambda: f64) -> Result<f64, EwcError> {
    check_lambda(lambda)?;
    if theta.len() != theta_star.len() || theta.len() != fisher.len() {
        return Err(EwcError::Shape(format!(
            "theta {}, theta* {}, Fisher {}",
            theta.len(),
            theta_star.len(),
            fisher.len()
        )));
    }
    let sum: f64 = theta.iter().zip(theta_star).zip(fisher.values()).map(|((t, s), f)| f * (t - s) * (t - s)).sum();
    Ok(lambda * sum)
}

/// Gradient of [`ewc_penalty`] with respect to `theta`.
pub fn ewc_penalty_grad(
    theta: &[f64],
    theta_star: &[f64],
    fisher: &FisherDiag,
    lambda: f64,
) -> Result<Vec<f64>, EwcError> {
    ewc_penalty(theta, theta_star, fisher, lambda)?;
    Ok(theta.iter().zip(theta_star).zip(fisher.values()).map(|((t, s), f)| 2.0 * lambda * f * (t - s)).collect())
}

pub const DEFAULT_RANK: usize = 8;
pub const DEFAULT_COEFFICIENT: f64 = 32.0;

/// Low-rank update `scaling · B A` of an `r × d` weight matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoraAdapter {
    pub b: DenseMatrix,
    pub a: DenseMatrix,
    pub scaling: f64,
}

impl LoraAdapter {
    pub fn new(b: DenseMatrix, a: DenseMatrix, scaling: f64) -> Result<Self, EwcError> {
        let (r, k) = b.shape();
        let (k2, d) = a.shape();
        if k != k2 {
            return Err(EwcError::Shape(format!("B is {r}x{k} but A is {k2}x{d}")));
        }
        if k == 0 || k > r.min(d) {
            return Err(EwcError::Shape(format!("rank {k} must be in 1..={}", r.min(d))));
        }
        if !scaling.is_finite() {
            return Err(EwcError::NonFinite("scaling".into()));
        }
        Ok(LoraAdapter { b, a, scaling })
    }

    /// Standard initialisation: `A` Gaussian, `B` zero, scaling
    /// `coefficient / rank`.
    pub fn init(r: usize, d: usize, rank: usize, coefficient: f64, rng: &mut impl rand::Rng) -> Result<Self, EwcError> {
        let a = DenseMatrix::random_normal(rank, d, 1.0 / (d as f64).sqrt(), rng);
        LoraAdapter::new(DenseMatrix::zeros(r, rank), a, coefficient / rank as f64)
    }

    pub fn rank(&self) -> usize {
        self.a.rows()
    }

    /// Shape `(r, d)` of the adapted matrix.
    pub fn target_shape(&self) -> (usize, usize) {
        (self.b.rows(), self.a.cols())
    }

    /// `H = scaling · B A`.
    pub fn delta(&self) -> DenseMatrix {
        self.b.matmul(&self.a).expect("shapes checked at construction").scaled(self.scaling)
    }
}

/// `λ Σ_i F_ii h_i²` with `H = scaling · B A`; only `H` is materialised.
pub fn ewc_lora_penalty(adapter: &LoraAdapter, fisher: &FisherDiag, lambda: f64) -> Result<f64, EwcError> {
    check_lambda(lambda)?;
    let (r, d) = adapter.target_shape();
    if fisher.len() != r * d {
        return Err(EwcError::Shape(format!("Fisher has {} entries, adapted matrix {r}x{d}", fisher.len())));
    }
    let h = adapter.delta();
    let sum: f64 = h.as_slice().iter().zip(fisher.values()).map(|(h, f)| f * h * h).sum();
    Ok(lambda * sum)
}

/// Gradients of [`ewc_lora_penalty`] with respect to `B` and `A`:
/// `G = 2λ s² (F ⊙ BA)`, `∂/∂B = G Aᵀ`, `∂/∂A = Bᵀ G`.
pub fn ewc_lora_penalty_grad(
    adapter: &LoraAdapter,
    fisher: &FisherDiag,
    lambda: f64,
) -> Result<(DenseMatrix, DenseMatrix), EwcError> {
    check_lambda(lambda)?;
    let (r, d) = adapter.target_shape();
    let f = fisher.as_matrix(r, d)?;
    let s = adapter.scaling;
    let ba = adapter.b.matmul(&adapter.a)?;
    let g = f.hadamard(&ba)?.scaled(2.0 * lambda * s * s);
    Ok((g.matmul(&adapter.a.transpose())?, adapter.b.transpose().matmul(&g)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn quoted_examples() {
        let f = FisherDiag::new(vec![4.0], 1).unwrap();
        let p = ewc_penalty(&[0.3], &[0.0], &f, 0.5).unwrap();
        assert!((p - 0.18).abs() < 1e-15);
        assert_eq!(ewc_penalty(&[0.3], &[0.3], &f, 0.5).unwrap(), 0.0);
        assert_eq!(ewc_penalty(&[5.0], &[0.0], &f, 0.0).unwrap(), 0.0);
        assert!(matches!(ewc_penalty(&[1.0, 2.0], &[0.0], &f, 1.0), Err(EwcError::Shape(_))));
        assert!(matches!(ewc_penalty(&[1.0], &[0.0], &f, -1.0), Err(EwcError::Lambda(_))));
    }

    #[test]
    fn fisher_scaling_and_errors() {
        let g = vec![vec![1.0, -2.0, 0.0], vec![3.0, 0.5, 0.0]];
        let f = fisher_from_gradients(&g).unwrap();
        assert_eq!(f.values(), &[5.0, 2.125, 0.0]);
        let doubled: Vec<Vec<f64>> = g.iter().map(|v| v.iter().map(|x| 2.0 * x).collect()).collect();
        let f2 = fisher_from_gradients(&doubled).unwrap();
        for (a, b) in f.values().iter().zip(f2.values()) {
            assert_eq!(4.0 * a, *b);
        }
        assert!(matches!(fisher_from_gradients(&[]), Err(EwcError::NoSamples)));
        assert!(FisherDiag::new(vec![-1.0], 1).is_err());
    }

    #[test]
    fn zero_b_and_rank_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ad = LoraAdapter::init(4, 6, 2, 32.0, &mut rng).unwrap();
        assert_eq!(ad.scaling, 16.0);
        let f = FisherDiag::identity(24);
        assert_eq!(ewc_lora_penalty(&ad, &f, 2.0).unwrap(), 0.0);

        let b = DenseMatrix::from_vec(4, 1, vec![1.0, -2.0, 0.5, 3.0]).unwrap();
        let a = DenseMatrix::from_vec(1, 6, vec![0.1, 0.2, -0.3, 0.0, 1.0, -1.0]).unwrap();
        let ad = LoraAdapter::new(b, a, 4.0).unwrap();
        let p = ewc_lora_penalty(&ad, &f, 1.0).unwrap();
        let want = ad.delta().frobenius_sq();
        assert!((p - want).abs() <= 1e-12 * want);
    }

    #[test]
    fn adapter_shape_checks() {
        let b = DenseMatrix::zeros(3, 4);
        let a = DenseMatrix::zeros(4, 5);
        assert!(LoraAdapter::new(b, a, 1.0).is_err());
        assert!(LoraAdapter::new(DenseMatrix::zeros(3, 2), DenseMatrix::zeros(1, 5), 1.0).is_err());
    }
}
