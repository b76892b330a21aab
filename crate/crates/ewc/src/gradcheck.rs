//! Central finite-difference checks of analytic gradients.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::matrix::DenseMatrix;
use crate::mlp::{regularized_loss_and_grad, Sample, ToyMlp};
use crate::penalty::{FisherDiag, LoraAdapter, Objective};
use crate::EwcError;

/// Finite-difference step.
pub const STEP: f64 = 1e-5;

/// Denominator floor so that near-zero gradients are compared absolutely.
pub const REL_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    /// Coordinate name such as `B[3][1]` or `theta[17]`.
    pub coordinate: String,
    pub analytic: f64,
    pub numeric: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GradCheckReport {
    pub probes: Vec<Probe>,
    pub tolerance: f64,
}

impl GradCheckReport {
    pub fn failures(&self) -> impl Iterator<Item = &Probe> {
        self.probes.iter().filter(move |p| p.rel_error.is_nan() || p.rel_error > self.tolerance)
    }

    pub fn passed(&self) -> bool {
        self.failures().next().is_none()
    }

    pub fn max_rel_error(&self) -> f64 {
        self.probes.iter().map(|p| p.rel_error).fold(0.0, f64::max)
    }
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

fn central(mut f: impl FnMut(f64) -> f64, x: f64) -> f64 {
    (f(x + STEP) - f(x - STEP)) / (2.0 * STEP)
}

/// Probes `probes` random coordinates of `model`'s gradient at `theta`.
pub fn check_objective<M: Objective>(
    model: &M,
    theta: &[f64],
    batch: &[M::Sample],
    probes: usize,
    tolerance: f64,
    rng: &mut impl Rng,
) -> GradCheckReport {
    let (_, grad) = model.loss_and_grad(theta, batch);
    let mut report = GradCheckReport { probes: Vec::with_capacity(probes), tolerance };
    let mut work = theta.to_vec();
    for _ in 0..probes {
        let i = rng.gen_range(0..theta.len());
        let numeric = central(
            |v| {
                work[i] = v;
                model.loss_and_grad(&work, batch).0
            },
            theta[i],
        );
        work[i] = theta[i];
        report.probes.push(Probe {
            coordinate: format!("theta[{i}]"),
            analytic: grad[i],
            numeric,
            rel_error: relative_error(grad[i], numeric),
        });
    }
    report
}

/// Probes random entries of `B` and `A` in the regularized adapter
/// objective, alternating between the two matrices.
#[allow(clippy::too_many_arguments)]
pub fn check_regularized(
    model: &ToyMlp,
    base: &[f64],
    adapter: &LoraAdapter,
    fisher: &FisherDiag,
    lambda: f64,
    batch: &[Sample],
    probes: usize,
    tolerance: f64,
    rng: &mut impl Rng,
) -> Result<GradCheckReport, EwcError> {
    let out = regularized_loss_and_grad(model, base, adapter, fisher, lambda, batch)?;
    let mut report = GradCheckReport { probes: Vec::with_capacity(probes), tolerance };
    for n in 0..probes {
        let on_b = n % 2 == 0;
        let (m, g, name): (&DenseMatrix, &DenseMatrix, &str) =
            if on_b { (&adapter.b, &out.grad_b, "B") } else { (&adapter.a, &out.grad_a, "A") };
        let (i, j) = (rng.gen_range(0..m.rows()), rng.gen_range(0..m.cols()));
        let mut work = adapter.clone();
        let mut eval = |v: f64| {
            if on_b {
                work.b.set(i, j, v);
            } else {
                work.a.set(i, j, v);
            }
            regularized_loss_and_grad(model, base, &work, fisher, lambda, batch).map(|o| o.loss)
        };
        let plus = eval(m.get(i, j) + STEP)?;
        let minus = eval(m.get(i, j) - STEP)?;
        let numeric = (plus - minus) / (2.0 * STEP);
        let analytic = g.get(i, j);
        report.probes.push(Probe {
            coordinate: format!("{name}[{i}][{j}]"),
            analytic,
            numeric,
            rel_error: relative_error(analytic, numeric),
        });
    }
    Ok(report)
}
