//! Toy continual-learning comparison: pretrain on task U, then learn task V
//! under four regimes and measure how much task U suffers.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::mlp::{gaussian_clusters, regularized_loss_and_grad, Sample, ToyMlp};
use crate::penalty::{ewc_penalty, ewc_penalty_grad, fisher_diag, FisherDiag, LoraAdapter, Objective};
use crate::EwcError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    FullFinetune,
    Ewc,
    AdapterOnly,
    EwcAdapter,
}

impl Regime {
    pub const ALL: [Regime; 4] = [Regime::FullFinetune, Regime::Ewc, Regime::AdapterOnly, Regime::EwcAdapter];

    pub fn name(self) -> &'static str {
        match self {
            Regime::FullFinetune => "full_finetune",
            Regime::Ewc => "ewc",
            Regime::AdapterOnly => "adapter_only",
            Regime::EwcAdapter => "ewc_adapter",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemoConfig {
    pub inputs: usize,
    pub hidden: usize,
    pub classes: usize,
    pub per_class: usize,
    pub cluster_std: f64,
    pub pretrain_epochs: usize,
    pub finetune_epochs: usize,
    pub learning_rate: f64,
    pub adapter_learning_rate: f64,
    pub rank: usize,
    pub coefficient: f64,
    /// Penalty strength for the full-parameter EWC regime.
    pub lambda_full: f64,
    /// Penalty strength for the adapter regime.
    pub lambda_adapter: f64,
    /// Strength of task V's echo on the task-U axis of the next class.
    pub echo: f64,
    /// Samples used for the Fisher estimate; `0` means all of task U.
    pub fisher_samples: usize,
}

impl Default for DemoConfig {
    fn default() -> Self {
        DemoConfig {
            inputs: 6,
            hidden: 12,
            classes: 3,
            per_class: 60,
            cluster_std: 0.7,
            pretrain_epochs: 400,
            finetune_epochs: 300,
            learning_rate: 0.5,
            adapter_learning_rate: 0.005,
            rank: 2,
            coefficient: 8.0,
            lambda_full: 2.0,
            lambda_adapter: 2.0,
            echo: 0.5,
            fisher_samples: 0,
        }
    }
}

impl DemoConfig {
    pub fn validate(&self) -> Result<(), EwcError> {
        if self.classes < 2 || self.hidden == 0 || self.per_class == 0 {
            return Err(EwcError::Config("model and data sizes must be positive".into()));
        }
        if self.inputs < 2 * self.classes {
            return Err(EwcError::Config("need at least two input axes per class".into()));
        }
        if self.rank == 0 || self.rank > self.hidden.min(self.inputs) {
            return Err(EwcError::Config(format!("rank {} outside 1..={}", self.rank, self.hidden.min(self.inputs))));
        }
        for (name, v) in [("lambda_full", self.lambda_full), ("lambda_adapter", self.lambda_adapter)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(EwcError::Config(format!("{name} must be non-negative")));
            }
        }
        if !(self.learning_rate > 0.0 && self.adapter_learning_rate > 0.0) {
            return Err(EwcError::Config("learning rates must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeResult {
    pub regime: Regime,
    pub task_u_loss_before: f64,
    pub task_u_loss_after: f64,
    pub task_v_accuracy: f64,
    /// Euclidean distance moved from the task-U parameters.
    pub displacement: f64,
}

impl RegimeResult {
    pub fn degradation(&self) -> f64 {
        self.task_u_loss_after - self.task_u_loss_before
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoReport {
    pub seed: u64,
    pub config: DemoConfig,
    pub task_u_accuracy_before: f64,
    pub results: Vec<RegimeResult>,
}

impl DemoReport {
    pub fn get(&self, regime: Regime) -> &RegimeResult {
        self.results.iter().find(|r| r.regime == regime).expect("every regime is run")
    }
}

impl fmt::Display for DemoReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "seed {}  task U accuracy after pretraining {:.3}", self.seed, self.task_u_accuracy_before)?;
        writeln!(
            f,
            "{:<14} {:>12} {:>12} {:>12} {:>10}",
            "regime", "U loss pre", "U loss post", "V accuracy", "moved"
        )?;
        for r in &self.results {
            writeln!(
                f,
                "{:<14} {:>12.4} {:>12.4} {:>12.3} {:>10.4}",
                r.regime.name(),
                r.task_u_loss_before,
                r.task_u_loss_after,
                r.task_v_accuracy,
                r.displacement
            )?;
        }
        Ok(())
    }
}

/// Task U puts class `c` on input axis `c`. Task V keeps the labels but
/// moves class `c` onto axis `classes + c`, with a weaker echo on the axis
/// task U uses for class `c + 1`, so the old features point the wrong way.
fn task_centers(cfg: &DemoConfig) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let k = cfg.classes;
    (0..k)
        .map(|c| {
            let mut u = vec![0.0; cfg.inputs];
            u[c] = 2.0;
            let mut v = vec![0.0; cfg.inputs];
            v[k + c] = 2.0;
            v[(c + 1) % k] = cfg.echo;
            (u, v)
        })
        .unzip()
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn train_full(
    model: &ToyMlp,
    start: &[f64],
    data: &[Sample],
    epochs: usize,
    lr: f64,
    anchor: Option<(&[f64], &FisherDiag, f64)>,
) -> Result<Vec<f64>, EwcError> {
    let mut theta = start.to_vec();
    for _ in 0..epochs {
        let (_, mut g) = model.loss_and_grad(&theta, data);
        if let Some((star, f, lambda)) = anchor {
            for (gi, pi) in g.iter_mut().zip(ewc_penalty_grad(&theta, star, f, lambda)?) {
                *gi += pi;
            }
        }
        for (t, gi) in theta.iter_mut().zip(&g) {
            *t -= lr * gi;
        }
    }
    Ok(theta)
}

#[allow(clippy::too_many_arguments)]
fn train_adapter(
    model: &ToyMlp,
    base: &[f64],
    mut adapter: LoraAdapter,
    fisher: &FisherDiag,
    lambda: f64,
    data: &[Sample],
    epochs: usize,
    lr: f64,
) -> Result<LoraAdapter, EwcError> {
    for _ in 0..epochs {
        let out = regularized_loss_and_grad(model, base, &adapter, fisher, lambda, data)?;
        adapter.b = adapter.b.add(&out.grad_b.scaled(-lr))?;
        adapter.a = adapter.a.add(&out.grad_a.scaled(-lr))?;
    }
    Ok(adapter)
}

/// Runs all four regimes from the same task-U parameters.
pub fn toy_continual_demo(seed: u64, cfg: &DemoConfig) -> Result<DemoReport, EwcError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let model = ToyMlp::new(cfg.inputs, cfg.hidden, cfg.classes);
    let (cu, cv) = task_centers(cfg);
    let u_train = gaussian_clusters(&cu, cfg.per_class, cfg.cluster_std, &mut rng);
    let u_test = gaussian_clusters(&cu, cfg.per_class, cfg.cluster_std, &mut rng);
    let v_train = gaussian_clusters(&cv, cfg.per_class, cfg.cluster_std, &mut rng);
    let v_test = gaussian_clusters(&cv, cfg.per_class, cfg.cluster_std, &mut rng);

    let init = model.init(&mut rng);
    let star = train_full(&model, &init, &u_train, cfg.pretrain_epochs, cfg.learning_rate, None)?;
    let n = if cfg.fisher_samples == 0 { u_train.len() } else { cfg.fisher_samples };
    let fisher = fisher_diag(&model, &star, &u_train, n)?;
    let fisher_w1 = fisher.restrict(model.w1_range())?;
    let before = model.loss(&star, &u_test);
    let adapter0 = LoraAdapter::init(cfg.hidden, cfg.inputs, cfg.rank, cfg.coefficient, &mut rng)?;

    let mut results = Vec::new();
    for regime in Regime::ALL {
        let theta = match regime {
            Regime::FullFinetune => train_full(&model, &star, &v_train, cfg.finetune_epochs, cfg.learning_rate, None)?,
            Regime::Ewc => train_full(
                &model,
                &star,
                &v_train,
                cfg.finetune_epochs,
                cfg.learning_rate,
                Some((&star, &fisher, cfg.lambda_full)),
            )?,
            Regime::AdapterOnly | Regime::EwcAdapter => {
                let lambda = if regime == Regime::EwcAdapter { cfg.lambda_adapter } else { 0.0 };
                let trained = train_adapter(
                    &model,
                    &star,
                    adapter0.clone(),
                    &fisher_w1,
                    lambda,
                    &v_train,
                    cfg.finetune_epochs,
                    cfg.adapter_learning_rate,
                )?;
                model.with_w1_delta(&star, &trained.delta())?
            }
        };
        results.push(RegimeResult {
            regime,
            task_u_loss_before: before,
            task_u_loss_after: model.loss(&theta, &u_test),
            task_v_accuracy: model.accuracy(&theta, &v_test),
            displacement: distance(&theta, &star),
        });
    }
    // Sanity: the penalty is zero at the anchor.
    debug_assert_eq!(ewc_penalty(&star, &star, &fisher, cfg.lambda_full)?, 0.0);
    Ok(DemoReport { seed, config: cfg.clone(), task_u_accuracy_before: model.accuracy(&star, &u_test), results })
}

/// Distance an adapter moves `W1` when trained on task V with penalty
/// strength `lambda`; used to show large penalties pin the weights.
pub fn adapter_displacement(seed: u64, cfg: &DemoConfig, lambda: f64) -> Result<f64, EwcError> {
    let cfg = DemoConfig { lambda_adapter: lambda, ..cfg.clone() };
    let report = toy_continual_demo(seed, &cfg)?;
    Ok(report.get(Regime::EwcAdapter).displacement)
}
