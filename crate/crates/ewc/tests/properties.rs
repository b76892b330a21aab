use ewc_lora::gradcheck::{check_objective, check_regularized};
use ewc_lora::mlp::gaussian_clusters;
use ewc_lora::*;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// L(θ) = (θ − 1)² for every sample.
struct Parabola;

impl Objective for Parabola {
    type Sample = ();

    fn n_params(&self) -> usize {
        1
    }

    fn loss_and_grad(&self, theta: &[f64], _: &[()]) -> (f64, Vec<f64>) {
        ((theta[0] - 1.0).powi(2), vec![2.0 * (theta[0] - 1.0)])
    }
}

fn random_adapter(r: usize, d: usize, k: usize, rng: &mut impl Rng) -> LoraAdapter {
    LoraAdapter::new(
        DenseMatrix::random_normal(r, k, 0.5, rng),
        DenseMatrix::random_normal(k, d, 0.5, rng),
        32.0 / k as f64,
    )
    .unwrap()
}

fn random_fisher(len: usize, rng: &mut impl Rng) -> FisherDiag {
    FisherDiag::new((0..len).map(|_| rng.gen_range(0.0..3.0)).collect(), 1).unwrap()
}

#[test]
fn parabola_fisher() {
    let f = fisher_diag(&Parabola, &[0.0], &[()], 1).unwrap();
    assert_eq!(f.values(), &[4.0]);
    let flat = fisher_diag(&Parabola, &[1.0], &[(), ()], 2).unwrap();
    assert_eq!(flat.values(), &[0.0]);
    assert_eq!(fisher_diag(&Parabola, &[0.0], &[()], 0), Err(EwcError::NoSamples));
    assert!(fisher_diag(&Parabola, &[0.0], &[()], 2).is_err());
}

#[test]
fn lora_penalty_matches_reparameterized_ewc_4x6() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let w_star = DenseMatrix::random_normal(4, 6, 1.0, &mut rng);
    let ad = random_adapter(4, 6, 2, &mut rng);
    let f = random_fisher(24, &mut rng);
    for lambda in [0.0, 0.5, 2.0] {
        let w = w_star.add(&ad.delta()).unwrap();
        let direct = ewc_penalty(w.as_slice(), w_star.as_slice(), &f, lambda).unwrap();
        let lora = ewc_lora_penalty(&ad, &f, lambda).unwrap();
        assert!((lora - direct).abs() <= 1e-12 * direct.abs().max(1.0), "{lora} vs {direct}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn lora_penalty_equivalence(r in 1usize..=16, d in 1usize..=16, k in 1usize..=4, li in 0usize..3, seed: u64) {
        let k = k.min(r).min(d);
        let lambda = [0.0, 0.5, 2.0][li];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w_star = DenseMatrix::random_normal(r, d, 1.0, &mut rng);
        let ad = random_adapter(r, d, k, &mut rng);
        let f = random_fisher(r * d, &mut rng);
        let w = w_star.add(&ad.delta()).unwrap();
        let direct = ewc_penalty(w.as_slice(), w_star.as_slice(), &f, lambda).unwrap();
        let lora = ewc_lora_penalty(&ad, &f, lambda).unwrap();
        prop_assert!((lora - direct).abs() / (1.0 + lora.abs()) <= 1e-12);
    }

    #[test]
    fn fisher_is_order_invariant(seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = ToyMlp::new(4, 5, 3);
        let theta = model.init(&mut rng);
        let centers = vec![vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 0.0]];
        let mut data = gaussian_clusters(&centers, 5, 0.5, &mut rng);
        let f1 = fisher_diag(&model, &theta, &data, data.len()).unwrap();
        data.shuffle(&mut rng);
        let f2 = fisher_diag(&model, &theta, &data, data.len()).unwrap();
        prop_assert_eq!(f1.values(), f2.values());
        prop_assert!(f1.values().iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn penalty_nonnegative_and_zero_at_anchor(v in prop::collection::vec(-5.0f64..5.0, 1..20), lambda in 0.0f64..4.0) {
        let f = FisherDiag::new(v.iter().map(|x| x.abs()).collect(), 1).unwrap();
        let star: Vec<f64> = v.iter().map(|x| x * 0.5).collect();
        prop_assert!(ewc_penalty(&v, &star, &f, lambda).unwrap() >= 0.0);
        prop_assert_eq!(ewc_penalty(&v, &v, &f, lambda).unwrap(), 0.0);
    }
}

fn setup(seed: u64) -> (ToyMlp, Vec<f64>, Vec<Sample>, FisherDiag, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let model = ToyMlp::new(5, 7, 3);
    let base = model.init(&mut rng);
    let centers: Vec<Vec<f64>> = (0..3).map(|c| (0..5).map(|i| if i == c { 1.5 } else { 0.0 }).collect()).collect();
    let data = gaussian_clusters(&centers, 4, 0.5, &mut rng);
    let fisher = fisher_diag(&model, &base, &data, data.len()).unwrap().restrict(model.w1_range()).unwrap();
    (model, base, data, fisher, rng)
}

#[test]
fn mlp_gradient_matches_finite_differences() {
    let (model, base, data, _, mut rng) = setup(5);
    let report = check_objective(&model, &base, &data, 120, 1e-6, &mut rng);
    let worst = report.failures().next();
    assert!(report.passed(), "max {:.2e}, first failure {worst:?}", report.max_rel_error());
}

#[test]
fn regularized_gradients_match_finite_differences() {
    for (seed, lambda) in [(1, 0.0), (2, 0.5), (3, 2.0)] {
        let (model, base, data, fisher, mut rng) = setup(seed);
        let mut ad = random_adapter(7, 5, 2, &mut rng);
        ad.scaling = 4.0;
        let report = check_regularized(&model, &base, &ad, &fisher, lambda, &data, 60, 1e-5, &mut rng).unwrap();
        assert!(report.passed(), "lambda {lambda}: {:?}", report.failures().collect::<Vec<_>>());
    }
}

#[test]
fn small_step_decreases_objective() {
    let (model, base, data, fisher, mut rng) = setup(8);
    let ad = random_adapter(7, 5, 2, &mut rng);
    let out = regularized_loss_and_grad(&model, &base, &ad, &fisher, 2.0, &data).unwrap();
    let mut next = ad.clone();
    next.b = ad.b.add(&out.grad_b.scaled(-1e-4)).unwrap();
    next.a = ad.a.add(&out.grad_a.scaled(-1e-4)).unwrap();
    let after = regularized_loss_and_grad(&model, &base, &next, &fisher, 2.0, &data).unwrap();
    assert!(after.loss < out.loss, "{} !< {}", after.loss, out.loss);
}

#[test]
fn frozen_base_receives_no_update() {
    let (model, base, data, fisher, mut rng) = setup(9);
    let ad = random_adapter(7, 5, 2, &mut rng);
    let theta = model.with_w1_delta(&base, &ad.delta()).unwrap();
    let w1 = model.w1_range();
    assert_eq!(theta[w1.end..], base[w1.end..]);
    let out = regularized_loss_and_grad(&model, &base, &ad, &fisher, 0.5, &data).unwrap();
    assert_eq!(out.grad_b.shape(), (7, 2));
    assert_eq!(out.grad_a.shape(), (2, 5));
}

#[test]
fn demo_is_deterministic_and_ordered() {
    let cfg = DemoConfig::default();
    let a = toy_continual_demo(0, &cfg).unwrap();
    assert_eq!(a, toy_continual_demo(0, &cfg).unwrap());
    let (f, ad, e) = (a.get(Regime::FullFinetune), a.get(Regime::AdapterOnly), a.get(Regime::EwcAdapter));
    assert!(e.degradation() <= ad.degradation() && ad.degradation() <= f.degradation(), "{a}");
    assert!((e.task_v_accuracy - ad.task_v_accuracy).abs() <= 0.05, "{a}");
    let worst = Regime::ALL.iter().map(|r| a.get(*r).degradation()).fold(f64::MIN, f64::max);
    assert_eq!(worst, f.degradation());
    assert!(a.to_string().contains("ewc_adapter"));
}

#[test]
fn large_lambda_pins_adapter() {
    let cfg = DemoConfig { finetune_epochs: 100, ..Default::default() };
    let moved: Vec<f64> = [0.0, 2.0, 500.0].iter().map(|l| demo::adapter_displacement(1, &cfg, *l).unwrap()).collect();
    assert!(moved[0] > moved[1] && moved[1] > moved[2], "{moved:?}");
    assert!(moved[2] < 0.25 * moved[0], "{moved:?}");
}

#[test]
fn config_validation() {
    assert!(DemoConfig { rank: 0, ..Default::default() }.validate().is_err());
    assert!(DemoConfig { lambda_adapter: -1.0, ..Default::default() }.validate().is_err());
    assert!(DemoConfig { inputs: 4, ..Default::default() }.validate().is_err());
}
