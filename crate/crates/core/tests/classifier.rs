use fairsample::classifier::{
    accuracy, empirical_loss, logistic_gradient, logistic_objective, train_erm,
    train_erm_with_report,
};
use fairsample::eval::grid_optimal_mixture;
use fairsample::rng::stream_rng;
use fairsample::{
    AttributeId, LabeledSample, LinearClassifier, LossKind, Mixture, Oracle, Solver, TrainConfig,
};
use proptest::prelude::*;

fn dataset(max_dim: usize) -> impl Strategy<Value = Vec<LabeledSample>> {
    (1..=max_dim).prop_flat_map(|d| {
        prop::collection::vec((prop::collection::vec(-4.0..4.0f64, d), 0..2u8), 2..60).prop_map(
            |rows| {
                rows.into_iter()
                    .map(|(x, y)| LabeledSample::new(x, y, AttributeId(0)).unwrap())
                    .collect()
            },
        )
    })
}

fn params_for(data: &[LabeledSample]) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, data[0].dim() + 1)
}

proptest! {
    #[test]
    fn gradient_matches_central_differences(
        (data, p) in dataset(5).prop_flat_map(|d| { let s = params_for(&d); (Just(d), s) }),
        l2 in 0.0..0.5f64,
    ) {
        let h = 1e-5;
        let f = LinearClassifier::from_params(&p);
        let g = logistic_gradient(&f, &data, l2).unwrap();
        let fd: Vec<f64> = (0..p.len())
            .map(|i| {
                let (mut up, mut dn) = (p.clone(), p.clone());
                up[i] += h;
                dn[i] -= h;
                let a = logistic_objective(&LinearClassifier::from_params(&up), &data, l2).unwrap();
                let b = logistic_objective(&LinearClassifier::from_params(&dn), &data, l2).unwrap();
                (a - b) / (2.0 * h)
            })
            .collect();
        let diff = g.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let norm = g.iter().map(|a| a * a).sum::<f64>().sqrt();
        prop_assert!(diff <= 1e-5 * norm.max(1e-3), "{diff} vs {norm}");
    }

    #[test]
    fn zero_one_loss_and_accuracy_sum_to_one(
        (data, p) in dataset(3).prop_flat_map(|d| { let s = params_for(&d); (Just(d), s) }),
    ) {
        let f = LinearClassifier::from_params(&p);
        let l = empirical_loss(&f, &data, LossKind::ZeroOne).unwrap();
        let a = accuracy(&f, &data).unwrap();
        prop_assert_eq!(l + a, 1.0);
    }

    #[test]
    fn warm_and_cold_starts_agree(data in dataset(3), seed in any::<u64>()) {
        let cfg = TrainConfig { l2: 1e-2, ..TrainConfig::default() };
        let cold = train_erm(&data, &cfg, None).unwrap();
        let mut rng = stream_rng(seed, 0);
        use rand::Rng;
        let init: Vec<f64> = (0..=data[0].dim()).map(|_| rng.random_range(-3.0..3.0)).collect();
        let warm = train_erm(&data, &cfg, Some(&LinearClassifier::from_params(&init))).unwrap();
        let a = logistic_objective(&cold, &data, cfg.l2).unwrap();
        let b = logistic_objective(&warm, &data, cfg.l2).unwrap();
        prop_assert!((a - b).abs() <= 1e-4);
    }
}

fn synthetic(n: usize, seed: u64) -> Vec<LabeledSample> {
    let oracle = Oracle::preset("instance1", 1.0, 1.5).unwrap();
    let mut rng = stream_rng(seed, 0);
    (0..n)
        .map(|i| oracle.draw(AttributeId(i % 2), &mut rng).unwrap())
        .collect()
}

#[test]
fn gradient_descent_objective_never_increases() {
    let data = synthetic(400, 1);
    let cfg = TrainConfig {
        solver: Solver::GradientDescent,
        ..TrainConfig::default()
    };
    let report = train_erm_with_report(&data, &cfg, None).unwrap();
    assert!(report.objective_trace.len() > 2);
    for w in report.objective_trace.windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "{} -> {}", w[0], w[1]);
    }
}

#[test]
fn newton_and_gradient_descent_reach_the_same_minimum() {
    let data = synthetic(400, 2);
    let newton = train_erm(&data, &TrainConfig::default(), None).unwrap();
    let gd_cfg = TrainConfig {
        solver: Solver::GradientDescent,
        max_epochs: 20_000,
        learning_rate: 0.5,
        ..TrainConfig::default()
    };
    let gd = train_erm(&data, &gd_cfg, None).unwrap();
    let a = logistic_objective(&newton, &data, 1e-4).unwrap();
    let b = logistic_objective(&gd, &data, 1e-4).unwrap();
    assert!((a - b).abs() < 1e-6, "{a} vs {b}");
}

#[test]
fn newton_stops_at_the_tolerance() {
    let data = synthetic(1000, 3);
    let report = train_erm_with_report(&data, &TrainConfig::default(), None).unwrap();
    assert!(report.grad_norm <= 1e-6);
    assert!(report.iterations < 50);
}

#[test]
fn fixed_mixture_training_reaches_the_sweep_peak() {
    let oracle = Oracle::preset("instance1", 1.0, 1.5).unwrap();
    let cfg = TrainConfig::default();
    let sweep = grid_optimal_mixture(&oracle, 101, 20_000, &cfg, 8).unwrap();
    let peak = 1.0 - sweep.optimal_value();
    let counts = Mixture::new(vec![0.23, 0.77]).unwrap().apportion(4000);
    let mut rng = stream_rng(9, 0);
    let mut data = oracle
        .draw_many(AttributeId(0), counts[0], &mut rng)
        .unwrap();
    data.extend(
        oracle
            .draw_many(AttributeId(1), counts[1], &mut rng)
            .unwrap(),
    );
    let f = train_erm(&data, &cfg, None).unwrap();
    let acc = oracle.min_accuracy(&f).unwrap();
    assert!((acc - peak).abs() <= 0.02, "{acc} vs {peak}");
}
