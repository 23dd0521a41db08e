use fairsample::oracle::{normal_cdf, population_loss_linear};
use fairsample::rng::stream_rng;
use fairsample::{AttributeId, FinitePoolSpec, GaussianModelSpec, LinearClassifier, Oracle};
use proptest::prelude::*;

fn mean() -> impl Strategy<Value = [f64; 2]> {
    [-3.0..3.0f64, -3.0..3.0f64]
}

fn spec() -> impl Strategy<Value = GaussianModelSpec> {
    (mean(), mean(), mean(), mean())
        .prop_map(|(a, b, c, d)| GaussianModelSpec::new(vec![[a, b], [c, d]]).unwrap())
}

fn classifier() -> impl Strategy<Value = LinearClassifier> {
    ([-2.0..2.0f64, -2.0..2.0f64], -2.0..2.0f64)
        .prop_filter("non-degenerate", |(w, _)| w[0].abs() + w[1].abs() > 1e-3)
        .prop_map(|(w, b)| LinearClassifier::new(w.to_vec(), b).unwrap())
}

proptest! {
    #[test]
    fn loss_is_scale_invariant(spec in spec(), f in classifier(), c in 0.01..100.0f64, z in 0..2usize) {
        let scaled = LinearClassifier::new(f.w.iter().map(|w| w * c).collect(), f.b * c).unwrap();
        let a = population_loss_linear(&spec, &f, AttributeId(z)).unwrap();
        let b = population_loss_linear(&spec, &scaled, AttributeId(z)).unwrap();
        prop_assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn flipping_the_classifier_complements_the_loss(spec in spec(), f in classifier(), z in 0..2usize) {
        let neg = LinearClassifier::new(f.w.iter().map(|w| -w).collect(), -f.b).unwrap();
        let a = population_loss_linear(&spec, &f, AttributeId(z)).unwrap();
        let b = population_loss_linear(&spec, &neg, AttributeId(z)).unwrap();
        prop_assert!((a + b - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn closed_form_matches_monte_carlo(spec in spec(), f in classifier(), z in 0..2usize, seed in any::<u64>()) {
        let draws = 20_000;
        let mut rng = stream_rng(seed, 0);
        let p = population_loss_linear(&spec, &f, AttributeId(z)).unwrap();
        let wrong = (0..draws)
            .filter(|_| {
                let s = spec.draw(AttributeId(z), &mut rng).unwrap();
                f.predict(&s.x) != s.y
            })
            .count();
        let se = (p * (1.0 - p) / draws as f64).sqrt().max(1e-9);
        // 5 standard errors keeps the per-case false alarm rate below 1e-6
        prop_assert!((wrong as f64 / draws as f64 - p).abs() <= 5.0 * se);
    }
}

#[test]
fn symmetric_means_give_one_half() {
    let spec = GaussianModelSpec::instance1();
    let f = LinearClassifier::new(vec![1.0, 1.0], 0.0).unwrap();
    assert_eq!(
        population_loss_linear(&spec, &f, AttributeId(0)).unwrap(),
        0.5
    );
}

#[test]
fn closed_form_example_against_monte_carlo() {
    let spec = GaussianModelSpec::instance1();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let f = LinearClassifier::new(vec![h, h], 0.0).unwrap();
    let mut rng = stream_rng(11, 0);
    for (z, expected) in [(1usize, normal_cdf(-std::f64::consts::SQRT_2)), (0, 0.5)] {
        let p = population_loss_linear(&spec, &f, AttributeId(z)).unwrap();
        assert!((p - expected).abs() < 1e-15);
        let draws = 1_000_000;
        let wrong = (0..draws)
            .filter(|_| {
                let s = spec.draw(AttributeId(z), &mut rng).unwrap();
                f.predict(&s.x) != s.y
            })
            .count();
        let se = (p * (1.0 - p) / draws as f64).sqrt();
        assert!((wrong as f64 / draws as f64 - p).abs() <= 3.0 * se);
    }
}

#[test]
fn class_conditional_mean_converges() {
    let spec = GaussianModelSpec::instance1();
    let mut rng = stream_rng(12, 0);
    let mut sum = [0.0; 2];
    let mut n = 0;
    while n < 100_000 {
        let s = spec.draw(AttributeId(1), &mut rng).unwrap();
        if s.y == 1 {
            sum[0] += s.x[0];
            sum[1] += s.x[1];
            n += 1;
        }
    }
    for v in sum {
        assert!((v / n as f64 - 1.0).abs() < 0.02);
    }
}

#[test]
fn draws_are_reproducible() {
    for oracle in [
        Oracle::preset("instance2", 1.0, 1.5).unwrap(),
        Oracle::Pool(
            FinitePoolSpec::from_csv_reader(
                "x0,x1,x2,y,z\n1,2,3,0,0\n4,5,6,1,0\n7,8,9,1,1\n0,0,1,0,1\n".as_bytes(),
            )
            .unwrap(),
        ),
    ] {
        let a = oracle
            .draw_many(AttributeId(1), 500, &mut stream_rng(3, 7))
            .unwrap();
        let b = oracle
            .draw_many(AttributeId(1), 500, &mut stream_rng(3, 7))
            .unwrap();
        assert_eq!(a, b);
        assert!(a
            .iter()
            .all(|s| s.z == AttributeId(1) && s.dim() == oracle.dim()));
    }
}

#[test]
fn pool_draws_are_uniform_with_replacement() {
    let pool =
        FinitePoolSpec::from_csv_reader("x0,y,z\n0,0,0\n1,1,0\n2,0,0\n3,1,0\n9,1,1\n".as_bytes())
            .unwrap();
    let mut rng = stream_rng(4, 0);
    let mut seen = [0usize; 4];
    for _ in 0..40_000 {
        let s = pool.draw(AttributeId(0), &mut rng).unwrap();
        seen[s.x[0] as usize] += 1;
    }
    for c in seen {
        assert!((c as f64 - 10_000.0).abs() < 400.0, "{seen:?}");
    }
}

#[test]
fn pool_loss_uses_the_held_out_set() {
    let train = FinitePoolSpec::from_csv_reader("x0,y,z\n1,1,0\n-1,0,1\n".as_bytes()).unwrap();
    let test =
        FinitePoolSpec::from_csv_reader("x0,y,z\n-1,1,0\n1,1,0\n-1,0,1\n".as_bytes()).unwrap();
    let held_out = (0..2).map(|z| test.pool(AttributeId(z)).to_vec()).collect();
    let oracle = Oracle::Pool(train.with_test(held_out).unwrap());
    let f = LinearClassifier::new(vec![1.0], 0.0).unwrap();
    assert_eq!(oracle.population_losses(&f).unwrap(), vec![0.5, 0.0]);
    assert_eq!(oracle.min_accuracy(&f).unwrap(), 0.5);
}

#[test]
fn missing_pool_file_is_an_io_error() {
    assert!(FinitePoolSpec::from_csv_path(std::path::Path::new("/nonexistent/pool.csv")).is_err());
}
